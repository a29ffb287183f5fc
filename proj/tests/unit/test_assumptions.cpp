#include "helpers.hpp"

#include "hypoco/assumptions.hpp"
#include "hypoco/error.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace hypoco;
using namespace hypoco::testing;

namespace {

// The five table rows of the RD summary.
const std::vector<std::string> kTableRows = {"K3", "K4.i", "K4.iii", "K7", "K9"};

std::set<std::string> failing_table_rows(const ModelSpec& s) {
    const auto r = check(s, RouteChoice::K7);
    std::set<std::string> out;
    for (const auto& name : kTableRows)
        if (!r.passed(name)) out.insert(name);
    return out;
}

ModelSpec with_potential(ModelSpec s, double sup) {
    set_potential(s, Expr::affine(sup, 0.0, Expr::unary(Op::logcosh, Expr::variable(0))), 0.0, sup);
    return s;
}

} // namespace

TEST_CASE("RD certified tuple passes the table rows") {
    const ModelSpec s = with_potential(rd_spec(1.5, 1.2, 1.2, 1.8), 2.0);
    const auto r = check(s);
    for (const auto& name : kTableRows) CHECK_MESSAGE(r.passed(name), name);
    CHECK(r.passed("K4.ii"));
    CHECK(r.passed("K5"));
    CHECK(r.ess_m_diss);
    CHECK(r.weak_solution);
    CHECK(r.route == Route::K7);
    // hand-evaluated margins
    CHECK(r.at("K3").margin.value() == doctest::Approx(0.6));
    CHECK(r.at("K4.iii").margin.value() == doctest::Approx(0.1));
    CHECK(r.at("K4.i").margin.value() == doctest::Approx(1.05 - 0.5));
    CHECK(r.at("K9").margin.value() == doctest::Approx(0.3));
}

TEST_CASE("sigma2 - alpha2 = 1/2 exactly fails the strict K4 row") {
    const auto r = check(rd_spec(1.5, 1.3, 1.2, 1.8));
    CHECK(r.at("K4.iii").verdict == Verdict::fail);
    CHECK(r.at("K4.iii").margin.value() <= 0.0);
    CHECK_FALSE(r.weak_solution);
}

TEST_CASE("negative sigma1 is a validation error") {
    CHECK_THROWS_AS(check(rd_spec(1.5, 1.2, -0.2, 1.8)), ValidationError);
}

TEST_CASE("single-parameter perturbations flip their table row") {
    const ModelSpec base = rd_spec(1.5, 1.2, 1.2, 1.8);
    REQUIRE(failing_table_rows(base).empty());
    struct Case {
        std::string row;
        double a1, a2, s1, s2;
        std::set<std::string> expected;
    };
    const std::vector<Case> cases = {
        {"K3", 1.5, 1.2, 0.85, 1.8, {"K3"}},
        {"K4.i", 2.7, 1.2, 1.2, 1.8, {"K4.i"}},
        // σ2 − α2 > 1/2 can only move through σ2 or α2, both of which also break σ2 = 3α2/2
        {"K4.iii", 1.5, 1.2, 1.2, 1.7, {"K4.iii", "K7"}},
        {"K7", 1.5, 1.2, 1.2, 1.85, {"K7"}},
        {"K9", 1.5, 1.2, 1.4, 1.8, {"K9"}},
    };
    for (const auto& c : cases) {
        CAPTURE(c.row);
        CHECK(failing_table_rows(rd_spec(c.a1, c.a2, c.s1, c.s2)) == c.expected);
    }
}

TEST_CASE("K3 margin is monotone in sigma1") {
    for (double s2 : {0.8, 1.8, 2.6}) {
        bool passed = false;
        for (double s1 = 0.0; s1 <= 2.0; s1 += 0.05) {
            const bool now = check(rd_spec(1.5, 1.2, s1, s2)).passed("K3");
            if (passed) CHECK(now);
            passed = passed || now;
        }
    }
}

TEST_CASE("route choice and exclusivity") {
    for (double s1 : {0.6, 0.9, 1.2, 1.4})
        for (double s2 : {1.0, 1.5, 1.8})
            for (RouteChoice rc : {RouteChoice::automatic, RouteChoice::K7, RouteChoice::K7_star}) {
                const auto r = check(rd_spec(1.5, 1.2, s1, s2), rc);
                if (r.route == Route::K7) CHECK(r.passed("K7"));
                if (r.route == Route::K7_star) CHECK(r.passed("K7*"));
                if (rc == RouteChoice::K7) CHECK(r.route != Route::K7_star);
                if (rc == RouteChoice::K7_star) CHECK(r.route != Route::K7);
            }
    // both routes available with Φ = 0: auto prefers K7*
    const auto both = check(rd_spec(1.5, 1.2, 1.2, 1.8));
    REQUIRE(both.passed("K7"));
    REQUIRE(both.passed("K7*"));
    CHECK(both.route == Route::K7_star);
}

TEST_CASE("report invariants") {
    for (double a2 : {0.8, 1.0, 1.2})
        for (double s1 : {0.3, 0.6, 1.2})
            for (double s2 : {0.7, 1.0, 1.8}) {
                const auto r = check(rd_spec(1.5, a2, s1, s2, 1.0, 0.0));
                for (const auto& e : r.entries) {
                    if (e.verdict == Verdict::pass && e.margin && e.strict) CHECK(*e.margin > 0.0);
                    if (e.verdict == Verdict::pass && e.margin && !e.strict) CHECK(*e.margin >= 0.0);
                    if (e.verdict == Verdict::fail && e.margin && e.strict) CHECK(*e.margin <= 0.0);
                }
                if (r.hypocoercive)
                    for (const char* n : {"K1", "K2", "K3", "K6", "K8", "K9", "Phi1", "Phi2"}) CHECK(r.passed(n));
                if (r.weak_solution)
                    for (const char* n : {"K1", "K2", "K3", "K4.i", "K4.ii", "K4.iii", "K5"}) CHECK(r.passed(n));
                if (r.hypocoercive) CHECK(r.route != Route::none);
            }
}

TEST_CASE("K8 is certified when sigma2 <= alpha2") {
    const auto r = check(linear_spec());
    CHECK(r.passed("K8"));
    CHECK(r.passed("K7*"));
    CHECK(r.route == Route::K7_star);
    CHECK(r.hypocoercive);
}

TEST_CASE("summary table rendering") {
    const auto r = check(rd_spec(1.5, 1.2, 1.2, 1.8));
    const std::string t = summary_table(r);
    CHECK(r.at("K2").detail.find("variable part absent") != std::string::npos);
    std::size_t rows = 0, pos = 0;
    for (const char* n : {"K1", "K2", "K3", "K4.i", "K4.ii", "K4.iii", "K5", "K6", "K7", "K7*", "K8", "K9",
                          "Phi_alpha", "Phi1", "Phi2"}) {
        const auto p = t.find(std::string("\n") + n + " ", pos);
        CHECK_MESSAGE(p != std::string::npos, n);
        if (p != std::string::npos) pos = p + 1;
        ++rows;
    }
    CHECK(rows >= 12);
    const auto fail = check(with_potential(rd_spec(1.5, 1.2, 1.2, 1.8), 2.0));
    CHECK(fail.route == Route::K7);
    CHECK_FALSE(fail.hypocoercive);
    const std::string ft = summary_table(fail);
    CHECK(ft.find("route: K7") != std::string::npos);
    CHECK(ft.find("hypocoercive: false (failing: K8)") != std::string::npos);

    const auto j = r.to_json();
    CHECK(j.contains("entries"));
    CHECK(j["entries"].size() == 15);
    CHECK(j["route"] == "K7*");
}

TEST_CASE("potential without a derivative bound is not certified") {
    ModelSpec s = rd_spec(1.5, 1.2, 1.2, 1.8);
    set_potential(s, Expr::unary(Op::square, Expr::variable(0)), 0.0, std::nullopt);
    const auto r = check(s);
    CHECK(r.at("Phi1").verdict == Verdict::not_checkable);
    CHECK_FALSE(r.hypocoercive);
}

TEST_CASE("Cahn-Hilliard rows") {
    ModelSpec s = rd_spec(1.0, 0.6, 1.0, 0.9);
    s.family = EigenFamily::bilaplacian();
    s.example_kind = ExampleKind::cahn_hilliard;
    const auto r = check(s);
    CHECK(r.threshold == 0.25);
    CHECK(r.passed("K3"));
    // α1 ≤ 3/4 loses the Φ1 bound on the CH family with a non-trivial potential
    ModelSpec low = s;
    low.alpha1 = 0.7;
    set_potential(low, Expr::affine(0.1, 0.0, Expr::unary(Op::logcosh, Expr::variable(0))), 0.0, 0.1);
    CHECK(check(low, RouteChoice::K7_star).at("Phi1").verdict != Verdict::pass);
}

TEST_CASE("custom families are finite") {
    ModelSpec s = rd_spec(1.5, 1.2, 1.2, 1.8);
    s.family = EigenFamily::custom({0.5, 0.2, 0.1});
    s.example_kind = ExampleKind::custom;
    const auto r = check(s);
    for (const char* n : {"K4.i", "K4.ii", "K4.iii", "K5", "K8", "K9"}) CHECK_MESSAGE(r.passed(n), n);
    CHECK(r.at("K8").detail.find("finite family") != std::string::npos);
}
