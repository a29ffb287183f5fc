#include "hypoco/assumptions.hpp"

#include "hypoco/error.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace hypoco {

namespace {

const char* kRowOrder[] = {"K1", "K2", "K3", "K4.i", "K4.ii", "K4.iii", "K5", "K6",
                           "K7", "K7*", "K8", "K9", "Phi_alpha", "Phi1", "Phi2"};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

AssumptionEntry inequality(std::string name, double margin, bool strict, std::string detail) {
    AssumptionEntry e;
    e.name = std::move(name);
    e.margin = margin;
    e.strict = strict;
    e.verdict = (strict ? margin > 0.0 : margin >= 0.0) ? Verdict::pass : Verdict::fail;
    e.detail = std::move(detail) + (strict ? " (strict)" : " (non-strict)");
    return e;
}

AssumptionEntry plain(std::string name, Verdict v, std::string detail) {
    AssumptionEntry e;
    e.name = std::move(name);
    e.verdict = v;
    e.detail = std::move(detail);
    return e;
}

bool finite_family(const ModelSpec& s) { return s.family.kind == FamilyKind::custom; }

// φ' nondecreasing on a grid.
bool phi_convex_on_grid(const Expr& phi) {
    double prev = -INFINITY;
    for (int i = 0; i <= 4000; ++i) {
        const double d = phi.eval1(-100.0 + 200.0 * i / 4000.0).d1;
        if (d < prev - 1e-12) return false;
        prev = d;
    }
    return true;
}

AssumptionEntry phi1_k7(const ModelSpec& s) {
    const auto& p = s.potential;
    if (!p.derivative_bound())
        return plain("Phi1", Verdict::not_checkable, "route K7: no declared bound on sup|phi'|, DPhi not certified");
    const double cexp = 2.0 * s.sigma1 - s.alpha2;
    if (!finite_family(s) && cexp < 0.0)
        return inequality("Phi1", cexp, false, "route K7: C = Q^{2 sigma1 - alpha2} bounded needs 2 sigma1 - alpha2 >= 0");
    if (s.example_kind == ExampleKind::cahn_hilliard)
        return inequality("Phi1", s.alpha1 - 0.75, true, "route K7, Cahn-Hilliard: alpha1 > 3/4");
    auto e = plain("Phi1", Verdict::pass, "route K7: sup|phi'| = " + fmt(*p.derivative_bound()) + " finite, C bounded");
    return e;
}

AssumptionEntry phi1_k7_star(const ModelSpec& s) {
    if (s.potential.phi2) return plain("Phi1", Verdict::fail, "route K7*: requires Phi2 absent");
    const auto b = q1_half_dphi_bound(s);
    if (!b) return plain("Phi1", Verdict::not_checkable, "route K7*: no finite bound for ||Q1^{1/2} DPhi||");
    const double margin = 0.5 - *b;
    if (margin > 0.0)
        return inequality("Phi1", margin, true, "route K7*: ||Q1^{1/2} DPhi|| <= " + fmt(*b) + " < 1/2");
    auto e = plain("Phi1", Verdict::not_checkable,
                   "route K7*: conservative bound ||Q1^{1/2} DPhi|| <= " + fmt(*b) + " does not certify < 1/2");
    e.margin = margin;
    return e;
}

} // namespace

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_applicable: return "not_applicable";
    case Verdict::not_checkable: return "not_checkable";
    }
    return "?";
}

std::string to_string(Route r) {
    switch (r) {
    case Route::K7: return "K7";
    case Route::K7_star: return "K7*";
    case Route::none: return "none";
    }
    return "?";
}

RouteChoice route_choice_from_string(const std::string& s) {
    if (s == "auto") return RouteChoice::automatic;
    if (s == "K7") return RouteChoice::K7;
    if (s == "K7*" || s == "K7_star") return RouteChoice::K7_star;
    throw ValidationError("unknown route '" + s + "' (expected auto, K7, K7*)");
}

const AssumptionEntry& AssumptionReport::at(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw IndexError("no assumption row named '" + name + "'");
}

nlohmann::json AssumptionReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json r{{"name", e.name}, {"verdict", to_string(e.verdict)}, {"detail", e.detail}};
        r["margin"] = e.margin ? nlohmann::json(*e.margin) : nlohmann::json(nullptr);
        rows.push_back(r);
    }
    return {{"entries", rows},
            {"route", to_string(route)},
            {"ess_m_diss", ess_m_diss},
            {"weak_solution", weak_solution},
            {"hypocoercive", hypocoercive}};
}

std::optional<double> q1_half_dphi_bound(const ModelSpec& s) {
    const auto& p = s.potential;
    if (!p.derivative_bound()) return std::nullopt;
    const double sup = *p.derivative_bound();
    if (sup == 0.0) return 0.0;
    // |∂_kΦ1| ≤ sup|φ'|·sup|b_k| with sup|b_k| = √2 (RD) or √2 kπ = √2 λ_k^{-1/4} (CH).
    const double shift = s.example_kind == ExampleKind::cahn_hilliard ? -0.5 : 0.0;
    const double theta = s.alpha1 + shift;
    if (!series_converges(s.family, theta)) return std::nullopt;
    const double sum = tail_sum(s.family, theta, 0).hi;
    return std::numbers::sqrt2 * sup * std::sqrt(sum);
}

AssumptionReport check(const ModelSpec& s, RouteChoice choice) {
    s.validate();
    AssumptionReport r;
    const bool finite = finite_family(s);
    const double thr = finite ? 0.0 : s.family.convergence_threshold();
    r.threshold = thr;
    const double a1 = s.alpha1, a2 = s.alpha2, s1 = s.sigma1, s2 = s.sigma2;
    const bool has_variable = s.c_tilde > 0.0 && !s.modes.empty();

    std::vector<AssumptionEntry> rows;
    rows.push_back(inequality("K1", s.c, true, "uniform ellipticity floor c > 0, K22 >= c Q^{sigma2}"));

    if (!has_variable) {
        rows.push_back(plain("K2", Verdict::pass, "variable part absent"));
    } else {
        double m = 1.0;
        for (const auto& md : s.modes) m = std::min({m, md.beta, 1.0 - md.beta});
        rows.push_back(inequality("K2", m, true,
                                  "beta_k in (0,1) with validated derivative bounds; margin min(beta, 1-beta)"));
    }

    if (s.example_kind == ExampleKind::cahn_hilliard) {
        // Maximize min(2σ1−σ2−2t, t−3/8) over t = αα1.
        const double gap = 2.0 * s1 - s2;
        const double t = (gap + 0.375) / 3.0;
        const double margin = (gap - 0.75) / 3.0;
        rows.push_back(inequality("K3", margin, true,
                                  "sigma2 <= 2 sigma1 - 2 alpha alpha1 with alpha alpha1 > 3/8; best alpha = " +
                                      fmt(t / a1)));
    } else {
        rows.push_back(inequality("K3", 2.0 * s1 - s2, false, "sigma2 <= 2 sigma1 with alpha = 0"));
    }

    if (finite) {
        for (const char* n : {"K4.i", "K4.ii", "K4.iii", "K5"})
            rows.push_back(plain(n, Verdict::pass, "finite eigenvalue family, all series finite"));
    } else {
        const double k4i = std::min(-a1 / 2 + s1 + a2 / 2, a1 / 2 + s1 - a2 / 2) - thr;
        rows.push_back(inequality("K4.i", k4i, true, "+-alpha1/2 + sigma1 -+ alpha2/2 > " + fmt(thr)));
        rows.push_back(inequality("K4.ii", s2 - thr, true, "sigma2 > " + fmt(thr)));
        rows.push_back(inequality("K4.iii", s2 - a2 - thr, true, "sigma2 - alpha2 > " + fmt(thr)));
        rows.push_back(inequality("K5", s2 - thr, true, "tr K22(v) <= (c + c_tilde) sum lambda^{sigma2} (1+|v|^2) finite"));
    }

    rows.push_back(plain("K6", Verdict::pass, "diagonal K22 with mode-local dependence, invariant by construction"));

    {
        const double dev = std::abs(s2 - 1.5 * a2);
        const bool eq = dev <= 1e-12 * std::max(1.0, std::abs(s2));
        // Equality rows carry no signed margin; the deviation goes in the detail.
        auto e = plain("K7", eq ? Verdict::pass : Verdict::fail,
                       "sigma2 = 3/2 alpha2 (equality row), |sigma2 - 3/2 alpha2| = " + fmt(dev));
        e.strict = false;
        if (eq && has_variable && !finite && !series_converges(s.family, 2 * s2 - a2)) {
            e.verdict = Verdict::fail;
            e.detail += "; M22 series sum lambda^{2 sigma2 - alpha2} diverges";
        }
        rows.push_back(e);
    }
    {
        const double m = -a2 + s2 - s1 + a1 / 2;
        auto e = inequality("K7*", m, true, "-alpha2 + sigma2 - sigma1 + alpha1/2 > 0");
        if (e.passed() && has_variable && !finite) {
            const double ex2 = a1 / 2 - s1 + s2 - a2;
            if (ex2 < 0.0 || !series_converges(s.family, a1 - 2 * s1 + 2 * s2)) {
                e.verdict = Verdict::fail;
                e.detail += "; variable-part norms unbounded (C2 or M22 infinite)";
            }
        }
        rows.push_back(e);
    }

    if (finite) {
        rows.push_back(plain("K8", Verdict::pass, "finite family: omega22 = c min_k lambda_k^{sigma2-alpha2} > 0"));
        rows.push_back(plain("K9", Verdict::pass, "finite family: omega12 = min_k lambda_k^{2 sigma1-alpha2-alpha1} > 0"));
    } else {
        auto k8 = inequality("K8", a2 - s2, false, "c lambda_k^{sigma2} >= omega22 lambda_k^{alpha2} for all k needs sigma2 <= alpha2");
        if (!k8.passed()) k8.detail += "; omega22 = 0, c_S not certifiable through eigenvalue comparison";
        rows.push_back(k8);
        rows.push_back(inequality("K9", a1 - (2 * s1 - a2), false, "2 sigma1 - alpha2 <= alpha1"));
    }

    const auto& pot = s.potential;
    if (pot.derivative_bound())
        rows.push_back(plain("Phi_alpha", Verdict::pass,
                             "phi >= " + fmt(pot.phi_lower_bound) + ", sup|phi'| <= " + fmt(*pot.derivative_bound())));
    else
        rows.push_back(plain("Phi_alpha", Verdict::not_checkable,
                             "phi bounded below but no finite sup|phi'| declared; simulation only, not certified"));

    auto get = [&](const std::string& n) -> const AssumptionEntry& {
        for (const auto& e : rows)
            if (e.name == n) return e;
        throw IndexError(n);
    };

    const AssumptionEntry p7 = phi1_k7(s);
    const AssumptionEntry p7s = phi1_k7_star(s);
    const bool k7_ok = get("K7").passed() && p7.passed();
    const bool k7s_ok = get("K7*").passed() && p7s.passed();
    Route route = Route::none;
    if (choice == RouteChoice::K7_star) route = k7s_ok ? Route::K7_star : Route::none;
    else if (choice == RouteChoice::K7) route = k7_ok ? Route::K7 : Route::none;
    else route = k7s_ok ? Route::K7_star : (k7_ok ? Route::K7 : Route::none);

    if (route == Route::K7_star) rows.push_back(p7s);
    else if (route == Route::K7) rows.push_back(p7);
    else if (choice == RouteChoice::K7_star || (choice == RouteChoice::automatic && get("K7*").passed()))
        rows.push_back(p7s);
    else
        rows.push_back(p7);

    {
        std::string detail;
        Verdict v = Verdict::pass;
        if (!phi_convex_on_grid(pot.phi)) {
            v = Verdict::fail;
            detail = "phi not convex on the test grid (Phi1 must be convex)";
        } else {
            detail = "phi convex on test grid";
            detail += pot.phi2 ? "; Phi2 bounded, osc = " + fmt(pot.phi2->osc) + ", c_Phi2 = " + fmt(pot.phi2->c_phi2)
                               : "; Phi2 absent";
        }
        rows.push_back(plain("Phi2", v, detail));
    }

    // Stable order.
    for (const char* n : kRowOrder) r.entries.push_back(get(n));
    r.route = route;

    auto ok = [&](const char* n) { return r.passed(n); };
    r.ess_m_diss = ok("K1") && ok("K2") && ok("K3") && ok("Phi_alpha");
    r.weak_solution = ok("K1") && ok("K2") && ok("K3") && ok("K4.i") && ok("K4.ii") && ok("K4.iii") && ok("K5");
    r.hypocoercive = route != Route::none && ok("K1") && ok("K2") && ok("K3") && ok("K6") && ok("K8") && ok("K9") &&
                     ok("Phi1") && ok("Phi2");
    return r;
}

std::string summary_table(const AssumptionReport& report) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %-15s %-12s %s\n", "row", "verdict", "margin", "detail");
    out << line;
    for (const auto& e : report.entries) {
        std::snprintf(line, sizeof line, "%-10s %-15s %-12s ", e.name.c_str(), to_string(e.verdict).c_str(),
                      e.margin ? fmt(*e.margin).c_str() : "-");
        out << line << e.detail << '\n';
    }
    out << "route: " << to_string(report.route) << '\n';
    out << "ess_m_diss: " << (report.ess_m_diss ? "true" : "false") << '\n';
    out << "weak_solution: " << (report.weak_solution ? "true" : "false") << '\n';
    out << "hypocoercive: " << (report.hypocoercive ? "true" : "false");
    if (!report.hypocoercive) {
        std::string failing;
        for (const auto& e : report.entries) {
            static const char* needed[] = {"K1", "K2", "K3", "K6", "K8", "K9", "Phi1", "Phi2"};
            for (const char* n : needed)
                if (e.name == n && !e.passed()) failing += (failing.empty() ? "" : ", ") + e.name;
        }
        if (report.route == Route::none) failing += (failing.empty() ? "" : ", ") + std::string("route (K7/K7*)");
        out << " (failing: " << failing << ")";
    }
    out << '\n';
    return out.str();
}

} // namespace hypoco
