#include "hypoco/error.hpp"
#include "hypoco/expr.hpp"
#include "hypoco/galerkin.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hypoco;

namespace {

Expr sample_expr() {
    const Expr x0 = Expr::variable(0), x1 = Expr::variable(1), y0 = Expr::variable(2);
    const Expr a = Expr::unary(Op::tanh, Expr::affine(0.7, 0.1, x0) + Expr::affine(-0.4, 0.0, y0));
    const Expr b = Expr::unary(Op::sin, Expr::affine(1.3, -0.2, x1 * y0));
    const Expr c = Expr::unary(Op::logcosh, Expr::affine(0.5, 0.3, x0));
    const Expr d = Expr::unary(Op::softabs, x1) + Expr::unary(Op::square, Expr::unary(Op::cos, y0));
    return a * b + 2.0 * c + d;
}

double fd(const Expr& e, std::vector<double> z, int i, double h) {
    z[i] += h;
    const double up = e.value(z);
    z[i] -= 2 * h;
    const double dn = e.value(z);
    return (up - dn) / (2 * h);
}

} // namespace

TEST_CASE("atoms evaluate to their closed forms") {
    const std::vector<double> z = {0.3};
    const Expr v = Expr::variable(0);
    CHECK(Expr::unary(Op::sin, v).value(z) == doctest::Approx(std::sin(0.3)));
    CHECK(Expr::unary(Op::cos, v).value(z) == doctest::Approx(std::cos(0.3)));
    CHECK(Expr::unary(Op::tanh, v).value(z) == doctest::Approx(std::tanh(0.3)));
    CHECK(Expr::unary(Op::logcosh, v).value(z) == doctest::Approx(std::log(std::cosh(0.3))));
    CHECK(Expr::unary(Op::square, v).value(z) == doctest::Approx(0.09));
    CHECK(Expr::affine(2.0, 1.0, v).value(z) == doctest::Approx(1.6));
    CHECK(Expr::constant(4.5).value(z) == 4.5);
    // logcosh stays finite far out
    CHECK(std::isfinite(Expr::unary(Op::logcosh, v).value(std::vector<double>{800.0})));
    CHECK(Expr::unary(Op::logcosh, v).value(std::vector<double>{800.0}) == doctest::Approx(800.0 - std::log(2.0)));
}

TEST_CASE("gradient and Hessian match central differences") {
    const Expr e = sample_expr();
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int s = 0; s < 20; ++s) {
        std::vector<double> z = {u(gen), u(gen), u(gen)};
        double g[3], H[9], g2[3];
        const double v = e.jet(z, 3, g, H);
        CHECK(v == doctest::Approx(e.value(z)));
        CHECK(e.value_grad(z, 3, g2) == doctest::Approx(v));
        for (int i = 0; i < 3; ++i) {
            CHECK(g[i] == doctest::Approx(g2[i]));
            CHECK(std::abs(g[i] - fd(e, z, i, 1e-6)) <= 1e-5 * (1 + std::abs(g[i])));
            for (int j = 0; j < 3; ++j) {
                std::vector<double> zp = z, zm = z;
                zp[j] += 1e-5;
                zm[j] -= 1e-5;
                double gp[3], gm[3];
                e.value_grad(zp, 3, gp);
                e.value_grad(zm, 3, gm);
                const double fdh = (gp[i] - gm[i]) / 2e-5;
                CHECK(std::abs(H[i * 3 + j] - fdh) <= 1e-5 * (1 + std::abs(fdh)));
                CHECK(H[i * 3 + j] == doctest::Approx(H[j * 3 + i]));
            }
        }
    }
}

TEST_CASE("univariate helper agrees with the generic evaluator") {
    const Expr e = Expr::affine(0.3, 0.1, Expr::unary(Op::tanh, Expr::affine(1.7, -0.2, Expr::variable(0))));
    for (double t : {-3.0, -0.5, 0.0, 0.4, 2.5}) {
        const auto s = e.eval1(t);
        double g[1], H[1];
        const double v = e.jet(std::vector<double>{t}, 1, g, H);
        CHECK(s.v == doctest::Approx(v));
        CHECK(s.d1 == doctest::Approx(g[0]));
        CHECK(s.d2 == doctest::Approx(H[0]));
    }
}

TEST_CASE("structure queries") {
    const Expr e = sample_expr();
    CHECK(e.arity() == 3);
    CHECK_FALSE(e.is_constant());
    CHECK(Expr::constant(1.0).is_constant());
    CHECK(Expr::constant(2.0).arity() == 0);
    CHECK(Expr::unary(Op::sin, Expr::affine(3.0, 1.0, Expr::variable(4))).bounded());
    CHECK_FALSE(Expr::variable(0).bounded());
    CHECK_FALSE(Expr::unary(Op::logcosh, Expr::variable(0)).bounded());
    CHECK(Expr::product({Expr::unary(Op::tanh, Expr::variable(0)), Expr::unary(Op::cos, Expr::variable(1))}).bounded());
}

TEST_CASE("JSON round trip preserves values") {
    const Expr e = sample_expr();
    const Expr back = Expr::from_json(e.to_json());
    const std::vector<double> z = {0.1, -0.7, 1.3};
    CHECK(back.value(z) == e.value(z));
    CHECK(back.to_json() == e.to_json());
    CHECK(Expr::from_json(nlohmann::json(2.5)).value(z) == 2.5);
}

TEST_CASE("malformed expressions are rejected") {
    using nlohmann::json;
    CHECK_THROWS_AS(Expr::from_json(json{{"op", "exp"}}), ValidationError);
    CHECK_THROWS_AS(Expr::from_json(json{{"op", "sin"}, {"argument", 1}}), ValidationError);
    CHECK_THROWS_AS(Expr::from_json(json{{"op", "add"}, {"args", json::array()}}), ValidationError);
    CHECK_THROWS_AS(Expr::from_json(json{{"value", 1}}), ValidationError);
    CHECK_THROWS_AS(Expr::variable(Expr::kMaxDim), ValidationError);
    CHECK_THROWS_AS(Expr::variable(3).value(std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("cylinder function coordinates and locality") {
    const auto x2 = CylinderFunction::x_coord(3, 2);
    const auto y1 = CylinderFunction::y_coord(3, 1);
    const std::vector<double> x = {1.0, 2.0, 3.0}, y = {4.0, 5.0, 6.0};
    CHECK(x2.value(x, y) == 2.0);
    CHECK(y1.value(x, y) == 4.0);
    CHECK(x2.x_only());
    CHECK_FALSE(x2.y_only());
    CHECK(y1.y_only());
    CHECK_FALSE(x2.bounded());
    const auto c = CylinderFunction::constant(2, 3.0);
    CHECK(c.x_only());
    CHECK(c.y_only());
    CHECK(c.bounded());
    CHECK_THROWS_AS(CylinderFunction::x_coord(2, 3), ValidationError);
    CHECK_THROWS_AS(CylinderFunction(1, Expr::variable(2)), ValidationError);
}

TEST_CASE("cylinder function derivatives match finite differences") {
    const std::size_t n = 2;
    const Expr e = Expr::unary(Op::sin, Expr::affine(0.8, 0.1, Expr::variable(0)) + Expr::affine(-1.1, 0.0, Expr::variable(3))) *
                   Expr::unary(Op::tanh, Expr::affine(0.5, 0.2, Expr::variable(1) * Expr::variable(2)));
    const CylinderFunction f(n, e);
    CHECK(f.bounded());
    std::mt19937_64 gen(3);
    std::normal_distribution<double> N;
    for (int s = 0; s < 20; ++s) {
        std::vector<double> z = {N(gen), N(gen), N(gen), N(gen)};
        double g[4], H[16];
        f.jet(z, g, H);
        for (int i = 0; i < 4; ++i) {
            const double ref = fd(e, z, i, 1e-6);
            CHECK(std::abs(g[i] - ref) <= 1e-5 * (1 + std::abs(ref)));
        }
    }
    const auto back = CylinderFunction::from_json(f.to_json());
    CHECK(back.n() == n);
    CHECK(back.value(std::vector<double>{0.1, 0.2, 0.3, 0.4}) == f.value(std::vector<double>{0.1, 0.2, 0.3, 0.4}));
}
