#include "helpers.hpp"

#include "hypoco/error.hpp"
#include "hypoco/galerkin.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace hypoco;
using namespace hypoco::testing;

TEST_CASE("build: diagonals of the RD example") {
    const auto sys = build(rd_spec(1.0, 1.2, 1.2, 1.8), 1);
    REQUIRE(sys.q1().size() == 1);
    CHECK(sys.q1()[0] == doctest::Approx(1.0 / (M_PI * M_PI)).epsilon(1e-15));
    const auto s3 = build(identity_spec(), 3);
    for (std::size_t k = 0; k < 3; ++k) {
        const double l = lambda_rd(k + 1);
        CHECK(s3.q1()[k] == doctest::Approx(std::pow(l, 1.5)).epsilon(1e-14));
        CHECK(s3.q2()[k] == doctest::Approx(std::pow(l, 1.2)).epsilon(1e-14));
        CHECK(s3.k12()[k] == doctest::Approx(std::pow(l, 1.2)).epsilon(1e-14));
        CHECK(s3.q1()[k] > 0.0);
    }
    CHECK_THROWS_AS(build(identity_spec(), 0), ValidationError);
}

TEST_CASE("sigma is constant without a variable part") {
    const auto sys = build(rd_spec(1.5, 1.2, 1.2, 1.8, 0.7, 0.0), 3);
    std::mt19937_64 gen(1);
    std::normal_distribution<double> nd;
    const auto s0 = sys.sigma(std::vector<double>{0, 0, 0});
    for (int i = 0; i < 50; ++i) {
        std::vector<double> y{nd(gen), nd(gen), nd(gen)};
        CHECK(sys.sigma(y) == s0);
    }
    for (std::size_t k = 0; k < 3; ++k) CHECK(s0[k] == doctest::Approx(0.7 * std::pow(lambda_rd(k + 1), 1.8)));
}

TEST_CASE("sigma and diffusion entries depend only on earlier coordinates") {
    const auto sys = build(identity_spec(), 3);
    std::mt19937_64 gen(2);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 200; ++i) {
        std::vector<double> y{nd(gen), nd(gen), nd(gen)};
        const auto s = sys.sigma(y);
        const auto d = sys.diffusion(y);
        for (std::size_t k = 0; k < 3; ++k) {
            // floor (K1) and the diffusion definition
            CHECK(s[k] >= sys.k22().floor(k + 1));
            CHECK(d[k] * d[k] / 2.0 == doctest::Approx(s[k]).epsilon(1e-15));
        }
        for (std::size_t j = 1; j < 3; ++j) {
            auto z = y;
            z[j] += nd(gen);
            const auto s2 = sys.sigma(z);
            const auto d2 = sys.diffusion(z);
            for (std::size_t k = 0; k < j; ++k) {
                CHECK(s2[k] == s[k]);
                CHECK(d2[k] == d[k]);
            }
        }
    }
}

TEST_CASE("operators annihilate constants") {
    const auto sys = build(identity_spec(), 2);
    const auto f = CylinderFunction::constant(2, 3.5);
    const auto r = apply_ops(sys, f, std::vector<double>{0.1, -0.2}, std::vector<double>{0.3, 0.4});
    CHECK(r.S == 0.0);
    CHECK(r.A == 0.0);
    CHECK(r.L == 0.0);
}

TEST_CASE("operators on sin(y1) with constant K22") {
    const double c = 0.8;
    const auto spec = rd_spec(1.5, 1.2, 1.2, 1.8, c, 0.0);
    const auto sys = build(spec, 2);
    const CylinderFunction f(2, Expr::unary(Op::sin, Expr::variable(2)));
    const double l = lambda_rd(1);
    for (double y1 : {-1.3, 0.0, 0.4, 2.0}) {
        const auto r = apply_ops(sys, f, std::vector<double>{0.0, 0.0}, std::vector<double>{y1, 0.5});
        const double S = -c * std::pow(l, 1.8) * std::sin(y1) - c * std::pow(l, 1.8 - 1.2) * y1 * std::cos(y1);
        CHECK(r.S == doctest::Approx(S).epsilon(1e-13));
        CHECK(r.A == 0.0);
        CHECK(r.L == doctest::Approx(S).epsilon(1e-13));
    }
    // at x ≠ 0 the antisymmetric part is λ^{σ1−α1} x1 cos(y1)
    const auto r = apply_ops(sys, f, std::vector<double>{0.2, 0.0}, std::vector<double>{0.4, 0.0});
    CHECK(r.A == doctest::Approx(std::pow(l, 1.2 - 1.5) * 0.2 * std::cos(0.4)).epsilon(1e-13));
}

TEST_CASE("L applied to a coordinate function") {
    const auto sys = build(identity_spec(), 2);
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    for (std::size_t i = 1; i <= 2; ++i)
        for (int t = 0; t < 20; ++t) {
            std::vector<double> x{nd(gen), nd(gen)}, y{nd(gen), nd(gen)};
            const auto r = apply_ops(sys, CylinderFunction::x_coord(2, i), x, y);
            const double expect = std::pow(lambda_rd(i), 1.2 - 1.2) * y[i - 1];
            CHECK(r.L == doctest::Approx(expect).epsilon(1e-14));
            CHECK(r.S == 0.0);
        }
}

TEST_CASE("S ignores pure-x additions") {
    const auto sys = build(identity_spec(), 2);
    const Expr fy = Expr::product({Expr::unary(Op::sin, Expr::variable(2)), Expr::unary(Op::cos, Expr::variable(3))});
    const Expr hx = Expr::unary(Op::tanh, Expr::sum({Expr::variable(0), Expr::variable(1)}));
    const CylinderFunction f(2, Expr::product({fy, Expr::unary(Op::cos, Expr::variable(0))}));
    const CylinderFunction g(2, Expr::sum({f.expr(), hx}));
    std::mt19937_64 gen(4);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 50; ++t) {
        std::vector<double> x{nd(gen), nd(gen)}, y{nd(gen), nd(gen)};
        const auto a = apply_ops(sys, f, x, y);
        const auto b = apply_ops(sys, g, x, y);
        CHECK(b.S == doctest::Approx(a.S).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("function base larger than the truncation is rejected") {
    const auto sys = build(identity_spec(), 1);
    CHECK_THROWS_AS(apply_ops(sys, CylinderFunction::x_coord(2, 2), std::vector<double>{0.0},
                              std::vector<double>{0.0}),
                    ValidationError);
    double dx[2], dy[2];
    CHECK_THROWS_AS(sys.drift(std::vector<double>{0.0, 0.0}, std::vector<double>{0.0}, dx, dy), ValidationError);
    CHECK_THROWS_AS(sys.diffusion(std::vector<double>{0.0, 0.0}), ValidationError);
}

TEST_CASE("drift of the linear model") {
    const auto sys = build(linear_spec(), 3);
    double dx[3], dy[3];
    sys.drift(std::vector<double>{0, 0, 0}, std::vector<double>{0, 0, 0}, dx, dy);
    for (int i = 0; i < 3; ++i) {
        CHECK(dx[i] == 0.0);
        CHECK(dy[i] == 0.0);
    }
    const std::vector<double> x{0.3, -0.1, 0.2}, y{1.0, 0.5, -0.4};
    sys.drift(x, y, dx, dy);
    CHECK(dx[0] == doctest::Approx(2.4987 * y[0]).epsilon(1e-4));
    CHECK(dx[0] == doctest::Approx(std::pow(M_PI * M_PI, 0.4)).epsilon(1e-14));
    for (std::size_t i = 0; i < 3; ++i) {
        const double l = lambda_rd(i + 1);
        const double ey = -std::pow(l, 1.0 - 1.0) * y[i] - std::pow(l, 0.6 - 1.5) * x[i];
        CHECK(dy[i] == doctest::Approx(ey).epsilon(1e-13));
    }
}

TEST_CASE("per-mode linear drift is stable") {
    for (double s2 : {1.0, 1.8})
        for (double a1 : {1.0, 1.5, 2.5}) {
            const auto sys = build(rd_spec(a1, 1.2, 1.2, s2, 0.9, 0.0), 6);
            for (std::size_t k = 0; k < 6; ++k) {
                // columns: unit x_k, unit y_k
                Eigen::Matrix2d M;
                std::vector<double> x(6, 0.0), y(6, 0.0), dx(6), dy(6);
                x[k] = 1.0;
                sys.drift(x, y, dx.data(), dy.data());
                M(0, 0) = dx[k];
                M(1, 0) = dy[k];
                x[k] = 0.0;
                y[k] = 1.0;
                sys.drift(x, y, dx.data(), dy.data());
                M(0, 1) = dx[k];
                M(1, 1) = dy[k];
                const Eigen::Vector2cd ev = M.eigenvalues();
                CHECK(ev[0].real() < 0.0);
                CHECK(ev[1].real() < 0.0);
            }
        }
}

TEST_CASE("generator matches the drift on coordinates") {
    // L x_k = dx_k and L y_k = dy_k for any K22 and Φ.
    ModelSpec s = identity_spec();
    set_potential(s, Expr::affine(0.3, 0.0, Expr::unary(Op::tanh, Expr::variable(0))), -1.0, 0.3);
    const auto sys = build(s, 2);
    std::mt19937_64 gen(6);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 20; ++t) {
        std::vector<double> x{nd(gen) * 0.1, nd(gen) * 0.1}, y{nd(gen) * 0.1, nd(gen) * 0.1};
        double dx[2], dy[2];
        sys.drift(x, y, dx, dy);
        for (std::size_t k = 1; k <= 2; ++k) {
            CHECK(apply_ops(sys, CylinderFunction::x_coord(2, k), x, y).L ==
                  doctest::Approx(dx[k - 1]).epsilon(1e-13));
            CHECK(apply_ops(sys, CylinderFunction::y_coord(2, k), x, y).L ==
                  doctest::Approx(dy[k - 1]).epsilon(1e-12));
        }
    }
}
