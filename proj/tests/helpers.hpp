#pragma once

#include "hypoco/galerkin.hpp"
#include "hypoco/model.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace hypoco::testing {

inline double lambda_rd(std::size_t k) { return 1.0 / ((k * std::numbers::pi) * (k * std::numbers::pi)); }

inline ModelSpec rd_spec(double a1, double a2, double s1, double s2, double c = 1.0, double ct = 0.0) {
    ModelSpec s;
    s.family = EigenFamily::dirichlet();
    s.example_kind = ExampleKind::reaction_diffusion;
    s.alpha1 = a1;
    s.alpha2 = a2;
    s.sigma1 = s1;
    s.sigma2 = s2;
    s.c = c;
    s.c_tilde = ct;
    return s;
}

// ψ_k = ½ + ½ sin(<w,p> + offset), φ_k ≡ 0.
inline K22ModeSpec sine_ridge_mode(std::vector<double> w, double offset) {
    K22ModeSpec m;
    m.beta = 0.5;
    m.phi = Expr::constant(0.0);
    double nw = 0.0;
    for (double v : w) nw += v * v;
    RidgeTerm t;
    t.weights = std::move(w);
    t.offset = offset;
    t.g = Expr::affine(0.5, 0.5, Expr::unary(Op::sin, Expr::variable(0)));
    m.psi.push_back(t);
    m.bounds.dpsi_sup = 0.5 * std::sqrt(nw);
    m.bounds.psi_at_0 = 0.5 + 0.5 * std::sin(offset);
    return m;
}

// φ_k(t) = tanh(t) (smooth clip with φ' ≤ 1) plus a sine ridge.
inline K22ModeSpec tanh_phi_mode(std::vector<double> w, double offset, double beta = 0.5) {
    K22ModeSpec m = sine_ridge_mode(std::move(w), offset);
    m.beta = beta;
    m.phi = Expr::unary(Op::tanh, Expr::variable(0));
    m.bounds.phi_prime_sup = 1.0;
    return m;
}

// The operator-identity spec: RD (1.5, 1.2, 1.2, 1.8), c = 1, c̃ = 0.5, Φ = 0, two variable modes.
inline ModelSpec identity_spec() {
    ModelSpec s = rd_spec(1.5, 1.2, 1.2, 1.8, 1.0, 0.5);
    s.modes.push_back(sine_ridge_mode({0.7}, 0.0));
    s.modes.push_back(sine_ridge_mode({0.4, -0.6}, 0.3));
    return s;
}

// The decay/ergodic linear model: RD (1.5, 1, 0.6, 1), c = 1, c̃ = 0, Φ = 0.
inline ModelSpec linear_spec() { return rd_spec(1.5, 1.0, 0.6, 1.0, 1.0, 0.0); }

inline void set_potential(ModelSpec& s, const Expr& phi, double lower, std::optional<double> sup) {
    s.potential.phi = phi;
    s.potential.phi_lower_bound = lower;
    s.potential.phi_prime_sup = sup;
}

// Relative closeness with an absolute floor.
inline bool close(double a, double b, double rel, double abs_floor = 0.0) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

} // namespace hypoco::testing
