#pragma once

#include "hypoco/expr.hpp"
#include "hypoco/spectral.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypoco {

enum class ExampleKind { reaction_diffusion, cahn_hilliard, custom };

std::string to_string(ExampleKind kind);

// One term g(<w, p> + offset) of a ridge sum; g is univariate.
struct RidgeTerm {
    std::vector<double> weights;
    double offset = 0.0;
    Expr g;
};

struct K22Bounds {
    double phi_prime_sup = 0.0;
    double dpsi_sup = 0.0;
    double phi_at_0 = 0.0;
    double psi_at_0 = 0.0;

    double total() const { return phi_prime_sup + dpsi_sup + phi_at_0 + psi_at_0; }
};

// Variable part of λ22,k: φ_k(|p_k v|^{β_k+1}) + ψ_k(p_k v).
struct K22ModeSpec {
    double beta = 0.5;
    Expr phi;
    std::vector<RidgeTerm> psi;
    K22Bounds bounds;
};

// Φ2(u) = amplitude·g(<w, u> + offset) with declared oscillation and curvature bounds.
struct Perturbation {
    double amplitude = 0.0;
    Expr g;
    std::vector<double> weights;
    double offset = 0.0;
    double osc = 0.0;
    double c_phi2 = 0.0;
};

struct PotentialSpec {
    Expr phi;
    double phi_lower_bound = 0.0;
    std::optional<double> phi_prime_sup;
    std::optional<Perturbation> phi2;
    int quad_points = 512;

    bool phi_is_constant() const { return phi.is_constant(); }
    bool is_trivial() const { return phi_is_constant() && !phi2; }
    // Declared sup|φ'|; zero for constant φ even when not declared.
    std::optional<double> derivative_bound() const {
        return phi_is_constant() ? std::optional<double>(0.0) : phi_prime_sup;
    }
    double osc() const { return phi2 ? phi2->osc : 0.0; }
    double c_phi2() const { return phi2 ? phi2->c_phi2 : 0.0; }
};

struct ModelSpec {
    EigenFamily family;
    double alpha1 = 1.5;
    double alpha2 = 1.2;
    double sigma1 = 1.2;
    double sigma2 = 1.8;
    double c = 1.0;
    double c_tilde = 0.0;
    std::vector<K22ModeSpec> modes;
    PotentialSpec potential;
    ExampleKind example_kind = ExampleKind::reaction_diffusion;

    // Throws ValidationError naming the first violated invariant.
    void validate() const;

    nlohmann::json to_json() const;
    static ModelSpec from_json(const nlohmann::json& j);
    // Stable hex digest of the canonical JSON form.
    std::string hash() const;
};

// Cached per-mode constants for λ22,k, k = 1..n.
class K22Evaluator {
public:
    K22Evaluator(const ModelSpec& spec, std::size_t n);

    std::size_t size() const { return floor_.size(); }
    double floor(std::size_t k) const { return floor_[k - 1]; }
    double gamma(std::size_t k) const { return gamma_[k - 1]; }
    bool variable(std::size_t k) const { return gamma_[k - 1] != 0.0; }

    double eig(std::size_t k, std::span<const double> y) const;
    // λ22,k and ∂_{y_k} λ22,k together.
    double eig_diag_grad(std::size_t k, std::span<const double> y, double& dkk) const;
    void grad(std::size_t k, std::span<const double> y, double* out) const;

private:
    std::vector<K22ModeSpec> modes_;
    std::vector<double> floor_;
    std::vector<double> gamma_;
};

double k22_eig(const ModelSpec& spec, std::size_t k, std::span<const double> y);
std::vector<double> k22_eig_grad(const ModelSpec& spec, std::size_t k, std::span<const double> y);

// Spatial basis b_k(ξ) of the example family.
double basis_function(ExampleKind kind, std::size_t k, double xi);

// Φ on the span of the first n basis functions, with cached quadrature tables.
class PotentialEvaluator {
public:
    PotentialEvaluator(const ModelSpec& spec, std::size_t n);

    std::size_t size() const { return n_; }
    bool trivial() const { return trivial_; }
    double value(std::span<const double> u) const;
    // Returns Φ(u) and writes DΦ coefficients 1..n into grad.
    double value_grad(std::span<const double> u, double* grad) const;

private:
    PotentialSpec pot_;
    std::size_t n_;
    int q_;
    bool trivial_;
    std::vector<double> table_; // q × n basis values at midpoints
};

double potential_value(const ModelSpec& spec, std::span<const double> u);
double potential_grad_coeff(const ModelSpec& spec, std::span<const double> u, std::size_t k);

} // namespace hypoco
