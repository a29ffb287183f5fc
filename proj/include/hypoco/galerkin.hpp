#pragma once

#include "hypoco/expr.hpp"
#include "hypoco/model.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace hypoco {

// f(x, y) over x_1..x_n, y_1..y_n; expression variable i < n is x_{i+1}, n + i is y_{i+1}.
class CylinderFunction {
public:
    CylinderFunction() = default;
    CylinderFunction(std::size_t n, Expr expr);

    static CylinderFunction x_coord(std::size_t n, std::size_t i); // x_i, 1-based
    static CylinderFunction y_coord(std::size_t n, std::size_t i); // y_i, 1-based
    static CylinderFunction constant(std::size_t n, double c);

    std::size_t n() const { return n_; }
    std::size_t dim() const { return 2 * n_; }
    const Expr& expr() const { return expr_; }
    bool bounded() const { return bounded_; }
    // True when f has no y dependence (resp. no x dependence).
    bool x_only() const;
    bool y_only() const;

    double value(std::span<const double> x, std::span<const double> y) const;
    // z = (x_1..x_n, y_1..y_n).
    double value(std::span<const double> z) const { return expr_.value(z); }
    double value_grad(std::span<const double> z, double* grad) const;
    double jet(std::span<const double> z, double* grad, double* hess) const;

    nlohmann::json to_json() const;
    static CylinderFunction from_json(const nlohmann::json& j);

private:
    std::size_t n_ = 1;
    Expr expr_;
    bool bounded_ = true;
};

struct OpValues {
    double S = 0.0;
    double A = 0.0;
    double L = 0.0;
};

// Per-point model data shared by several test functions.
struct PointData {
    std::vector<double> x, y;
    std::vector<double> dphi; // ∂_kΦ(x)
    std::vector<double> sig;  // λ22,k(y)
    std::vector<double> dsig; // ∂_{y_k} λ22,k(y)
};

class GalerkinSystem {
public:
    GalerkinSystem(const ModelSpec& spec, std::size_t n);

    std::size_t n() const { return n_; }
    const ModelSpec& spec() const { return spec_; }
    const std::vector<double>& q1() const { return q1_; }
    const std::vector<double>& q2() const { return q2_; }
    const std::vector<double>& k12() const { return k12_; }
    const std::vector<double>& lambda() const { return lambda_; }
    // λ^{σ1−α2}: coefficient of y_k in dx_k.
    const std::vector<double>& coupling() const { return coup_; }
    // λ^{σ1−α1}: restoring coefficient of x_k in dy_k.
    const std::vector<double>& restoring() const { return restore_; }
    const std::vector<double>& inv_q1() const { return inv_q1_; }
    const std::vector<double>& inv_q2() const { return inv_q2_; }
    const K22Evaluator& k22() const { return k22_; }
    const PotentialEvaluator& potential() const { return pot_; }

    std::vector<double> sigma(std::span<const double> y) const;
    void sigma_diag_grad(std::span<const double> y, double* sig, double* dsig) const;
    double potential_grad(std::span<const double> x, double* dphi) const;
    PointData point(std::span<const double> x, std::span<const double> y) const;
    void fill_point(PointData& p) const;

    void drift(std::span<const double> x, std::span<const double> y, double* dx, double* dy) const;
    std::vector<double> diffusion(std::span<const double> y) const;

    // Multiplies the diffusion coefficient (drift unchanged). Only for tests of the deterministic flow.
    void set_noise_scale(double s) { noise_scale_ = s; }
    double noise_scale() const { return noise_scale_; }

private:
    ModelSpec spec_;
    std::size_t n_;
    std::vector<double> lambda_, q1_, q2_, k12_, coup_, restore_, inv_q1_, inv_q2_;
    K22Evaluator k22_;
    PotentialEvaluator pot_;
    double noise_scale_ = 1.0;
};

GalerkinSystem build(const ModelSpec& spec, std::size_t n);

OpValues apply_ops(const GalerkinSystem& sys, const CylinderFunction& f, std::span<const double> x,
                   std::span<const double> y);
// Operator images from a precomputed jet of f (layout of f's own variables).
OpValues apply_ops(const GalerkinSystem& sys, std::size_t fn, const double* grad, const double* hess,
                   const PointData& p);

} // namespace hypoco
