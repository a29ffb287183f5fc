#pragma once

#include "hypoco/galerkin.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypoco {

enum class Scheme { euler_maruyama, semi_implicit_linear };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

// Weighted sample of μ^Φ on the truncation; states are row-major count × n.
struct Ensemble {
    std::size_t n = 0;
    std::vector<double> xs, ys;
    std::vector<double> weights; // e^{-Φ(x)}, unnormalized
    std::uint64_t seed = 0;

    std::size_t size() const { return weights.size(); }
    std::span<const double> x(std::size_t i) const { return {xs.data() + i * n, n}; }
    std::span<const double> y(std::size_t i) const { return {ys.data() + i * n, n}; }
    double weight_sum() const;
    // Self-normalized weighted mean of values[i].
    double weighted_mean(std::span<const double> values) const;
};

Ensemble sample_mu_phi(const GalerkinSystem& sys, std::size_t count, std::uint64_t seed, unsigned workers = 1);
Ensemble sample_mu_phi(const ModelSpec& spec, std::size_t n, std::size_t count, std::uint64_t seed,
                       unsigned workers = 1);

struct Trajectory {
    std::size_t n = 0;
    std::vector<double> t;
    std::vector<double> states; // per record: x_1..x_n, y_1..y_n
};

// One step from (x, y) with standard normal draws xi (length n); increments are √dt·xi.
class Stepper {
public:
    Stepper(const GalerkinSystem& sys, Scheme scheme);
    void step(std::span<double> x, std::span<double> y, double dt, std::span<const double> dW);

private:
    const GalerkinSystem* sys_;
    Scheme scheme_;
    std::vector<double> sig_, dsig_, dphi_;
};

// Integrates from (x0, y0) to T with step dt; records every `record_every` steps (and the last state).
Trajectory integrate(const GalerkinSystem& sys, std::span<const double> x0, std::span<const double> y0, double dt,
                     double T, std::uint64_t seed, Scheme scheme, std::size_t record_every = 1);

// Same as integrate, but with caller-supplied Brownian increments (steps × n, row-major).
Trajectory integrate_with_increments(const GalerkinSystem& sys, std::span<const double> x0,
                                     std::span<const double> y0, double dt, std::span<const double> increments,
                                     Scheme scheme);

// dt = 1e-3 / max_k λ_k^{σ2−α2}.
double default_dt(const GalerkinSystem& sys);
// Whether the explicit scheme is linearly stable at dt for the frozen floor coefficients.
bool explicit_stable(const GalerkinSystem& sys, double dt);

struct RatesInput {
    double theta1 = 2.0;
    double theta2 = 0.0;
};

struct DecayRow {
    double t = 0.0;
    double norm_sq_est = 0.0;
    double std_err = 0.0;
    std::optional<double> bound;
};

struct DecayEstimate {
    std::vector<DecayRow> rows;
    double f_mean = 0.0;
    double f_var = 0.0;
};

struct MonteCarloOptions {
    Scheme scheme = Scheme::euler_maruyama;
    unsigned workers = 1;
    std::optional<RatesInput> rates;
};

DecayEstimate decay_estimate(const GalerkinSystem& sys, const CylinderFunction& f, const std::vector<double>& times,
                             std::size_t outer, double dt, std::uint64_t seed, const MonteCarloOptions& opt = {});

struct ErgodicResult {
    double T = 0.0;
    double lhs_est = 0.0;
    double lhs_se = 0.0;
    std::optional<double> rhs_bound;
    double f_mean = 0.0;
    double f_dev_norm = 0.0;
};

struct ErgodicOptions : MonteCarloOptions {
    // Ensemble size used to estimate μ^Φ(f) and ‖f − μ^Φ(f)‖.
    std::size_t mean_samples = 100000;
};

ErgodicResult ergodic_average(const GalerkinSystem& sys, const CylinderFunction& f, double T, double dt,
                              std::uint64_t seed, std::size_t reps, const ErgodicOptions& opt = {});

} // namespace hypoco
