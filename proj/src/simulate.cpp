#include "hypoco/simulate.hpp"

#include "hypoco/error.hpp"
#include "hypoco/parallel.hpp"
#include "hypoco/rates.hpp"
#include "hypoco/rng.hpp"

#include <cmath>
#include <complex>
#include <random>

namespace hypoco {

namespace {

constexpr std::uint32_t kStreamState = 0;
constexpr std::uint32_t kStreamPath1 = 1;
constexpr std::uint32_t kStreamPath2 = 2;
constexpr std::uint64_t kMeanSeedMix = 0x6a09e667f3bcc909ull;

void draw_state(const GalerkinSystem& sys, PhiloxEngine& eng, double* x, double* y) {
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < sys.n(); ++k) x[k] = std::sqrt(sys.q1()[k]) * normal(eng);
    for (std::size_t k = 0; k < sys.n(); ++k) y[k] = std::sqrt(sys.q2()[k]) * normal(eng);
}

Ensemble sample_stream(const GalerkinSystem& sys, std::size_t count, std::uint64_t seed, unsigned workers) {
    if (count == 0) throw ValidationError("ensemble size must be >= 1");
    Ensemble e;
    e.n = sys.n();
    e.seed = seed;
    e.xs.resize(count * e.n);
    e.ys.resize(count * e.n);
    e.weights.resize(count);
    const bool trivial = sys.potential().trivial();
    const double w0 = trivial ? std::exp(-sys.potential().value(std::vector<double>(e.n, 0.0))) : 0.0;
    parallel_for(count, workers, [&](std::size_t i) {
        PhiloxEngine eng(seed, i, kStreamState);
        double* x = e.xs.data() + i * e.n;
        double* y = e.ys.data() + i * e.n;
        draw_state(sys, eng, x, y);
        e.weights[i] = trivial ? w0 : std::exp(-sys.potential().value(std::span<const double>(x, e.n)));
    });
    if (!(e.weight_sum() > 0.0)) throw NumericalError("all importance weights vanished");
    return e;
}

void load_z(const CylinderFunction& f, std::span<const double> x, std::span<const double> y, double* z) {
    const std::size_t fn = f.n();
    for (std::size_t k = 0; k < fn; ++k) {
        z[k] = x[k];
        z[fn + k] = y[k];
    }
}

double eval_f(const CylinderFunction& f, std::span<const double> x, std::span<const double> y) {
    double z[Expr::kMaxDim];
    load_z(f, x, y, z);
    return f.value(std::span<const double>(z, 2 * f.n()));
}

std::vector<std::size_t> step_indices(const std::vector<double>& times, double dt) {
    std::vector<std::size_t> idx;
    double prev = -1.0;
    for (double t : times) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("times must be finite and non-negative");
        if (!(t > prev)) throw ValidationError("times must be strictly increasing");
        prev = t;
        const double s = std::round(t / dt);
        if (std::abs(s * dt - t) > 1e-9 * std::max(1.0, t))
            throw ValidationError("time " + std::to_string(t) + " is not a multiple of dt");
        idx.push_back(static_cast<std::size_t>(s));
    }
    return idx;
}

void check_finite(std::span<const double> x, std::span<const double> y, std::size_t step) {
    for (std::size_t k = 0; k < x.size(); ++k)
        if (!std::isfinite(x[k]) || !std::isfinite(y[k]))
            throw NumericalError("non-finite state at step " + std::to_string(step) +
                                 "; reduce dt or use semi_implicit_linear");
}

} // namespace

std::string to_string(Scheme s) {
    return s == Scheme::euler_maruyama ? "euler_maruyama" : "semi_implicit_linear";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "euler_maruyama") return Scheme::euler_maruyama;
    if (s == "semi_implicit_linear") return Scheme::semi_implicit_linear;
    throw ValidationError("unknown scheme '" + s + "'");
}

double Ensemble::weight_sum() const { return pairwise_sum(weights); }

double Ensemble::weighted_mean(std::span<const double> values) const {
    std::vector<double> wv(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) wv[i] = weights[i] * values[i];
    return pairwise_sum(wv) / weight_sum();
}

Ensemble sample_mu_phi(const GalerkinSystem& sys, std::size_t count, std::uint64_t seed, unsigned workers) {
    return sample_stream(sys, count, seed, workers);
}

Ensemble sample_mu_phi(const ModelSpec& spec, std::size_t n, std::size_t count, std::uint64_t seed,
                       unsigned workers) {
    return sample_stream(build(spec, n), count, seed, workers);
}

Stepper::Stepper(const GalerkinSystem& sys, Scheme scheme)
    : sys_(&sys), scheme_(scheme), sig_(sys.n()), dsig_(sys.n()), dphi_(sys.n()) {}

void Stepper::step(std::span<double> x, std::span<double> y, double dt, std::span<const double> dW) {
    const GalerkinSystem& s = *sys_;
    const std::size_t n = s.n();
    s.sigma_diag_grad(y, sig_.data(), dsig_.data());
    s.potential_grad(x, dphi_.data());
    const double ns = s.noise_scale();
    const auto& a = s.coupling();
    const auto& b = s.restoring();
    const auto& iq2 = s.inv_q2();
    const auto& k12 = s.k12();
    if (scheme_ == Scheme::euler_maruyama) {
        for (std::size_t i = 0; i < n; ++i) {
            const double dy = dsig_[i] - iq2[i] * sig_[i] * y[i] - b[i] * x[i] - k12[i] * dphi_[i];
            const double xn = x[i] + dt * a[i] * y[i];
            y[i] += dt * dy + ns * std::sqrt(2.0 * sig_[i]) * dW[i];
            x[i] = xn;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            // Linear damping and restoring force implicit with frozen λ22(y_n).
            const double kappa = iq2[i] * sig_[i];
            const double rhs = y[i] + dt * (dsig_[i] - k12[i] * dphi_[i]) + ns * std::sqrt(2.0 * sig_[i]) * dW[i] -
                               dt * b[i] * x[i];
            const double yn = rhs / (1.0 + dt * kappa + dt * dt * a[i] * b[i]);
            x[i] += dt * a[i] * yn;
            y[i] = yn;
        }
    }
}

Trajectory integrate_with_increments(const GalerkinSystem& sys, std::span<const double> x0,
                                     std::span<const double> y0, double dt, std::span<const double> increments,
                                     Scheme scheme) {
    const std::size_t n = sys.n();
    if (x0.size() != n || y0.size() != n) throw ValidationError("initial state dimension does not match n");
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    if (increments.size() % n != 0) throw ValidationError("increment array is not a multiple of n");
    const std::size_t steps = increments.size() / n;
    Trajectory tr;
    tr.n = n;
    std::vector<double> x(x0.begin(), x0.end()), y(y0.begin(), y0.end());
    auto record = [&](double t) {
        tr.t.push_back(t);
        tr.states.insert(tr.states.end(), x.begin(), x.end());
        tr.states.insert(tr.states.end(), y.begin(), y.end());
    };
    record(0.0);
    Stepper st(sys, scheme);
    for (std::size_t s = 0; s < steps; ++s) {
        st.step(x, y, dt, increments.subspan(s * n, n));
        check_finite(x, y, s + 1);
        record(dt * static_cast<double>(s + 1));
    }
    return tr;
}

Trajectory integrate(const GalerkinSystem& sys, std::span<const double> x0, std::span<const double> y0, double dt,
                     double T, std::uint64_t seed, Scheme scheme, std::size_t record_every) {
    const std::size_t n = sys.n();
    if (x0.size() != n || y0.size() != n) throw ValidationError("initial state dimension does not match n");
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    if (!(T >= dt)) throw ValidationError("T must be >= dt");
    if (record_every == 0) record_every = 1;
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    Trajectory tr;
    tr.n = n;
    std::vector<double> x(x0.begin(), x0.end()), y(y0.begin(), y0.end()), dW(n);
    auto record = [&](std::size_t s) {
        tr.t.push_back(dt * static_cast<double>(s));
        tr.states.insert(tr.states.end(), x.begin(), x.end());
        tr.states.insert(tr.states.end(), y.begin(), y.end());
    };
    record(0);
    PhiloxEngine eng(seed, 0, kStreamPath1);
    std::normal_distribution<double> normal;
    Stepper st(sys, scheme);
    const double sq = std::sqrt(dt);
    for (std::size_t s = 1; s <= steps; ++s) {
        for (auto& w : dW) w = sq * normal(eng);
        st.step(x, y, dt, dW);
        check_finite(x, y, s);
        if (s % record_every == 0 || s == steps) record(s);
    }
    return tr;
}

double default_dt(const GalerkinSystem& sys) {
    double m = 0.0;
    for (std::size_t k = 1; k <= sys.n(); ++k)
        m = std::max(m, power_eigen(sys.spec().family, sys.spec().sigma2 - sys.spec().alpha2, k));
    return 1e-3 / m;
}

bool explicit_stable(const GalerkinSystem& sys, double dt) {
    for (std::size_t k = 0; k < sys.n(); ++k) {
        // Per-mode matrix [[0, a], [-b, -κ]]; explicit Euler needs |1 + dt μ| < 1 for both eigenvalues.
        const double a = sys.coupling()[k], b = sys.restoring()[k];
        const double kappa = sys.inv_q2()[k] * sys.k22().floor(k + 1);
        const std::complex<double> disc = std::sqrt(std::complex<double>(kappa * kappa - 4.0 * a * b));
        for (const auto mu : {(-kappa + disc) / 2.0, (-kappa - disc) / 2.0})
            if (std::abs(1.0 + dt * mu) >= 1.0) return false;
    }
    return true;
}

DecayEstimate decay_estimate(const GalerkinSystem& sys, const CylinderFunction& f, const std::vector<double>& times,
                             std::size_t outer, double dt, std::uint64_t seed, const MonteCarloOptions& opt) {
    if (outer < 100) throw ValidationError("decay estimate needs outer >= 100");
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    if (times.empty()) throw ValidationError("decay estimate needs at least one time");
    if (f.n() > sys.n()) throw ValidationError("test function base dimension exceeds the truncation");
    const auto idx = step_indices(times, dt);
    const std::size_t m = times.size();
    const std::size_t n = sys.n();
    const Ensemble ens = sample_mu_phi(sys, outer, seed, opt.workers);

    std::vector<double> f0(outer), prod(outer * m);
    parallel_for(outer, opt.workers, [&](std::size_t i) {
        f0[i] = eval_f(f, ens.x(i), ens.y(i));
        std::vector<double> x1(ens.x(i).begin(), ens.x(i).end()), y1(ens.y(i).begin(), ens.y(i).end());
        std::vector<double> x2 = x1, y2 = y1, dW(n);
        PhiloxEngine e1(seed, i, kStreamPath1), e2(seed, i, kStreamPath2);
        std::normal_distribution<double> n1, n2;
        Stepper s1(sys, opt.scheme), s2(sys, opt.scheme);
        const double sq = std::sqrt(dt);
        std::size_t step = 0;
        for (std::size_t j = 0; j < m; ++j) {
            for (; step < idx[j]; ++step) {
                for (auto& w : dW) w = sq * n1(e1);
                s1.step(x1, y1, dt, dW);
                for (auto& w : dW) w = sq * n2(e2);
                s2.step(x2, y2, dt, dW);
            }
            check_finite(x1, y1, step);
            check_finite(x2, y2, step);
            prod[i * m + j] = eval_f(f, x1, y1) * eval_f(f, x2, y2);
        }
    });

    const double W = ens.weight_sum();
    std::vector<double> buf(outer);
    for (std::size_t i = 0; i < outer; ++i) buf[i] = ens.weights[i] * f0[i];
    const double fbar = pairwise_sum(buf) / W;
    for (std::size_t i = 0; i < outer; ++i) buf[i] = ens.weights[i] * (f0[i] - fbar) * (f0[i] - fbar);
    const double fvar = pairwise_sum(buf) / W;

    DecayEstimate out;
    out.f_mean = fbar;
    out.f_var = fvar;
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < outer; ++i) buf[i] = ens.weights[i] * prod[i * m + j];
        const double pbar = pairwise_sum(buf) / W;
        // Delta method for P̄ − F̄²: influence h_i = P_i − 2F̄ f_i.
        const double hbar = pbar - 2.0 * fbar * fbar;
        for (std::size_t i = 0; i < outer; ++i) {
            const double h = prod[i * m + j] - 2.0 * fbar * f0[i] - hbar;
            buf[i] = ens.weights[i] * ens.weights[i] * h * h;
        }
        DecayRow row;
        row.t = times[j];
        row.norm_sq_est = pbar - fbar * fbar;
        row.std_err = std::sqrt(pairwise_sum(buf)) / W;
        if (opt.rates) {
            const double b = opt.rates->theta1 * std::exp(-opt.rates->theta2 * times[j]);
            row.bound = b * b * fvar;
        }
        out.rows.push_back(row);
    }
    return out;
}

ErgodicResult ergodic_average(const GalerkinSystem& sys, const CylinderFunction& f, double T, double dt,
                              std::uint64_t seed, std::size_t reps, const ErgodicOptions& opt) {
    if (reps < 30) throw ValidationError("ergodic average needs reps >= 30");
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    if (!(T >= dt)) throw ValidationError("T must be >= dt");
    if (f.n() > sys.n()) throw ValidationError("test function base dimension exceeds the truncation");
    const std::size_t n = sys.n();
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));

    // μ^Φ(f) and ‖f − μ^Φ(f)‖ from an independent ensemble.
    const Ensemble big = sample_mu_phi(sys, std::max<std::size_t>(opt.mean_samples, 1), seed ^ kMeanSeedMix,
                                       opt.workers);
    std::vector<double> fv(big.size());
    parallel_for(big.size(), opt.workers, [&](std::size_t i) { fv[i] = eval_f(f, big.x(i), big.y(i)); });
    const double mu = big.weighted_mean(fv);
    for (auto& v : fv) v = (v - mu) * (v - mu);
    const double fdev = std::sqrt(big.weighted_mean(fv));

    const Ensemble ens = sample_mu_phi(sys, reps, seed, opt.workers);
    std::vector<double> dev(reps);
    parallel_for(reps, opt.workers, [&](std::size_t r) {
        std::vector<double> x(ens.x(r).begin(), ens.x(r).end()), y(ens.y(r).begin(), ens.y(r).end()), dW(n);
        std::vector<double> fs(steps);
        PhiloxEngine eng(seed, r, kStreamPath1);
        std::normal_distribution<double> normal;
        Stepper st(sys, opt.scheme);
        const double sq = std::sqrt(dt);
        for (std::size_t s = 0; s < steps; ++s) {
            fs[s] = eval_f(f, x, y);
            for (auto& w : dW) w = sq * normal(eng);
            st.step(x, y, dt, dW);
        }
        check_finite(x, y, steps);
        const double avg = pairwise_sum(fs) / static_cast<double>(steps);
        dev[r] = (avg - mu) * (avg - mu);
    });

    const double W = ens.weight_sum();
    std::vector<double> buf(reps);
    for (std::size_t r = 0; r < reps; ++r) buf[r] = ens.weights[r] * dev[r];
    const double msq = pairwise_sum(buf) / W;
    for (std::size_t r = 0; r < reps; ++r) buf[r] = ens.weights[r] * ens.weights[r] * (dev[r] - msq) * (dev[r] - msq);
    const double msq_se = std::sqrt(pairwise_sum(buf)) / W;

    ErgodicResult res;
    res.T = T;
    res.lhs_est = std::sqrt(msq);
    res.lhs_se = res.lhs_est > 0.0 ? msq_se / (2.0 * res.lhs_est) : 0.0;
    res.f_mean = mu;
    res.f_dev_norm = fdev;
    if (opt.rates) res.rhs_bound = ergodic_bound(opt.rates->theta1, opt.rates->theta2, T, fdev);
    return res;
}

} // namespace hypoco
