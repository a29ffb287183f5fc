#include "hypoco/model.hpp"

#include "hypoco/error.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>

namespace hypoco {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
    std::string bad;
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) bad += (bad.empty() ? "" : ", ") + key;
    if (!bad.empty()) throw ValidationError("unknown keys in " + where + ": " + bad);
}

double ridge_value(const std::vector<RidgeTerm>& terms, std::span<const double> p) {
    double s = 0.0;
    for (const auto& t : terms) {
        double arg = t.offset;
        for (std::size_t i = 0; i < t.weights.size(); ++i) arg += t.weights[i] * p[i];
        s += t.g.eval1(arg).v;
    }
    return s;
}

// Adds the gradient of the ridge sum into out.
void ridge_grad(const std::vector<RidgeTerm>& terms, std::span<const double> p, double* out) {
    for (const auto& t : terms) {
        double arg = t.offset;
        for (std::size_t i = 0; i < t.weights.size(); ++i) arg += t.weights[i] * p[i];
        const double d = t.g.eval1(arg).d1;
        for (std::size_t i = 0; i < t.weights.size(); ++i) out[i] += d * t.weights[i];
    }
}

double norm_sq(std::span<const double> v, std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += v[i] * v[i];
    return s;
}

// Slack used when comparing declared bounds with sampled values.
bool within(double sampled, double declared) {
    return sampled <= declared * (1.0 + 1e-9) + 1e-12;
}

void validate_mode(const K22ModeSpec& m, std::size_t k) {
    const std::string where = "K22 mode " + std::to_string(k);
    if (!(m.beta > 0.0 && m.beta < 1.0)) throw ValidationError(where + ": beta must lie in (0,1)");
    const auto& b = m.bounds;
    for (double v : {b.phi_prime_sup, b.dpsi_sup, b.phi_at_0, b.psi_at_0})
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(where + ": bounds must be non-negative and finite");
    if (m.phi.arity() > 1) throw ValidationError(where + ": phi must be univariate");
    for (const auto& t : m.psi) {
        if (t.weights.size() > k) throw ValidationError(where + ": psi ridge weights longer than k");
        if (t.g.arity() > 1) throw ValidationError(where + ": psi ridge profile must be univariate");
    }
    // φ_k is only evaluated at |p|^{β+1} ≥ 0.
    if (!within(std::abs(m.phi.eval1(0.0).v), b.phi_at_0))
        throw ValidationError(where + ": |phi(0)| exceeds declared phi_at_0");
    for (int i = 0; i <= 2000; ++i) {
        const double t = 50.0 * i / 2000.0;
        const auto d = m.phi.eval1(t);
        if (d.v < -1e-12) throw ValidationError(where + ": phi is negative at t=" + std::to_string(t));
        if (!within(std::abs(d.d1), b.phi_prime_sup))
            throw ValidationError(where + ": |phi'| exceeds declared phi_prime_sup at t=" + std::to_string(t));
    }
    std::vector<double> zero(k, 0.0);
    if (!within(std::abs(ridge_value(m.psi, zero)), b.psi_at_0))
        throw ValidationError(where + ": |psi(0)| exceeds declared psi_at_0");
    std::mt19937_64 gen(0x5eed0000u + k);
    std::uniform_real_distribution<double> unif(-5.0, 5.0);
    std::vector<double> p(k), g(k);
    for (int s = 0; s < 200; ++s) {
        for (auto& v : p) v = unif(gen);
        if (ridge_value(m.psi, p) < -1e-12) throw ValidationError(where + ": psi is negative at a sampled point");
        std::fill(g.begin(), g.end(), 0.0);
        ridge_grad(m.psi, p, g.data());
        if (!within(std::sqrt(norm_sq(g, k)), b.dpsi_sup))
            throw ValidationError(where + ": |D psi| exceeds declared dpsi_sup at a sampled point");
    }
}

json ridge_to_json(const RidgeTerm& t) {
    return json{{"weights", t.weights}, {"offset", t.offset}, {"g", t.g.to_json()}};
}

RidgeTerm ridge_from_json(const json& j, const std::string& where) {
    reject_unknown_keys(j, {"weights", "offset", "g"}, where);
    RidgeTerm t;
    t.weights = j.at("weights").get<std::vector<double>>();
    t.offset = j.value("offset", 0.0);
    t.g = Expr::from_json(j.at("g"));
    return t;
}

ExampleKind example_kind_from_string(const std::string& s) {
    if (s == "reaction_diffusion") return ExampleKind::reaction_diffusion;
    if (s == "cahn_hilliard") return ExampleKind::cahn_hilliard;
    if (s == "custom") return ExampleKind::custom;
    throw ValidationError("unknown example_kind '" + s + "'");
}

ExampleKind default_kind(FamilyKind f) {
    switch (f) {
    case FamilyKind::dirichlet_laplacian_inverse: return ExampleKind::reaction_diffusion;
    case FamilyKind::neumann_bilaplacian_inverse: return ExampleKind::cahn_hilliard;
    default: return ExampleKind::custom;
    }
}

} // namespace

std::string to_string(ExampleKind kind) {
    switch (kind) {
    case ExampleKind::reaction_diffusion: return "reaction_diffusion";
    case ExampleKind::cahn_hilliard: return "cahn_hilliard";
    case ExampleKind::custom: return "custom";
    }
    return "unknown";
}

void ModelSpec::validate() const {
    family.validate();
    if (example_kind == ExampleKind::reaction_diffusion && family.kind != FamilyKind::dirichlet_laplacian_inverse)
        throw ValidationError("reaction_diffusion example requires the dirichlet_laplacian_inverse family");
    if (example_kind == ExampleKind::cahn_hilliard && family.kind != FamilyKind::neumann_bilaplacian_inverse)
        throw ValidationError("cahn_hilliard example requires the neumann_bilaplacian_inverse family");
    const double thr = family.convergence_threshold();
    for (auto [name, v] : {std::pair{"alpha1", alpha1}, std::pair{"alpha2", alpha2}}) {
        if (!std::isfinite(v)) throw ValidationError(std::string(name) + " must be finite");
        if (!(v > thr))
            throw ValidationError(std::string(name) + " = " + std::to_string(v) +
                                  " must exceed the trace-class threshold " + std::to_string(thr));
    }
    if (!(sigma1 >= 0.0) || !std::isfinite(sigma1)) throw ValidationError("sigma1 must be a finite value >= 0");
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ValidationError("sigma2 must be a finite value >= 0");
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("c must be > 0");
    if (!(c_tilde >= 0.0) || !std::isfinite(c_tilde)) throw ValidationError("c_tilde must be >= 0");
    if (auto n = family.size(); n && modes.size() > *n)
        throw ValidationError("more K22 modes than eigenvalues in the custom family");
    for (std::size_t k = 1; k <= modes.size(); ++k) {
        validate_mode(modes[k - 1], k);
        if (c_tilde > 0.0 && !(modes[k - 1].bounds.total() > 0.0))
            throw ValidationError("K22 mode " + std::to_string(k) + ": bounds sum to zero, gamma_k undefined");
    }

    const auto& p = potential;
    if (p.quad_points < 2) throw ValidationError("potential.quad_points must be >= 2");
    if (p.phi.arity() > 1) throw ValidationError("potential.phi must be univariate");
    if (p.phi_prime_sup && !(*p.phi_prime_sup >= 0.0)) throw ValidationError("potential.phi_prime_sup must be >= 0");
    for (int i = 0; i <= 4000; ++i) {
        const double t = -100.0 + 200.0 * i / 4000.0;
        const auto d = p.phi.eval1(t);
        if (!(d.v >= p.phi_lower_bound - 1e-12))
            throw ValidationError("potential.phi falls below phi_lower_bound at t=" + std::to_string(t));
        if (p.phi_prime_sup && !within(std::abs(d.d1), *p.phi_prime_sup))
            throw ValidationError("|phi'| exceeds potential.phi_prime_sup at t=" + std::to_string(t));
    }
    if (p.phi2) {
        const auto& q = *p.phi2;
        if (!q.g.bounded() || q.g.arity() > 1)
            throw ValidationError("potential.phi2 profile must be a bounded univariate expression");
        if (!(q.osc >= 0.0) || !(q.c_phi2 >= 0.0)) throw ValidationError("potential.phi2 osc and c_phi2 must be >= 0");
        double lo = INFINITY, hi = -INFINITY;
        for (int i = 0; i <= 4000; ++i) {
            const double v = q.amplitude * q.g.eval1(-50.0 + 100.0 * i / 4000.0).v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!within(hi - lo, q.osc)) throw ValidationError("potential.phi2 oscillation exceeds declared osc");
    }
}

json ModelSpec::to_json() const {
    json j;
    j["family"] = hypoco::to_string(family.kind);
    if (family.kind == FamilyKind::custom) j["custom_values"] = family.custom_values;
    j["example_kind"] = hypoco::to_string(example_kind);
    j["alpha1"] = alpha1;
    j["alpha2"] = alpha2;
    j["sigma1"] = sigma1;
    j["sigma2"] = sigma2;
    j["c"] = c;
    j["c_tilde"] = c_tilde;
    json modes_j = json::array();
    for (const auto& m : modes) {
        json psi = json::array();
        for (const auto& t : m.psi) psi.push_back(ridge_to_json(t));
        modes_j.push_back({{"beta", m.beta},
                           {"phi", m.phi.to_json()},
                           {"psi", psi},
                           {"bounds",
                            {{"phi_prime_sup", m.bounds.phi_prime_sup},
                             {"dpsi_sup", m.bounds.dpsi_sup},
                             {"phi_at_0", m.bounds.phi_at_0},
                             {"psi_at_0", m.bounds.psi_at_0}}}});
    }
    j["modes"] = modes_j;
    json pot;
    pot["phi"] = potential.phi.to_json();
    pot["phi_lower_bound"] = potential.phi_lower_bound;
    if (potential.phi_prime_sup) pot["phi_prime_sup"] = *potential.phi_prime_sup;
    pot["quad_points"] = potential.quad_points;
    if (potential.phi2) {
        const auto& q = *potential.phi2;
        pot["phi2"] = {{"amplitude", q.amplitude}, {"g", q.g.to_json()}, {"weights", q.weights},
                       {"offset", q.offset},       {"osc", q.osc},       {"c_phi2", q.c_phi2}};
    }
    j["potential"] = pot;
    return j;
}

ModelSpec ModelSpec::from_json(const json& j) {
    reject_unknown_keys(j,
                        {"family", "custom_values", "example_kind", "alpha1", "alpha2", "sigma1", "sigma2", "c",
                         "c_tilde", "modes", "potential"},
                        "model");
    ModelSpec s;
    try {
        s.family.kind = family_kind_from_string(j.value("family", std::string("dirichlet_laplacian_inverse")));
        if (j.contains("custom_values")) s.family.custom_values = j.at("custom_values").get<std::vector<double>>();
        s.example_kind = j.contains("example_kind") ? example_kind_from_string(j.at("example_kind").get<std::string>())
                                                    : default_kind(s.family.kind);
        s.alpha1 = j.at("alpha1").get<double>();
        s.alpha2 = j.at("alpha2").get<double>();
        s.sigma1 = j.at("sigma1").get<double>();
        s.sigma2 = j.at("sigma2").get<double>();
        s.c = j.value("c", 1.0);
        s.c_tilde = j.value("c_tilde", 0.0);
        if (j.contains("modes")) {
            std::size_t k = 0;
            for (const auto& mj : j.at("modes")) {
                const std::string where = "model.modes[" + std::to_string(k++) + "]";
                reject_unknown_keys(mj, {"beta", "phi", "psi", "bounds"}, where);
                K22ModeSpec m;
                m.beta = mj.value("beta", 0.5);
                if (mj.contains("phi")) m.phi = Expr::from_json(mj.at("phi"));
                if (mj.contains("psi"))
                    for (const auto& t : mj.at("psi")) m.psi.push_back(ridge_from_json(t, where + ".psi"));
                if (mj.contains("bounds")) {
                    const auto& b = mj.at("bounds");
                    reject_unknown_keys(b, {"phi_prime_sup", "dpsi_sup", "phi_at_0", "psi_at_0"}, where + ".bounds");
                    m.bounds.phi_prime_sup = b.value("phi_prime_sup", 0.0);
                    m.bounds.dpsi_sup = b.value("dpsi_sup", 0.0);
                    m.bounds.phi_at_0 = b.value("phi_at_0", 0.0);
                    m.bounds.psi_at_0 = b.value("psi_at_0", 0.0);
                }
                s.modes.push_back(std::move(m));
            }
        }
        if (j.contains("potential")) {
            const auto& pj = j.at("potential");
            reject_unknown_keys(pj, {"phi", "phi_lower_bound", "phi_prime_sup", "quad_points", "phi2"},
                                "model.potential");
            if (pj.contains("phi")) s.potential.phi = Expr::from_json(pj.at("phi"));
            s.potential.phi_lower_bound = pj.value("phi_lower_bound", 0.0);
            if (pj.contains("phi_prime_sup")) s.potential.phi_prime_sup = pj.at("phi_prime_sup").get<double>();
            else if (s.potential.phi.is_constant()) s.potential.phi_prime_sup = 0.0;
            s.potential.quad_points = pj.value("quad_points", 512);
            if (pj.contains("phi2") && !pj.at("phi2").is_null()) {
                const auto& qj = pj.at("phi2");
                reject_unknown_keys(qj, {"amplitude", "g", "weights", "offset", "osc", "c_phi2"},
                                    "model.potential.phi2");
                Perturbation q;
                q.amplitude = qj.at("amplitude").get<double>();
                q.g = Expr::from_json(qj.at("g"));
                q.weights = qj.at("weights").get<std::vector<double>>();
                q.offset = qj.value("offset", 0.0);
                q.osc = qj.at("osc").get<double>();
                q.c_phi2 = qj.at("c_phi2").get<double>();
                s.potential.phi2 = std::move(q);
            }
        } else {
            s.potential.phi_prime_sup = 0.0;
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model: ") + e.what());
    }
    s.validate();
    return s;
}

std::string ModelSpec::hash() const {
    // FNV-1a over the canonical (key-sorted) JSON text.
    const std::string text = to_json().dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

K22Evaluator::K22Evaluator(const ModelSpec& spec, std::size_t n) : modes_(spec.modes) {
    floor_.resize(n);
    gamma_.assign(n, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        const double ls2 = power_eigen(spec.family, spec.sigma2, k);
        floor_[k - 1] = spec.c * ls2;
        if (spec.c_tilde > 0.0 && k <= modes_.size()) gamma_[k - 1] = spec.c_tilde * ls2 / modes_[k - 1].bounds.total();
    }
}

double K22Evaluator::eig(std::size_t k, std::span<const double> y) const {
    if (k == 0 || k > size()) throw IndexError("K22 mode index out of range");
    if (!variable(k)) return floor_[k - 1];
    if (y.size() < k) throw ValidationError("K22 mode " + std::to_string(k) + " needs at least k coordinates");
    const auto& m = modes_[k - 1];
    const double r = std::sqrt(norm_sq(y, k));
    const double var = m.phi.eval1(std::pow(r, m.beta + 1.0)).v + ridge_value(m.psi, y);
    return floor_[k - 1] + gamma_[k - 1] * var;
}

double K22Evaluator::eig_diag_grad(std::size_t k, std::span<const double> y, double& dkk) const {
    if (!variable(k)) {
        dkk = 0.0;
        return eig(k, y);
    }
    if (y.size() < k) throw ValidationError("K22 mode " + std::to_string(k) + " needs at least k coordinates");
    const auto& m = modes_[k - 1];
    const double r = std::sqrt(norm_sq(y, k));
    const auto ph = m.phi.eval1(std::pow(r, m.beta + 1.0));
    double val = ph.v, d = 0.0;
    if (r > 0.0) d = ph.d1 * (m.beta + 1.0) * std::pow(r, m.beta - 1.0) * y[k - 1];
    for (const auto& t : m.psi) {
        double arg = t.offset;
        for (std::size_t i = 0; i < t.weights.size(); ++i) arg += t.weights[i] * y[i];
        const auto g = t.g.eval1(arg);
        val += g.v;
        if (t.weights.size() >= k) d += g.d1 * t.weights[k - 1];
    }
    dkk = gamma_[k - 1] * d;
    return floor_[k - 1] + gamma_[k - 1] * val;
}

void K22Evaluator::grad(std::size_t k, std::span<const double> y, double* out) const {
    std::fill(out, out + k, 0.0);
    if (k == 0 || k > size()) throw IndexError("K22 mode index out of range");
    if (!variable(k)) return;
    if (y.size() < k) throw ValidationError("K22 mode " + std::to_string(k) + " needs at least k coordinates");
    const auto& m = modes_[k - 1];
    const double r = std::sqrt(norm_sq(y, k));
    if (r > 0.0) {
        const double s = m.phi.eval1(std::pow(r, m.beta + 1.0)).d1 * (m.beta + 1.0) * std::pow(r, m.beta - 1.0);
        for (std::size_t i = 0; i < k; ++i) out[i] = s * y[i];
    }
    ridge_grad(m.psi, y, out);
    for (std::size_t i = 0; i < k; ++i) out[i] *= gamma_[k - 1];
}

double k22_eig(const ModelSpec& spec, std::size_t k, std::span<const double> y) {
    return K22Evaluator(spec, k).eig(k, y);
}

std::vector<double> k22_eig_grad(const ModelSpec& spec, std::size_t k, std::span<const double> y) {
    std::vector<double> g(k);
    K22Evaluator(spec, k).grad(k, y, g.data());
    return g;
}

double basis_function(ExampleKind kind, std::size_t k, double xi) {
    const double w = static_cast<double>(k) * std::numbers::pi;
    if (kind == ExampleKind::cahn_hilliard) return std::numbers::sqrt2 * w * std::cos(w * xi);
    return std::numbers::sqrt2 * std::sin(w * xi);
}

PotentialEvaluator::PotentialEvaluator(const ModelSpec& spec, std::size_t n)
    : pot_(spec.potential), n_(n), q_(spec.potential.quad_points), trivial_(spec.potential.is_trivial()) {
    if (q_ < 2) throw ValidationError("potential.quad_points must be >= 2");
    if (!pot_.phi_is_constant()) {
        table_.resize(static_cast<std::size_t>(q_) * n_);
        for (int j = 0; j < q_; ++j) {
            const double xi = (j + 0.5) / q_;
            for (std::size_t k = 0; k < n_; ++k) table_[j * n_ + k] = basis_function(spec.example_kind, k + 1, xi);
        }
    }
}

double PotentialEvaluator::value(std::span<const double> u) const {
    if (u.size() < n_) throw ValidationError("coefficient vector shorter than potential dimension");
    double total = 0.0;
    if (pot_.phi_is_constant()) {
        total = pot_.phi.eval1(0.0).v;
    } else {
        for (int j = 0; j < q_; ++j) {
            const double* row = &table_[j * n_];
            double uj = 0.0;
            for (std::size_t k = 0; k < n_; ++k) uj += u[k] * row[k];
            total += pot_.phi.eval1(uj).v;
        }
        total /= q_;
    }
    if (pot_.phi2) {
        const auto& q = *pot_.phi2;
        double arg = q.offset;
        for (std::size_t k = 0; k < std::min(n_, q.weights.size()); ++k) arg += q.weights[k] * u[k];
        total += q.amplitude * q.g.eval1(arg).v;
    }
    return total;
}

double PotentialEvaluator::value_grad(std::span<const double> u, double* grad) const {
    if (u.size() < n_) throw ValidationError("coefficient vector shorter than potential dimension");
    std::fill(grad, grad + n_, 0.0);
    double total = 0.0;
    if (pot_.phi_is_constant()) {
        total = pot_.phi.eval1(0.0).v;
    } else {
        for (int j = 0; j < q_; ++j) {
            const double* row = &table_[j * n_];
            double uj = 0.0;
            for (std::size_t k = 0; k < n_; ++k) uj += u[k] * row[k];
            const auto d = pot_.phi.eval1(uj);
            total += d.v;
            for (std::size_t k = 0; k < n_; ++k) grad[k] += d.d1 * row[k];
        }
        total /= q_;
        for (std::size_t k = 0; k < n_; ++k) grad[k] /= q_;
    }
    if (pot_.phi2) {
        const auto& q = *pot_.phi2;
        const std::size_t m = std::min(n_, q.weights.size());
        double arg = q.offset;
        for (std::size_t k = 0; k < m; ++k) arg += q.weights[k] * u[k];
        const auto d = q.g.eval1(arg);
        total += q.amplitude * d.v;
        for (std::size_t k = 0; k < m; ++k) grad[k] += q.amplitude * d.d1 * q.weights[k];
    }
    return total;
}

double potential_value(const ModelSpec& spec, std::span<const double> u) {
    if (u.empty()) throw ValidationError("coefficient vector must be non-empty");
    return PotentialEvaluator(spec, u.size()).value(u);
}

double potential_grad_coeff(const ModelSpec& spec, std::span<const double> u, std::size_t k) {
    if (k == 0 || k > u.size()) throw IndexError("gradient coefficient index out of range");
    PotentialEvaluator ev(spec, u.size());
    std::vector<double> g(u.size());
    ev.value_grad(u, g.data());
    return g[k - 1];
}

} // namespace hypoco
