#include "hypoco/spectral.hpp"

#include "hypoco/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace hypoco {

namespace {

// Explicit terms summed before switching to the integral comparison.
constexpr std::size_t kExplicitTerms = 256;
constexpr std::size_t kMaxExplicitRange = 2'000'000;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// λ_k = (kπ)^{-d} with d = 2 (Dirichlet) or 4 (bilaplacian).
double decay_order(FamilyKind kind) {
    return kind == FamilyKind::dirichlet_laplacian_inverse ? 2.0 : 4.0;
}

// ∫_a^∞ (xπ)^{-p} dx for p > 1.
double tail_integral(double p, double a) {
    return std::pow(std::numbers::pi, -p) * std::pow(a, 1.0 - p) / (p - 1.0);
}

Interval widen(double lo, double hi, std::size_t terms) {
    const double rel = static_cast<double>(terms + 16) * kEps;
    lo = lo - std::abs(lo) * rel;
    hi = hi + std::abs(hi) * rel;
    return {std::max(lo, 0.0), hi};
}

double explicit_sum(const EigenFamily& family, double theta, std::size_t first, std::size_t last) {
    // Smallest terms first.
    double s = 0.0;
    for (std::size_t k = last; k >= first; --k) {
        s += power_eigen(family, theta, k);
        if (k == first) break;
    }
    return s;
}

} // namespace

std::string to_string(FamilyKind kind) {
    switch (kind) {
    case FamilyKind::dirichlet_laplacian_inverse: return "dirichlet_laplacian_inverse";
    case FamilyKind::neumann_bilaplacian_inverse: return "neumann_bilaplacian_inverse";
    case FamilyKind::custom: return "custom";
    }
    return "unknown";
}

FamilyKind family_kind_from_string(const std::string& s) {
    if (s == "dirichlet_laplacian_inverse") return FamilyKind::dirichlet_laplacian_inverse;
    if (s == "neumann_bilaplacian_inverse") return FamilyKind::neumann_bilaplacian_inverse;
    if (s == "custom") return FamilyKind::custom;
    throw ValidationError("unknown eigen family '" + s + "'");
}

Interval operator+(const Interval& a, const Interval& b) {
    return {a.lo + b.lo, a.hi + b.hi};
}

EigenFamily EigenFamily::custom(std::vector<double> values) {
    EigenFamily f{FamilyKind::custom, std::move(values)};
    f.validate();
    return f;
}

std::optional<std::size_t> EigenFamily::size() const {
    if (kind == FamilyKind::custom) return custom_values.size();
    return std::nullopt;
}

double EigenFamily::convergence_threshold() const {
    switch (kind) {
    case FamilyKind::dirichlet_laplacian_inverse: return 0.5;
    case FamilyKind::neumann_bilaplacian_inverse: return 0.25;
    case FamilyKind::custom: return -std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

void EigenFamily::validate() const {
    if (kind != FamilyKind::custom) return;
    if (custom_values.empty()) throw ValidationError("custom eigen family needs at least one value");
    for (std::size_t i = 0; i < custom_values.size(); ++i) {
        const double v = custom_values[i];
        if (!(v > 0.0) || !std::isfinite(v))
            throw ValidationError("custom eigenvalue " + std::to_string(i + 1) + " is not a positive finite number");
        if (i > 0 && v > custom_values[i - 1])
            throw ValidationError("custom eigenvalues must be non-increasing");
    }
}

double eigen(const EigenFamily& family, std::size_t k) {
    return power_eigen(family, 1.0, k);
}

double power_eigen(const EigenFamily& family, double theta, std::size_t k) {
    if (k == 0) throw IndexError("eigenvalue index starts at 1");
    if (family.kind == FamilyKind::custom) {
        if (k > family.custom_values.size())
            throw IndexError("eigenvalue index " + std::to_string(k) + " beyond custom family of length " +
                             std::to_string(family.custom_values.size()));
        return std::pow(family.custom_values[k - 1], theta);
    }
    const double d = decay_order(family.kind);
    return std::pow(static_cast<double>(k) * std::numbers::pi, -d * theta);
}

bool series_converges(const EigenFamily& family, double theta) {
    return family.kind == FamilyKind::custom || theta > family.convergence_threshold();
}

Interval partial_sum(const EigenFamily& family, double theta, std::size_t first, std::size_t last) {
    if (first == 0) first = 1;
    if (auto n = family.size()) last = std::min(last, *n);
    if (last < first) return {0.0, 0.0};
    const std::size_t count = last - first + 1;
    if (count <= kMaxExplicitRange || !series_converges(family, theta)) {
        const double s = explicit_sum(family, theta, first, last);
        return widen(s, s, count);
    }
    const Interval a = tail_sum(family, theta, first - 1);
    const Interval b = tail_sum(family, theta, last);
    return {std::max(a.lo - b.hi, 0.0), a.hi - b.lo};
}

Interval tail_sum(const EigenFamily& family, double theta, std::size_t K) {
    if (family.kind == FamilyKind::custom) {
        const std::size_t n = family.custom_values.size();
        if (K >= n) return {0.0, 0.0};
        const double s = explicit_sum(family, theta, K + 1, n);
        return widen(s, s, n - K);
    }
    if (!series_converges(family, theta))
        throw DivergentSeriesError("series of eigenvalue powers diverges for theta = " + std::to_string(theta) +
                                   " (threshold " + std::to_string(family.convergence_threshold()) + ")");
    const double p = decay_order(family.kind) * theta;
    const std::size_t N = K + kExplicitTerms;
    const double s = explicit_sum(family, theta, K + 1, N);
    const double fN = std::pow(static_cast<double>(N) * std::numbers::pi, -p);
    const double nd = static_cast<double>(N);
    // Convex decreasing terms: trapezoid and midpoint comparisons bracket the remainder.
    const double lo = s + tail_integral(p, nd) - 0.5 * fN;
    const double hi = s + tail_integral(p, nd + 0.5);
    return widen(lo, hi, kExplicitTerms);
}

double sup_power(const EigenFamily& family, double theta) {
    if (theta == 0.0) return 1.0;
    if (family.kind == FamilyKind::custom) {
        const double first = power_eigen(family, theta, 1);
        const double last = power_eigen(family, theta, family.custom_values.size());
        return std::max(first, last);
    }
    if (theta > 0.0) return power_eigen(family, theta, 1);
    return std::numeric_limits<double>::infinity();
}

double inf_power(const EigenFamily& family, double theta) {
    if (theta == 0.0) return 1.0;
    if (family.kind == FamilyKind::custom) {
        const double first = power_eigen(family, theta, 1);
        const double last = power_eigen(family, theta, family.custom_values.size());
        return std::min(first, last);
    }
    if (theta < 0.0) return power_eigen(family, theta, 1);
    return 0.0;
}

} // namespace hypoco
