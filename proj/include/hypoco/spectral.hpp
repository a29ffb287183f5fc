#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hypoco {

enum class FamilyKind { dirichlet_laplacian_inverse, neumann_bilaplacian_inverse, custom };

std::string to_string(FamilyKind kind);
FamilyKind family_kind_from_string(const std::string& s);

struct EigenFamily {
    FamilyKind kind = FamilyKind::dirichlet_laplacian_inverse;
    std::vector<double> custom_values;

    static EigenFamily dirichlet() { return {FamilyKind::dirichlet_laplacian_inverse, {}}; }
    static EigenFamily bilaplacian() { return {FamilyKind::neumann_bilaplacian_inverse, {}}; }
    static EigenFamily custom(std::vector<double> values);

    // Number of eigenvalues, empty for the infinite families.
    std::optional<std::size_t> size() const;

    // Σ λ_k^θ converges iff θ is strictly above this value.
    double convergence_threshold() const;

    void validate() const;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double mid() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
    bool contains(double v) const { return lo <= v && v <= hi; }
};

Interval operator+(const Interval& a, const Interval& b);

double eigen(const EigenFamily& family, std::size_t k);
double power_eigen(const EigenFamily& family, double theta, std::size_t k);

// Enclosure of Σ_{k=first}^{last} λ_k^θ (empty range gives [0,0]).
Interval partial_sum(const EigenFamily& family, double theta, std::size_t first, std::size_t last);

// Enclosure of Σ_{k>K} λ_k^θ.
Interval tail_sum(const EigenFamily& family, double theta, std::size_t K);

bool series_converges(const EigenFamily& family, double theta);

// sup_k λ_k^θ and inf_k λ_k^θ over the whole family (may be +inf or 0).
double sup_power(const EigenFamily& family, double theta);
double inf_power(const EigenFamily& family, double theta);

} // namespace hypoco
