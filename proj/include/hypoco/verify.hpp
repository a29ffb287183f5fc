#pragma once

#include "hypoco/assumptions.hpp"
#include "hypoco/galerkin.hpp"
#include "hypoco/rates.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hypoco {

enum class Method { gauss_hermite, monte_carlo };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct VerifyOptions {
    Method method = Method::gauss_hermite;
    int nodes = 40;                    // Gauss–Hermite nodes per dimension
    std::size_t samples = 1'000'000;   // Monte Carlo sample count
    std::size_t max_points = 60'000'000; // quadrature budget per rule
    std::uint64_t seed = 1;
    unsigned workers = 1;
    double eq_tol = 1e-6;              // relative tolerance for equalities under quadrature
    double reg_alpha = 1.0;            // α in the K22 regularity identity
    double nreg_lambda = 1.0;          // λ in the N regularity estimate
    // Hypocoercivity constants for micro/macro; computed from the spec when absent.
    std::optional<HypocoercivityConstants> constants;
};

struct CheckResult {
    std::string name;
    std::size_t pair = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;
    double err = 0.0; // quadrature difference m vs m+4, or MC standard error of lhs − rhs
    Method method = Method::gauss_hermite;
    Verdict verdict = Verdict::not_checkable;
    bool partial = false;
    std::string detail;

    bool passed() const { return verdict == Verdict::pass; }
    nlohmann::json to_json() const;
};

using TestPair = std::pair<CylinderFunction, CylinderFunction>;

enum class CorpusKind { mixed, x_only, y_only };

// Deterministic corpus c0 + amp·Π h_a(<w_a, z> + b_a), h ∈ {sin, cos, tanh}, with weights
// scaled by the coordinate standard deviations of the truncation.
std::vector<CylinderFunction> make_corpus(const GalerkinSystem& sys, std::size_t fn, std::size_t count,
                                          std::uint64_t seed, CorpusKind kind = CorpusKind::mixed);
std::vector<TestPair> make_test_pairs(const GalerkinSystem& sys, std::size_t fn, std::size_t count,
                                      std::uint64_t seed, CorpusKind kind = CorpusKind::mixed);
// f_i = x_i and g_i = y_i, i = 1..fn.
std::vector<CylinderFunction> linear_family(std::size_t fn);

const std::vector<std::string>& check_names();

struct InnerProduct {
    double value = 0.0;
    double err = 0.0;
    bool partial = false;
};

InnerProduct inner_product(const CylinderFunction& f, const CylinderFunction& g, const ModelSpec& spec, std::size_t n,
                           const VerifyOptions& opt = {});

// One result per (name, pair); single-function checks use pair.first. micro and macro
// also emit micro_derived / macro_derived for the alternative constants.
std::vector<CheckResult> run_check(const std::string& name, const ModelSpec& spec, std::size_t n,
                                   const std::vector<TestPair>& testset, const VerifyOptions& opt = {});
// Several checks sharing one pass over the measure rule.
std::vector<CheckResult> run_checks(const std::vector<std::string>& names, const ModelSpec& spec, std::size_t n,
                                    const std::vector<TestPair>& testset, const VerifyOptions& opt = {});

} // namespace hypoco
