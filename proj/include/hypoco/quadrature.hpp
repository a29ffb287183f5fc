#pragma once

#include <vector>

namespace hypoco {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights; // sum to 1
};

// m-point Gauss–Hermite rule for the standard normal density (probabilists' weight),
// from the Golub–Welsch eigenproblem. Cached per m; thread-safe.
const GaussRule& gauss_hermite_rule(int m);

} // namespace hypoco
