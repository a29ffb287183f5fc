#include "hypoco/quadrature.hpp"

#include "hypoco/error.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>

namespace hypoco {

const GaussRule& gauss_hermite_rule(int m) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    if (m < 1 || m > 400) throw ValidationError("Gauss-Hermite node count must lie in [1, 400]");
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[m];
    if (slot) return *slot;
    // Jacobi matrix of the monic He_k recurrence: off-diagonal √k.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    for (int k = 1; k < m; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success) throw NumericalError("Gauss-Hermite eigenproblem failed");
    auto rule = std::make_unique<GaussRule>();
    rule->nodes.resize(m);
    rule->weights.resize(m);
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        rule->nodes[i] = es.eigenvalues()(i);
        const double v = es.eigenvectors()(0, i);
        rule->weights[i] = v * v;
        total += v * v;
    }
    for (auto& w : rule->weights) w /= total;
    // Symmetrize the rule to remove eigen-solver asymmetry.
    for (int i = 0; i < m / 2; ++i) {
        const int j = m - 1 - i;
        const double x = 0.5 * (rule->nodes[j] - rule->nodes[i]);
        const double w = 0.5 * (rule->weights[i] + rule->weights[j]);
        rule->nodes[i] = -x;
        rule->nodes[j] = x;
        rule->weights[i] = rule->weights[j] = w;
    }
    if (m % 2 == 1) rule->nodes[m / 2] = 0.0;
    slot = std::move(rule);
    return *slot;
}

} // namespace hypoco
