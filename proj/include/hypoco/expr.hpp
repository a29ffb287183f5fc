#pragma once

#include <json.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hypoco {

enum class Op { constant, variable, add, mul, affine, sin, cos, tanh, softabs, logcosh, square };

// Smooth expression over variables z_0..z_{d-1}. Nodes are stored in
// topological order; the root is the last node.
class Expr {
public:
    static constexpr int kMaxDim = 16;

    struct Node {
        Op op = Op::constant;
        double a = 0.0; // constant value, or affine slope
        double b = 0.0; // affine offset
        int index = -1; // variable index
        std::vector<int> args;
    };

    Expr() : nodes_{Node{}} {}

    static Expr constant(double c);
    static Expr variable(int index);
    static Expr unary(Op op, const Expr& arg);
    static Expr affine(double a, double b, const Expr& arg);
    static Expr sum(const std::vector<Expr>& terms);
    static Expr product(const std::vector<Expr>& factors);

    friend Expr operator+(const Expr& l, const Expr& r) { return sum({l, r}); }
    friend Expr operator*(const Expr& l, const Expr& r) { return product({l, r}); }
    friend Expr operator*(double k, const Expr& e) { return affine(k, 0.0, e); }

    // Number of variables referenced (max index + 1).
    int arity() const;
    bool is_constant() const;
    // True when the expression is bounded on all of R^d by construction.
    bool bounded() const;
    const std::vector<Node>& nodes() const { return nodes_; }

    double value(std::span<const double> z) const;
    // Value and gradient; grad has length dim.
    double value_grad(std::span<const double> z, int dim, double* grad) const;
    // Value, gradient and row-major dim×dim Hessian.
    double jet(std::span<const double> z, int dim, double* grad, double* hess) const;

    // Univariate helpers (variable 0).
    struct Scalar {
        double v, d1, d2;
    };
    Scalar eval1(double t) const;

    nlohmann::json to_json() const;
    static Expr from_json(const nlohmann::json& j);

private:
    std::vector<Node> nodes_;

    int append(const Expr& other);
    template <int Order>
    double eval(std::span<const double> z, int dim, double* grad, double* hess) const;
};

std::string to_string(Op op);

} // namespace hypoco
