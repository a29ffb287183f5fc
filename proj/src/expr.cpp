#include "hypoco/expr.hpp"

#include "hypoco/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hypoco {

namespace {

struct Deriv {
    double v, d1, d2;
};

Deriv unary_derivs(Op op, double u) {
    switch (op) {
    case Op::sin: {
        const double s = std::sin(u), c = std::cos(u);
        return {s, c, -s};
    }
    case Op::cos: {
        const double s = std::sin(u), c = std::cos(u);
        return {c, -s, -c};
    }
    case Op::tanh: {
        const double t = std::tanh(u), sech2 = 1.0 - t * t;
        return {t, sech2, -2.0 * t * sech2};
    }
    case Op::softabs: {
        const double s = std::sqrt(1.0 + u * u);
        return {s, u / s, 1.0 / (s * s * s)};
    }
    case Op::logcosh: {
        const double au = std::abs(u);
        const double t = std::tanh(u);
        return {au + std::log1p(std::exp(-2.0 * au)) - std::numbers::ln2, t, 1.0 - t * t};
    }
    case Op::square: return {u * u, 2.0 * u, 2.0};
    default: break;
    }
    throw ValidationError("not a unary operation: " + to_string(op));
}

bool is_unary(Op op) {
    switch (op) {
    case Op::sin:
    case Op::cos:
    case Op::tanh:
    case Op::softabs:
    case Op::logcosh:
    case Op::square: return true;
    default: return false;
    }
}

const std::vector<std::pair<Op, const char*>> kOpNames = {
    {Op::constant, "const"}, {Op::variable, "var"}, {Op::add, "add"},         {Op::mul, "mul"},
    {Op::affine, "affine"},  {Op::sin, "sin"},      {Op::cos, "cos"},         {Op::tanh, "tanh"},
    {Op::softabs, "softabs"}, {Op::logcosh, "logcosh"}, {Op::square, "square"},
};

Op op_from_string(const std::string& s) {
    for (const auto& [op, name] : kOpNames)
        if (s == name) return op;
    throw ValidationError("unknown expression op '" + s + "'");
}

} // namespace

std::string to_string(Op op) {
    for (const auto& [o, name] : kOpNames)
        if (o == op) return name;
    return "?";
}

Expr Expr::constant(double c) {
    Expr e;
    e.nodes_.clear();
    e.nodes_.push_back(Node{Op::constant, c, 0.0, -1, {}});
    return e;
}

Expr Expr::variable(int index) {
    if (index < 0 || index >= kMaxDim)
        throw ValidationError("variable index " + std::to_string(index) + " out of range");
    Expr e;
    e.nodes_.clear();
    e.nodes_.push_back(Node{Op::variable, 0.0, 0.0, index, {}});
    return e;
}

int Expr::append(const Expr& other) {
    const int offset = static_cast<int>(nodes_.size());
    for (Node n : other.nodes_) {
        for (int& a : n.args) a += offset;
        nodes_.push_back(std::move(n));
    }
    return static_cast<int>(nodes_.size()) - 1;
}

Expr Expr::unary(Op op, const Expr& arg) {
    if (!is_unary(op)) throw ValidationError("not a unary operation: " + to_string(op));
    Expr e;
    e.nodes_.clear();
    const int root = e.append(arg);
    e.nodes_.push_back(Node{op, 0.0, 0.0, -1, {root}});
    return e;
}

Expr Expr::affine(double a, double b, const Expr& arg) {
    Expr e;
    e.nodes_.clear();
    const int root = e.append(arg);
    e.nodes_.push_back(Node{Op::affine, a, b, -1, {root}});
    return e;
}

Expr Expr::sum(const std::vector<Expr>& terms) {
    if (terms.empty()) return constant(0.0);
    if (terms.size() == 1) return terms.front();
    Expr e;
    e.nodes_.clear();
    std::vector<int> roots;
    for (const auto& t : terms) roots.push_back(e.append(t));
    e.nodes_.push_back(Node{Op::add, 0.0, 0.0, -1, roots});
    return e;
}

Expr Expr::product(const std::vector<Expr>& factors) {
    if (factors.empty()) return constant(1.0);
    if (factors.size() == 1) return factors.front();
    Expr e;
    e.nodes_.clear();
    std::vector<int> roots;
    for (const auto& f : factors) roots.push_back(e.append(f));
    e.nodes_.push_back(Node{Op::mul, 0.0, 0.0, -1, roots});
    return e;
}

int Expr::arity() const {
    int d = 0;
    for (const auto& n : nodes_)
        if (n.op == Op::variable) d = std::max(d, n.index + 1);
    return d;
}

bool Expr::is_constant() const { return arity() == 0; }

bool Expr::bounded() const {
    std::vector<char> b(nodes_.size(), 0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        switch (n.op) {
        case Op::constant: b[i] = 1; break;
        case Op::variable: b[i] = 0; break;
        case Op::sin:
        case Op::cos:
        case Op::tanh: b[i] = 1; break;
        default: {
            bool all = true;
            for (int a : n.args) all = all && b[a];
            b[i] = all;
        }
        }
    }
    return b.back() != 0;
}

template <int Order>
double Expr::eval(std::span<const double> z, int dim, double* grad, double* hess) const {
    const int ng = Order >= 1 ? dim : 0;
    const int nh = Order >= 2 ? dim * dim : 0;
    const int stride = 1 + ng + nh;
    thread_local std::vector<double> scratch;
    scratch.assign(nodes_.size() * static_cast<std::size_t>(stride), 0.0);
    auto V = [&](int i) -> double& { return scratch[static_cast<std::size_t>(i) * stride]; };
    auto G = [&](int i) { return scratch.data() + static_cast<std::size_t>(i) * stride + 1; };
    auto H = [&](int i) { return scratch.data() + static_cast<std::size_t>(i) * stride + 1 + ng; };

    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
        const Node& n = nodes_[i];
        switch (n.op) {
        case Op::constant: V(i) = n.a; break;
        case Op::variable:
            if (n.index >= static_cast<int>(z.size()))
                throw ValidationError("expression uses variable " + std::to_string(n.index) + " but only " +
                                      std::to_string(z.size()) + " values given");
            V(i) = z[n.index];
            if constexpr (Order >= 1) {
                if (n.index >= dim) throw ValidationError("derivative dimension too small for expression");
                G(i)[n.index] = 1.0;
            }
            break;
        case Op::add:
            for (int a : n.args) {
                V(i) += V(a);
                if constexpr (Order >= 1)
                    for (int k = 0; k < ng; ++k) G(i)[k] += G(a)[k];
                if constexpr (Order >= 2)
                    for (int k = 0; k < nh; ++k) H(i)[k] += H(a)[k];
            }
            break;
        case Op::mul: {
            // Fold factors left to right into node i.
            const int first = n.args[0];
            V(i) = V(first);
            if constexpr (Order >= 1) std::copy(G(first), G(first) + ng, G(i));
            if constexpr (Order >= 2) std::copy(H(first), H(first) + nh, H(i));
            for (std::size_t j = 1; j < n.args.size(); ++j) {
                const int b = n.args[j];
                const double va = V(i), vb = V(b);
                if constexpr (Order >= 2) {
                    double* ha = H(i);
                    const double* ga = G(i);
                    const double* gb = G(b);
                    const double* hb = H(b);
                    for (int r = 0; r < dim; ++r)
                        for (int c = 0; c < dim; ++c)
                            ha[r * dim + c] = vb * ha[r * dim + c] + va * hb[r * dim + c] + ga[r] * gb[c] +
                                              gb[r] * ga[c];
                }
                if constexpr (Order >= 1) {
                    double* ga = G(i);
                    const double* gb = G(b);
                    for (int k = 0; k < ng; ++k) ga[k] = vb * ga[k] + va * gb[k];
                }
                V(i) = va * vb;
            }
            break;
        }
        case Op::affine: {
            const int a = n.args[0];
            V(i) = n.a * V(a) + n.b;
            if constexpr (Order >= 1)
                for (int k = 0; k < ng; ++k) G(i)[k] = n.a * G(a)[k];
            if constexpr (Order >= 2)
                for (int k = 0; k < nh; ++k) H(i)[k] = n.a * H(a)[k];
            break;
        }
        default: {
            const int a = n.args[0];
            if constexpr (Order == 0) {
                V(i) = unary_derivs(n.op, V(a)).v;
            } else {
                const Deriv d = unary_derivs(n.op, V(a));
                V(i) = d.v;
                const double* ga = G(a);
                for (int k = 0; k < ng; ++k) G(i)[k] = d.d1 * ga[k];
                if constexpr (Order >= 2) {
                    const double* ha = H(a);
                    double* hi = H(i);
                    for (int r = 0; r < dim; ++r)
                        for (int c = 0; c < dim; ++c)
                            hi[r * dim + c] = d.d1 * ha[r * dim + c] + d.d2 * ga[r] * ga[c];
                }
            }
        }
        }
    }
    const int root = static_cast<int>(nodes_.size()) - 1;
    if constexpr (Order >= 1) std::copy(G(root), G(root) + ng, grad);
    if constexpr (Order >= 2) std::copy(H(root), H(root) + nh, hess);
    return V(root);
}

double Expr::value(std::span<const double> z) const { return eval<0>(z, 0, nullptr, nullptr); }

double Expr::value_grad(std::span<const double> z, int dim, double* grad) const {
    if (dim > kMaxDim) throw ValidationError("jet dimension exceeds limit");
    return eval<1>(z, dim, grad, nullptr);
}

double Expr::jet(std::span<const double> z, int dim, double* grad, double* hess) const {
    if (dim > kMaxDim) throw ValidationError("jet dimension exceeds limit");
    return eval<2>(z, dim, grad, hess);
}

Expr::Scalar Expr::eval1(double t) const {
    // Forward-mode second-order jet in one variable; avoids the general scratch layout.
    constexpr std::size_t kSmall = 64;
    Deriv small[kSmall];
    std::vector<Deriv> big;
    Deriv* d = small;
    if (nodes_.size() > kSmall) {
        big.resize(nodes_.size());
        d = big.data();
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        switch (n.op) {
        case Op::constant: d[i] = {n.a, 0.0, 0.0}; break;
        case Op::variable: d[i] = {t, n.index == 0 ? 1.0 : 0.0, 0.0}; break;
        case Op::add: {
            Deriv s{0.0, 0.0, 0.0};
            for (int a : n.args) s = {s.v + d[a].v, s.d1 + d[a].d1, s.d2 + d[a].d2};
            d[i] = s;
            break;
        }
        case Op::mul: {
            Deriv s = d[n.args[0]];
            for (std::size_t j = 1; j < n.args.size(); ++j) {
                const Deriv& b = d[n.args[j]];
                s = {s.v * b.v, s.d1 * b.v + s.v * b.d1, s.d2 * b.v + 2.0 * s.d1 * b.d1 + s.v * b.d2};
            }
            d[i] = s;
            break;
        }
        case Op::affine: {
            const Deriv& a = d[n.args[0]];
            d[i] = {n.a * a.v + n.b, n.a * a.d1, n.a * a.d2};
            break;
        }
        default: {
            const Deriv& a = d[n.args[0]];
            const Deriv h = unary_derivs(n.op, a.v);
            d[i] = {h.v, h.d1 * a.d1, h.d1 * a.d2 + h.d2 * a.d1 * a.d1};
        }
        }
    }
    const Deriv& r = d[nodes_.size() - 1];
    return {r.v, r.d1, r.d2};
}

nlohmann::json Expr::to_json() const {
    std::vector<nlohmann::json> built(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        nlohmann::json j;
        j["op"] = to_string(n.op);
        switch (n.op) {
        case Op::constant: j["value"] = n.a; break;
        case Op::variable: j["index"] = n.index; break;
        case Op::add:
        case Op::mul: {
            auto args = nlohmann::json::array();
            for (int a : n.args) args.push_back(built[a]);
            j["args"] = args;
            break;
        }
        case Op::affine:
            j["a"] = n.a;
            j["b"] = n.b;
            j["arg"] = built[n.args[0]];
            break;
        default: j["arg"] = built[n.args[0]];
        }
        built[i] = std::move(j);
    }
    return built.back();
}

Expr Expr::from_json(const nlohmann::json& j) {
    if (j.is_number()) return constant(j.get<double>());
    if (!j.is_object() || !j.contains("op")) throw ValidationError("expression must be a number or an object with 'op'");
    const std::string name = j.at("op").get<std::string>();
    auto check_keys = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [key, _] : j.items()) {
            bool ok = key == "op";
            for (const char* a : allowed) ok = ok || key == a;
            if (!ok) throw ValidationError("unknown key '" + key + "' in expression '" + name + "'");
        }
    };
    const Op op = op_from_string(name);
    switch (op) {
    case Op::constant: check_keys({"value"}); return constant(j.at("value").get<double>());
    case Op::variable: check_keys({"index"}); return variable(j.value("index", 0));
    case Op::add:
    case Op::mul: {
        check_keys({"args"});
        std::vector<Expr> args;
        for (const auto& a : j.at("args")) args.push_back(from_json(a));
        if (args.empty()) throw ValidationError("'" + name + "' needs at least one argument");
        return op == Op::add ? sum(args) : product(args);
    }
    case Op::affine:
        check_keys({"a", "b", "arg"});
        return affine(j.value("a", 1.0), j.value("b", 0.0), from_json(j.at("arg")));
    default: check_keys({"arg"}); return unary(op, from_json(j.value("arg", nlohmann::json{{"op", "var"}})));
    }
}

} // namespace hypoco
