#include "hypoco/galerkin.hpp"

#include "hypoco/error.hpp"

#include <cmath>

namespace hypoco {

CylinderFunction::CylinderFunction(std::size_t n, Expr expr) : n_(n), expr_(std::move(expr)) {
    if (n == 0) throw ValidationError("cylinder function needs n >= 1");
    if (2 * n > static_cast<std::size_t>(Expr::kMaxDim))
        throw ValidationError("cylinder function base dimension too large");
    if (static_cast<std::size_t>(expr_.arity()) > 2 * n)
        throw ValidationError("cylinder expression uses variables beyond 2n");
    bounded_ = expr_.bounded();
}

CylinderFunction CylinderFunction::x_coord(std::size_t n, std::size_t i) {
    if (i == 0 || i > n) throw IndexError("coordinate index out of range");
    return {n, Expr::variable(static_cast<int>(i - 1))};
}

CylinderFunction CylinderFunction::y_coord(std::size_t n, std::size_t i) {
    if (i == 0 || i > n) throw IndexError("coordinate index out of range");
    return {n, Expr::variable(static_cast<int>(n + i - 1))};
}

CylinderFunction CylinderFunction::constant(std::size_t n, double c) { return {n, Expr::constant(c)}; }

bool CylinderFunction::x_only() const {
    for (const auto& nd : expr_.nodes())
        if (nd.op == Op::variable && static_cast<std::size_t>(nd.index) >= n_) return false;
    return true;
}

bool CylinderFunction::y_only() const {
    for (const auto& nd : expr_.nodes())
        if (nd.op == Op::variable && static_cast<std::size_t>(nd.index) < n_) return false;
    return true;
}

double CylinderFunction::value(std::span<const double> x, std::span<const double> y) const {
    if (x.size() < n_ || y.size() < n_) throw ValidationError("point dimension smaller than cylinder base");
    double z[Expr::kMaxDim];
    for (std::size_t i = 0; i < n_; ++i) {
        z[i] = x[i];
        z[n_ + i] = y[i];
    }
    return expr_.value(std::span<const double>(z, 2 * n_));
}

double CylinderFunction::value_grad(std::span<const double> z, double* grad) const {
    return expr_.value_grad(z, static_cast<int>(2 * n_), grad);
}

double CylinderFunction::jet(std::span<const double> z, double* grad, double* hess) const {
    return expr_.jet(z, static_cast<int>(2 * n_), grad, hess);
}

nlohmann::json CylinderFunction::to_json() const { return {{"n", n_}, {"expr", expr_.to_json()}}; }

CylinderFunction CylinderFunction::from_json(const nlohmann::json& j) {
    for (const auto& [key, _] : j.items())
        if (key != "n" && key != "expr") throw ValidationError("unknown key '" + key + "' in test function");
    return {j.at("n").get<std::size_t>(), Expr::from_json(j.at("expr"))};
}

GalerkinSystem::GalerkinSystem(const ModelSpec& spec, std::size_t n)
    : spec_(spec), n_(n), k22_(spec, n), pot_(spec, n) {
    if (n == 0) throw ValidationError("Galerkin truncation needs n >= 1");
    if (auto sz = spec.family.size(); sz && n > *sz)
        throw ValidationError("truncation n exceeds the custom family length");
    auto pw = [&](double th, std::size_t k) { return power_eigen(spec.family, th, k); };
    for (std::size_t k = 1; k <= n; ++k) {
        lambda_.push_back(pw(1.0, k));
        q1_.push_back(pw(spec.alpha1, k));
        q2_.push_back(pw(spec.alpha2, k));
        k12_.push_back(pw(spec.sigma1, k));
        coup_.push_back(pw(spec.sigma1 - spec.alpha2, k));
        restore_.push_back(pw(spec.sigma1 - spec.alpha1, k));
        inv_q1_.push_back(pw(-spec.alpha1, k));
        inv_q2_.push_back(pw(-spec.alpha2, k));
    }
}

std::vector<double> GalerkinSystem::sigma(std::span<const double> y) const {
    std::vector<double> s(n_);
    for (std::size_t k = 1; k <= n_; ++k) s[k - 1] = k22_.eig(k, y);
    return s;
}

void GalerkinSystem::sigma_diag_grad(std::span<const double> y, double* sig, double* dsig) const {
    for (std::size_t k = 1; k <= n_; ++k) sig[k - 1] = k22_.eig_diag_grad(k, y, dsig[k - 1]);
}

double GalerkinSystem::potential_grad(std::span<const double> x, double* dphi) const {
    if (pot_.trivial()) {
        std::fill(dphi, dphi + n_, 0.0);
        return 0.0;
    }
    return pot_.value_grad(x, dphi);
}

void GalerkinSystem::fill_point(PointData& p) const {
    p.dphi.resize(n_);
    p.sig.resize(n_);
    p.dsig.resize(n_);
    potential_grad(p.x, p.dphi.data());
    sigma_diag_grad(p.y, p.sig.data(), p.dsig.data());
}

PointData GalerkinSystem::point(std::span<const double> x, std::span<const double> y) const {
    if (x.size() != n_ || y.size() != n_) throw ValidationError("point dimension does not match the truncation");
    PointData p;
    p.x.assign(x.begin(), x.end());
    p.y.assign(y.begin(), y.end());
    fill_point(p);
    return p;
}

void GalerkinSystem::drift(std::span<const double> x, std::span<const double> y, double* dx, double* dy) const {
    if (x.size() != n_ || y.size() != n_) throw ValidationError("state dimension does not match the truncation");
    double sig[64], dsig[64], dphi[64];
    std::vector<double> big;
    double *ps = sig, *pd = dsig, *pp = dphi;
    if (n_ > 64) {
        big.resize(3 * n_);
        ps = big.data();
        pd = ps + n_;
        pp = pd + n_;
    }
    sigma_diag_grad(y, ps, pd);
    potential_grad(x, pp);
    for (std::size_t i = 0; i < n_; ++i) {
        dx[i] = coup_[i] * y[i];
        dy[i] = pd[i] - inv_q2_[i] * ps[i] * y[i] - restore_[i] * x[i] - k12_[i] * pp[i];
    }
}

std::vector<double> GalerkinSystem::diffusion(std::span<const double> y) const {
    if (y.size() != n_) throw ValidationError("state dimension does not match the truncation");
    auto s = sigma(y);
    for (auto& v : s) v = noise_scale_ * std::sqrt(2.0 * v);
    return s;
}

GalerkinSystem build(const ModelSpec& spec, std::size_t n) {
    spec.validate();
    return GalerkinSystem(spec, n);
}

OpValues apply_ops(const GalerkinSystem& sys, std::size_t fn, const double* grad, const double* hess,
                   const PointData& p) {
    const std::size_t d = 2 * fn;
    OpValues r;
    for (std::size_t k = 0; k < fn; ++k) {
        const double gx = grad[k];
        const double gy = grad[fn + k];
        const double hyy = hess[(fn + k) * d + fn + k];
        r.S += p.sig[k] * hyy + p.dsig[k] * gy - p.sig[k] * sys.inv_q2()[k] * p.y[k] * gy;
        r.A += sys.k12()[k] * (sys.inv_q1()[k] * p.x[k] + p.dphi[k]) * gy - sys.coupling()[k] * p.y[k] * gx;
    }
    r.L = r.S - r.A;
    return r;
}

OpValues apply_ops(const GalerkinSystem& sys, const CylinderFunction& f, std::span<const double> x,
                   std::span<const double> y) {
    if (f.n() > sys.n()) throw ValidationError("test function base dimension exceeds the truncation");
    const PointData p = sys.point(x, y);
    const std::size_t fn = f.n();
    double z[Expr::kMaxDim], g[Expr::kMaxDim], h[Expr::kMaxDim * Expr::kMaxDim];
    for (std::size_t i = 0; i < fn; ++i) {
        z[i] = x[i];
        z[fn + i] = y[i];
    }
    f.jet(std::span<const double>(z, 2 * fn), g, h);
    return apply_ops(sys, fn, g, h, p);
}

} // namespace hypoco
