#include "hypoco/verify.hpp"

#include "hypoco/error.hpp"
#include "hypoco/parallel.hpp"
#include "hypoco/quadrature.hpp"
#include "hypoco/rng.hpp"
#include "hypoco/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

namespace hypoco {

namespace {

constexpr int kD = Expr::kMaxDim;
constexpr std::size_t kChunk = 1024;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Derivatives of f and g at one point, padded to the truncation dimension.
struct PointEval {
    const GalerkinSystem* sys = nullptr;
    const PointData* p = nullptr;
    double f = 0.0, g = 0.0;
    double fx[kD / 2] = {}, fy[kD / 2] = {}, gx[kD / 2] = {}, gy[kD / 2] = {};
    double hxx[kD / 2 * kD / 2] = {}; // x-block Hessian of f, n × n
    OpValues of, og;
};

class PointEvaluator {
public:
    PointEvaluator(const GalerkinSystem& sys, const CylinderFunction& f, const CylinderFunction& g)
        : sys_(&sys), f_(&f), g_(&g) {}

    void eval(const PointData& p, PointEval& e) const {
        const std::size_t n = sys_->n();
        e.sys = sys_;
        e.p = &p;
        double z[kD], grad[kD], hess[kD * kD];
        // f
        {
            const std::size_t fn = f_->n();
            for (std::size_t k = 0; k < fn; ++k) {
                z[k] = p.x[k];
                z[fn + k] = p.y[k];
            }
            e.f = f_->jet(std::span<const double>(z, 2 * fn), grad, hess);
            std::fill(e.fx, e.fx + n, 0.0);
            std::fill(e.fy, e.fy + n, 0.0);
            std::fill(e.hxx, e.hxx + n * n, 0.0);
            for (std::size_t k = 0; k < fn; ++k) {
                e.fx[k] = grad[k];
                e.fy[k] = grad[fn + k];
                for (std::size_t l = 0; l < fn; ++l) e.hxx[k * n + l] = hess[k * 2 * fn + l];
            }
            e.of = apply_ops(*sys_, fn, grad, hess, p);
        }
        // g
        {
            const std::size_t gn = g_->n();
            for (std::size_t k = 0; k < gn; ++k) {
                z[k] = p.x[k];
                z[gn + k] = p.y[k];
            }
            e.g = g_->jet(std::span<const double>(z, 2 * gn), grad, hess);
            std::fill(e.gx, e.gx + n, 0.0);
            std::fill(e.gy, e.gy + n, 0.0);
            for (std::size_t k = 0; k < gn; ++k) {
                e.gx[k] = grad[k];
                e.gy[k] = grad[gn + k];
            }
            e.og = apply_ops(*sys_, gn, grad, hess, p);
        }
    }

private:
    const GalerkinSystem* sys_;
    const CylinderFunction* f_;
    const CylinderFunction* g_;
};

enum class Rel { eq, le, ge };

struct Relation {
    double lhs = 0.0, rhs = 0.0;
    Rel kind = Rel::eq;
    std::string label;
};

struct CheckDef {
    std::string name;
    int ncomp = 0;
    std::function<void(const PointEval&, double*)> integrand;
    std::function<std::vector<Relation>(const double*)> relations;
    // Set when the check cannot run on this pair.
    std::optional<Verdict> skip;
    std::string skip_reason;
    // ibp reports the worst of its relations instead of the first.
    bool report_worst = false;
};

// Accumulated integrals of all components for one measure rule.
struct RuleResult {
    std::vector<double> mean;
    // Monte Carlo only: covariance of the mean estimate, per check block (row-major).
    std::vector<std::vector<double>> cov;
    std::size_t points = 0;
};

struct Layout {
    std::vector<int> offset;
    int total = 0;
};

Layout layout_of(const std::vector<CheckDef>& defs) {
    Layout l;
    for (const auto& d : defs) {
        l.offset.push_back(l.total);
        l.total += d.skip ? 0 : d.ncomp;
    }
    return l;
}

void eval_components(const std::vector<CheckDef>& defs, const Layout& lay, const PointEval& e, double* out) {
    for (std::size_t i = 0; i < defs.size(); ++i)
        if (!defs[i].skip) defs[i].integrand(e, out + lay.offset[i]);
}

RuleResult run_gauss_hermite(const GalerkinSystem& sys, const PointEvaluator& pe, const std::vector<CheckDef>& defs,
                             const Layout& lay, int m, unsigned workers) {
    const std::size_t n = sys.n();
    const GaussRule& rule = gauss_hermite_rule(m);
    std::size_t per_block = 1;
    for (std::size_t k = 0; k < n; ++k) per_block *= static_cast<std::size_t>(m);

    // y-block table: points, weights, λ22 and its diagonal derivative.
    std::vector<double> ytab(per_block * n), ywt(per_block), sigtab(per_block * n), dsigtab(per_block * n);
    for (std::size_t b = 0; b < per_block; ++b) {
        std::size_t r = b;
        double w = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t j = r % m;
            r /= m;
            ytab[b * n + k] = std::sqrt(sys.q2()[k]) * rule.nodes[j];
            w *= rule.weights[j];
        }
        ywt[b] = w;
        sys.sigma_diag_grad(std::span<const double>(&ytab[b * n], n), &sigtab[b * n], &dsigtab[b * n]);
    }
    const double phi0 = sys.potential().value(std::vector<double>(n, 0.0));
    const int K = lay.total;
    std::vector<double> partial(per_block * (1 + K), 0.0);

    parallel_for(per_block, workers, [&](std::size_t a) {
        PointData p;
        p.x.resize(n);
        p.y.resize(n);
        p.dphi.resize(n);
        p.sig.resize(n);
        p.dsig.resize(n);
        std::size_t r = a;
        double wx = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t j = r % m;
            r /= m;
            p.x[k] = std::sqrt(sys.q1()[k]) * rule.nodes[j];
            wx *= rule.weights[j];
        }
        const double phi = sys.potential_grad(p.x, p.dphi.data());
        wx *= std::exp(-(phi - phi0));
        std::vector<double> comp(K), row(1 + K, 0.0), terms(per_block);
        std::vector<std::vector<double>> colv(K, std::vector<double>(per_block));
        PointEval e;
        for (std::size_t b = 0; b < per_block; ++b) {
            std::copy(&ytab[b * n], &ytab[b * n] + n, p.y.begin());
            std::copy(&sigtab[b * n], &sigtab[b * n] + n, p.sig.begin());
            std::copy(&dsigtab[b * n], &dsigtab[b * n] + n, p.dsig.begin());
            pe.eval(p, e);
            eval_components(defs, lay, e, comp.data());
            const double w = wx * ywt[b];
            terms[b] = w;
            for (int c = 0; c < K; ++c) colv[c][b] = w * comp[c];
        }
        double* out = &partial[a * (1 + K)];
        out[0] = pairwise_sum(terms);
        for (int c = 0; c < K; ++c) out[1 + c] = pairwise_sum(colv[c]);
    });

    RuleResult res;
    res.points = per_block * per_block;
    std::vector<double> col(per_block);
    auto reduce = [&](int c) {
        for (std::size_t a = 0; a < per_block; ++a) col[a] = partial[a * (1 + K) + c];
        return pairwise_sum(col);
    };
    const double W = reduce(0);
    res.mean.resize(K);
    for (int c = 0; c < K; ++c) res.mean[c] = reduce(1 + c) / W;
    return res;
}

RuleResult run_monte_carlo(const GalerkinSystem& sys, const PointEvaluator& pe, const std::vector<CheckDef>& defs,
                           const Layout& lay, std::size_t samples, std::uint64_t seed, unsigned workers) {
    const std::size_t n = sys.n();
    const Ensemble ens = sample_mu_phi(sys, samples, seed, workers);
    const int K = lay.total;
    // Per chunk: W, Σw², Σw h (K), Σw² h (K), Σw² h_i h_j within each check block.
    std::vector<int> block_off;
    int cov_total = 0;
    for (std::size_t i = 0; i < defs.size(); ++i) {
        block_off.push_back(cov_total);
        if (!defs[i].skip) cov_total += defs[i].ncomp * defs[i].ncomp;
    }
    const int width = 2 + 2 * K + cov_total;
    const std::size_t chunks = (samples + kChunk - 1) / kChunk;
    std::vector<double> partial(chunks * width, 0.0);

    parallel_for(chunks, workers, [&](std::size_t ch) {
        PointData p;
        p.x.resize(n);
        p.y.resize(n);
        PointEval e;
        std::vector<double> comp(K);
        double* out = &partial[ch * width];
        const std::size_t lo = ch * kChunk, hi = std::min(samples, lo + kChunk);
        for (std::size_t i = lo; i < hi; ++i) {
            std::copy(ens.x(i).begin(), ens.x(i).end(), p.x.begin());
            std::copy(ens.y(i).begin(), ens.y(i).end(), p.y.begin());
            sys.fill_point(p);
            pe.eval(p, e);
            eval_components(defs, lay, e, comp.data());
            const double w = ens.weights[i];
            out[0] += w;
            out[1] += w * w;
            for (int c = 0; c < K; ++c) {
                out[2 + c] += w * comp[c];
                out[2 + K + c] += w * w * comp[c];
            }
            for (std::size_t d = 0; d < defs.size(); ++d) {
                if (defs[d].skip) continue;
                const int nc = defs[d].ncomp, off = lay.offset[d];
                double* cv = out + 2 + 2 * K + block_off[d];
                for (int a = 0; a < nc; ++a)
                    for (int b = 0; b < nc; ++b) cv[a * nc + b] += w * w * comp[off + a] * comp[off + b];
            }
        }
    });

    std::vector<double> col(chunks);
    auto reduce = [&](int c) {
        for (std::size_t a = 0; a < chunks; ++a) col[a] = partial[a * width + c];
        return pairwise_sum(col);
    };
    RuleResult res;
    res.points = samples;
    const double W = reduce(0), W2 = reduce(1);
    res.mean.resize(K);
    std::vector<double> s1(K);
    for (int c = 0; c < K; ++c) {
        res.mean[c] = reduce(2 + c) / W;
        s1[c] = reduce(2 + K + c);
    }
    for (std::size_t d = 0; d < defs.size(); ++d) {
        std::vector<double> cov;
        if (!defs[d].skip) {
            const int nc = defs[d].ncomp, off = lay.offset[d];
            cov.resize(nc * nc);
            for (int a = 0; a < nc; ++a)
                for (int b = 0; b < nc; ++b) {
                    const double s2 = reduce(2 + 2 * K + block_off[d] + a * nc + b);
                    const double ma = res.mean[off + a], mb = res.mean[off + b];
                    // Σ w² (h_a − m_a)(h_b − m_b) / W²
                    cov[a * nc + b] = (s2 - ma * s1[off + b] - mb * s1[off + a] + ma * mb * W2) / (W * W);
                }
        }
        res.cov.push_back(std::move(cov));
    }
    return res;
}

double rel_diff(const Relation& r) {
    switch (r.kind) {
    case Rel::eq: return r.lhs - r.rhs;
    case Rel::le: return r.lhs - r.rhs;
    case Rel::ge: return r.rhs - r.lhs;
    }
    return 0.0;
}

// Standard error of each relation's lhs − rhs by the delta method over the component means.
std::vector<double> delta_se(const CheckDef& d, const double* mean, const std::vector<double>& cov) {
    const int nc = d.ncomp;
    std::vector<double> mm(mean, mean + nc);
    const auto base = d.relations(mm.data());
    std::vector<std::vector<double>> grad(base.size(), std::vector<double>(nc));
    for (int j = 0; j < nc; ++j) {
        const double sd = std::sqrt(std::max(cov[j * nc + j], 0.0));
        const double h = std::max({1e-6 * std::abs(mean[j]), 1e-3 * sd, 1e-300});
        mm[j] = mean[j] + h;
        const auto up = d.relations(mm.data());
        mm[j] = mean[j] - h;
        const auto dn = d.relations(mm.data());
        mm[j] = mean[j];
        for (std::size_t r = 0; r < base.size(); ++r) grad[r][j] = (rel_diff(up[r]) - rel_diff(dn[r])) / (2 * h);
    }
    std::vector<double> se(base.size());
    for (std::size_t r = 0; r < base.size(); ++r) {
        double v = 0.0;
        for (int a = 0; a < nc; ++a)
            for (int b = 0; b < nc; ++b) v += grad[r][a] * cov[a * nc + b] * grad[r][b];
        se[r] = std::sqrt(std::max(v, 0.0));
    }
    return se;
}

const char* rel_symbol(Rel k) {
    switch (k) {
    case Rel::eq: return "=";
    case Rel::le: return "<=";
    case Rel::ge: return ">=";
    }
    return "?";
}

CheckResult judge(const CheckDef& d, const std::vector<Relation>& rels, const std::vector<double>& errs, Method method,
                  double eq_tol, std::size_t pair, bool partial) {
    CheckResult res;
    res.name = d.name;
    res.pair = pair;
    res.method = method;
    res.partial = partial;
    bool all = true;
    std::size_t report = 0;
    double worst = -INFINITY;
    std::string detail;
    for (std::size_t r = 0; r < rels.size(); ++r) {
        const Relation& rel = rels[r];
        const double err = errs[r];
        const double floor = 1e-12 * (1.0 + std::abs(rel.rhs) + std::abs(rel.lhs));
        double tol;
        bool ok;
        double score;
        if (rel.kind == Rel::eq) {
            tol = method == Method::gauss_hermite ? eq_tol * (1.0 + std::abs(rel.rhs)) : 3.0 * err + floor;
            ok = std::abs(rel.lhs - rel.rhs) <= tol;
            score = std::abs(rel.lhs - rel.rhs) / std::max(tol, 1e-300);
        } else {
            tol = 3.0 * err + floor;
            ok = rel_diff(rel) <= tol;
            score = rel_diff(rel) / std::max(tol, 1e-300);
        }
        all = all && ok;
        if (!rel.label.empty()) {
            if (!detail.empty()) detail += "; ";
            detail += rel.label + ": " + fmt(rel.lhs) + " " + rel_symbol(rel.kind) + " " + fmt(rel.rhs) +
                      (ok ? " ok" : " VIOLATED") + " (err " + fmt(err) + ")";
        }
        if (d.report_worst ? score > worst : r == 0) {
            worst = score;
            report = r;
            res.tolerance = tol;
        }
    }
    res.lhs = rels[report].lhs;
    res.rhs = rels[report].rhs;
    res.err = errs[report];
    res.verdict = all ? Verdict::pass : Verdict::fail;
    res.detail = detail;
    if (partial) res.detail += "; budget exhausted, reduced node count";
    return res;
}

std::optional<HypocoercivityConstants> resolve_constants(const ModelSpec& spec, const VerifyOptions& opt) {
    if (opt.constants) return opt.constants;
    try {
        const auto rep = check(spec);
        if (rep.route == Route::none) return std::nullopt;
        return constants(spec, rep);
    } catch (const Error&) {
        return std::nullopt;
    }
}

CheckDef skipped(const std::string& name, Verdict v, std::string why) {
    CheckDef d;
    d.name = name;
    d.skip = v;
    d.skip_reason = std::move(why);
    return d;
}

std::vector<CheckDef> make_defs(const std::string& name, const GalerkinSystem& sys, const CylinderFunction& f,
                                const CylinderFunction& /*g*/, const VerifyOptions& opt,
                                const std::optional<HypocoercivityConstants>& consts) {
    const std::size_t n = sys.n();
    const std::size_t fn = f.n();
    const auto& spec = sys.spec();
    std::vector<CheckDef> out;
    CheckDef d;
    d.name = name;
    if (name == "ibp") {
        // Coordinates of f; weight derivative of the log-density gives z_i/var_i (+ ∂_iΦ on x).
        const int nc = static_cast<int>(2 * fn);
        d.ncomp = 3 * nc;
        d.report_worst = true;
        d.integrand = [fn, &sys](const PointEval& e, double* o) {
            for (std::size_t k = 0; k < fn; ++k) {
                const double sx = e.p->x[k] * sys.inv_q1()[k] + e.p->dphi[k];
                const double sy = e.p->y[k] * sys.inv_q2()[k];
                double* ox = o + 3 * k;
                double* oy = o + 3 * (fn + k);
                ox[0] = e.fx[k] * e.g;
                ox[1] = e.f * e.gx[k];
                ox[2] = sx * e.f * e.g;
                oy[0] = e.fy[k] * e.g;
                oy[1] = e.f * e.gy[k];
                oy[2] = sy * e.f * e.g;
            }
        };
        d.relations = [nc, fn](const double* m) {
            std::vector<Relation> r;
            for (int i = 0; i < nc; ++i) {
                const std::string lab = (static_cast<std::size_t>(i) < fn ? "x" : "y") +
                                        std::to_string(i % fn + 1);
                r.push_back({m[3 * i], -m[3 * i + 1] + m[3 * i + 2], Rel::eq, lab});
            }
            return r;
        };
        out.push_back(d);
    } else if (name == "antisym_A") {
        d.ncomp = 2;
        d.integrand = [](const PointEval& e, double* o) {
            o[0] = e.of.A * e.g;
            o[1] = e.f * e.og.A;
        };
        d.relations = [](const double* m) {
            return std::vector<Relation>{{m[0] + m[1], 0.0, Rel::eq, "<Af,g>+<f,Ag>"}};
        };
        out.push_back(d);
    } else if (name == "sym_neg_S") {
        d.ncomp = 3;
        d.integrand = [](const PointEval& e, double* o) {
            o[0] = e.of.S * e.g;
            o[1] = e.f * e.og.S;
            o[2] = e.of.S * e.f;
        };
        d.relations = [](const double* m) {
            return std::vector<Relation>{{m[0], m[1], Rel::eq, "<Sf,g> vs <f,Sg>"}, {m[2], 0.0, Rel::le, "<Sf,f>"}};
        };
        out.push_back(d);
    } else if (name == "L_rep") {
        d.ncomp = 2;
        d.integrand = [n, &sys](const PointEval& e, double* o) {
            double rep = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                rep += -e.p->sig[k] * e.fy[k] * e.gy[k] + sys.k12()[k] * (e.fx[k] * e.gy[k] - e.fy[k] * e.gx[k]);
            o[0] = e.of.L * e.g;
            o[1] = rep;
        };
        d.relations = [](const double* m) {
            return std::vector<Relation>{{m[0], m[1], Rel::eq, "<Lf,g> vs bilinear form"}};
        };
        out.push_back(d);
    } else if (name == "reg_k22") {
        const double alpha = opt.reg_alpha;
        d.ncomp = 5;
        d.integrand = [n, alpha](const PointEval& e, double* o) {
            double dir = 0.0;
            for (std::size_t k = 0; k < n; ++k) dir += e.p->sig[k] * e.fy[k] * e.fy[k];
            const double Lf = e.of.L;
            o[0] = e.f * e.f;
            o[1] = dir;
            o[2] = e.f * Lf;
            o[3] = Lf * Lf;
            o[4] = (alpha * e.f - Lf) * (alpha * e.f - Lf);
        };
        d.relations = [alpha](const double* m) {
            return std::vector<Relation>{{alpha * m[0] + m[1], alpha * m[0] - m[2], Rel::eq, "identity"},
                                         {m[1], 0.5 * (m[0] + m[3]), Rel::le, "dirichlet <= (f^2+(Lf)^2)/2"},
                                         {m[1], m[4] / (4.0 * alpha), Rel::le, "dirichlet <= g^2/(4 alpha)"}};
        };
        out.push_back(d);
    } else if (name == "poincare") {
        const double lam1 = std::max(sys.q1()[0], sys.q2()[0]);
        const double c = lam1 * std::exp(-spec.potential.osc());
        d.ncomp = 3;
        d.integrand = [n, &sys](const PointEval& e, double* o) {
            double q = 0.0;
            for (std::size_t k = 0; k < n; ++k) q += sys.q1()[k] * e.fx[k] * e.fx[k] + sys.q2()[k] * e.fy[k] * e.fy[k];
            o[0] = q;
            o[1] = e.f;
            o[2] = e.f * e.f;
        };
        d.relations = [c](const double* m) {
            return std::vector<Relation>{{m[0], c * (m[2] - m[1] * m[1]), Rel::ge, "(QDf,Df) >= lambda1 e^-osc Var"}};
        };
        out.push_back(d);
    } else if (name == "micro" || name == "macro") {
        const bool micro = name == "micro";
        if (micro ? !f.y_only() : !f.x_only()) {
            out.push_back(skipped(name, Verdict::not_applicable,
                                  micro ? "micro needs a y-only test function" : "macro needs an x-only test function"));
            out.push_back(skipped(name + "_derived", Verdict::not_applicable, "see " + name));
            return out;
        }
        if (!consts) {
            out.push_back(skipped(name, Verdict::not_checkable, "hypocoercivity constants unavailable"));
            out.push_back(skipped(name + "_derived", Verdict::not_checkable, "hypocoercivity constants unavailable"));
            return out;
        }
        const double cv = micro ? consts->c_S : consts->c_A;
        const double cd = micro ? consts->c_S_derived : consts->c_A_derived;
        std::vector<double> cw(n);
        for (std::size_t k = 0; k < n; ++k) cw[k] = sys.k12()[k] * sys.k12()[k] * sys.inv_q2()[k];
        d.ncomp = 3;
        d.integrand = [n, micro, cw](const PointEval& e, double* o) {
            double q = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                q += micro ? e.p->sig[k] * e.fy[k] * e.fy[k] : cw[k] * e.fx[k] * e.fx[k];
            o[0] = q;
            o[1] = e.f;
            o[2] = e.f * e.f;
        };
        for (auto [suffix, cval] : {std::pair<std::string, double>{"", cv}, {"_derived", cd}}) {
            CheckDef dd = d;
            dd.name = name + suffix;
            if (!std::isfinite(cval) || !(cval > 0.0)) {
                out.push_back(skipped(dd.name, Verdict::not_checkable, "constant not certifiable (" + fmt(cval) + ")"));
                continue;
            }
            const std::string lab = std::string(micro ? "c_S" : "c_A") + suffix + " = " + fmt(cval);
            dd.relations = [cval, lab](const double* m) {
                return std::vector<Relation>{{m[0], cval * (m[2] - m[1] * m[1]), Rel::ge, lab}};
            };
            out.push_back(dd);
        }
    } else if (name == "n_reg") {
        if (!f.x_only()) {
            out.push_back(skipped(name, Verdict::not_applicable, "n_reg needs an x-only test function"));
            return out;
        }
        std::vector<double> C(n);
        for (std::size_t k = 0; k < n; ++k) C[k] = power_eigen(spec.family, 2 * spec.sigma1 - spec.alpha2, k + 1);
        const double lam = opt.nreg_lambda;
        const double factor = 4.0 + spec.potential.c_phi2() / 4.0;
        d.ncomp = 4;
        d.integrand = [n, C, lam, &sys](const PointEval& e, double* o) {
            double cdd = 0.0, tr = 0.0, q = 0.0, Nf = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                cdd += C[k] * e.fx[k] * e.fx[k];
                q += C[k] * C[k] * e.fx[k] * e.fx[k] * sys.inv_q1()[k];
                Nf += C[k] * e.hxx[k * n + k] - C[k] * (e.p->x[k] * sys.inv_q1()[k] + e.p->dphi[k]) * e.fx[k];
                for (std::size_t l = 0; l < n; ++l) tr += C[k] * C[l] * e.hxx[k * n + l] * e.hxx[k * n + l];
            }
            const double g1 = lam * e.f - Nf, g2 = e.f - Nf;
            o[0] = cdd;
            o[1] = g1 * g1;
            o[2] = tr + q;
            o[3] = g2 * g2;
        };
        d.relations = [lam, factor](const double* m) {
            return std::vector<Relation>{{m[0], m[1] / (4.0 * lam), Rel::le, "(CDf,Df) <= g^2/(4 lambda)"},
                                         {m[2], factor * m[3], Rel::le, "tr(CD2f)^2 + |Q1^-1/2 CDf|^2 <= (4+c/4) g^2"}};
        };
        out.push_back(d);
    } else if (name == "inner") {
        d.ncomp = 1;
        d.integrand = [](const PointEval& e, double* o) { o[0] = e.f * e.g; };
        d.relations = [](const double* m) { return std::vector<Relation>{{m[0], 0.0, Rel::eq, ""}}; };
        out.push_back(d);
    } else {
        throw ValidationError("unknown check '" + name + "'");
    }
    return out;
}

struct Evaluated {
    std::vector<CheckDef> defs;
    std::vector<std::vector<Relation>> rels;
    std::vector<std::vector<double>> errs;
    bool partial = false;
};

Evaluated evaluate(const std::vector<std::string>& names, const GalerkinSystem& sys, const CylinderFunction& f,
                   const CylinderFunction& g, const VerifyOptions& opt,
                   const std::optional<HypocoercivityConstants>& consts) {
    Evaluated ev;
    for (const auto& nm : names) {
        auto d = make_defs(nm, sys, f, g, opt, consts);
        for (auto& x : d) ev.defs.push_back(std::move(x));
    }
    const Layout lay = layout_of(ev.defs);
    const PointEvaluator pe(sys, f, g);
    const std::size_t n = sys.n();

    if (opt.method == Method::gauss_hermite) {
        if (2 * n > 8) throw ValidationError("Gauss-Hermite quadrature is limited to 2n <= 8 dimensions");
        int m = opt.nodes;
        auto pts = [&](int mm) { return std::pow(static_cast<double>(mm), static_cast<double>(2 * n)); };
        while (m > 1 && pts(m + 4) > static_cast<double>(opt.max_points)) {
            --m;
            ev.partial = true;
        }
        const RuleResult a = run_gauss_hermite(sys, pe, ev.defs, lay, m, opt.workers);
        const RuleResult b = run_gauss_hermite(sys, pe, ev.defs, lay, m + 4, opt.workers);
        for (std::size_t i = 0; i < ev.defs.size(); ++i) {
            const auto& d = ev.defs[i];
            if (d.skip) {
                ev.rels.emplace_back();
                ev.errs.emplace_back();
                continue;
            }
            const auto ra = d.relations(&a.mean[lay.offset[i]]);
            const auto rb = d.relations(&b.mean[lay.offset[i]]);
            std::vector<double> e(ra.size());
            for (std::size_t r = 0; r < ra.size(); ++r) e[r] = std::abs(rel_diff(ra[r]) - rel_diff(rb[r]));
            ev.rels.push_back(ra);
            ev.errs.push_back(e);
        }
    } else {
        const RuleResult a = run_monte_carlo(sys, pe, ev.defs, lay, opt.samples, opt.seed, opt.workers);
        for (std::size_t i = 0; i < ev.defs.size(); ++i) {
            const auto& d = ev.defs[i];
            if (d.skip) {
                ev.rels.emplace_back();
                ev.errs.emplace_back();
                continue;
            }
            ev.rels.push_back(d.relations(&a.mean[lay.offset[i]]));
            ev.errs.push_back(delta_se(d, &a.mean[lay.offset[i]], a.cov[i]));
        }
    }
    return ev;
}

} // namespace

std::string to_string(Method m) { return m == Method::gauss_hermite ? "gauss_hermite" : "monte_carlo"; }

Method method_from_string(const std::string& s) {
    if (s == "gauss_hermite") return Method::gauss_hermite;
    if (s == "monte_carlo") return Method::monte_carlo;
    throw ValidationError("unknown method '" + s + "'");
}

nlohmann::json CheckResult::to_json() const {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"name", name},       {"pair", pair},           {"lhs", num(lhs)},
            {"rhs", num(rhs)},    {"tolerance", num(tolerance)}, {"err", num(err)},
            {"method", to_string(method)}, {"verdict", to_string(verdict)}, {"partial", partial},
            {"detail", detail}};
}

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names = {"ibp",      "antisym_A", "sym_neg_S", "L_rep", "reg_k22",
                                                   "poincare", "micro",     "macro",     "n_reg"};
    return names;
}

std::vector<CylinderFunction> make_corpus(const GalerkinSystem& sys, std::size_t fn, std::size_t count,
                                          std::uint64_t seed, CorpusKind kind) {
    if (fn == 0 || fn > sys.n()) throw ValidationError("corpus base dimension must lie in [1, n]");
    std::vector<CylinderFunction> out;
    for (std::size_t i = 0; i < count; ++i) {
        PhiloxEngine eng(seed, i, 9);
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const int atoms = 2;
        std::vector<Expr> factors;
        for (int a = 0; a < atoms; ++a) {
            const double u = unif(eng);
            const Op op = u < 1.0 / 3 ? Op::sin : (u < 2.0 / 3 ? Op::cos : Op::tanh);
            // tanh has complex poles; a smaller scale keeps quadrature convergence fast.
            const double scale = op == Op::tanh ? 0.15 : 0.8;
            std::vector<Expr> lin;
            for (std::size_t k = 0; k < 2 * fn; ++k) {
                const bool is_x = k < fn;
                if ((kind == CorpusKind::x_only && !is_x) || (kind == CorpusKind::y_only && is_x)) continue;
                const double sd = std::sqrt(is_x ? sys.q1()[k] : sys.q2()[k - fn]);
                const double w = scale * normal(eng) / sd;
                lin.push_back(Expr::affine(w, 0.0, Expr::variable(static_cast<int>(k))));
            }
            const double b = unif(eng) * 2.0 - 1.0;
            factors.push_back(Expr::unary(op, Expr::affine(1.0, b, Expr::sum(lin))));
        }
        const double c0 = unif(eng) - 0.5;
        const double amp = 0.5 + unif(eng);
        out.emplace_back(fn, Expr::affine(amp, c0, Expr::product(factors)));
    }
    return out;
}

std::vector<TestPair> make_test_pairs(const GalerkinSystem& sys, std::size_t fn, std::size_t count,
                                      std::uint64_t seed, CorpusKind kind) {
    const auto c = make_corpus(sys, fn, 2 * count, seed, kind);
    std::vector<TestPair> pairs;
    for (std::size_t i = 0; i < count; ++i) pairs.emplace_back(c[2 * i], c[2 * i + 1]);
    return pairs;
}

std::vector<CylinderFunction> linear_family(std::size_t fn) {
    std::vector<CylinderFunction> out;
    for (std::size_t i = 1; i <= fn; ++i) out.push_back(CylinderFunction::x_coord(fn, i));
    for (std::size_t i = 1; i <= fn; ++i) out.push_back(CylinderFunction::y_coord(fn, i));
    return out;
}

InnerProduct inner_product(const CylinderFunction& f, const CylinderFunction& g, const ModelSpec& spec, std::size_t n,
                           const VerifyOptions& opt) {
    if (f.n() > n || g.n() > n) throw ValidationError("test function base dimension exceeds n");
    const GalerkinSystem sys = build(spec, n);
    const auto ev = evaluate({"inner"}, sys, f, g, opt, std::nullopt);
    return {ev.rels[0][0].lhs, ev.errs[0][0], ev.partial};
}

std::vector<CheckResult> run_checks(const std::vector<std::string>& names, const ModelSpec& spec, std::size_t n,
                                    const std::vector<TestPair>& testset, const VerifyOptions& opt) {
    for (const auto& nm : names)
        if (std::find(check_names().begin(), check_names().end(), nm) == check_names().end())
            throw ValidationError("unknown check '" + nm + "'");
    const GalerkinSystem sys = build(spec, n);
    std::optional<HypocoercivityConstants> consts;
    if (std::find(names.begin(), names.end(), "micro") != names.end() ||
        std::find(names.begin(), names.end(), "macro") != names.end())
        consts = resolve_constants(spec, opt);
    std::vector<CheckResult> out;
    for (std::size_t p = 0; p < testset.size(); ++p) {
        const auto& [f, g] = testset[p];
        if (f.n() > n || g.n() > n) throw ValidationError("test function base dimension exceeds n");
        const auto ev = evaluate(names, sys, f, g, opt, consts);
        for (std::size_t i = 0; i < ev.defs.size(); ++i) {
            const auto& d = ev.defs[i];
            if (d.skip) {
                CheckResult r;
                r.name = d.name;
                r.pair = p;
                r.method = opt.method;
                r.verdict = *d.skip;
                r.detail = d.skip_reason;
                r.lhs = r.rhs = NAN;
                out.push_back(r);
                continue;
            }
            out.push_back(judge(d, ev.rels[i], ev.errs[i], opt.method, opt.eq_tol, p, ev.partial));
        }
    }
    return out;
}

std::vector<CheckResult> run_check(const std::string& name, const ModelSpec& spec, std::size_t n,
                                   const std::vector<TestPair>& testset, const VerifyOptions& opt) {
    return run_checks({name}, spec, n, testset, opt);
}

} // namespace hypoco
