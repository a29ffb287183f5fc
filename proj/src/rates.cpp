#include "hypoco/rates.hpp"

#include "hypoco/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace hypoco {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double finite_or_flag(double v, const char* name, std::vector<std::string>& flags) {
    if (!std::isfinite(v)) flags.emplace_back(name);
    return v;
}

nlohmann::json num(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

} // namespace

nlohmann::json HypocoercivityConstants::to_json() const {
    const auto& m = intermediates;
    nlohmann::json j{{"route", to_string(route)},
                     {"c_S", num(c_S)},
                     {"c_A", num(c_A)},
                     {"c_S_derived", num(c_S_derived)},
                     {"c_A_derived", num(c_A_derived)},
                     {"c1", num(c1)},
                     {"c2", num(c2)},
                     {"c_phi2", num(c_phi2)},
                     {"osc", num(osc)},
                     {"intermediates",
                      {{"A", num(m.A)},
                       {"C1", num(m.C1)},
                       {"C2_scale", num(m.C2_scale)},
                       {"C2_bar", num(m.C2_bar)},
                       {"M22", num(m.M22)},
                       {"omega22", num(m.omega22)},
                       {"omega12", num(m.omega12)},
                       {"lambda21", num(m.lambda21)},
                       {"lambda11", num(m.lambda11)},
                       {"E_norm_sq", num(m.moment1)},
                       {"E_norm_4", num(m.moment2)},
                       {"E_norm_6", num(m.moment3)}}},
                     {"not_certifiable", not_certifiable}};
    return j;
}

HypocoercivityConstants constants(const ModelSpec& s, const AssumptionReport& report) {
    if (report.route == Route::none)
        throw NotCertifiableError("no hypocoercivity route (K7 or K7*) passed; constants unavailable");
    HypocoercivityConstants k;
    auto& m = k.intermediates;
    k.route = report.route;
    k.c_phi2 = s.potential.c_phi2();
    k.osc = s.potential.osc();
    k.c2 = std::sqrt(8.0 + k.c_phi2 / 4.0);

    const auto& fam = s.family;
    const double a1 = s.alpha1, a2 = s.alpha2, s1 = s.sigma1, s2 = s.sigma2;
    m.A = s.c + s.c_tilde;
    m.lambda11 = power_eigen(fam, a1, 1);
    m.lambda21 = power_eigen(fam, a2, 1);
    m.omega22 = s.c * inf_power(fam, s2 - a2);
    m.omega12 = inf_power(fam, 2.0 * s1 - a2 - a1);

    const double eosc = std::exp(k.osc);
    k.c_S = m.omega22 > 0.0 ? m.lambda21 / m.omega22 : kInf;
    k.c_A = m.omega12 > 0.0 ? m.lambda11 / (m.omega12 * eosc) : kInf;
    k.c_S_derived = m.omega22 * m.lambda21;
    k.c_A_derived = m.omega12 * m.lambda11 / eosc;
    if (!(m.omega22 > 0.0)) k.not_certifiable.emplace_back("c_S");
    if (!(m.omega12 > 0.0)) k.not_certifiable.emplace_back("c_A");

    // Moments of ‖v‖² under μ2: sum of s_k Z_k² with s_k = λ_k^{α2}.
    const double S1 = tail_sum(fam, a2, 0).hi;
    const double S2 = tail_sum(fam, 2 * a2, 0).hi;
    const double S3 = tail_sum(fam, 3 * a2, 0).hi;
    m.moment1 = S1;
    m.moment2 = S1 * S1 + 2 * S2;
    m.moment3 = S1 * S1 * S1 + 6 * S1 * S2 + 8 * S3;
    const double poly = m.moment1 + 2 * m.moment2 + m.moment3; // E[‖v‖²(1+‖v‖²)²]
    const double e_abs = 4.0 + 4.0 * std::sqrt(m.moment1) + m.moment1; // bound on E(2+‖v‖)²
    const bool variable = s.c_tilde > 0.0 && !s.modes.empty();

    if (report.route == Route::K7) {
        m.C1 = 0.0;
        m.C2_scale = finite_or_flag(m.A * sup_power(fam, s2 - 1.5 * a2), "C2", k.not_certifiable);
        m.C2_bar = m.C2_scale * m.C2_scale * poly;
        if (variable) {
            const double th = 2 * s2 - a2;
            if (series_converges(fam, th))
                m.M22 = 4.0 * s.c_tilde * s.c_tilde * tail_sum(fam, th, 0).hi * e_abs;
            else {
                m.M22 = kInf;
                k.not_certifiable.emplace_back("M22");
            }
        }
    } else {
        m.C1 = finite_or_flag(s.c * sup_power(fam, -a2 / 2 + s2 - s1 + a1 / 2), "C1", k.not_certifiable);
        if (variable) {
            m.C2_scale = finite_or_flag(s.c_tilde * sup_power(fam, a1 / 2 - s1 + s2 - a2), "C2", k.not_certifiable);
            m.C2_bar = m.C2_scale * m.C2_scale * poly;
            const double th = a1 - 2 * s1 + 2 * s2;
            if (series_converges(fam, th))
                m.M22 = 4.0 * s.c_tilde * s.c_tilde * tail_sum(fam, th, 0).hi * e_abs;
            else {
                m.M22 = kInf;
                k.not_certifiable.emplace_back("M22");
            }
        }
    }
    k.c1 = 0.5 * (std::sqrt(m.C1 * m.C1 + m.C2_bar) + std::sqrt(m.M22));
    if (!std::isfinite(k.c1)) k.not_certifiable.emplace_back("c1");
    return k;
}

double theta2(double c_S, double c_A, double c1, double c_phi2, double theta1) {
    if (!(theta1 > 1.0)) throw DomainError("theta1 must be > 1");
    if (!(c_S > 0.0) || !(c_A > 0.0) || !std::isfinite(c_S) || !std::isfinite(c_A))
        throw NotCertifiableError("theta2 needs finite positive c_S and c_A");
    if (!(c1 >= 0.0) || !std::isfinite(c1)) throw NotCertifiableError("theta2 needs a finite c1");
    const double ratio = c_A / (1.0 + c_A);
    const double c2 = std::sqrt(8.0 + c_phi2 / 4.0);
    const double denom = (1.0 + 2.0 * std::numbers::sqrt2 + c1 + c_phi2 / 4.0) *
                             (1.0 + (1.0 + c_A) / (2.0 * c_A) * (1.0 + c1 + c2)) +
                         0.5 * ratio;
    return 0.5 * (theta1 - 1.0) / theta1 * std::min(c_S, c1) / denom * ratio;
}

double theta2(const HypocoercivityConstants& k, double theta1) {
    return theta2(k.c_S, k.c_A, k.c1, k.c_phi2, theta1);
}

double theta2_derived(const HypocoercivityConstants& k, double theta1) {
    return theta2(k.c_S_derived, k.c_A_derived, k.c1, k.c_phi2, theta1);
}

double ergodic_bound(double theta1, double theta2, double t, double f_dev_norm) {
    if (!(t > 0.0)) throw DomainError("ergodic bound needs t > 0");
    if (!(theta2 > 0.0)) throw DomainError("ergodic bound needs theta2 > 0");
    const double x = t * theta2;
    // 1 − (1 − e^{−x})/x, with a series for small x to avoid cancellation.
    double bracket;
    if (x < 1e-3) bracket = x / 2 - x * x / 6 + x * x * x / 24 - x * x * x * x / 120;
    else bracket = 1.0 + std::expm1(-x) / x;
    return std::sqrt(2.0 * theta1 / theta2 * bracket / t) * f_dev_norm;
}

} // namespace hypoco
