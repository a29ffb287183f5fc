#pragma once

#include "hypoco/assumptions.hpp"
#include "hypoco/model.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace hypoco {

struct HypocoercivityConstants {
    Route route = Route::none;
    double c_S = 0.0; // λ_{2,1}/ω22
    double c_A = 0.0; // λ_{1,1}/(ω12 e^{osc})
    double c_S_derived = 0.0; // ω22 λ_{2,1}
    double c_A_derived = 0.0; // ω12 λ_{1,1} / e^{osc}
    double c1 = 0.0;
    double c2 = 0.0;
    double c_phi2 = 0.0;
    double osc = 0.0;

    struct Intermediates {
        double A = 0.0;
        double C1 = 0.0;
        double C2_scale = 0.0; // C2(v) = C2_scale·(1 + ‖v‖²)
        double C2_bar = 0.0;
        double M22 = 0.0;
        double omega22 = 0.0;
        double omega12 = 0.0;
        double lambda21 = 0.0;
        double lambda11 = 0.0;
        double moment1 = 0.0; // E‖v‖² under μ2
        double moment2 = 0.0; // E‖v‖⁴
        double moment3 = 0.0; // E‖v‖⁶
    } intermediates;

    // Names of constants that could not be certified (infinite or zero where positivity is needed).
    std::vector<std::string> not_certifiable;

    bool certified() const { return not_certifiable.empty(); }
    nlohmann::json to_json() const;
};

HypocoercivityConstants constants(const ModelSpec& spec, const AssumptionReport& report);

double theta2(double c_S, double c_A, double c1, double c_phi2, double theta1);
// Uses the verbatim c_S, c_A.
double theta2(const HypocoercivityConstants& k, double theta1);
double theta2_derived(const HypocoercivityConstants& k, double theta1);

double ergodic_bound(double theta1, double theta2, double t, double f_dev_norm);

} // namespace hypoco
