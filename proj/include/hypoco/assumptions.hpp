#pragma once

#include "hypoco/model.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace hypoco {

enum class Verdict { pass, fail, not_applicable, not_checkable };
enum class Route { K7, K7_star, none };
enum class RouteChoice { automatic, K7, K7_star };

std::string to_string(Verdict v);
std::string to_string(Route r);
RouteChoice route_choice_from_string(const std::string& s);

struct AssumptionEntry {
    std::string name;
    Verdict verdict = Verdict::not_checkable;
    std::optional<double> margin;
    std::string detail;
    bool strict = true;

    bool passed() const { return verdict == Verdict::pass; }
};

struct AssumptionReport {
    std::vector<AssumptionEntry> entries; // fixed order K1..K9, Phi_alpha, Phi1, Phi2
    Route route = Route::none;
    bool ess_m_diss = false;
    bool weak_solution = false;
    bool hypocoercive = false;
    // Trace-class threshold of the family used by the K4/K5 rows.
    double threshold = 0.5;

    const AssumptionEntry& at(const std::string& name) const;
    bool passed(const std::string& name) const { return at(name).passed(); }
    nlohmann::json to_json() const;
};

AssumptionReport check(const ModelSpec& spec, RouteChoice route = RouteChoice::automatic);

// Text table, one row per assumption in the report order.
std::string summary_table(const AssumptionReport& report);

// Conservative upper bound for sup ‖Q1^{1/2} DΦ1‖; empty when no finite bound is available.
std::optional<double> q1_half_dphi_bound(const ModelSpec& spec);

} // namespace hypoco
