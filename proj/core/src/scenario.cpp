#include "disempower/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "disempower/error.hpp"
#include "disempower/report.hpp"
#include "disempower/simulation.hpp"
#include "embedded_scenarios.hpp"

namespace disempower {

void ScenarioConfig::validate() const {
    if (id.empty()) throw RangeError("id", "id must be nonempty");
    params.validate();
    interventions.validate();
    if (!std::isfinite(horizon_years) || horizon_years <= 0.0) {
        throw RangeError("horizon_years", "horizon_years must be > 0");
    }
    whole_steps(horizon_years, params.dt, "horizon_years");
    if (c_bar_ref && !(std::isfinite(*c_bar_ref) && *c_bar_ref > 0.0)) {
        throw RangeError("c_bar_ref", "c_bar_ref must be > 0");
    }
}

Trajectory ScenarioConfig::run() const {
    return simulate(initial, params, interventions, horizon_years);
}

const std::vector<std::string>& builtin_scenario_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> out;
        for (const auto& e : embedded::kScenarios) out.emplace_back(e.id);
        return out;
    }();
    return ids;
}

bool is_builtin_scenario(std::string_view id) {
    return std::any_of(embedded::kScenarios.begin(), embedded::kScenarios.end(),
                       [&](const auto& e) { return e.id == id; });
}

std::string_view builtin_scenario_text(std::string_view id) {
    for (const auto& e : embedded::kScenarios) {
        if (e.id == id) return e.text;
    }
    throw ConfigError("unknown scenario \"" + std::string(id) + "\"");
}

ScenarioConfig builtin_scenario(std::string_view id) {
    return parse_scenario(builtin_scenario_text(id));
}

ValueArms value_lock_in_arms() {
    ValueArms arms;
    arms.locked_in = builtin_scenario("baseline");
    arms.locked_in.id = "value-locked-in";
    arms.locked_in.description = "Baseline with encoded values frozen (mu = 0).";
    arms.locked_in.params.mu = 0.0;

    const ScenarioConfig full = builtin_scenario("full-architecture");
    arms.nested_forums = builtin_scenario("baseline");
    arms.nested_forums.id = "value-nested-forums";
    arms.nested_forums.description = "Baseline plus nested value forums only.";
    arms.nested_forums.interventions = InterventionSet{};
    arms.nested_forums.interventions.nested_forums = full.interventions.nested_forums;

    arms.continuous = full;
    arms.continuous.id = "value-continuous";
    arms.continuous.description = "Full architecture: capacity preserved, forums active.";
    return arms;
}

const std::vector<std::string>& intervention_ladder_ids() {
    static const std::vector<std::string> ids{"baseline", "std-mitigation", "decoupled",
                                              "full-architecture"};
    return ids;
}

}  // namespace disempower
