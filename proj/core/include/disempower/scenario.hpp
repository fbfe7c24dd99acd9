#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "disempower/interventions.hpp"
#include "disempower/model.hpp"

namespace disempower {

/// Base parameters + intervention set + initial state + horizon.
struct ScenarioConfig {
    std::string id;
    std::string description;
    ModelParams params;
    InterventionSet interventions;
    SystemState initial = uniform_initial_state(ModelParams{});
    double horizon_years = 60.0;
    std::optional<double> c_bar_ref;

    /// Throws ConfigError on any invalid component.
    void validate() const;
    Trajectory run() const;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Ids of the embedded scenario library, in listing order.
const std::vector<std::string>& builtin_scenario_ids();
bool is_builtin_scenario(std::string_view id);
/// Raw JSON text of an embedded scenario; throws ConfigError for unknown ids.
std::string_view builtin_scenario_text(std::string_view id);
ScenarioConfig builtin_scenario(std::string_view id);

/// Arms of the value lock-in comparison, all evaluated at the same year.
struct ValueArms {
    ScenarioConfig locked_in;        ///< baseline with mu = 0
    ScenarioConfig nested_forums;    ///< baseline + nested forums
    ScenarioConfig continuous;       ///< full architecture
};
ValueArms value_lock_in_arms();

/// baseline, std-mitigation, decoupled, full-architecture: least to most protective.
const std::vector<std::string>& intervention_ladder_ids();

}  // namespace disempower
