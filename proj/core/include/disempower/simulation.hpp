#pragma once

#include "disempower/interventions.hpp"
#include "disempower/model.hpp"

namespace disempower {

/// Integrate from initial over horizon_years.
///
/// Returns horizon_years / dt + 1 samples; the first is initial, with d and u
/// taken under the interventions active at t = 0 when there are any. Before
/// each step the intervention set is compiled into effective parameters for
/// the step's start time. Parameters, interventions, the initial state and the
/// horizon are all validated before any stepping; violations throw ConfigError.
Trajectory simulate(const SystemState& initial, const ModelParams& params,
                    const InterventionSet& interventions, double horizon_years);

/// Number of whole steps of length dt in span; throws RangeError(field) if dt
/// does not divide span.
long whole_steps(double span, double dt, const char* field);

}  // namespace disempower
