#include "disempower/simulation.hpp"

#include <cmath>
#include <string>

#include "disempower/error.hpp"

namespace disempower {

namespace {

DomainArray divergences(const SystemState& state, double sigma_w) {
    DomainArray out{};
    for (std::size_t i = 0; i < kDomainCount; ++i) {
        out[i] = welfare_divergence(state.domains[i].v_e, state.v_h, sigma_w);
    }
    return out;
}

void validate_initial(const SystemState& s) {
    if (!std::isfinite(s.t) || s.t != 0.0) throw RangeError("t", "initial t must be 0");
    if (!std::isfinite(s.v_h)) throw RangeError("v_h", "v_h must be finite");
    for (const auto& d : s.domains) {
        if (!std::isfinite(d.c) || d.c < 0.0) throw RangeError("c", "initial c must be >= 0");
        if (!std::isfinite(d.s) || d.s < 0.0) throw RangeError("s", "initial s must be >= 0");
        if (!(d.d >= 0.0 && d.d <= 1.0)) throw RangeError("d", "initial d must lie in [0,1]");
        if (d.u != 0 && d.u != 1) throw RangeError("u", "initial u must be 0 or 1");
        if (!std::isfinite(d.v_e)) throw RangeError("v_e", "v_e must be finite");
    }
}

}  // namespace

long whole_steps(double span, double dt, const char* field) {
    const double ratio = span / dt;
    const double rounded = std::round(ratio);
    if (!std::isfinite(ratio) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded)) {
        throw RangeError(field, std::string(field) + " must be a whole multiple of dt");
    }
    return static_cast<long>(rounded);
}

Trajectory simulate(const SystemState& initial, const ModelParams& params,
                    const InterventionSet& interventions, double horizon_years) {
    params.validate();
    interventions.validate();
    validate_initial(initial);
    if (!std::isfinite(horizon_years) || horizon_years <= 0.0) {
        throw RangeError("horizon_years", "horizon_years must be > 0");
    }
    const long steps = whole_steps(horizon_years, params.dt, "horizon_years");

    Trajectory traj;
    traj.params_used = params;
    traj.samples.reserve(static_cast<std::size_t>(steps) + 1);
    SystemState state = initial;
    if (!interventions.empty()) {
        const ModelParams eff = effective_params(params, interventions, 0.0);
        for (auto& dom : state.domains) refresh_delegation(dom, eff);
    }
    traj.samples.push_back(Sample{0.0, state, divergences(state, params.sigma_w)});

    for (long k = 0; k < steps; ++k) {
        const ModelParams eff = effective_params(params, interventions, state.t);
        state = system_step(state, eff);
        // t = k dt, not an accumulated sum.
        state.t = static_cast<double>(k + 1) * params.dt;
        if (!interventions.empty()) {
            const ModelParams next_eff = effective_params(params, interventions, state.t);
            for (auto& dom : state.domains) refresh_delegation(dom, next_eff);
        }
        traj.samples.push_back(Sample{state.t, state, divergences(state, params.sigma_w)});
    }
    return traj;
}

}  // namespace disempower
