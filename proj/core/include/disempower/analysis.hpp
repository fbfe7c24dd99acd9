#pragma once

// Headline quantities extracted from the model: long-run fate, the
// reversibility threshold, crossing times, sensitivity grids and Monte Carlo
// bands.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "disempower/model.hpp"
#include "disempower/scenario.hpp"

namespace disempower {

enum class Fate { decayed, persisted };

/// One-dimensional autonomous map on capacity, used by the threshold search.
using CapacityMap = std::function<double(double)>;

struct FateProbe {
    double probe_horizon = 200.0;  ///< years
    double eps = 1e-3;             ///< "decayed" iff c(probe_horizon) < eps
};

/// Single-domain autonomous step: constant salience, no coupling, no lock-in
/// feedback. salience is held at the given level.
CapacityMap autonomous_capacity_map(const ModelParams& params, double salience);

/// Salience level used for autonomous probes: schedule at t = 0, economic domain.
double initial_salience(const ModelParams& params);

Fate long_run_fate(const CapacityMap& step, double dt, double c0, const FateProbe& probe = {});
Fate long_run_fate(double c0, const ModelParams& params, const FateProbe& probe = {});

enum class Stability { bistable, monostable_decay, monostable_persist };

struct ThresholdReport {
    std::string scenario;
    Stability stability = Stability::bistable;
    std::optional<double> c_bar;  ///< set only when bistable
    double basin_low = 0.0;       ///< largest probed start that decayed
    double basin_high = 0.0;      ///< smallest probed start that persisted
    double tolerance = 0.0;
    int probes = 0;               ///< fate evaluations, including both bracket ends
    std::optional<double> crossing_year;  ///< economic domain, when a run was attached
    std::string method = "bisection";

    bool operator==(const ThresholdReport&) const = default;
};

struct ThresholdSearch {
    double c_lo = 0.01;
    double c_hi = 1.0;
    double tol = 1e-6;
    FateProbe probe{};
};

/// Bisection on initial capacity until the bracket is no wider than tol.
/// Both ends sharing a fate is reported as monostable, not thrown.
ThresholdReport estimate_reversibility_threshold(const CapacityMap& step, double dt,
                                                 const ThresholdSearch& search);
ThresholdReport estimate_reversibility_threshold(const ModelParams& params,
                                                 const ThresholdSearch& search = {});

/// First time domain capacity falls below c_bar, linearly interpolated between
/// the bracketing samples. nullopt if it never does.
std::optional<double> time_to_threshold(const Trajectory& traj, double c_bar,
                                        std::size_t domain_index);

/// C-bar used for a scenario's crossing times: the configured override, else
/// the estimated threshold of its base parameters. nullopt when monostable.
std::optional<double> reference_threshold(const ScenarioConfig& scenario);

/// Economic-domain crossing year of a scenario run against c_bar.
std::optional<double> scenario_crossing(const ScenarioConfig& scenario, double c_bar);

/// lo:hi:n with n evenly spaced values including both ends. n = 1 requires lo == hi.
struct AxisRange {
    double lo = 0.0;
    double hi = 0.0;
    int n = 1;
    std::vector<double> values() const;
    bool operator==(const AxisRange&) const = default;
};

/// Parses "lo:hi:n". Throws ConfigError on malformed text.
AxisRange parse_axis_range(const std::string& text);

struct SweepResult {
    std::string scenario;
    std::vector<double> delta_values;
    std::vector<double> alpha_values;
    /// Row-major by (delta index, alpha index).
    std::vector<std::optional<double>> crossing_year;
    double c_bar = 0.0;
    double horizon_years = 0.0;

    const std::optional<double>& cell(std::size_t delta_index, std::size_t alpha_index) const {
        return crossing_year[delta_index * alpha_values.size() + alpha_index];
    }
    bool operator==(const SweepResult&) const = default;
};

/// One simulation per (delta, alpha) cell of the scenario, crossing measured on
/// the economic domain against the scenario's reference threshold.
SweepResult sweep(const ScenarioConfig& scenario, const AxisRange& delta, const AxisRange& alpha);

struct ParamInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const ParamInterval&) const = default;
};

/// Scalar ModelParams field name -> uniform sampling interval.
using IntervalMap = std::map<std::string, ParamInterval>;

/// delta in [0.06, 0.10], alpha in [0.07, 0.11].
IntervalMap default_intervals();

/// Reads or writes a scalar ModelParams field by its config name.
double& scalar_param(ModelParams& p, const std::string& name);
bool is_scalar_param(const std::string& name);

struct BandResult {
    std::string scenario;
    int n = 0;
    std::uint64_t seed = 0;
    int crossed = 0;     ///< draws that crossed within the horizon
    int rejected = 0;    ///< invalid draws that were redrawn
    /// Statistics over the crossing draws; nullopt when none crossed.
    std::optional<double> mean;
    std::optional<double> sd;
    std::optional<double> min;
    std::optional<double> max;
    double c_bar = 0.0;
    double horizon_years = 0.0;

    double crossed_fraction() const { return n > 0 ? static_cast<double>(crossed) / n : 0.0; }
    bool operator==(const BandResult&) const = default;
};

/// Uniform, independent draws of the listed parameters from a seeded
/// mt19937_64 stream; each draw replaces the scenario's base values and the
/// scenario is rerun with its interventions. Crossings are measured against
/// the scenario's reference threshold, which stays fixed across draws.
/// sd is the sample standard deviation (n - 1 denominator).
BandResult monte_carlo_band(const ScenarioConfig& scenario, const IntervalMap& intervals, int n,
                            std::uint64_t seed);

/// Deterministic uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
double unit_uniform(std::uint64_t bits);

}  // namespace disempower
