#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "disempower/analysis.hpp"
#include "disempower/scenario.hpp"

namespace disempower {

struct CapacitySeries {
    struct Observation {
        double year = 0.0;
        double value = 0.0;
        std::string unit;
        bool operator==(const Observation&) const = default;
    };
    std::string label;
    std::vector<Observation> observations;

    /// Strictly increasing years, finite values. Positivity is checked by the fits.
    void validate() const;
    bool operator==(const CapacitySeries&) const = default;
};

/// CSV with header year,value,label and an optional trailing unit column.
/// Rows are grouped by label in order of first appearance.
std::vector<CapacitySeries> parse_series_csv(std::string_view text);
const CapacitySeries& select_series(const std::vector<CapacitySeries>& all, std::string_view label);

/// Prevention spending 2007 -> 2024 (constant 2020 USD bn) and its share of total spending.
std::string_view budget_fixture_csv();
inline constexpr std::string_view kBudgetDollarsLabel = "prevention_spending";
inline constexpr std::string_view kBudgetShareLabel = "prevention_share";

/// Annual multiplicative rate r of v(t) = v0 (1 + r)^(t - t0), fitted by least
/// squares on log values. Two points give (v1 / v0)^(1 / (t1 - t0)) - 1.
/// Throws DomainError on nonpositive values, ConfigError on fewer than 2 points.
double fit_decay_rate(const CapacitySeries& series);

struct FitResult {
    std::map<std::string, double> params;
    double residual = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// delta, alpha in [0, 0.5]; gamma in [0.5, 10]; s_level in [0.25, 4].
std::map<std::string, ParamInterval> default_fit_bounds();

/// Free parameters: delta, alpha, gamma, s_level (a multiplier on the salience
/// schedule and on the initial salience).
struct FitSpec {
    std::vector<std::string> free;
    std::map<std::string, ParamInterval> bounds = default_fit_bounds();
    int grid_n = 11;
    int refine_iters = 400;
};

/// Coarse tensor grid followed by coordinate descent with step halving.
///
/// Simulates `model` (economic domain) over the series span, rescales the
/// simulated capacity so it matches the first observation, and minimises the
/// sum of squared differences at the observed years.
FitResult fit_params(const CapacitySeries& series, const ScenarioConfig& model, const FitSpec& spec);

/// Sum of squared residuals of a model run against a series, after rescaling.
double series_residual(const CapacitySeries& series, const ScenarioConfig& model);

/// Applies a named calibration knob to a scenario. Returns false when the
/// scenario has nothing the knob acts on (e.g. an intervention it lacks).
///
/// Knob names: any scalar ModelParams field, "s_level", "coupling" (uniform
/// off-diagonal weight), and "<mechanism>.<field>" for intervention magnitudes.
bool apply_knob(ScenarioConfig& scenario, const std::string& knob, double value);
std::optional<double> read_knob(const ScenarioConfig& scenario, const std::string& knob);

struct BandTarget {
    enum class Metric { crossing_year, divergence };

    std::string label;
    ScenarioConfig scenario;
    Metric metric = Metric::crossing_year;
    double year = 0.0;  ///< divergence is read at this time
    double lo = 0.0;
    double hi = 0.0;    ///< +inf accepts "no crossing within the horizon"
    /// Knob values applied after the search knobs, e.g. mu = 0 for a locked-in arm.
    std::map<std::string, double> pinned;
};

struct Knob {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
};

struct CalibrationProblem {
    ScenarioConfig reference;  ///< supplies C-bar for every crossing target
    std::vector<BandTarget> targets;
    std::vector<Knob> knobs;
    int budget = 400;          ///< maximum objective evaluations
    ThresholdSearch search{};
};

struct TargetOutcome {
    std::string label;
    std::optional<double> value;
    double lo = 0.0;
    double hi = 0.0;
    double violation = 0.0;
};

struct CalibrationResult {
    FitResult fit;
    double violation = 0.0;
    bool success = false;
    std::optional<double> c_bar;
    std::vector<TargetOutcome> outcomes;
    /// Reference and every target scenario with the knobs applied, deduplicated by id.
    std::vector<ScenarioConfig> frozen;
};

/// Minimises total hinge distance of every target to its band over the knobs.
/// Starts from the knob values already in the reference scenario.
CalibrationResult calibrate_to_bands(const CalibrationProblem& problem);

/// Every shipped band as a deterministic target, knobs bracketing the frozen values.
CalibrationProblem default_calibration_problem();

}  // namespace disempower
