#pragma once

// Serialization: scenario configs, trajectory CSV, summary JSON and SVG charts.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "disempower/analysis.hpp"
#include "disempower/model.hpp"
#include "disempower/scenario.hpp"

namespace disempower {

// ---------------------------------------------------------------------------
// Scenario configs

/// Strict parse. Throws SyntaxError (line/column), UnknownKeyError (names the
/// key) or RangeError (names the field). Omitted keys take the ModelParams and
/// ScenarioConfig defaults; an omitted "initial" is three domains at c = 1 with
/// salience from the schedule at t = 0.
ScenarioConfig parse_scenario(std::string_view text);

/// Pretty-printed JSON; parse_scenario(serialize_scenario(x)) == x.
std::string serialize_scenario(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Trajectory CSV

inline constexpr std::string_view kTrajectoryCsvHeader = "t,domain,c,s,d,u,v_e,v_h,divergence";

/// One row per (sample, domain), ordered by t then domain index, numbers with
/// 9 significant digits.
std::string write_trajectory_csv(const Trajectory& traj);

struct TrajectoryRow {
    double t = 0.0;
    std::string domain;
    double c = 0.0;
    double s = 0.0;
    double d = 0.0;
    int u = 0;
    double v_e = 0.0;
    double v_h = 0.0;
    double divergence = 0.0;
};

std::vector<TrajectoryRow> parse_trajectory_csv(std::string_view text);

/// "%.9g"
std::string format_number(double value);

// ---------------------------------------------------------------------------
// Summary JSON

struct RunSummary {
    std::string scenario;
    std::optional<double> c_bar;
    double horizon_years = 0.0;
    std::array<std::optional<double>, kDomainCount> crossing_year{};
    DomainArray final_capacity{};
    DomainArray final_divergence{};

    bool operator==(const RunSummary&) const = default;
};

RunSummary summarize_run(const ScenarioConfig& scenario, const Trajectory& traj,
                         std::optional<double> c_bar);

using Report = std::variant<RunSummary, ThresholdReport, BandResult, SweepResult>;

/// Compact JSON, schema 1, fixed key order. Absent crossings are written as
/// null with a sibling "<key>_reason" string.
std::string write_summary_json(const std::vector<Report>& reports);
std::vector<Report> parse_summary_json(std::string_view text);

// ---------------------------------------------------------------------------
// SVG

struct ChartSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
    int style = 0;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    /// Axis ranges; expanded to cover every series and the reference line.
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;
    std::vector<ChartSeries> series;
    std::optional<double> reference_y;
    std::string reference_label;
};

inline constexpr int kSvgWidth = 960;
inline constexpr int kSvgHeight = 540;

/// Standalone 960x540 SVG: one polyline per series, round-number ticks and a
/// legend. Throws ConfigError when there are no series or a series is empty.
std::string render_svg_chart(const ChartSpec& spec);

/// Sweep grid as a colored cell map; cells without a crossing are grey.
std::string render_svg_heatmap(const SweepResult& sweep);

/// Round tick positions covering [lo, hi], roughly `target` of them.
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

/// Capacity (with C-bar) or divergence per domain-0 of each named trajectory.
ChartSpec capacity_chart(const std::vector<std::pair<std::string, const Trajectory*>>& runs,
                         std::optional<double> c_bar, const std::string& title);
ChartSpec divergence_chart(const std::vector<std::pair<std::string, const Trajectory*>>& runs,
                           const std::string& title);

}  // namespace disempower
