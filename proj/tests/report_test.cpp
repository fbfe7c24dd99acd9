#include <algorithm>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "disempower/error.hpp"
#include "disempower/report.hpp"

using namespace disempower;

namespace {

std::size_t count(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

std::string field_of(std::string_view text) {
    try {
        parse_scenario(text);
    } catch (const RangeError& e) {
        return e.field();
    } catch (const UnknownKeyError& e) {
        return e.key();
    }
    return {};
}

}  // namespace

TEST(ScenarioJson, BuiltinsRoundTrip) {
    for (const auto& id : builtin_scenario_ids()) {
        const ScenarioConfig s = builtin_scenario(id);
        EXPECT_EQ(parse_scenario(serialize_scenario(s)), s) << id;
        EXPECT_EQ(serialize_scenario(s), builtin_scenario_text(id)) << id;
    }
}

TEST(ScenarioJson, BuiltinList) {
    const std::vector<std::string> expected{"baseline",       "conservative", "aggressive",
                                            "std-mitigation", "decoupled",    "full-architecture"};
    EXPECT_EQ(builtin_scenario_ids(), expected);
    EXPECT_THROW(builtin_scenario("nosuch"), ConfigError);
}

TEST(ScenarioJson, MinimalDocumentTakesDefaults) {
    const ScenarioConfig s = parse_scenario(R"({"id": "bare"})");
    EXPECT_EQ(s.params, ModelParams{});
    EXPECT_EQ(s.horizon_years, 60.0);
    EXPECT_FALSE(s.c_bar_ref);
    EXPECT_TRUE(s.interventions.empty());
    EXPECT_EQ(s.initial, uniform_initial_state(ModelParams{}));
}

TEST(ScenarioJson, UnknownKeysAreNamed) {
    EXPECT_EQ(field_of(R"({"id": "x", "horizon": 10})"), "horizon");
    EXPECT_EQ(field_of(R"({"id": "x", "params": {"detla": 0.1}})"), "params.detla");
    EXPECT_EQ(field_of(R"({"id": "x", "interventions": [{"mechanism": "std_mitigation", "factor": 1}]})"),
              "interventions.std_mitigation.factor");
    EXPECT_EQ(field_of(R"({"id": "x", "interventions": [{"mechanism": "teleport"}]})"),
              "interventions.teleport");
}

TEST(ScenarioJson, RangeErrorsAreNamed) {
    EXPECT_EQ(field_of(R"({"id": "x", "params": {"delta": 1.5}})"), "delta");
    EXPECT_EQ(field_of(R"({"id": "x", "params": {"gamma": "four"}})"), "gamma");
    EXPECT_EQ(field_of(R"({"id": "x", "horizon_years": 10.1})"), "horizon_years");
    EXPECT_EQ(field_of(R"({"id": ""})"), "id");
    EXPECT_EQ(field_of(R"({"id": "x", "c_bar_ref": -1})"), "c_bar_ref");
    EXPECT_EQ(field_of(R"({"id": "x", "interventions": [{"mechanism": "std_mitigation", "delta_factor": 2}]})"),
              "delta_factor");
}

TEST(ScenarioJson, DuplicateMechanismIsConfigError) {
    EXPECT_THROW(parse_scenario(R"({"id": "x", "interventions": [{"mechanism": "firewalls"},
                                                                {"mechanism": "firewalls"}]})"),
                 ConfigError);
}

TEST(ScenarioJson, SyntaxErrorPosition) {
    try {
        parse_scenario("{\n  \"id\": \"x\",\n  \"horizon_years\": ,\n}");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_EQ(e.column(), 20u);
    }
}

TEST(ScenarioJson, InitialDomainsDeriveDelegation) {
    const ScenarioConfig s = parse_scenario(
        R"({"id": "x", "initial": {"v_h": 1.0, "domains": [{"c": 0.5, "s": 2.0, "v_e": 0.0},
            {"c": 1.0, "s": 1.0, "v_e": 0.0}, {"c": 1.0, "s": 1.0, "v_e": 0.0}]}})");
    EXPECT_DOUBLE_EQ(s.initial.domains[0].d, 0.5);
    EXPECT_EQ(s.initial.domains[0].u, 1);
    EXPECT_EQ(s.initial.v_h, 1.0);
}

TEST(TrajectoryCsv, LayoutAndRoundTrip) {
    const ScenarioConfig s = builtin_scenario("baseline");
    const Trajectory traj = s.run();
    const std::string csv = write_trajectory_csv(traj);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kTrajectoryCsvHeader);
    const auto rows = parse_trajectory_csv(csv);
    ASSERT_EQ(rows.size(), traj.samples.size() * kDomainCount);
    EXPECT_EQ(rows[0].domain, "economic");
    EXPECT_EQ(rows[1].domain, "political");
    EXPECT_EQ(rows[5].t, 0.25);
    const auto& last = traj.samples.back();
    EXPECT_EQ(rows.back().c, std::stod(format_number(last.state.domains[2].c)));
    EXPECT_EQ(rows.back().divergence, std::stod(format_number(last.divergence[2])));
}

TEST(TrajectoryCsv, Malformed) {
    EXPECT_THROW(parse_trajectory_csv("t,c\n"), SyntaxError);
    try {
        parse_trajectory_csv(std::string(kTrajectoryCsvHeader) + "\n0,economic,1\n");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(FormatNumber, NineSignificantDigits) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
    EXPECT_EQ(format_number(60.0), "60");
    EXPECT_EQ(format_number(1e-12), "1e-12");
}

TEST(SummaryJson, EveryReportKindRoundTrips) {
    RunSummary run;
    run.scenario = "baseline";
    run.c_bar = 0.25;
    run.horizon_years = 60.0;
    run.crossing_year = {16.1, std::nullopt, 20.0};
    run.final_capacity = {0.1, 0.2, 0.3};
    run.final_divergence = {0.9, 0.8, 0.7};

    ThresholdReport th;
    th.scenario = "baseline";
    th.c_bar = 0.25;
    th.basin_low = 0.2499;
    th.basin_high = 0.2501;
    th.tolerance = 1e-3;
    th.probes = 12;

    ThresholdReport mono;
    mono.scenario = "flat";
    mono.stability = Stability::monostable_persist;

    BandResult band;
    band.scenario = "full-architecture";
    band.n = 200;
    band.seed = std::numeric_limits<std::uint64_t>::max();
    band.c_bar = 0.25;
    band.horizon_years = 60.0;

    SweepResult sw;
    sw.scenario = "baseline";
    sw.delta_values = {0.03, 0.05};
    sw.alpha_values = {0.02, 0.04, 0.06};
    sw.crossing_year = {40.0, std::nullopt, 30.0, 25.0, 20.0, 15.0};
    sw.c_bar = 0.25;
    sw.horizon_years = 60.0;

    const std::vector<Report> reports{run, th, mono, band, sw};
    const std::string text = write_summary_json(reports);
    EXPECT_EQ(text.rfind(R"({"schema":1,"reports":[{"kind":"run")", 0), 0u);
    EXPECT_NE(text.find(R"("crossing_year":null,"crossing_reason":"none within horizon")"),
              std::string::npos);
    EXPECT_NE(text.find(R"("c_bar":null,"c_bar_reason":"monostable_persist")"), std::string::npos);
    EXPECT_EQ(parse_summary_json(text), reports);
    EXPECT_EQ(write_summary_json(parse_summary_json(text)), text);
}

TEST(SummaryJson, Errors) {
    EXPECT_THROW(parse_summary_json("{"), SyntaxError);
    EXPECT_THROW(parse_summary_json(R"({"schema":2,"reports":[]})"), RangeError);
    EXPECT_THROW(parse_summary_json(R"({"schema":1,"reports":[{"kind":"pie"}]})"), RangeError);
    EXPECT_THROW(parse_summary_json(R"({"schema":1,"reports":[{"kind":"band"}]})"), ConfigError);
}

TEST(Svg, ChartStructure) {
    ChartSpec spec;
    spec.title = "A & B";
    spec.series = {{"one", {{0, 0.0}, {1, 1.0}, {2, 0.5}}, 0}, {"two", {{0, 1.0}, {2, 2.0}}, 1}};
    spec.reference_y = 0.25;
    spec.reference_label = "C-bar";
    const std::string svg = render_svg_chart(spec);
    EXPECT_NE(svg.find(R"(width="960" height="540")"), std::string::npos);
    EXPECT_EQ(count(svg, "<polyline"), 2u);
    EXPECT_EQ(count(svg, R"(class="reference")"), 1u);
    EXPECT_NE(svg.find("A &amp; B"), std::string::npos);
    EXPECT_EQ(svg.back(), '\n');
}

TEST(Svg, RejectsEmptyInput) {
    ChartSpec spec;
    EXPECT_THROW(render_svg_chart(spec), ConfigError);
    spec.series = {{"empty", {}, 0}};
    EXPECT_THROW(render_svg_chart(spec), ConfigError);
    spec.series = {{"nan", {{0.0, NAN}}, 0}};
    EXPECT_THROW(render_svg_chart(spec), ConfigError);
}

TEST(Svg, HeatmapHasOneCellPerGridPoint) {
    SweepResult sw;
    sw.scenario = "baseline";
    sw.delta_values = {0.03, 0.05};
    sw.alpha_values = {0.02, 0.04, 0.06};
    sw.crossing_year = {40.0, std::nullopt, 30.0, 25.0, 20.0, 15.0};
    const std::string svg = render_svg_heatmap(sw);
    EXPECT_EQ(count(svg, "<rect"), 1u + 6u);
    EXPECT_EQ(count(svg, ">none<"), 1u);
}

TEST(Svg, NiceTicks) {
    EXPECT_EQ(nice_ticks(0.0, 60.0), (std::vector<double>{0, 10, 20, 30, 40, 50, 60}));
    EXPECT_EQ(nice_ticks(0.0, 1.0), (std::vector<double>{0, 0.2, 0.4, 0.6, 0.8, 1}));
    const auto t = nice_ticks(0.013, 0.097);
    ASSERT_FALSE(t.empty());
    EXPECT_GE(t.front(), 0.013);
    EXPECT_LE(t.back(), 0.097);
    EXPECT_EQ(nice_ticks(1.0, 1.0), std::vector<double>{1.0});
}
