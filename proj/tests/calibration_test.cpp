#include <cmath>

#include <gtest/gtest.h>

#include "disempower/calibration.hpp"
#include "disempower/error.hpp"

using namespace disempower;

namespace {

CapacitySeries make_series(std::vector<std::pair<double, double>> points) {
    CapacitySeries s{"x", {}};
    for (auto [t, v] : points) s.observations.push_back({t, v, ""});
    return s;
}

CapacitySeries synthetic(const ScenarioConfig& truth) {
    CapacitySeries s{"synthetic", {}};
    for (const auto& sample : truth.run().samples) {
        if (std::abs(sample.t - std::round(sample.t)) < 1e-9) {
            s.observations.push_back({sample.t, sample.state.domains[0].c, ""});
        }
    }
    return s;
}

}  // namespace

TEST(SeriesCsv, FixtureParses) {
    const auto all = parse_series_csv(budget_fixture_csv());
    ASSERT_EQ(all.size(), 2u);
    const auto& dollars = select_series(all, kBudgetDollarsLabel);
    ASSERT_EQ(dollars.observations.size(), 2u);
    EXPECT_EQ(dollars.observations[0].year, 2007.0);
    EXPECT_EQ(dollars.observations[1].value, 92.0);
    EXPECT_EQ(dollars.observations[1].unit, "usd_bn_2020");
    EXPECT_EQ(select_series(all, kBudgetShareLabel).observations[0].value, 0.86);
    EXPECT_THROW(select_series(all, "nosuch"), ConfigError);
}

TEST(SeriesCsv, UnitColumnIsOptional) {
    const auto all = parse_series_csv("year,value,label\r\n1,2,a\r\n2,3,a\r\n");
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0].observations.size(), 2u);
    EXPECT_EQ(all[0].observations[0].unit, "");
}

TEST(SeriesCsv, Errors) {
    EXPECT_THROW(parse_series_csv(""), SyntaxError);
    EXPECT_THROW(parse_series_csv("when,value,label\n"), SyntaxError);
    EXPECT_THROW(parse_series_csv("year,value,label\n1,2\n"), SyntaxError);
    try {
        parse_series_csv("year,value,label\n1,2,a\n2,x,a\n");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_EQ(e.column(), 3u);
    }
    EXPECT_THROW(parse_series_csv("year,value,label\n2,1,a\n1,1,a\n"), RangeError);
}

TEST(DecayRate, TwoPointClosedForm) {
    const auto all = parse_series_csv(budget_fixture_csv());
    const double r = fit_decay_rate(select_series(all, kBudgetDollarsLabel));
    EXPECT_NEAR(r, std::pow(92.0 / 150.0, 1.0 / 17.0) - 1.0, 1e-15);
    EXPECT_NEAR(r, -0.0284, 0.0005);
}

TEST(DecayRate, ExactGeometricSeries) {
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 10; ++k) pts.emplace_back(2000 + k, 5.0 * std::pow(0.97, k));
    EXPECT_NEAR(fit_decay_rate(make_series(pts)), -0.03, 1e-12);
}

TEST(DecayRate, Errors) {
    EXPECT_THROW(fit_decay_rate(make_series({{1, 1.0}})), ConfigError);
    EXPECT_THROW(fit_decay_rate(make_series({{1, 1.0}, {2, 0.0}})), DomainError);
    EXPECT_THROW(fit_decay_rate(make_series({{1, 1.0}, {2, -3.0}})), DomainError);
}

TEST(FitParams, RecoversDeltaAlpha) {
    ScenarioConfig truth = builtin_scenario("baseline");
    truth.params.delta = 0.11;
    truth.params.alpha = 0.06;
    FitSpec spec;
    spec.free = {"delta", "alpha"};
    const FitResult fit = fit_params(synthetic(truth), builtin_scenario("baseline"), spec);
    EXPECT_NEAR(fit.params.at("delta"), 0.11, 0.015);
    EXPECT_NEAR(fit.params.at("alpha"), 0.06, 0.015);
    EXPECT_LT(fit.residual, 1e-4);
    EXPECT_GT(fit.evaluations, 0);
}

TEST(FitParams, ResidualZeroAtTruth) {
    const ScenarioConfig truth = builtin_scenario("baseline");
    EXPECT_NEAR(series_residual(synthetic(truth), truth), 0.0, 1e-20);
}

TEST(FitParams, Errors) {
    const ScenarioConfig model = builtin_scenario("baseline");
    FitSpec spec;
    spec.free = {"delta", "alpha"};
    EXPECT_THROW(fit_params(make_series({{0, 1.0}, {10, 0.5}}), model, spec), ConfigError);
    spec.free = {};
    EXPECT_THROW(fit_params(make_series({{0, 1.0}, {10, 0.5}}), model, spec), ConfigError);
    spec.free = {"rho_v"};
    EXPECT_THROW(fit_params(make_series({{0, 1.0}, {10, 0.5}}), model, spec), ConfigError);
}

TEST(Knobs, ApplyAndRead) {
    ScenarioConfig s = builtin_scenario("decoupled");
    EXPECT_TRUE(apply_knob(s, "coupling", 0.5));
    EXPECT_EQ(s.params.coupling[2][0], 0.5);
    EXPECT_EQ(s.params.coupling[1][1], 0.0);
    EXPECT_TRUE(apply_knob(s, "decoupled_streams.a_dec", 0.03));
    EXPECT_EQ(read_knob(s, "decoupled_streams.a_dec"), 0.03);
    EXPECT_FALSE(apply_knob(s, "nested_forums.m_forum", 4.0));
    EXPECT_FALSE(read_knob(s, "nested_forums.m_forum"));
    EXPECT_TRUE(apply_knob(s, "gamma", 3.0));
    EXPECT_EQ(read_knob(s, "gamma"), 3.0);
    EXPECT_THROW(apply_knob(s, "nosuch", 1.0), UnknownKeyError);
}

TEST(BandCalibration, FrozenValuesSatisfyEveryBand) {
    const CalibrationResult r = calibrate_to_bands(default_calibration_problem());
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.violation, 0.0);
    ASSERT_TRUE(r.c_bar);
    EXPECT_EQ(*r.c_bar, 0.25);
    EXPECT_EQ(r.outcomes.size(), 9u);
    for (const auto& id : builtin_scenario_ids()) {
        const auto it = std::find_if(r.frozen.begin(), r.frozen.end(),
                                     [&](const ScenarioConfig& s) { return s.id == id; });
        ASSERT_NE(it, r.frozen.end()) << id;
        EXPECT_EQ(*it, builtin_scenario(id)) << id;
    }
}

TEST(BandCalibration, RecoversFromPerturbedStart) {
    CalibrationProblem problem = default_calibration_problem();
    problem.knobs = {{"std_mitigation.delta_factor", 0.3, 0.8}};
    for (auto& t : problem.targets) {
        if (t.scenario.interventions.std_mitigation) t.scenario.interventions.std_mitigation->delta_factor = 0.75;
    }
    const CalibrationResult r = calibrate_to_bands(problem);
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.violation, 0.0);
}

TEST(BandCalibration, ReportsUnreachableBands) {
    CalibrationProblem problem = default_calibration_problem();
    problem.knobs = {{"gamma", 4.0, 4.0}};
    problem.targets.resize(1);
    problem.targets[0].lo = 50.0;
    problem.targets[0].hi = 55.0;
    const CalibrationResult r = calibrate_to_bands(problem);
    EXPECT_FALSE(r.success);
    EXPECT_GT(r.violation, 30.0);
}
