// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "disempower/analysis.hpp"
#include "disempower/calibration.hpp"
#include "disempower/report.hpp"
#include "disempower/scenario.hpp"
#include "disempower/simulation.hpp"

using namespace disempower;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void guarded(int id, const std::string& name, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, name, false, std::string("threw: ") + e.what());
    }
}

std::string fmt(double v) { return format_number(v); }

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "none"; }

bool within(const std::optional<double>& v, double lo, double hi) {
    return v && *v >= lo && *v <= hi;
}

std::optional<double> crossing_of(const std::string& id) {
    const ScenarioConfig s = builtin_scenario(id);
    const auto c_bar = reference_threshold(s);
    if (!c_bar) return std::nullopt;
    return scenario_crossing(s, *c_bar);
}

double divergence_at(const ScenarioConfig& s, double year) {
    const Trajectory traj = s.run();
    for (const auto& sample : traj.samples) {
        if (std::abs(sample.t - year) < 1e-9) return sample.divergence[0];
    }
    throw std::runtime_error("no sample at requested year");
}

void criterion_1() {
    std::mt19937_64 rng(20260101);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> rate(0.0, 0.6);
    ModelParams p;
    p.rho_r = 0.0;
    p.a_dec = 0.0;
    int mismatches = 0;
    constexpr int kTuples = 100000;
    for (int k = 0; k < kTuples; ++k) {
        const double c = unit(rng);
        const double d = unit(rng);
        const int u = unit(rng) < 0.5 ? 0 : 1;
        p.delta = rate(rng);
        p.alpha = rate(rng);
        const double expected = std::max(0.0, c * (1.0 - p.delta * d - p.alpha * u));
        if (capacity_step(c, d, u, 0.0, p, 1.0) != expected) ++mismatches;
    }
    report(1, "capacity step exactness", mismatches == 0,
           std::to_string(kTuples) + " tuples, " + std::to_string(mismatches) + " mismatches");
}

void scenario_band(int id, const std::string& scenario, double lo, double hi) {
    const auto year = crossing_of(scenario);
    report(id, scenario + " crossing year", within(year, lo, hi),
           fmt(year) + " in [" + fmt(lo) + ", " + fmt(hi) + "]");
}

void criterion_5() {
    constexpr int kDraws = 200;
    constexpr std::uint64_t kSeed = 7;
    struct Arm {
        const char* id;
        double lo;
        double hi;
    };
    const Arm arms[] = {{"baseline", 15.0, 21.0}, {"std-mitigation", 21.0, 29.0},
                        {"decoupled", 33.0, 43.0}};
    bool ok = true;
    std::string detail;
    for (const auto& arm : arms) {
        const BandResult band =
            monte_carlo_band(builtin_scenario(arm.id), default_intervals(), kDraws, kSeed);
        ok = ok && within(band.mean, arm.lo, arm.hi);
        detail += std::string(arm.id) + " mean " + fmt(band.mean) + " (sd " + fmt(band.sd) + ", " +
                  std::to_string(band.crossed) + "/" + std::to_string(band.n) + ") in [" +
                  fmt(arm.lo) + ", " + fmt(arm.hi) + "]; ";
    }
    const BandResult full =
        monte_carlo_band(builtin_scenario("full-architecture"), default_intervals(), kDraws, kSeed);
    const double no_crossing = 1.0 - full.crossed_fraction();
    ok = ok && no_crossing >= 0.95;
    detail += "full-architecture no-crossing share " + fmt(no_crossing) + " >= 0.95";
    report(5, "Monte Carlo intervention bands", ok, detail);
}

void criterion_6() {
    const ValueArms arms = value_lock_in_arms();
    constexpr double kYear = 24.0;
    const double locked = divergence_at(arms.locked_in, kYear);
    const double forums = divergence_at(arms.nested_forums, kYear);
    const double continuous = divergence_at(arms.continuous, kYear);
    const bool ok = std::abs(locked - 0.68) <= 0.02 && std::abs(forums - 0.25) <= 0.05 &&
                    continuous <= 0.10;
    report(6, "value divergence at year 24", ok,
           "locked-in " + fmt(locked) + " (0.68 +- 0.02), nested forums " + fmt(forums) +
               " (0.25 +- 0.05), continuous " + fmt(continuous) + " (<= 0.10)");
}

void criterion_7() {
    const auto all = parse_series_csv(budget_fixture_csv());
    const CapacitySeries& series = select_series(all, kBudgetDollarsLabel);
    const double r = fit_decay_rate(series);
    const double span = series.observations.back().year - series.observations.front().year;
    const double decline = 1.0 - std::pow(1.0 + r, span);
    const bool ok = std::abs(r - (-0.0284)) <= 0.0005 && std::abs(decline - 0.39) <= 0.01;
    report(7, "budget decay fit", ok,
           "rate " + fmt(r) + " (-0.0284 +- 0.0005), decline " + fmt(decline) + " (0.39 +- 0.01)");
}

void criterion_8() {
    constexpr double kDt = 0.25;
    constexpr double kUnstable = 0.3;
    const CapacityMap cubic = [](double c) { return c + c * (1.0 - c) * (c - kUnstable) * kDt; };
    bool ok = true;
    std::string detail;
    for (double tol : {1e-2, 1e-3, 1e-4}) {
        ThresholdSearch search;
        search.tol = tol;
        search.probe.probe_horizon = 2000.0;
        const ThresholdReport r = estimate_reversibility_threshold(cubic, kDt, search);
        const bool hit = r.c_bar && std::abs(*r.c_bar - kUnstable) <= tol;
        ok = ok && hit;
        detail += "tol " + fmt(tol) + ": " + fmt(r.c_bar) + "; ";
    }
    report(8, "bistability oracle", ok, detail + "target 0.3");
}

// Each property returns an empty string on success or a failure note.
std::string prop_decoupling() {
    ModelParams p;
    p.coupling = {};
    p.salience_schedule = SalienceSchedule({{0.0, {1.0, 2.0, 0.5}}, {10.0, {3.0, 2.5, 1.5}}});
    SystemState mixed = uniform_initial_state(p);
    const DomainArray c0{0.9, 0.6, 0.35};
    const DomainArray v0{0.0, -2.0, 1.5};
    for (std::size_t i = 0; i < kDomainCount; ++i) {
        mixed.domains[i].c = c0[i];
        mixed.domains[i].v_e = v0[i];
        refresh_delegation(mixed.domains[i], p);
    }
    const Trajectory joint = simulate(mixed, p, {}, 60.0);
    for (std::size_t i = 0; i < kDomainCount; ++i) {
        ModelParams solo = p;
        std::vector<SalienceSchedule::Entry> entries;
        for (const auto& e : p.salience_schedule.entries()) {
            entries.push_back({e.year, {e.level[i], e.level[i], e.level[i]}});
        }
        solo.salience_schedule = SalienceSchedule(entries);
        SystemState single = uniform_initial_state(solo);
        for (auto& d : single.domains) {
            d.c = c0[i];
            d.v_e = v0[i];
            refresh_delegation(d, solo);
        }
        const Trajectory alone = simulate(single, solo, {}, 60.0);
        for (std::size_t k = 0; k < joint.samples.size(); ++k) {
            const auto& a = joint.samples[k].state.domains[i];
            const auto& b = alone.samples[k].state.domains[0];
            if (std::abs(a.c - b.c) > 1e-12 || std::abs(a.v_e - b.v_e) > 1e-12 ||
                std::abs(a.s - b.s) > 1e-12) {
                return "decoupling broke in domain " + std::to_string(i);
            }
        }
    }
    return {};
}

std::string prop_absorption() {
    ScenarioConfig s = builtin_scenario("baseline");
    s.initial = uniform_initial_state(s.params, 0.0);
    for (const auto& sample : s.run().samples) {
        for (const auto& d : sample.state.domains) {
            if (d.c != 0.0) return "capacity left 0 at t = " + fmt(sample.t);
        }
    }
    return {};
}

std::string prop_delegation_monotone() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> level(0.0, 5.0);
    std::uniform_real_distribution<double> gamma(0.1, 10.0);
    for (int k = 0; k < 10000; ++k) {
        double s1 = level(rng), s2 = level(rng), c1 = level(rng), c2 = level(rng);
        if (s1 > s2) std::swap(s1, s2);
        if (c1 > c2) std::swap(c1, c2);
        const double g = gamma(rng);
        if (delegation_fraction(s1, c1, g) > delegation_fraction(s2, c1, g)) return "not monotone in s";
        if (delegation_fraction(s1, c1, g) < delegation_fraction(s1, c2, g)) return "not monotone in c";
    }
    return {};
}

std::string prop_sweep_monotone() {
    const SweepResult r = sweep(builtin_scenario("baseline"), parse_axis_range("0.03:0.15:7"),
                                parse_axis_range("0.02:0.15:7"));
    const auto year = [&](std::size_t i, std::size_t k) {
        const auto& c = r.cell(i, k);
        return c ? *c : std::numeric_limits<double>::infinity();
    };
    for (std::size_t i = 0; i < r.delta_values.size(); ++i) {
        for (std::size_t k = 0; k < r.alpha_values.size(); ++k) {
            if (i + 1 < r.delta_values.size() && year(i + 1, k) > year(i, k)) {
                return "crossing later at higher delta";
            }
            if (k + 1 < r.alpha_values.size() && year(i, k + 1) > year(i, k)) {
                return "crossing later at higher alpha";
            }
        }
    }
    return {};
}

std::string prop_convergence(double& factor) {
    ModelParams p;
    p.theta_use = 1.0;
    p.salience_schedule = SalienceSchedule::constant(1.0);
    const auto final_state = [&](double dt) {
        ModelParams q = p;
        q.dt = dt;
        SystemState init = uniform_initial_state(q);
        init.domains[1].c = 0.7;
        init.domains[2].c = 0.4;
        for (auto& d : init.domains) refresh_delegation(d, q);
        return simulate(init, q, {}, 20.0).samples.back().state;
    };
    const SystemState a = final_state(0.1);
    const SystemState b = final_state(0.05);
    const SystemState c = final_state(0.025);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < kDomainCount; ++i) {
        e1 = std::max(e1, std::abs(a.domains[i].c - b.domains[i].c));
        e2 = std::max(e2, std::abs(b.domains[i].c - c.domains[i].c));
    }
    factor = e1 / e2;
    return factor >= 1.8 ? std::string() : "convergence factor " + fmt(factor) + " < 1.8";
}

std::string prop_byte_determinism() {
    const auto artifacts = [] {
        const ScenarioConfig s = builtin_scenario("baseline");
        const Trajectory traj = s.run();
        const auto c_bar = reference_threshold(s);
        const std::vector<std::pair<std::string, const Trajectory*>> runs{{s.id, &traj}};
        const BandResult band = monte_carlo_band(s, default_intervals(), 50, 7);
        return write_trajectory_csv(traj) + write_summary_json({summarize_run(s, traj, c_bar), band}) +
               render_svg_chart(capacity_chart(runs, c_bar, "capacity"));
    };
    return artifacts() == artifacts() ? std::string() : "artifacts differ between runs";
}

void criterion_9() {
    double factor = 0.0;
    std::string detail;
    bool ok = true;
    const std::pair<const char*, std::function<std::string()>> props[] = {
        {"decoupling", prop_decoupling},
        {"absorption", prop_absorption},
        {"delegation monotonicity", prop_delegation_monotone},
        {"sweep monotonicity", prop_sweep_monotone},
        {"step-size convergence", [&] { return prop_convergence(factor); }},
        {"byte determinism", prop_byte_determinism},
    };
    for (const auto& [name, check] : props) {
        const std::string note = check();
        ok = ok && note.empty();
        detail += std::string(name) + (note.empty() ? " ok" : " FAILED (" + note + ")") + "; ";
    }
    report(9, "property suite", ok, detail + "convergence factor " + fmt(factor));
}

void criterion_10() {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> rate(0.04, 0.14);
    constexpr int kCases = 20;
    constexpr double kTol = 0.015;
    double worst = 0.0;
    int recovered = 0;
    for (int k = 0; k < kCases; ++k) {
        ScenarioConfig truth = builtin_scenario("baseline");
        truth.params.delta = rate(rng);
        truth.params.alpha = rate(rng);
        const Trajectory traj = truth.run();
        CapacitySeries series;
        series.label = "synthetic";
        for (const auto& sample : traj.samples) {
            if (std::abs(sample.t - std::round(sample.t)) < 1e-9) {
                series.observations.push_back({sample.t, sample.state.domains[0].c, ""});
            }
        }
        FitSpec spec;
        spec.free = {"delta", "alpha"};
        const FitResult fit = fit_params(series, builtin_scenario("baseline"), spec);
        const double err = std::max(std::abs(fit.params.at("delta") - truth.params.delta),
                                    std::abs(fit.params.at("alpha") - truth.params.alpha));
        worst = std::max(worst, err);
        if (err <= kTol) ++recovered;
    }
    report(10, "calibration round-trip", recovered == kCases,
           std::to_string(recovered) + "/" + std::to_string(kCases) + " recovered, worst error " +
               fmt(worst) + " (<= " + fmt(kTol) + ")");
}

}  // namespace

int main() {
    guarded(1, "capacity step exactness", criterion_1);
    guarded(2, "baseline crossing year", [] { scenario_band(2, "baseline", 15.0, 20.0); });
    guarded(3, "conservative crossing year", [] { scenario_band(3, "conservative", 40.0, 50.0); });
    guarded(4, "aggressive crossing year", [] { scenario_band(4, "aggressive", 8.0, 12.0); });
    guarded(5, "Monte Carlo intervention bands", criterion_5);
    guarded(6, "value divergence at year 24", criterion_6);
    guarded(7, "budget decay fit", criterion_7);
    guarded(8, "bistability oracle", criterion_8);
    guarded(9, "property suite", criterion_9);
    guarded(10, "calibration round-trip", criterion_10);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
