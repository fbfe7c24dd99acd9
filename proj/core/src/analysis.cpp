#include "disempower/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "disempower/error.hpp"
#include "disempower/parallel.hpp"
#include "disempower/simulation.hpp"

namespace disempower {

CapacityMap autonomous_capacity_map(const ModelParams& params, double salience) {
    return [params, salience](double c) {
        const double d = delegation_cap(delegation_fraction(salience, c, params.gamma), params);
        const int u = usage_indicator(d, params.theta_use);
        return capacity_step(c, d, u, 0.0, params, params.dt);
    };
}

double initial_salience(const ModelParams& params) { return params.salience_schedule.at(0.0, 0); }

Fate long_run_fate(const CapacityMap& step, double dt, double c0, const FateProbe& probe) {
    const long steps = whole_steps(probe.probe_horizon, dt, "probe_horizon");
    double c = c0;
    for (long k = 0; k < steps; ++k) c = step(c);
    return c < probe.eps ? Fate::decayed : Fate::persisted;
}

Fate long_run_fate(double c0, const ModelParams& params, const FateProbe& probe) {
    params.validate();
    return long_run_fate(autonomous_capacity_map(params, initial_salience(params)), params.dt, c0,
                         probe);
}

ThresholdReport estimate_reversibility_threshold(const CapacityMap& step, double dt,
                                                 const ThresholdSearch& search) {
    if (!(search.c_lo < search.c_hi) || !(search.tol > 0.0) || search.c_lo < 0.0) {
        throw ConfigError("threshold search needs 0 <= c_lo < c_hi and tol > 0");
    }
    ThresholdReport report;
    report.tolerance = search.tol;
    report.basin_low = search.c_lo;
    report.basin_high = search.c_hi;

    const Fate lo_fate = long_run_fate(step, dt, search.c_lo, search.probe);
    const Fate hi_fate = long_run_fate(step, dt, search.c_hi, search.probe);
    report.probes = 2;
    if (lo_fate == hi_fate) {
        report.stability =
            lo_fate == Fate::decayed ? Stability::monostable_decay : Stability::monostable_persist;
        return report;
    }
    if (lo_fate == Fate::persisted) {
        throw ConfigError("threshold bracket inverted: c_lo persists while c_hi decays");
    }

    double lo = search.c_lo;
    double hi = search.c_hi;
    while (hi - lo > search.tol) {
        const double mid = 0.5 * (lo + hi);
        if (long_run_fate(step, dt, mid, search.probe) == Fate::decayed) {
            lo = mid;
        } else {
            hi = mid;
        }
        ++report.probes;
    }
    report.stability = Stability::bistable;
    report.basin_low = lo;
    report.basin_high = hi;
    report.c_bar = 0.5 * (lo + hi);
    return report;
}

ThresholdReport estimate_reversibility_threshold(const ModelParams& params,
                                                 const ThresholdSearch& search) {
    params.validate();
    return estimate_reversibility_threshold(
        autonomous_capacity_map(params, initial_salience(params)), params.dt, search);
}

std::optional<double> time_to_threshold(const Trajectory& traj, double c_bar,
                                        std::size_t domain_index) {
    if (domain_index >= kDomainCount) {
        throw DomainError("domain_index",
                          "domain index out of range: " + std::to_string(domain_index));
    }
    if (traj.samples.empty()) throw DomainError("traj", "trajectory is empty");

    const auto& samples = traj.samples;
    if (samples.front().state.domains[domain_index].c < c_bar) return samples.front().t;
    for (std::size_t k = 1; k < samples.size(); ++k) {
        const double c_prev = samples[k - 1].state.domains[domain_index].c;
        const double c_now = samples[k].state.domains[domain_index].c;
        if (c_now < c_bar) {
            const double t0 = samples[k - 1].t;
            const double t1 = samples[k].t;
            return t0 + (c_prev - c_bar) / (c_prev - c_now) * (t1 - t0);
        }
    }
    return std::nullopt;
}

std::optional<double> reference_threshold(const ScenarioConfig& scenario) {
    if (scenario.c_bar_ref) return scenario.c_bar_ref;
    return estimate_reversibility_threshold(scenario.params).c_bar;
}

std::optional<double> scenario_crossing(const ScenarioConfig& scenario, double c_bar) {
    return time_to_threshold(scenario.run(), c_bar, 0);
}

namespace {

double require_threshold(const ScenarioConfig& scenario) {
    auto c_bar = reference_threshold(scenario);
    if (!c_bar) {
        throw ConfigError("scenario \"" + scenario.id +
                          "\" has no reversibility threshold; set c_bar_ref");
    }
    return *c_bar;
}

}  // namespace

std::vector<double> AxisRange::values() const {
    if (n < 1 || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo || (n == 1 && lo != hi)) {
        throw ConfigError("invalid axis range");
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] =
            n == 1 ? lo : (i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1));
    }
    return out;
}

AxisRange parse_axis_range(const std::string& text) {
    std::istringstream in(text);
    AxisRange r;
    char sep1 = 0;
    char sep2 = 0;
    if (!(in >> r.lo >> sep1 >> r.hi >> sep2 >> r.n) || sep1 != ':' || sep2 != ':' ||
        in.peek() != std::char_traits<char>::eof()) {
        throw ConfigError("range \"" + text + "\" is not lo:hi:n");
    }
    r.values();
    return r;
}

SweepResult sweep(const ScenarioConfig& scenario, const AxisRange& delta, const AxisRange& alpha) {
    scenario.validate();
    SweepResult result;
    result.scenario = scenario.id;
    result.delta_values = delta.values();
    result.alpha_values = alpha.values();
    result.c_bar = require_threshold(scenario);
    result.horizon_years = scenario.horizon_years;

    const std::size_t cols = result.alpha_values.size();
    const std::size_t cells = result.delta_values.size() * cols;
    result.crossing_year.assign(cells, std::nullopt);
    parallel_for(cells, [&](std::size_t index) {
        ScenarioConfig cell = scenario;
        cell.params.delta = result.delta_values[index / cols];
        cell.params.alpha = result.alpha_values[index % cols];
        result.crossing_year[index] = scenario_crossing(cell, result.c_bar);
    });
    return result;
}

IntervalMap default_intervals() {
    return {{"delta", {0.06, 0.10}}, {"alpha", {0.07, 0.11}}};
}

double& scalar_param(ModelParams& p, const std::string& name) {
    if (name == "delta") return p.delta;
    if (name == "alpha") return p.alpha;
    if (name == "gamma") return p.gamma;
    if (name == "theta_use") return p.theta_use;
    if (name == "kappa_L") return p.kappa_L;
    if (name == "rho_r") return p.rho_r;
    if (name == "a_dec") return p.a_dec;
    if (name == "c_max") return p.c_max;
    if (name == "rho_v") return p.rho_v;
    if (name == "mu") return p.mu;
    if (name == "m_forum") return p.m_forum;
    if (name == "sigma_w") return p.sigma_w;
    if (name == "d_cap") return p.d_cap;
    throw UnknownKeyError(name);
}

bool is_scalar_param(const std::string& name) {
    ModelParams p;
    try {
        scalar_param(p, name);
        return true;
    } catch (const UnknownKeyError&) {
        return false;
    }
}

double unit_uniform(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

BandResult monte_carlo_band(const ScenarioConfig& scenario, const IntervalMap& intervals, int n,
                            std::uint64_t seed) {
    if (n < 2) throw RangeError("n", "band needs at least 2 draws");
    scenario.validate();
    for (const auto& [name, iv] : intervals) {
        if (!is_scalar_param(name)) throw UnknownKeyError(name);
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.hi < iv.lo) {
            throw RangeError(name, "interval for " + name + " must satisfy lo <= hi");
        }
    }

    BandResult band;
    band.scenario = scenario.id;
    band.n = n;
    band.seed = seed;
    band.c_bar = require_threshold(scenario);
    band.horizon_years = scenario.horizon_years;

    // Draws are taken serially so the stream depends only on the seed.
    constexpr int kMaxConsecutiveRejections = 10000;
    std::mt19937_64 rng(seed);
    std::vector<ModelParams> draws;
    draws.reserve(static_cast<std::size_t>(n));
    int streak = 0;
    while (static_cast<int>(draws.size()) < n) {
        ModelParams p = scenario.params;
        for (const auto& [name, iv] : intervals) {
            scalar_param(p, name) = iv.lo + (iv.hi - iv.lo) * unit_uniform(rng());
        }
        try {
            p.validate();
            draws.push_back(std::move(p));
            streak = 0;
        } catch (const RangeError&) {
            ++band.rejected;
            if (++streak > kMaxConsecutiveRejections) {
                throw ConfigError("intervals produce no valid parameters");
            }
        }
    }

    std::vector<std::optional<double>> crossing(draws.size());
    parallel_for(draws.size(), [&](std::size_t i) {
        ScenarioConfig run = scenario;
        run.params = draws[i];
        crossing[i] = scenario_crossing(run, band.c_bar);
    });

    std::vector<double> years;
    for (const auto& c : crossing) {
        if (c) years.push_back(*c);
    }
    band.crossed = static_cast<int>(years.size());
    if (!years.empty()) {
        double sum = 0.0;
        for (double y : years) sum += y;
        const double mean = sum / static_cast<double>(years.size());
        double ss = 0.0;
        for (double y : years) ss += (y - mean) * (y - mean);
        band.mean = mean;
        band.sd = years.size() > 1 ? std::sqrt(ss / static_cast<double>(years.size() - 1)) : 0.0;
        band.min = *std::min_element(years.begin(), years.end());
        band.max = *std::max_element(years.begin(), years.end());
    }
    return band;
}

}  // namespace disempower
