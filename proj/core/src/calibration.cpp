#include "disempower/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "disempower/error.hpp"
#include "disempower/simulation.hpp"

namespace disempower {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& text, std::size_t line, std::size_t column) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw SyntaxError(line, column, "expected a number, got \"" + text + "\"");
    }
    return value;
}

/// Linear interpolation of domain-0 capacity at time t.
double capacity_at(const Trajectory& traj, double t) {
    const auto& s = traj.samples;
    if (t <= s.front().t) return s.front().state.domains[0].c;
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (t <= s[k].t + 1e-12) {
            const double w = (t - s[k - 1].t) / (s[k].t - s[k - 1].t);
            return s[k - 1].state.domains[0].c * (1.0 - w) + s[k].state.domains[0].c * w;
        }
    }
    return s.back().state.domains[0].c;
}

bool apply_fit_param(ScenarioConfig& model, const ScenarioConfig& base, const std::string& name,
                     double value) {
    if (name == "s_level") {
        model.params.salience_schedule = base.params.salience_schedule.scaled(value);
        for (std::size_t i = 0; i < kDomainCount; ++i) {
            model.initial.domains[i].s = base.initial.domains[i].s * value;
            refresh_delegation(model.initial.domains[i], model.params);
        }
        return true;
    }
    if (name == "delta" || name == "alpha" || name == "gamma") {
        scalar_param(model.params, name) = value;
        if (name == "gamma") {
            for (auto& dom : model.initial.domains) refresh_delegation(dom, model.params);
        }
        return true;
    }
    throw UnknownKeyError(name);
}

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
};

/// Grid followed by coordinate descent, shared by the series fit and the band search.
template <class Objective>
FitResult minimise(const std::vector<std::string>& names, const Box& box, std::vector<double> start,
                   int grid_n, int refine_iters, int budget, Objective&& objective) {
    const std::size_t dims = names.size();
    FitResult result;
    auto evaluate = [&](const std::vector<double>& x) {
        ++result.evaluations;
        return objective(x);
    };

    std::vector<double> best = start;
    double best_f = start.empty() && dims > 0 ? kInf : evaluate(start);
    if (dims == 0) {
        result.residual = best_f;
        result.converged = true;
        return result;
    }

    // Tensor grid, lexicographic order; ties keep the earlier point.
    std::vector<int> index(dims, 0);
    const auto grid_value = [&](std::size_t d, int i) {
        if (grid_n <= 1) return 0.5 * (box.lo[d] + box.hi[d]);
        return i == grid_n - 1 ? box.hi[d] : box.lo[d] + (box.hi[d] - box.lo[d]) * i / (grid_n - 1);
    };
    bool done = best_f == 0.0;
    while (!done && result.evaluations < budget) {
        std::vector<double> x(dims);
        for (std::size_t d = 0; d < dims; ++d) x[d] = grid_value(d, index[d]);
        const double f = evaluate(x);
        if (f < best_f) {
            best_f = f;
            best = x;
        }
        std::size_t d = 0;
        while (d < dims && ++index[d] >= std::max(grid_n, 1)) index[d++] = 0;
        done = d == dims || best_f == 0.0;
    }
    if (!std::isfinite(best_f)) throw ConfigError("no feasible point on the search grid");

    std::vector<double> step(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        step[d] = (box.hi[d] - box.lo[d]) / std::max(grid_n - 1, 1);
    }
    const auto small = [&] {
        for (std::size_t d = 0; d < dims; ++d) {
            if (step[d] > 1e-12 * std::max(1.0, box.hi[d] - box.lo[d])) return false;
        }
        return true;
    };
    while (result.iterations < refine_iters && result.evaluations < budget && best_f > 0.0 &&
           !small()) {
        ++result.iterations;
        bool improved = false;
        for (std::size_t d = 0; d < dims && result.evaluations < budget; ++d) {
            for (double sign : {-1.0, 1.0}) {
                std::vector<double> x = best;
                x[d] = std::clamp(best[d] + sign * step[d], box.lo[d], box.hi[d]);
                if (x[d] == best[d]) continue;
                const double f = evaluate(x);
                if (f < best_f) {
                    best_f = f;
                    best = std::move(x);
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            for (double& s : step) s *= 0.5;
        }
    }
    result.converged = best_f == 0.0 || small();
    result.residual = best_f;
    for (std::size_t d = 0; d < dims; ++d) result.params[names[d]] = best[d];
    return result;
}

}  // namespace

void CapacitySeries::validate() const {
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& o = observations[i];
        if (!std::isfinite(o.year) || !std::isfinite(o.value)) {
            throw RangeError("value", "series \"" + label + "\" has a non-finite entry");
        }
        if (i > 0 && !(o.year > observations[i - 1].year)) {
            throw RangeError("year", "series \"" + label + "\" years must strictly increase");
        }
    }
}

std::vector<CapacitySeries> parse_series_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool has_unit = false;
    bool header_seen = false;
    std::vector<CapacitySeries> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (!header_seen) {
            if (line == "year,value,label,unit") {
                has_unit = true;
            } else if (line != "year,value,label") {
                throw SyntaxError(line_no, 1, "expected header year,value,label[,unit]");
            }
            header_seen = true;
            continue;
        }
        const std::size_t expected = has_unit ? 4 : 3;
        if (fields.size() != expected) {
            throw SyntaxError(line_no, 1,
                              "expected " + std::to_string(expected) + " fields, got " +
                                  std::to_string(fields.size()));
        }
        CapacitySeries::Observation obs;
        obs.year = parse_number(fields[0], line_no, 1);
        obs.value = parse_number(fields[1], line_no, fields[0].size() + 2);
        if (has_unit) obs.unit = fields[3];
        const std::string& label = fields[2];
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const CapacitySeries& s) { return s.label == label; });
        if (it == out.end()) {
            out.push_back(CapacitySeries{label, {}});
            it = std::prev(out.end());
        }
        it->observations.push_back(std::move(obs));
    }
    if (!header_seen) throw SyntaxError(1, 1, "empty series file");
    for (const auto& s : out) s.validate();
    return out;
}

const CapacitySeries& select_series(const std::vector<CapacitySeries>& all, std::string_view label) {
    for (const auto& s : all) {
        if (s.label == label) return s;
    }
    throw ConfigError("no series labelled \"" + std::string(label) + "\"");
}

std::string_view budget_fixture_csv() {
    return "year,value,label,unit\n"
           "2007,150,prevention_spending,usd_bn_2020\n"
           "2024,92,prevention_spending,usd_bn_2020\n"
           "2007,0.86,prevention_share,fraction\n"
           "2024,0.52,prevention_share,fraction\n";
}

double fit_decay_rate(const CapacitySeries& series) {
    series.validate();
    const auto& obs = series.observations;
    if (obs.size() < 2) throw ConfigError("decay fit needs at least 2 observations");
    for (const auto& o : obs) {
        if (!(o.value > 0.0)) {
            throw DomainError("value", "decay fit needs positive values, got " +
                                           std::to_string(o.value) + " at " +
                                           std::to_string(o.year));
        }
    }
    if (obs.size() == 2) {
        return std::pow(obs[1].value / obs[0].value, 1.0 / (obs[1].year - obs[0].year)) - 1.0;
    }
    const double t0 = obs.front().year;
    double mean_t = 0.0;
    double mean_y = 0.0;
    for (const auto& o : obs) {
        mean_t += o.year - t0;
        mean_y += std::log(o.value);
    }
    mean_t /= static_cast<double>(obs.size());
    mean_y /= static_cast<double>(obs.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& o : obs) {
        const double dt = o.year - t0 - mean_t;
        sxy += dt * (std::log(o.value) - mean_y);
        sxx += dt * dt;
    }
    return std::exp(sxy / sxx) - 1.0;
}

double series_residual(const CapacitySeries& series, const ScenarioConfig& model) {
    const auto& obs = series.observations;
    const double t0 = obs.front().year;
    const double span = std::max(1.0, std::ceil(obs.back().year - t0));
    const Trajectory traj = simulate(model.initial, model.params, model.interventions, span);
    const double c0 = traj.samples.front().state.domains[0].c;
    if (!(c0 > 0.0)) return kInf;
    const double scale = obs.front().value / c0;
    double sum = 0.0;
    for (const auto& o : obs) {
        const double diff = scale * capacity_at(traj, o.year - t0) - o.value;
        sum += diff * diff;
    }
    return sum;
}

std::map<std::string, ParamInterval> default_fit_bounds() {
    return {{"delta", {0.0, 0.5}}, {"alpha", {0.0, 0.5}}, {"gamma", {0.5, 10.0}},
            {"s_level", {0.25, 4.0}}};
}

FitResult fit_params(const CapacitySeries& series, const ScenarioConfig& model, const FitSpec& spec) {
    series.validate();
    if (series.observations.size() < 2) throw ConfigError("fit needs at least 2 observations");
    if (spec.free.size() > 1 && series.observations.size() < 3) {
        throw ConfigError("fitting more than one parameter needs at least 3 observations");
    }
    if (spec.free.empty()) throw ConfigError("no free parameters");
    model.validate();

    Box box;
    std::vector<double> start;
    for (const auto& name : spec.free) {
        auto it = spec.bounds.find(name);
        if (it == spec.bounds.end()) throw ConfigError("no bounds for free parameter " + name);
        const auto& b = it->second;
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || b.hi < b.lo) {
            throw RangeError(name, "bounds for " + name + " must satisfy lo <= hi");
        }
        ScenarioConfig probe = model;
        apply_fit_param(probe, model, name, b.lo);
        box.lo.push_back(b.lo);
        box.hi.push_back(b.hi);
    }

    auto objective = [&](const std::vector<double>& x) {
        ScenarioConfig candidate = model;
        for (std::size_t d = 0; d < x.size(); ++d) {
            apply_fit_param(candidate, model, spec.free[d], x[d]);
        }
        try {
            candidate.params.validate();
        } catch (const RangeError&) {
            return kInf;
        }
        return series_residual(series, candidate);
    };
    return minimise(spec.free, box, start, spec.grid_n, spec.refine_iters,
                    std::numeric_limits<int>::max(), objective);
}

bool apply_knob(ScenarioConfig& scenario, const std::string& knob, double value) {
    auto& p = scenario.params;
    auto& iv = scenario.interventions;
    if (knob == "s_level") {
        // Scales the current schedule, not the original one.
        p.salience_schedule = p.salience_schedule.scaled(value);
        for (auto& dom : scenario.initial.domains) dom.s *= value;
    } else if (knob == "coupling") {
        for (std::size_t i = 0; i < kDomainCount; ++i) {
            for (std::size_t j = 0; j < kDomainCount; ++j) p.coupling[i][j] = i == j ? 0.0 : value;
        }
    } else if (knob == "std_mitigation.delta_factor") {
        if (!iv.std_mitigation) return false;
        iv.std_mitigation->delta_factor = value;
    } else if (knob == "decoupled_streams.a_dec") {
        if (!iv.decoupled_streams) return false;
        iv.decoupled_streams->a_dec = value;
    } else if (knob == "irreducible_deliberation.d_cap") {
        if (!iv.irreducible_deliberation) return false;
        iv.irreducible_deliberation->d_cap = value;
    } else if (knob == "irreducible_deliberation.alpha_factor") {
        if (!iv.irreducible_deliberation) return false;
        iv.irreducible_deliberation->alpha_factor = value;
    } else if (knob == "nested_forums.m_forum") {
        if (!iv.nested_forums) return false;
        iv.nested_forums->m_forum = value;
    } else {
        scalar_param(p, knob) = value;
    }
    for (auto& dom : scenario.initial.domains) refresh_delegation(dom, p);
    return true;
}

std::optional<double> read_knob(const ScenarioConfig& scenario, const std::string& knob) {
    const auto& iv = scenario.interventions;
    if (knob == "s_level") return 1.0;
    if (knob == "coupling") return scenario.params.coupling[0][1];
    if (knob == "std_mitigation.delta_factor") {
        if (iv.std_mitigation) return iv.std_mitigation->delta_factor;
        return std::nullopt;
    }
    if (knob == "decoupled_streams.a_dec") {
        if (iv.decoupled_streams) return iv.decoupled_streams->a_dec;
        return std::nullopt;
    }
    if (knob == "irreducible_deliberation.d_cap") {
        if (iv.irreducible_deliberation) return iv.irreducible_deliberation->d_cap;
        return std::nullopt;
    }
    if (knob == "irreducible_deliberation.alpha_factor") {
        if (iv.irreducible_deliberation) return iv.irreducible_deliberation->alpha_factor;
        return std::nullopt;
    }
    if (knob == "nested_forums.m_forum") {
        if (iv.nested_forums) return iv.nested_forums->m_forum;
        return std::nullopt;
    }
    ModelParams copy = scenario.params;
    return scalar_param(copy, knob);
}

namespace {

std::optional<double> measure(const BandTarget& target, const ScenarioConfig& scenario,
                              std::optional<double> c_bar) {
    if (target.metric == BandTarget::Metric::crossing_year) {
        if (!c_bar) return std::nullopt;
        return scenario_crossing(scenario, *c_bar);
    }
    const Trajectory traj = scenario.run();
    const long index = whole_steps(target.year, scenario.params.dt, "year");
    if (index < 0 || static_cast<std::size_t>(index) >= traj.samples.size()) {
        throw RangeError("year", "divergence year " + std::to_string(target.year) +
                                     " outside the scenario horizon");
    }
    return traj.samples[static_cast<std::size_t>(index)].divergence[0];
}

double hinge(const BandTarget& target, const std::optional<double>& value) {
    if (!value) {
        if (target.metric == BandTarget::Metric::crossing_year && std::isinf(target.hi)) return 0.0;
        // Censored crossing or missing threshold: past the end of the horizon.
        const double censored = target.scenario.horizon_years + 1.0;
        return std::max(0.0, censored - target.hi) + std::max(0.0, target.lo - censored);
    }
    return std::max(0.0, target.lo - *value) + std::max(0.0, *value - target.hi);
}

}  // namespace

CalibrationResult calibrate_to_bands(const CalibrationProblem& problem) {
    problem.reference.validate();
    for (const auto& t : problem.targets) t.scenario.validate();

    std::vector<std::string> names;
    Box box;
    std::vector<double> start;
    for (const auto& knob : problem.knobs) {
        if (!(knob.lo <= knob.hi)) throw RangeError(knob.name, "knob bounds must satisfy lo <= hi");
        names.push_back(knob.name);
        box.lo.push_back(knob.lo);
        box.hi.push_back(knob.hi);
        std::optional<double> current = read_knob(problem.reference, knob.name);
        for (const auto& t : problem.targets) {
            if (current) break;
            current = read_knob(t.scenario, knob.name);
        }
        start.push_back(std::clamp(current.value_or(0.5 * (knob.lo + knob.hi)), knob.lo, knob.hi));
    }

    auto with_knobs = [&](ScenarioConfig scenario, const std::vector<double>& x) {
        for (std::size_t d = 0; d < x.size(); ++d) apply_knob(scenario, names[d], x[d]);
        return scenario;
    };
    auto target_scenario = [&](const BandTarget& target, const std::vector<double>& x) {
        ScenarioConfig scenario = with_knobs(target.scenario, x);
        for (const auto& [knob, value] : target.pinned) apply_knob(scenario, knob, value);
        return scenario;
    };
    auto threshold_for = [&](const ScenarioConfig& reference) -> std::optional<double> {
        auto report = estimate_reversibility_threshold(reference.params, problem.search);
        if (!report.c_bar) return reference.c_bar_ref;
        if (reference.c_bar_ref && std::abs(*report.c_bar - *reference.c_bar_ref) <= problem.search.tol) {
            return reference.c_bar_ref;
        }
        return report.c_bar;
    };
    auto outcomes_for = [&](const std::vector<double>& x, std::optional<double>& c_bar) {
        const ScenarioConfig reference = with_knobs(problem.reference, x);
        c_bar = threshold_for(reference);
        std::vector<TargetOutcome> out;
        for (const auto& target : problem.targets) {
            const ScenarioConfig scenario = target_scenario(target, x);
            const auto value = measure(target, scenario, c_bar);
            out.push_back(TargetOutcome{target.label, value, target.lo, target.hi, hinge(target, value)});
        }
        return out;
    };
    auto objective = [&](const std::vector<double>& x) {
        try {
            with_knobs(problem.reference, x).validate();
            for (const auto& t : problem.targets) target_scenario(t, x).validate();
        } catch (const RangeError&) {
            return kInf;
        }
        std::optional<double> c_bar;
        double total = 0.0;
        for (const auto& o : outcomes_for(x, c_bar)) total += o.violation;
        return total;
    };

    CalibrationResult result;
    result.fit = minimise(names, box, start, 3, std::numeric_limits<int>::max(),
                          std::max(problem.budget, 1), objective);
    std::vector<double> best(names.size());
    for (std::size_t d = 0; d < names.size(); ++d) best[d] = result.fit.params.at(names[d]);

    result.outcomes = outcomes_for(best, result.c_bar);
    result.violation = result.fit.residual;
    result.success = result.violation == 0.0;

    auto freeze = [&](const ScenarioConfig& base) {
        ScenarioConfig frozen = with_knobs(base, best);
        if (result.c_bar) frozen.c_bar_ref = result.c_bar;
        for (const auto& existing : result.frozen) {
            if (existing.id == frozen.id) return;
        }
        result.frozen.push_back(std::move(frozen));
    };
    freeze(problem.reference);
    for (const auto& t : problem.targets) freeze(t.scenario);
    return result;
}

CalibrationProblem default_calibration_problem() {
    CalibrationProblem problem;
    problem.reference = builtin_scenario("baseline");
    const auto crossing = [](std::string label, std::string_view id, double lo, double hi) {
        return BandTarget{std::move(label), builtin_scenario(id), BandTarget::Metric::crossing_year,
                          0.0, lo, hi, {}};
    };
    const auto divergence = [](std::string label, ScenarioConfig s, double lo, double hi) {
        return BandTarget{std::move(label), std::move(s), BandTarget::Metric::divergence, 24.0, lo,
                          hi, {}};
    };
    const ValueArms arms = value_lock_in_arms();
    problem.targets = {
        crossing("baseline crossing", "baseline", 15.0, 20.0),
        crossing("conservative crossing", "conservative", 40.0, 50.0),
        crossing("aggressive crossing", "aggressive", 8.0, 12.0),
        crossing("std-mitigation crossing", "std-mitigation", 21.0, 29.0),
        crossing("decoupled crossing", "decoupled", 33.0, 43.0),
        crossing("full-architecture crossing", "full-architecture", 60.0, kInf),
        divergence("locked-in divergence", arms.locked_in, 0.66, 0.70),
        divergence("nested-forums divergence", arms.nested_forums, 0.20, 0.30),
        divergence("continuous-deliberation divergence", arms.continuous, 0.0, 0.10),
    };
    problem.targets[6].pinned["mu"] = 0.0;

    problem.knobs = {
        {"gamma", 2.0, 6.0},
        {"rho_r", 0.04, 0.08},
        {"coupling", 0.25, 1.0},
        {"std_mitigation.delta_factor", 0.3, 0.8},
        {"decoupled_streams.a_dec", 0.005, 0.04},
        {"mu", 0.05, 0.3},
        {"nested_forums.m_forum", 2.0, 12.0},
        {"sigma_w", 15.0, 30.0},
    };
    return problem;
}

}  // namespace disempower
