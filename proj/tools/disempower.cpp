#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "disempower/analysis.hpp"
#include "disempower/calibration.hpp"
#include "disempower/error.hpp"
#include "disempower/report.hpp"
#include "disempower/scenario.hpp"

namespace fs = std::filesystem;
using namespace disempower;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Bad command-line usage that CLI11 cannot detect on its own.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, std::string_view text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

/// A path to a JSON file, a built-in id, or a unique prefix of one ("full").
ScenarioConfig resolve_scenario(const std::string& ref) {
    if (is_builtin_scenario(ref)) return builtin_scenario(ref);
    std::error_code ec;
    if (fs::is_regular_file(ref, ec)) return parse_scenario(read_file(ref));
    std::vector<std::string> matches;
    for (const auto& id : builtin_scenario_ids()) {
        if (id.rfind(ref, 0) == 0) matches.push_back(id);
    }
    if (matches.size() == 1) return builtin_scenario(matches.front());
    throw ConfigError("unknown scenario \"" + ref + "\"");
}

std::string default_out() {
    const char* env = std::getenv("DISEMPOWER_OUT");
    return env && *env ? env : "out";
}

std::string crossing_text(const std::optional<double>& year) {
    return year ? format_number(*year) : std::string("none within horizon");
}

// ---------------------------------------------------------------------------

struct RunOptions {
    std::string scenario;
    std::optional<double> dt;
};

int cmd_scenarios() {
    for (const auto& id : builtin_scenario_ids()) {
        std::cout << id << '\t' << builtin_scenario(id).description << '\n';
    }
    return kExitOk;
}

int cmd_run(const RunOptions& opt, const fs::path& out) {
    ScenarioConfig scenario = resolve_scenario(opt.scenario);
    if (opt.dt) {
        scenario.params.dt = *opt.dt;
        scenario.validate();
    }
    const Trajectory traj = scenario.run();
    const auto c_bar = reference_threshold(scenario);
    const RunSummary summary = summarize_run(scenario, traj, c_bar);

    const std::vector<std::pair<std::string, const Trajectory*>> runs{{scenario.id, &traj}};
    write_file(out / "trajectory.csv", write_trajectory_csv(traj));
    write_file(out / "summary.json", write_summary_json({summary}));
    write_file(out / "capacity.svg",
               render_svg_chart(capacity_chart(runs, c_bar, "Institutional capacity: " + scenario.id)));
    write_file(out / "divergence.svg",
               render_svg_chart(divergence_chart(runs, "Welfare divergence: " + scenario.id)));

    std::cout << scenario.id << ": crossing year " << crossing_text(summary.crossing_year[0])
              << ", final capacity " << format_number(summary.final_capacity[0]) << '\n';
    return kExitOk;
}

int cmd_compare(const std::vector<std::string>& refs, const fs::path& out) {
    if (refs.size() < 2) throw UsageError("compare needs at least two scenarios");
    std::vector<ScenarioConfig> scenarios;
    for (const auto& r : refs) scenarios.push_back(resolve_scenario(r));
    std::vector<Trajectory> trajs;
    trajs.reserve(scenarios.size());
    for (const auto& s : scenarios) trajs.push_back(s.run());

    // Every arm is measured against the first scenario's threshold.
    const auto c_bar = reference_threshold(scenarios.front());
    std::vector<Report> reports;
    std::vector<std::pair<std::string, const Trajectory*>> runs;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        reports.push_back(summarize_run(scenarios[i], trajs[i], c_bar));
        runs.emplace_back(scenarios[i].id, &trajs[i]);
        std::cout << scenarios[i].id << '\t'
                  << crossing_text(std::get<RunSummary>(reports.back()).crossing_year[0]) << '\n';
    }
    write_file(out / "compare.svg",
               render_svg_chart(capacity_chart(runs, c_bar, "Institutional capacity by scenario")));
    write_file(out / "compare.json", write_summary_json(reports));
    return kExitOk;
}

struct ThresholdOptions {
    std::string scenario = "baseline";
    ThresholdSearch search{};
};

int cmd_threshold(const ThresholdOptions& opt, const fs::path& out) {
    const ScenarioConfig scenario = resolve_scenario(opt.scenario);
    ThresholdReport report = estimate_reversibility_threshold(scenario.params, opt.search);
    report.scenario = scenario.id;
    if (report.c_bar) report.crossing_year = scenario_crossing(scenario, *report.c_bar);
    write_file(out / "summary.json", write_summary_json({report}));
    if (report.c_bar) {
        std::cout << "c_bar " << format_number(*report.c_bar) << " (bracket "
                  << format_number(report.basin_low) << ".." << format_number(report.basin_high)
                  << ", " << report.probes << " probes)\n";
    } else {
        std::cout << "no threshold: "
                  << (report.stability == Stability::monostable_decay ? "every start decays"
                                                                      : "every start persists")
                  << '\n';
    }
    return kExitOk;
}

struct BandOptions {
    std::string scenario = "baseline";
    int n = 200;
    std::uint64_t seed = 7;
    std::vector<std::string> params;
};

IntervalMap parse_intervals(const std::vector<std::string>& specs) {
    if (specs.empty()) return default_intervals();
    IntervalMap out;
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        const auto colon = spec.find(':', eq == std::string::npos ? 0 : eq);
        if (eq == std::string::npos || colon == std::string::npos) {
            throw UsageError("--param expects name=lo:hi, got \"" + spec + "\"");
        }
        const std::string name = spec.substr(0, eq);
        try {
            out[name] = {std::stod(spec.substr(eq + 1, colon - eq - 1)),
                         std::stod(spec.substr(colon + 1))};
        } catch (const std::logic_error&) {
            throw UsageError("--param expects name=lo:hi, got \"" + spec + "\"");
        }
    }
    return out;
}

int cmd_band(const BandOptions& opt, const fs::path& out) {
    const ScenarioConfig scenario = resolve_scenario(opt.scenario);
    const BandResult band = monte_carlo_band(scenario, parse_intervals(opt.params), opt.n, opt.seed);
    write_file(out / "summary.json", write_summary_json({band}));
    std::cout << band.scenario << ": " << band.crossed << '/' << band.n << " crossed";
    if (band.mean) {
        std::cout << ", mean " << format_number(*band.mean) << " sd " << format_number(*band.sd);
    }
    std::cout << '\n';
    return kExitOk;
}

struct SweepOptions {
    std::string scenario = "baseline";
    std::string delta = "0.03:0.15:7";
    std::string alpha = "0.02:0.15:7";
};

int cmd_sweep(const SweepOptions& opt, const fs::path& out) {
    const ScenarioConfig scenario = resolve_scenario(opt.scenario);
    const SweepResult result =
        sweep(scenario, parse_axis_range(opt.delta), parse_axis_range(opt.alpha));
    std::string csv = "delta,alpha,crossing_year\n";
    for (std::size_t i = 0; i < result.delta_values.size(); ++i) {
        for (std::size_t k = 0; k < result.alpha_values.size(); ++k) {
            const auto& cell = result.cell(i, k);
            csv += format_number(result.delta_values[i]) + ',' +
                   format_number(result.alpha_values[k]) + ',' +
                   (cell ? format_number(*cell) : std::string()) + '\n';
        }
    }
    write_file(out / "sweep.csv", csv);
    write_file(out / "summary.json", write_summary_json({result}));
    write_file(out / "heatmap.svg", render_svg_heatmap(result));
    std::cout << result.crossing_year.size() << " cells written to " << (out / "sweep.csv").string()
              << '\n';
    return kExitOk;
}

struct CalibrateOptions {
    std::string series;
    bool fixture = false;
    std::string label;
    std::vector<std::string> free;
    std::string scenario = "baseline";
    int budget = 400;
};

nlohmann::ordered_json fit_json(const FitResult& fit) {
    nlohmann::ordered_json j;
    j["params"] = fit.params;
    j["residual"] = fit.residual;
    j["iterations"] = fit.iterations;
    j["evaluations"] = fit.evaluations;
    j["converged"] = fit.converged;
    return j;
}

int calibrate_series(const CalibrateOptions& opt, const fs::path& out) {
    const std::string text = opt.fixture ? std::string(budget_fixture_csv()) : read_file(opt.series);
    const auto all = parse_series_csv(text);
    if (all.empty()) throw ConfigError("series file has no rows");
    const CapacitySeries& series = opt.label.empty() ? all.front() : select_series(all, opt.label);

    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["kind"] = "series_fit";
    j["label"] = series.label;
    const double rate = fit_decay_rate(series);
    const auto& obs = series.observations;
    j["decay_rate"] = rate;
    j["decline"] = 1.0 - obs.back().value / obs.front().value;
    std::cout << series.label << ": annual rate " << format_number(rate) << ", decline "
              << format_number(100.0 * (1.0 - obs.back().value / obs.front().value)) << "%\n";

    std::vector<std::string> free;
    for (const auto& f : opt.free) {
        if (!f.empty()) free.push_back(f);
    }
    if (!free.empty()) {
        FitSpec spec;
        spec.free = free;
        const FitResult fit = fit_params(series, resolve_scenario(opt.scenario), spec);
        j["model_fit"] = fit_json(fit);
        for (const auto& [k, v] : fit.params) std::cout << k << ' ' << format_number(v) << '\n';
    }
    write_file(out / "calibration.json", j.dump() + "\n");
    return kExitOk;
}

int calibrate_bands(const CalibrateOptions& opt, const fs::path& out) {
    CalibrationProblem problem = default_calibration_problem();
    problem.budget = opt.budget;
    const CalibrationResult result = calibrate_to_bands(problem);

    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["kind"] = "band_calibration";
    j["success"] = result.success;
    j["violation"] = result.violation;
    j["c_bar"] = result.c_bar ? nlohmann::ordered_json(*result.c_bar) : nlohmann::ordered_json();
    j["fit"] = fit_json(result.fit);
    j["targets"] = nlohmann::ordered_json::array();
    for (const auto& t : result.outcomes) {
        nlohmann::ordered_json o;
        o["label"] = t.label;
        o["value"] = t.value ? nlohmann::ordered_json(*t.value) : nlohmann::ordered_json();
        o["lo"] = t.lo;
        o["hi"] = std::isfinite(t.hi) ? nlohmann::ordered_json(t.hi) : nlohmann::ordered_json();
        o["violation"] = t.violation;
        j["targets"].push_back(o);
        std::cout << t.label << '\t' << (t.value ? format_number(*t.value) : "none") << "\t["
                  << format_number(t.lo) << ", " << format_number(t.hi) << "]\n";
    }
    write_file(out / "calibration.json", j.dump() + "\n");
    for (const auto& s : result.frozen) {
        if (is_builtin_scenario(s.id)) {
            write_file(out / "scenarios" / (s.id + ".json"), serialize_scenario(s));
        }
    }
    std::cout << (result.success ? "all targets inside their bands"
                                 : "some targets outside their bands")
              << " (violation " << format_number(result.violation) << ")\n";
    return result.success ? kExitOk : kExitRuntime;
}

int cmd_calibrate(const CalibrateOptions& opt, const fs::path& out) {
    if (!opt.series.empty() && opt.fixture) throw UsageError("--series and --fixture are exclusive");
    if (!opt.series.empty() || opt.fixture) return calibrate_series(opt, out);
    return calibrate_bands(opt, out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Capacity erosion and intervention simulator"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Expand all help");

    std::string out_dir = default_out();
    auto add_out = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "Output directory (default: $DISEMPOWER_OUT or out)");
    };

    app.add_subcommand("scenarios", "List the built-in scenarios");

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "Simulate one scenario");
    run->add_option("scenario", run_opt.scenario, "Built-in id or JSON path")->required();
    run->add_option("--dt", run_opt.dt, "Step size override (years)")->check(CLI::PositiveNumber);
    add_out(run);

    std::vector<std::string> compare_refs;
    auto* compare = app.add_subcommand("compare", "Overlay several scenarios");
    compare->add_option("scenarios", compare_refs, "Built-in ids or JSON paths")->required();
    add_out(compare);

    ThresholdOptions th_opt;
    auto* threshold = app.add_subcommand("threshold", "Estimate the reversibility threshold");
    threshold->add_option("scenario", th_opt.scenario, "Built-in id or JSON path")
        ->capture_default_str();
    threshold->add_option("--lo", th_opt.search.c_lo, "Lower bracket")->capture_default_str();
    threshold->add_option("--hi", th_opt.search.c_hi, "Upper bracket")->capture_default_str();
    threshold->add_option("--tol", th_opt.search.tol, "Bracket width")->capture_default_str();
    threshold->add_option("--probe-horizon", th_opt.search.probe.probe_horizon,
                          "Years simulated per probe")
        ->capture_default_str();
    threshold->add_option("--eps", th_opt.search.probe.eps, "Decay cutoff")->capture_default_str();
    add_out(threshold);

    BandOptions band_opt;
    auto* band = app.add_subcommand("band", "Monte Carlo band of crossing years");
    band->add_option("scenario", band_opt.scenario, "Built-in id or JSON path")
        ->capture_default_str();
    band->add_option("-n,--draws", band_opt.n, "Number of draws")->capture_default_str();
    band->add_option("--seed", band_opt.seed, "RNG seed")->capture_default_str();
    band->add_option("--param", band_opt.params,
                     "name=lo:hi sampling interval (default delta=0.06:0.10 alpha=0.07:0.11)");
    add_out(band);

    SweepOptions sweep_opt;
    auto* sw = app.add_subcommand("sweep", "Crossing years over a delta x alpha grid");
    sw->add_option("scenario", sweep_opt.scenario, "Built-in id or JSON path")->capture_default_str();
    sw->add_option("--delta", sweep_opt.delta, "lo:hi:n")->capture_default_str();
    sw->add_option("--alpha", sweep_opt.alpha, "lo:hi:n")->capture_default_str();
    add_out(sw);

    CalibrateOptions cal_opt;
    auto* calibrate = app.add_subcommand(
        "calibrate", "Fit the shipped bands, or fit a series with --series/--fixture");
    calibrate->add_option("--series", cal_opt.series, "CSV with year,value,label[,unit]");
    calibrate->add_flag("--fixture", cal_opt.fixture, "Use the bundled budget series");
    calibrate->add_option("--label", cal_opt.label, "Series label (default: first)");
    calibrate->add_option("--free", cal_opt.free, "Free parameters for a model fit (delta, alpha, gamma, s_level)")
        ->delimiter(',')
        ->capture_default_str();
    calibrate->add_option("--scenario", cal_opt.scenario, "Model used for series fits")
        ->capture_default_str();
    calibrate->add_option("--budget", cal_opt.budget, "Objective evaluations for band fits")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_out(calibrate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    const fs::path out{out_dir};
    try {
        const auto* cmd = app.get_subcommands().front();
        const std::string name = cmd->get_name();
        if (name == "scenarios") return cmd_scenarios();
        if (name == "run") return cmd_run(run_opt, out);
        if (name == "compare") return cmd_compare(compare_refs, out);
        if (name == "threshold") return cmd_threshold(th_opt, out);
        if (name == "band") return cmd_band(band_opt, out);
        if (name == "sweep") return cmd_sweep(sweep_opt, out);
        if (name == "calibrate") return cmd_calibrate(cal_opt, out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const RangeError& e) {
        std::cerr << "config error (" << e.field() << "): " << e.what() << '\n';
        return kExitUsage;
    } catch (const UnknownKeyError& e) {
        std::cerr << "config error (" << e.key() << "): " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
