#include "disempower/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "disempower/error.hpp"

namespace disempower {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

constexpr const char* kNoCrossing = "none within horizon";

template <class T>
ordered_json nullable(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> opt_number(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw RangeError(key, std::string("summary is missing ") + key);
    if (it->is_null()) return std::nullopt;
    return it->get<double>();
}

double get_number(const json& j, const char* key) {
    auto v = opt_number(j, key);
    if (!v) throw RangeError(key, std::string(key) + " must not be null");
    return *v;
}

std::string stability_name(Stability s) {
    switch (s) {
        case Stability::bistable: return "bistable";
        case Stability::monostable_decay: return "monostable_decay";
        case Stability::monostable_persist: return "monostable_persist";
    }
    return "bistable";
}

Stability parse_stability(const std::string& s) {
    if (s == "bistable") return Stability::bistable;
    if (s == "monostable_decay") return Stability::monostable_decay;
    if (s == "monostable_persist") return Stability::monostable_persist;
    throw RangeError("stability", "unknown stability \"" + s + "\"");
}

ordered_json to_json(const RunSummary& r) {
    ordered_json domains = ordered_json::array();
    for (std::size_t i = 0; i < kDomainCount; ++i) {
        ordered_json d;
        d["domain"] = std::string(domain_name(i));
        d["crossing_year"] = nullable(r.crossing_year[i]);
        if (!r.crossing_year[i]) d["crossing_reason"] = kNoCrossing;
        d["final_capacity"] = r.final_capacity[i];
        d["final_divergence"] = r.final_divergence[i];
        domains.push_back(d);
    }
    ordered_json j;
    j["kind"] = "run";
    j["scenario"] = r.scenario;
    j["c_bar"] = nullable(r.c_bar);
    if (!r.c_bar) j["c_bar_reason"] = "no reversibility threshold";
    j["horizon_years"] = r.horizon_years;
    j["domains"] = domains;
    return j;
}

ordered_json to_json(const ThresholdReport& r) {
    ordered_json j;
    j["kind"] = "threshold";
    j["scenario"] = r.scenario;
    j["method"] = r.method;
    j["stability"] = stability_name(r.stability);
    j["c_bar"] = nullable(r.c_bar);
    if (!r.c_bar) j["c_bar_reason"] = stability_name(r.stability);
    j["basin_low"] = r.basin_low;
    j["basin_high"] = r.basin_high;
    j["tolerance"] = r.tolerance;
    j["probes"] = r.probes;
    j["crossing_year"] = nullable(r.crossing_year);
    if (!r.crossing_year) j["crossing_reason"] = kNoCrossing;
    return j;
}

ordered_json to_json(const BandResult& r) {
    ordered_json j;
    j["kind"] = "band";
    j["scenario"] = r.scenario;
    j["n"] = r.n;
    j["seed"] = r.seed;
    j["mean"] = nullable(r.mean);
    j["sd"] = nullable(r.sd);
    j["min"] = nullable(r.min);
    j["max"] = nullable(r.max);
    if (!r.mean) j["reason"] = kNoCrossing;
    j["crossed"] = r.crossed;
    j["rejected"] = r.rejected;
    j["c_bar"] = r.c_bar;
    j["horizon_years"] = r.horizon_years;
    return j;
}

ordered_json to_json(const SweepResult& r) {
    ordered_json grid = ordered_json::array();
    for (std::size_t i = 0; i < r.delta_values.size(); ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t k = 0; k < r.alpha_values.size(); ++k) row.push_back(nullable(r.cell(i, k)));
        grid.push_back(row);
    }
    ordered_json j;
    j["kind"] = "sweep";
    j["scenario"] = r.scenario;
    j["c_bar"] = r.c_bar;
    j["horizon_years"] = r.horizon_years;
    j["delta"] = r.delta_values;
    j["alpha"] = r.alpha_values;
    j["crossing_year"] = grid;
    j["null_reason"] = kNoCrossing;
    return j;
}

Report from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "run") {
        RunSummary r;
        r.scenario = j.at("scenario").get<std::string>();
        r.c_bar = opt_number(j, "c_bar");
        r.horizon_years = get_number(j, "horizon_years");
        const auto& domains = j.at("domains");
        if (domains.size() != kDomainCount) throw RangeError("domains", "run needs 3 domains");
        for (std::size_t i = 0; i < kDomainCount; ++i) {
            r.crossing_year[i] = opt_number(domains[i], "crossing_year");
            r.final_capacity[i] = get_number(domains[i], "final_capacity");
            r.final_divergence[i] = get_number(domains[i], "final_divergence");
        }
        return r;
    }
    if (kind == "threshold") {
        ThresholdReport r;
        r.scenario = j.at("scenario").get<std::string>();
        r.method = j.at("method").get<std::string>();
        r.stability = parse_stability(j.at("stability").get<std::string>());
        r.c_bar = opt_number(j, "c_bar");
        r.basin_low = get_number(j, "basin_low");
        r.basin_high = get_number(j, "basin_high");
        r.tolerance = get_number(j, "tolerance");
        r.probes = j.at("probes").get<int>();
        r.crossing_year = opt_number(j, "crossing_year");
        return r;
    }
    if (kind == "band") {
        BandResult r;
        r.scenario = j.at("scenario").get<std::string>();
        r.n = j.at("n").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.mean = opt_number(j, "mean");
        r.sd = opt_number(j, "sd");
        r.min = opt_number(j, "min");
        r.max = opt_number(j, "max");
        r.crossed = j.at("crossed").get<int>();
        r.rejected = j.at("rejected").get<int>();
        r.c_bar = get_number(j, "c_bar");
        r.horizon_years = get_number(j, "horizon_years");
        return r;
    }
    if (kind == "sweep") {
        SweepResult r;
        r.scenario = j.at("scenario").get<std::string>();
        r.c_bar = get_number(j, "c_bar");
        r.horizon_years = get_number(j, "horizon_years");
        r.delta_values = j.at("delta").get<std::vector<double>>();
        r.alpha_values = j.at("alpha").get<std::vector<double>>();
        const auto& grid = j.at("crossing_year");
        if (grid.size() != r.delta_values.size()) throw RangeError("crossing_year", "ragged grid");
        for (const auto& row : grid) {
            if (row.size() != r.alpha_values.size()) throw RangeError("crossing_year", "ragged grid");
            for (const auto& cell : row) {
                r.crossing_year.push_back(cell.is_null() ? std::nullopt
                                                         : std::optional<double>(cell.get<double>()));
            }
        }
        return r;
    }
    throw RangeError("kind", "unknown report kind \"" + kind + "\"");
}

std::string xml_escape(std::string_view text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    if (std::abs(v) < 1e-12) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

struct Frame {
    double left = 80.0;
    double right = kSvgWidth - 210.0;
    double top = 56.0;
    double bottom = kSvgHeight - 64.0;
    double x_min, x_max, y_min, y_max;

    double x(double v) const { return left + (v - x_min) / (x_max - x_min) * (right - left); }
    double y(double v) const { return bottom - (v - y_min) / (y_max - y_min) * (bottom - top); }
};

void svg_open(std::ostringstream& out, const std::string& title) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth << "\" height=\""
        << kSvgHeight << "\" viewBox=\"0 0 " << kSvgWidth << ' ' << kSvgHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << kSvgWidth << "\" height=\"" << kSvgHeight
        << "\" fill=\"white\"/>\n"
        << "<text x=\"" << kSvgWidth / 2 << "\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">"
        << xml_escape(title) << "</text>\n";
}

void svg_axes(std::ostringstream& out, const Frame& f, const std::string& x_label,
              const std::string& y_label, bool grid) {
    out << "<g stroke=\"#333\" stroke-width=\"1\">\n"
        << "<line x1=\"" << px(f.left) << "\" y1=\"" << px(f.bottom) << "\" x2=\"" << px(f.right)
        << "\" y2=\"" << px(f.bottom) << "\"/>\n"
        << "<line x1=\"" << px(f.left) << "\" y1=\"" << px(f.top) << "\" x2=\"" << px(f.left)
        << "\" y2=\"" << px(f.bottom) << "\"/>\n</g>\n";
    out << "<g font-size=\"11\" fill=\"#333\">\n";
    for (double t : nice_ticks(f.x_min, f.x_max)) {
        const double x = f.x(t);
        if (grid) {
            out << "<line x1=\"" << px(x) << "\" y1=\"" << px(f.top) << "\" x2=\"" << px(x)
                << "\" y2=\"" << px(f.bottom) << "\" stroke=\"#eee\"/>\n";
        }
        out << "<line x1=\"" << px(x) << "\" y1=\"" << px(f.bottom) << "\" x2=\"" << px(x)
            << "\" y2=\"" << px(f.bottom + 5) << "\" stroke=\"#333\"/>\n"
            << "<text x=\"" << px(x) << "\" y=\"" << px(f.bottom + 18)
            << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    }
    for (double t : nice_ticks(f.y_min, f.y_max)) {
        const double y = f.y(t);
        if (grid) {
            out << "<line x1=\"" << px(f.left) << "\" y1=\"" << px(y) << "\" x2=\"" << px(f.right)
                << "\" y2=\"" << px(y) << "\" stroke=\"#eee\"/>\n";
        }
        out << "<line x1=\"" << px(f.left - 5) << "\" y1=\"" << px(y) << "\" x2=\"" << px(f.left)
            << "\" y2=\"" << px(y) << "\" stroke=\"#333\"/>\n"
            << "<text x=\"" << px(f.left - 8) << "\" y=\"" << px(y + 4)
            << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
    }
    out << "</g>\n";
    out << "<text x=\"" << px(0.5 * (f.left + f.right)) << "\" y=\"" << px(f.bottom + 44)
        << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n"
        << "<text x=\"20\" y=\"" << px(0.5 * (f.top + f.bottom))
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << px(0.5 * (f.top + f.bottom))
        << ")\">" << xml_escape(y_label) << "</text>\n";
}

}  // namespace

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

std::string write_trajectory_csv(const Trajectory& traj) {
    std::string out(kTrajectoryCsvHeader);
    out += '\n';
    for (const auto& sample : traj.samples) {
        for (std::size_t i = 0; i < kDomainCount; ++i) {
            const auto& d = sample.state.domains[i];
            out += format_number(sample.t);
            out += ',';
            out += domain_name(i);
            for (double v : {d.c, d.s, d.d}) {
                out += ',';
                out += format_number(v);
            }
            out += ',';
            out += std::to_string(d.u);
            for (double v : {d.v_e, sample.state.v_h, sample.divergence[i]}) {
                out += ',';
                out += format_number(v);
            }
            out += '\n';
        }
    }
    return out;
}

std::vector<TrajectoryRow> parse_trajectory_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kTrajectoryCsvHeader) {
        throw SyntaxError(1, 1, "expected trajectory header");
    }
    std::vector<TrajectoryRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream fields(line);
        std::string cell;
        while (std::getline(fields, cell, ',')) f.push_back(cell);
        if (f.size() != 9) throw SyntaxError(line_no, 1, "expected 9 fields");
        try {
            TrajectoryRow r;
            r.t = std::stod(f[0]);
            r.domain = f[1];
            r.c = std::stod(f[2]);
            r.s = std::stod(f[3]);
            r.d = std::stod(f[4]);
            r.u = std::stoi(f[5]);
            r.v_e = std::stod(f[6]);
            r.v_h = std::stod(f[7]);
            r.divergence = std::stod(f[8]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw SyntaxError(line_no, 1, "malformed number");
        }
    }
    return rows;
}

RunSummary summarize_run(const ScenarioConfig& scenario, const Trajectory& traj,
                         std::optional<double> c_bar) {
    RunSummary r;
    r.scenario = scenario.id;
    r.c_bar = c_bar;
    r.horizon_years = scenario.horizon_years;
    const Sample& last = traj.samples.back();
    for (std::size_t i = 0; i < kDomainCount; ++i) {
        if (c_bar) r.crossing_year[i] = time_to_threshold(traj, *c_bar, i);
        r.final_capacity[i] = last.state.domains[i].c;
        r.final_divergence[i] = last.divergence[i];
    }
    return r;
}

std::string write_summary_json(const std::vector<Report>& reports) {
    ordered_json root;
    root["schema"] = 1;
    root["reports"] = ordered_json::array();
    for (const auto& r : reports) {
        root["reports"].push_back(std::visit([](const auto& x) { return to_json(x); }, r));
    }
    return root.dump();
}

std::vector<Report> parse_summary_json(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw SyntaxError(1, e.byte, e.what());
    }
    if (!root.is_object() || root.value("schema", 0) != 1) {
        throw RangeError("schema", "summary schema must be 1");
    }
    std::vector<Report> out;
    try {
        for (const auto& r : root.at("reports")) out.push_back(from_json(r));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed summary: ") + e.what());
    }
    return out;
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
    if (!(hi > lo) || target < 1) return {lo};
    const double raw = (hi - lo) / target;
    const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
    double mult = 1.0;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        mult = m;
        if (m * magnitude >= raw) break;
    }
    const double inverse = magnitude < 1.0 ? std::round(1.0 / magnitude) : 0.0;
    const auto tick = [&](double k) {
        return inverse > 0.0 ? k * mult / inverse : k * mult * magnitude;
    };
    const double step = tick(1.0);
    std::vector<double> ticks;
    for (double k = std::ceil(lo / step - 1e-9); tick(k) <= hi + 1e-9 * step; k += 1.0) {
        ticks.push_back(k == 0.0 ? 0.0 : tick(k));
        if (ticks.size() > 100) break;
    }
    return ticks;
}

std::string render_svg_chart(const ChartSpec& spec) {
    if (spec.series.empty()) throw ConfigError("chart needs at least one series");
    Frame f{};
    f.x_min = spec.x_min;
    f.x_max = spec.x_max;
    f.y_min = spec.y_min;
    f.y_max = spec.y_max;
    for (const auto& s : spec.series) {
        if (s.points.empty()) throw ConfigError("chart series \"" + s.label + "\" is empty");
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) {
                throw ConfigError("chart series \"" + s.label + "\" has non-finite points");
            }
            f.x_min = std::min(f.x_min, x);
            f.x_max = std::max(f.x_max, x);
            f.y_min = std::min(f.y_min, y);
            f.y_max = std::max(f.y_max, y);
        }
    }
    if (spec.reference_y) {
        f.y_min = std::min(f.y_min, *spec.reference_y);
        f.y_max = std::max(f.y_max, *spec.reference_y);
    }
    if (f.x_max <= f.x_min) f.x_max = f.x_min + 1.0;
    if (f.y_max <= f.y_min) f.y_max = f.y_min + 1.0;

    std::ostringstream out;
    svg_open(out, spec.title);
    svg_axes(out, f, spec.x_label, spec.y_label, true);

    if (spec.reference_y) {
        const double y = f.y(*spec.reference_y);
        out << "<line class=\"reference\" x1=\"" << px(f.left) << "\" y1=\"" << px(y) << "\" x2=\""
            << px(f.right) << "\" y2=\"" << px(y)
            << "\" stroke=\"#555\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n"
            << "<text x=\"" << px(f.right - 4) << "\" y=\"" << px(y - 6)
            << "\" text-anchor=\"end\" fill=\"#555\">" << xml_escape(spec.reference_label)
            << "</text>\n";
    }

    constexpr std::size_t kPaletteSize = sizeof kPalette / sizeof kPalette[0];
    for (const auto& s : spec.series) {
        const char* color = kPalette[static_cast<std::size_t>(std::abs(s.style)) % kPaletteSize];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < s.points.size(); ++k) {
            if (k) out << ' ';
            out << px(f.x(s.points[k].first)) << ',' << px(f.y(s.points[k].second));
        }
        out << "\"/>\n";
    }

    out << "<g class=\"legend\">\n";
    for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const auto& s = spec.series[i];
        const char* color = kPalette[static_cast<std::size_t>(std::abs(s.style)) % kPaletteSize];
        const double y = f.top + 10.0 + 22.0 * static_cast<double>(i);
        out << "<line x1=\"" << px(f.right + 20) << "\" y1=\"" << px(y) << "\" x2=\""
            << px(f.right + 44) << "\" y2=\"" << px(y) << "\" stroke=\"" << color
            << "\" stroke-width=\"3\"/>\n"
            << "<text x=\"" << px(f.right + 50) << "\" y=\"" << px(y + 4) << "\">"
            << xml_escape(s.label) << "</text>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

std::string render_svg_heatmap(const SweepResult& sweep) {
    const std::size_t rows = sweep.delta_values.size();
    const std::size_t cols = sweep.alpha_values.size();
    if (rows == 0 || cols == 0) throw ConfigError("heatmap needs a nonempty grid");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : sweep.crossing_year) {
        if (c) {
            lo = std::min(lo, *c);
            hi = std::max(hi, *c);
        }
    }
    if (!(hi > lo)) hi = lo + 1.0;

    Frame f{};
    f.x_min = 0.0;
    f.x_max = static_cast<double>(cols);
    f.y_min = 0.0;
    f.y_max = static_cast<double>(rows);
    const double cw = (f.right - f.left) / static_cast<double>(cols);
    const double ch = (f.bottom - f.top) / static_cast<double>(rows);

    std::ostringstream out;
    svg_open(out, "Crossing year over delta x alpha (" + sweep.scenario + ")");
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < cols; ++k) {
            const auto& cell = sweep.cell(i, k);
            std::string fill = "#cccccc";
            if (cell) {
                // Early collapse is dark red, late collapse pale yellow.
                const double w = (*cell - lo) / (hi - lo);
                const int r = static_cast<int>(std::lround(140 + 115 * w));
                const int g = static_cast<int>(std::lround(20 + 210 * w));
                const int b = static_cast<int>(std::lround(30 + 120 * w));
                char buf[16];
                std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
                fill = buf;
            }
            const double x = f.left + cw * static_cast<double>(k);
            const double y = f.bottom - ch * static_cast<double>(i + 1);
            out << "<rect x=\"" << px(x) << "\" y=\"" << px(y) << "\" width=\"" << px(cw)
                << "\" height=\"" << px(ch) << "\" fill=\"" << fill << "\" stroke=\"white\"/>\n"
                << "<text x=\"" << px(x + cw / 2) << "\" y=\"" << px(y + ch / 2 + 4)
                << "\" text-anchor=\"middle\" font-size=\"10\">"
                << (cell ? tick_label(std::round(*cell * 10.0) / 10.0) : std::string("none"))
                << "</text>\n";
        }
    }
    out << "<g font-size=\"11\" fill=\"#333\">\n";
    for (std::size_t k = 0; k < cols; ++k) {
        out << "<text x=\"" << px(f.left + cw * (static_cast<double>(k) + 0.5)) << "\" y=\""
            << px(f.bottom + 18) << "\" text-anchor=\"middle\">"
            << format_number(sweep.alpha_values[k]) << "</text>\n";
    }
    for (std::size_t i = 0; i < rows; ++i) {
        out << "<text x=\"" << px(f.left - 8) << "\" y=\""
            << px(f.bottom - ch * (static_cast<double>(i) + 0.5) + 4) << "\" text-anchor=\"end\">"
            << format_number(sweep.delta_values[i]) << "</text>\n";
    }
    out << "</g>\n"
        << "<text x=\"" << px(0.5 * (f.left + f.right)) << "\" y=\"" << px(f.bottom + 44)
        << "\" text-anchor=\"middle\">alpha (atrophy per year)</text>\n"
        << "<text x=\"20\" y=\"" << px(0.5 * (f.top + f.bottom))
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << px(0.5 * (f.top + f.bottom))
        << ")\">delta (erosion per year)</text>\n"
        << "</svg>\n";
    return out.str();
}

ChartSpec capacity_chart(const std::vector<std::pair<std::string, const Trajectory*>>& runs,
                         std::optional<double> c_bar, const std::string& title) {
    ChartSpec spec;
    spec.title = title;
    spec.x_label = "years since 2026";
    spec.y_label = "institutional capacity (economic domain)";
    spec.y_max = 1.0;
    spec.reference_y = c_bar;
    spec.reference_label = "C-bar";
    int style = 0;
    for (const auto& [label, traj] : runs) {
        ChartSeries s{label, {}, style++};
        for (const auto& sample : traj->samples) {
            s.points.emplace_back(sample.t, sample.state.domains[0].c);
        }
        spec.series.push_back(std::move(s));
    }
    return spec;
}

ChartSpec divergence_chart(const std::vector<std::pair<std::string, const Trajectory*>>& runs,
                           const std::string& title) {
    ChartSpec spec;
    spec.title = title;
    spec.x_label = "years since 2026";
    spec.y_label = "welfare divergence (economic domain)";
    spec.y_max = 1.0;
    int style = 0;
    for (const auto& [label, traj] : runs) {
        ChartSeries s{label, {}, style++};
        for (const auto& sample : traj->samples) s.points.emplace_back(sample.t, sample.divergence[0]);
        spec.series.push_back(std::move(s));
    }
    return spec;
}

}  // namespace disempower
