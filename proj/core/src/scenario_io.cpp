#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "disempower/error.hpp"
#include "disempower/report.hpp"

namespace disempower {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void reject_unknown(const json& object, const std::set<std::string>& allowed,
                    const std::string& prefix) {
    for (const auto& [key, value] : object.items()) {
        if (!allowed.count(key)) throw UnknownKeyError(prefix + key);
    }
}

const json& require_object(const json& j, const std::string& field) {
    if (!j.is_object()) throw RangeError(field, field + " must be an object");
    return j;
}

double number(const json& j, const std::string& field) {
    if (!j.is_number()) throw RangeError(field, field + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw RangeError(field, field + " must be finite");
    return v;
}

void read_number(const json& object, const char* key, double& out) {
    if (auto it = object.find(key); it != object.end()) out = number(*it, key);
}

DomainArray domain_array(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != kDomainCount) {
        throw RangeError(field, field + " must be an array of 3 numbers");
    }
    DomainArray out{};
    for (std::size_t i = 0; i < kDomainCount; ++i) out[i] = number(j[i], field);
    return out;
}

SalienceSchedule parse_schedule(const json& j) {
    const std::string field = "salience_schedule";
    if (!j.is_array()) throw RangeError(field, "salience_schedule must be an array");
    std::vector<SalienceSchedule::Entry> entries;
    for (const auto& e : j) {
        require_object(e, field);
        reject_unknown(e, {"year", "s"}, "params.salience_schedule.");
        if (!e.contains("year") || !e.contains("s")) {
            throw RangeError(field, "salience_schedule entries need year and s");
        }
        entries.push_back({number(e["year"], field), domain_array(e["s"], field)});
    }
    return SalienceSchedule(std::move(entries));
}

ModelParams parse_params(const json& j) {
    require_object(j, "params");
    reject_unknown(j,
                   {"delta", "alpha", "gamma", "theta_use", "kappa_L", "rho_r", "a_dec", "c_max",
                    "coupling", "rho_v", "mu", "m_forum", "sigma_w", "d_cap", "salience_schedule",
                    "dt"},
                   "params.");
    ModelParams p;
    read_number(j, "delta", p.delta);
    read_number(j, "alpha", p.alpha);
    read_number(j, "gamma", p.gamma);
    read_number(j, "theta_use", p.theta_use);
    read_number(j, "kappa_L", p.kappa_L);
    read_number(j, "rho_r", p.rho_r);
    read_number(j, "a_dec", p.a_dec);
    read_number(j, "c_max", p.c_max);
    read_number(j, "rho_v", p.rho_v);
    read_number(j, "mu", p.mu);
    read_number(j, "m_forum", p.m_forum);
    read_number(j, "sigma_w", p.sigma_w);
    read_number(j, "d_cap", p.d_cap);
    read_number(j, "dt", p.dt);
    if (auto it = j.find("coupling"); it != j.end()) {
        if (!it->is_array() || it->size() != kDomainCount) {
            throw RangeError("coupling", "coupling must be a 3x3 array");
        }
        for (std::size_t i = 0; i < kDomainCount; ++i) {
            p.coupling[i] = domain_array((*it)[i], "coupling");
        }
    }
    if (auto it = j.find("salience_schedule"); it != j.end()) {
        p.salience_schedule = parse_schedule(*it);
    }
    p.validate();
    return p;
}

Mechanism parse_mechanism(const json& j) {
    require_object(j, "interventions");
    if (!j.contains("mechanism") || !j["mechanism"].is_string()) {
        throw RangeError("mechanism", "each intervention needs a mechanism name");
    }
    const std::string name = j["mechanism"].get<std::string>();
    const std::string prefix = "interventions." + name + ".";
    double active_from = 0.0;
    read_number(j, "active_from", active_from);
    if (name == "std_mitigation") {
        reject_unknown(j, {"mechanism", "active_from", "delta_factor"}, prefix);
        StdMitigation m{active_from, 1.0};
        read_number(j, "delta_factor", m.delta_factor);
        return m;
    }
    if (name == "decoupled_streams") {
        reject_unknown(j, {"mechanism", "active_from", "a_dec"}, prefix);
        DecoupledStreams m{active_from, 0.0};
        read_number(j, "a_dec", m.a_dec);
        return m;
    }
    if (name == "irreducible_deliberation") {
        reject_unknown(j, {"mechanism", "active_from", "d_cap", "alpha_factor"}, prefix);
        IrreducibleDeliberation m{active_from, 1.0, 1.0};
        read_number(j, "d_cap", m.d_cap);
        read_number(j, "alpha_factor", m.alpha_factor);
        return m;
    }
    if (name == "nested_forums") {
        reject_unknown(j, {"mechanism", "active_from", "m_forum"}, prefix);
        NestedForums m{active_from, 1.0};
        read_number(j, "m_forum", m.m_forum);
        return m;
    }
    if (name == "firewalls") {
        reject_unknown(j, {"mechanism", "active_from"}, prefix);
        return Firewalls{active_from};
    }
    throw UnknownKeyError("interventions." + name);
}

SystemState parse_initial(const json& j, const ModelParams& p) {
    require_object(j, "initial");
    reject_unknown(j, {"v_h", "domains"}, "initial.");
    SystemState state = uniform_initial_state(p);
    read_number(j, "v_h", state.v_h);
    if (auto it = j.find("domains"); it != j.end()) {
        if (!it->is_array() || it->size() != kDomainCount) {
            throw RangeError("domains", "initial.domains must list 3 domains");
        }
        for (std::size_t i = 0; i < kDomainCount; ++i) {
            const json& d = (*it)[i];
            require_object(d, "domains");
            reject_unknown(d, {"c", "s", "v_e"}, "initial.domains.");
            auto& dom = state.domains[i];
            read_number(d, "c", dom.c);
            read_number(d, "s", dom.s);
            read_number(d, "v_e", dom.v_e);
            if (dom.c < 0.0) throw RangeError("c", "initial c must be >= 0");
            if (dom.s < 0.0) throw RangeError("s", "initial s must be >= 0");
            refresh_delegation(dom, p);
        }
    }
    return state;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

/// Pretty printer that keeps short arrays and objects on one line.
void emit(const ordered_json& j, int indent, std::string& out) {
    constexpr std::size_t kInlineWidth = 88;
    const std::string compact = j.dump();
    if (!j.is_structured() || j.empty() || compact.size() + indent <= kInlineWidth) {
        out += compact;
        return;
    }
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const bool object = j.is_object();
    out += object ? "{\n" : "[\n";
    std::size_t i = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad;
        if (object) out += ordered_json(it.key()).dump() + ": ";
        emit(*it, indent + 2, out);
        if (i + 1 < j.size()) out += ',';
        out += '\n';
    }
    out += std::string(static_cast<std::size_t>(indent), ' ');
    out += object ? '}' : ']';
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // nlohmann reports the byte just past the offending token.
        const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw SyntaxError(line, column, e.what());
    }
    require_object(root, "scenario");
    reject_unknown(root,
                   {"id", "description", "params", "interventions", "initial", "horizon_years",
                    "c_bar_ref"},
                   "");
    ScenarioConfig config;
    if (!root.contains("id") || !root["id"].is_string() || root["id"].get<std::string>().empty()) {
        throw RangeError("id", "id must be a nonempty string");
    }
    config.id = root["id"].get<std::string>();
    if (auto it = root.find("description"); it != root.end()) {
        if (!it->is_string()) throw RangeError("description", "description must be a string");
        config.description = it->get<std::string>();
    }
    config.params = root.contains("params") ? parse_params(root["params"]) : ModelParams{};
    if (auto it = root.find("interventions"); it != root.end()) {
        if (!it->is_array()) throw RangeError("interventions", "interventions must be an array");
        for (const auto& m : *it) config.interventions.add(parse_mechanism(m));
    }
    config.initial = root.contains("initial") ? parse_initial(root["initial"], config.params)
                                              : uniform_initial_state(config.params);
    read_number(root, "horizon_years", config.horizon_years);
    if (auto it = root.find("c_bar_ref"); it != root.end() && !it->is_null()) {
        config.c_bar_ref = number(*it, "c_bar_ref");
    }
    config.validate();
    return config;
}

std::string serialize_scenario(const ScenarioConfig& config) {
    const ModelParams& p = config.params;
    ordered_json params;
    params["delta"] = p.delta;
    params["alpha"] = p.alpha;
    params["gamma"] = p.gamma;
    params["theta_use"] = p.theta_use;
    params["kappa_L"] = p.kappa_L;
    params["rho_r"] = p.rho_r;
    params["a_dec"] = p.a_dec;
    params["c_max"] = p.c_max;
    params["coupling"] = p.coupling;
    params["rho_v"] = p.rho_v;
    params["mu"] = p.mu;
    params["m_forum"] = p.m_forum;
    params["sigma_w"] = p.sigma_w;
    params["d_cap"] = p.d_cap;
    ordered_json schedule = ordered_json::array();
    for (const auto& e : p.salience_schedule.entries()) {
        ordered_json entry;
        entry["year"] = e.year;
        entry["s"] = e.level;
        schedule.push_back(entry);
    }
    params["salience_schedule"] = schedule;
    params["dt"] = p.dt;

    ordered_json interventions = ordered_json::array();
    const auto& iv = config.interventions;
    if (iv.std_mitigation) {
        interventions.push_back({{"mechanism", "std_mitigation"},
                                 {"active_from", iv.std_mitigation->active_from},
                                 {"delta_factor", iv.std_mitigation->delta_factor}});
    }
    if (iv.decoupled_streams) {
        interventions.push_back({{"mechanism", "decoupled_streams"},
                                 {"active_from", iv.decoupled_streams->active_from},
                                 {"a_dec", iv.decoupled_streams->a_dec}});
    }
    if (iv.irreducible_deliberation) {
        interventions.push_back({{"mechanism", "irreducible_deliberation"},
                                 {"active_from", iv.irreducible_deliberation->active_from},
                                 {"d_cap", iv.irreducible_deliberation->d_cap},
                                 {"alpha_factor", iv.irreducible_deliberation->alpha_factor}});
    }
    if (iv.nested_forums) {
        interventions.push_back({{"mechanism", "nested_forums"},
                                 {"active_from", iv.nested_forums->active_from},
                                 {"m_forum", iv.nested_forums->m_forum}});
    }
    if (iv.firewalls) {
        interventions.push_back(
            {{"mechanism", "firewalls"}, {"active_from", iv.firewalls->active_from}});
    }

    ordered_json domains = ordered_json::array();
    for (const auto& d : config.initial.domains) {
        domains.push_back({{"c", d.c}, {"s", d.s}, {"v_e", d.v_e}});
    }
    ordered_json initial;
    initial["v_h"] = config.initial.v_h;
    initial["domains"] = domains;

    ordered_json root;
    root["id"] = config.id;
    root["description"] = config.description;
    root["params"] = params;
    root["interventions"] = interventions;
    root["initial"] = initial;
    root["horizon_years"] = config.horizon_years;
    root["c_bar_ref"] = config.c_bar_ref ? ordered_json(*config.c_bar_ref) : ordered_json(nullptr);

    std::string out;
    emit(root, 0, out);
    out += '\n';
    return out;
}

}  // namespace disempower
