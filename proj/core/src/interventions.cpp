#include "disempower/interventions.hpp"

#include <cmath>
#include <string>

#include "disempower/error.hpp"

namespace disempower {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class T>
void place(std::optional<T>& slot, const T& value) {
    if (slot) {
        throw ConfigError("duplicate intervention mechanism \"" +
                          std::string(mechanism_name(Mechanism{value})) + "\"");
    }
    slot = value;
}

void check(bool ok, const char* field, const char* rule) {
    if (!ok) throw RangeError(field, std::string(field) + " out of range: " + rule);
}

void check_activation(double active_from) {
    check(std::isfinite(active_from) && active_from >= 0.0, "active_from", "must be >= 0");
}

}  // namespace

std::string_view mechanism_name(const Mechanism& m) {
    return std::visit(overloaded{
                          [](const StdMitigation&) { return std::string_view("std_mitigation"); },
                          [](const DecoupledStreams&) { return std::string_view("decoupled_streams"); },
                          [](const IrreducibleDeliberation&) {
                              return std::string_view("irreducible_deliberation");
                          },
                          [](const NestedForums&) { return std::string_view("nested_forums"); },
                          [](const Firewalls&) { return std::string_view("firewalls"); },
                      },
                      m);
}

InterventionSet& InterventionSet::add(const Mechanism& m) {
    std::visit(overloaded{
                   [this](const StdMitigation& x) { place(std_mitigation, x); },
                   [this](const DecoupledStreams& x) { place(decoupled_streams, x); },
                   [this](const IrreducibleDeliberation& x) { place(irreducible_deliberation, x); },
                   [this](const NestedForums& x) { place(nested_forums, x); },
                   [this](const Firewalls& x) { place(firewalls, x); },
               },
               m);
    return *this;
}

InterventionSet InterventionSet::from_list(const std::vector<Mechanism>& list) {
    InterventionSet out;
    for (const auto& m : list) out.add(m);
    return out;
}

std::vector<Mechanism> InterventionSet::list() const {
    std::vector<Mechanism> out;
    if (std_mitigation) out.emplace_back(*std_mitigation);
    if (decoupled_streams) out.emplace_back(*decoupled_streams);
    if (irreducible_deliberation) out.emplace_back(*irreducible_deliberation);
    if (nested_forums) out.emplace_back(*nested_forums);
    if (firewalls) out.emplace_back(*firewalls);
    return out;
}

bool InterventionSet::empty() const noexcept {
    return !std_mitigation && !decoupled_streams && !irreducible_deliberation && !nested_forums &&
           !firewalls;
}

std::optional<double> InterventionSet::first_activation() const {
    std::optional<double> first;
    for (const auto& m : list()) {
        const double from = std::visit([](const auto& x) { return x.active_from; }, m);
        if (!first || from < *first) first = from;
    }
    return first;
}

void InterventionSet::validate() const {
    if (std_mitigation) {
        check_activation(std_mitigation->active_from);
        const double f = std_mitigation->delta_factor;
        check(std::isfinite(f) && f > 0.0 && f <= 1.0, "delta_factor", "must lie in (0,1]");
    }
    if (decoupled_streams) {
        check_activation(decoupled_streams->active_from);
        const double a = decoupled_streams->a_dec;
        check(std::isfinite(a) && a >= 0.0, "a_dec", "must be >= 0");
    }
    if (irreducible_deliberation) {
        check_activation(irreducible_deliberation->active_from);
        const double cap = irreducible_deliberation->d_cap;
        const double f = irreducible_deliberation->alpha_factor;
        check(std::isfinite(cap) && cap > 0.0 && cap < 1.0, "d_cap", "must lie in (0,1)");
        check(std::isfinite(f) && f > 0.0 && f <= 1.0, "alpha_factor", "must lie in (0,1]");
    }
    if (nested_forums) {
        check_activation(nested_forums->active_from);
        const double m = nested_forums->m_forum;
        check(std::isfinite(m) && m >= 1.0, "m_forum", "must be >= 1");
    }
    if (firewalls) check_activation(firewalls->active_from);
}

ModelParams effective_params(const ModelParams& base, const InterventionSet& iset, double t) {
    ModelParams p = base;
    if (iset.std_mitigation && iset.std_mitigation->active_from <= t) {
        p.delta *= iset.std_mitigation->delta_factor;
    }
    if (iset.decoupled_streams && iset.decoupled_streams->active_from <= t) {
        p.a_dec = iset.decoupled_streams->a_dec;
    }
    if (iset.irreducible_deliberation && iset.irreducible_deliberation->active_from <= t) {
        p.d_cap = iset.irreducible_deliberation->d_cap;
        p.alpha *= iset.irreducible_deliberation->alpha_factor;
    }
    if (iset.nested_forums && iset.nested_forums->active_from <= t) {
        p.m_forum = iset.nested_forums->m_forum;
    }
    if (iset.firewalls && iset.firewalls->active_from <= t) {
        p.coupling = CouplingMatrix{};
    }
    return p;
}

}  // namespace disempower
