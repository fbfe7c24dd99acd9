#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "disempower/model.hpp"

namespace disempower {

/// Contestability registers and impact floors: delta <- delta * delta_factor.
struct StdMitigation {
    double active_from = 0.0;
    double delta_factor = 1.0;
    bool operator==(const StdMitigation&) const = default;
};

/// Protected budgets: a_dec <- a_dec.
struct DecoupledStreams {
    double active_from = 0.0;
    double a_dec = 0.0;
    bool operator==(const DecoupledStreams&) const = default;
};

/// Deliberation mandates: d_cap <- d_cap, alpha <- alpha * alpha_factor.
struct IrreducibleDeliberation {
    double active_from = 0.0;
    double d_cap = 1.0;
    double alpha_factor = 1.0;
    bool operator==(const IrreducibleDeliberation&) const = default;
};

/// Value forums: m_forum <- m_forum.
struct NestedForums {
    double active_from = 0.0;
    double m_forum = 1.0;
    bool operator==(const NestedForums&) const = default;
};

/// Isolation firewalls: coupling <- 0.
struct Firewalls {
    double active_from = 0.0;
    bool operator==(const Firewalls&) const = default;
};

using Mechanism =
    std::variant<StdMitigation, DecoupledStreams, IrreducibleDeliberation, NestedForums, Firewalls>;

std::string_view mechanism_name(const Mechanism& m);

/// At most one entry per mechanism. Mechanisms switch on at active_from and stay on.
struct InterventionSet {
    std::optional<StdMitigation> std_mitigation;
    std::optional<DecoupledStreams> decoupled_streams;
    std::optional<IrreducibleDeliberation> irreducible_deliberation;
    std::optional<NestedForums> nested_forums;
    std::optional<Firewalls> firewalls;

    /// Throws ConfigError when the mechanism is already present.
    InterventionSet& add(const Mechanism& m);
    static InterventionSet from_list(const std::vector<Mechanism>& list);
    /// Present mechanisms in canonical order.
    std::vector<Mechanism> list() const;

    bool empty() const noexcept;
    /// Earliest activation time, or nullopt for an empty set.
    std::optional<double> first_activation() const;

    /// Throws RangeError on negative activation times or factors out of range.
    void validate() const;

    bool operator==(const InterventionSet&) const = default;
};

/// Parameters in effect at time t. base is not modified.
ModelParams effective_params(const ModelParams& base, const InterventionSet& iset, double t);

}  // namespace disempower
