#pragma once

// Coupled capacity / delegation / salience / value dynamics for three
// institutional domains, integrated with explicit first-order steps.

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace disempower {

inline constexpr std::size_t kDomainCount = 3;

enum class Domain : std::size_t { economic = 0, political = 1, cultural = 2 };

std::string_view domain_name(std::size_t index);

using DomainArray = std::array<double, kDomainCount>;
using CouplingMatrix = std::array<DomainArray, kDomainCount>;

/// Piecewise-constant yearly salience baseline, one level per domain.
///
/// The level at time t is the level of the last entry whose year is <= t.
/// Entries are strictly increasing in year and the first entry starts at 0, so
/// the schedule is defined for every t >= 0 and holds its last level forever.
class SalienceSchedule {
public:
    struct Entry {
        double year = 0.0;
        DomainArray level{};
        bool operator==(const Entry&) const = default;
    };

    SalienceSchedule() = default;
    explicit SalienceSchedule(std::vector<Entry> entries);

    static SalienceSchedule constant(double level);
    /// level(t) = start + slope * floor(t) for whole years 0..last_year.
    static SalienceSchedule yearly_ramp(double start, double slope, int last_year);

    double at(double t, std::size_t domain) const;
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    SalienceSchedule scaled(double factor) const;

    /// Throws RangeError("salience_schedule") on empty, unordered, negative or
    /// non-finite tables, or if the first entry is not at year 0.
    void validate() const;

    bool operator==(const SalienceSchedule&) const = default;

private:
    std::vector<Entry> entries_{Entry{0.0, {1.0, 1.0, 1.0}}};
};

/// Rate constants and schedules. Defaults are the shipped calibration, except
/// for the salience schedule which defaults to a constant 1.0.
struct ModelParams {
    double delta = 0.08;      ///< erosion per year at full delegation
    double alpha = 0.09;      ///< atrophy per year while capacity is unused
    double gamma = 4.0;       ///< capacity weight in the delegation function
    double theta_use = 0.5;   ///< delegation at or above this counts as "unused"
    double kappa_L = 0.0;     ///< lock-in gap -> salience feedback gain
    double rho_r = 0.06;      ///< logistic recovery rate
    double a_dec = 0.0;       ///< protected additive recovery
    double c_max = 1.0;
    CouplingMatrix coupling{{{0.0, 0.75, 0.75}, {0.75, 0.0, 0.75}, {0.75, 0.75, 0.0}}};
    double rho_v = 1.0;       ///< human value drift, value units per year
    double mu = 0.15;         ///< value re-alignment gain per unit capacity
    double m_forum = 1.0;
    double sigma_w = 21.063083983082556;  ///< divergence 0.68 at a 24-unit gap
    double d_cap = 1.0;
    SalienceSchedule salience_schedule{};
    double dt = 0.25;

    /// Throws RangeError naming the first offending field.
    void validate() const;

    bool operator==(const ModelParams&) const = default;
};

struct DomainState {
    double c = 1.0;    ///< capacity
    double s = 1.0;    ///< salience
    double d = 0.0;    ///< delegation in effect from this state
    int u = 0;         ///< 1 when capacity counts as unused
    double v_e = 0.0;  ///< encoded value position

    bool operator==(const DomainState&) const = default;
};

struct SystemState {
    double t = 0.0;
    std::array<DomainState, kDomainCount> domains{};
    double v_h = 0.0;

    bool operator==(const SystemState&) const = default;
};

struct Sample {
    double t = 0.0;
    SystemState state;
    DomainArray divergence{};
};

struct Trajectory {
    std::vector<Sample> samples;
    ModelParams params_used;
    std::array<std::optional<double>, kDomainCount> crossing_year{};
};

/// Delegation share s / (s + gamma c); 0 when s and c are both 0.
/// Nondecreasing in s, nonincreasing in c. Throws DomainError on negative or
/// non-finite input and on gamma <= 0.
double delegation_fraction(double s, double c, double gamma);

/// 1 iff d >= theta_use.
int usage_indicator(double d, double theta_use);

/// One explicit step of capacity:
///   c' = max(0, c (1 - dt delta (d + spill) - dt alpha u)
///               + dt (rho_r c (1 - c / c_max) + a_dec))
/// At dt = 1 with no spill and no recovery this is exactly c (1 - delta d - alpha u).
double capacity_step(double c, double d, int u, double spill, const ModelParams& p, double dt);

/// Salience for the state at time t: schedule(t) (1 + kappa_L gap dt).
double salience_step(std::size_t domain, double lock_in_gap, const ModelParams& p, double t,
                     double dt);

/// v_e' = v_e + dt m_forum mu c (v_h - v_e).
double value_step(double v_e, double v_h, double c, const ModelParams& p, double dt);

/// 1 - exp(-|v_h - v_e| / sigma_w).
double welfare_divergence(double v_e, double v_h, double sigma_w);

/// Delegation after the irreducible-deliberation ceiling.
double delegation_cap(double d_raw, const ModelParams& p);

/// Delegation and usage that a domain state implies under p.
void refresh_delegation(DomainState& domain, const ModelParams& p);

/// Advance one step of length p.dt.
///
/// Update order: (1) v_h drifts; (2) delegation per domain from the current
/// (s, c), capped by d_cap; (3) usage; (4) spill from the other domains' step-(2)
/// delegation through the coupling matrix; (5) capacity; (6) encoded values;
/// (7) salience for t + dt. Every read uses start-of-step values except spill.
/// The stored d and u of the input are ignored; the output carries d and u
/// recomputed from its own (s, c).
SystemState system_step(const SystemState& state, const ModelParams& p);

/// Three identical domains at capacity c0, salience schedule(0), d and u implied.
SystemState uniform_initial_state(const ModelParams& p, double c0 = 1.0);

}  // namespace disempower
