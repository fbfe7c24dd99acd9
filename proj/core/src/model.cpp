#include "disempower/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "disempower/error.hpp"

namespace disempower {

namespace {

// Schedule lookups tolerate accumulated rounding in t.
constexpr double kTimeSlack = 1e-9;

void require_finite_nonnegative(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0) {
        throw DomainError(name, std::string(name) + " must be finite and >= 0, got " +
                                    std::to_string(value));
    }
}

void require_range(bool ok, const char* field, const std::string& rule) {
    if (!ok) throw RangeError(field, std::string(field) + " out of range: " + rule);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

std::string_view domain_name(std::size_t index) {
    switch (index) {
        case 0: return "economic";
        case 1: return "political";
        case 2: return "cultural";
        default: throw DomainError("domain", "domain index out of range: " + std::to_string(index));
    }
}

SalienceSchedule::SalienceSchedule(std::vector<Entry> entries) : entries_(std::move(entries)) {}

SalienceSchedule SalienceSchedule::constant(double level) {
    return SalienceSchedule({Entry{0.0, {level, level, level}}});
}

SalienceSchedule SalienceSchedule::yearly_ramp(double start, double slope, int last_year) {
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(last_year) + 1);
    for (int year = 0; year <= last_year; ++year) {
        const double level = start + slope * year;
        entries.push_back(Entry{static_cast<double>(year), {level, level, level}});
    }
    return SalienceSchedule(std::move(entries));
}

double SalienceSchedule::at(double t, std::size_t domain) const {
    if (domain >= kDomainCount) {
        throw DomainError("domain", "domain index out of range: " + std::to_string(domain));
    }
    if (entries_.empty() || !std::isfinite(t) || t + kTimeSlack < entries_.front().year) {
        throw ConfigError("salience schedule undefined at t = " + std::to_string(t));
    }
    auto it = std::upper_bound(entries_.begin(), entries_.end(), t + kTimeSlack,
                               [](double value, const Entry& e) { return value < e.year; });
    return std::prev(it)->level[domain];
}

SalienceSchedule SalienceSchedule::scaled(double factor) const {
    SalienceSchedule out = *this;
    for (auto& e : out.entries_) {
        for (auto& level : e.level) level *= factor;
    }
    return out;
}

void SalienceSchedule::validate() const {
    const char* field = "salience_schedule";
    require_range(!entries_.empty(), field, "at least one entry required");
    require_range(entries_.front().year == 0.0, field, "first entry must be at year 0");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        require_range(finite(e.year), field, "years must be finite");
        if (i > 0) require_range(e.year > entries_[i - 1].year, field, "years must increase");
        for (double level : e.level) {
            require_range(finite(level) && level >= 0.0, field, "levels must be finite and >= 0");
        }
    }
}

void ModelParams::validate() const {
    require_range(finite(delta) && delta > 0.0 && delta < 1.0, "delta", "must lie in (0,1)");
    require_range(finite(alpha) && alpha > 0.0 && alpha < 1.0, "alpha", "must lie in (0,1)");
    require_range(delta + alpha < 1.0, "delta", "delta + alpha must be < 1");
    require_range(finite(gamma) && gamma > 0.0, "gamma", "must be > 0");
    require_range(finite(theta_use) && theta_use >= 0.0 && theta_use <= 1.0, "theta_use",
                  "must lie in [0,1]");
    require_range(finite(kappa_L) && kappa_L >= 0.0, "kappa_L", "must be >= 0");
    require_range(finite(rho_r) && rho_r >= 0.0, "rho_r", "must be >= 0");
    require_range(finite(a_dec) && a_dec >= 0.0, "a_dec", "must be >= 0");
    require_range(finite(c_max) && c_max > 0.0, "c_max", "must be > 0");
    for (std::size_t i = 0; i < kDomainCount; ++i) {
        require_range(coupling[i][i] == 0.0, "coupling", "diagonal must be exactly 0");
        for (double w : coupling[i]) {
            require_range(finite(w) && w >= 0.0, "coupling", "entries must be finite and >= 0");
        }
    }
    require_range(finite(rho_v) && rho_v >= 0.0, "rho_v", "must be >= 0");
    require_range(finite(mu) && mu >= 0.0, "mu", "must be >= 0");
    require_range(finite(m_forum) && m_forum >= 1.0, "m_forum", "must be >= 1");
    require_range(finite(sigma_w) && sigma_w > 0.0, "sigma_w", "must be > 0");
    require_range(finite(d_cap) && d_cap > 0.0 && d_cap <= 1.0, "d_cap", "must lie in (0,1]");
    salience_schedule.validate();
    require_range(finite(dt) && dt > 0.0 && dt <= 1.0, "dt", "must lie in (0,1]");
    const double per_year = 1.0 / dt;
    require_range(std::abs(per_year - std::round(per_year)) < 1e-9, "dt",
                  "must divide one year exactly");
}

double delegation_fraction(double s, double c, double gamma) {
    require_finite_nonnegative(s, "s");
    require_finite_nonnegative(c, "c");
    if (!std::isfinite(gamma) || gamma <= 0.0) {
        throw DomainError("gamma", "gamma must be finite and > 0, got " + std::to_string(gamma));
    }
    const double denom = s + gamma * c;
    if (denom == 0.0) return 0.0;
    return s / denom;
}

int usage_indicator(double d, double theta_use) {
    if (!(d >= 0.0 && d <= 1.0)) throw DomainError("d", "d must lie in [0,1]");
    if (!(theta_use >= 0.0 && theta_use <= 1.0)) {
        throw DomainError("theta_use", "theta_use must lie in [0,1]");
    }
    return d >= theta_use ? 1 : 0;
}

double capacity_step(double c, double d, int u, double spill, const ModelParams& p, double dt) {
    if (!std::isfinite(dt) || dt <= 0.0) {
        throw ConfigError("dt must be > 0, got " + std::to_string(dt));
    }
    require_finite_nonnegative(c, "c");
    require_finite_nonnegative(spill, "spill");
    if (!(d >= 0.0 && d <= 1.0)) throw DomainError("d", "d must lie in [0,1]");
    if (u != 0 && u != 1) throw DomainError("u", "u must be 0 or 1");

    const double erosion = dt * p.delta * (d + spill);
    const double atrophy = dt * p.alpha * u;
    const double recovery = dt * (p.rho_r * c * (1.0 - c / p.c_max) + p.a_dec);
    const double next = c * (1.0 - erosion - atrophy) + recovery;
    return std::max(0.0, next);
}

double salience_step(std::size_t domain, double lock_in_gap, const ModelParams& p, double t,
                     double dt) {
    require_finite_nonnegative(lock_in_gap, "lock_in_gap");
    return p.salience_schedule.at(t, domain) * (1.0 + p.kappa_L * lock_in_gap * dt);
}

double value_step(double v_e, double v_h, double c, const ModelParams& p, double dt) {
    return v_e + dt * p.m_forum * p.mu * c * (v_h - v_e);
}

double welfare_divergence(double v_e, double v_h, double sigma_w) {
    if (!std::isfinite(sigma_w) || sigma_w <= 0.0) {
        throw ConfigError("sigma_w must be > 0, got " + std::to_string(sigma_w));
    }
    return 1.0 - std::exp(-std::abs(v_h - v_e) / sigma_w);
}

double delegation_cap(double d_raw, const ModelParams& p) { return std::min(d_raw, p.d_cap); }

void refresh_delegation(DomainState& domain, const ModelParams& p) {
    domain.d = delegation_cap(delegation_fraction(domain.s, domain.c, p.gamma), p);
    domain.u = usage_indicator(domain.d, p.theta_use);
}

SystemState system_step(const SystemState& state, const ModelParams& p) {
    const double dt = p.dt;
    SystemState next = state;
    next.t = state.t + dt;

    // (1)
    next.v_h = state.v_h + p.rho_v * dt;

    // (2), (3)
    DomainArray d{};
    std::array<int, kDomainCount> u{};
    for (std::size_t i = 0; i < kDomainCount; ++i) {
        const auto& dom = state.domains[i];
        d[i] = delegation_cap(delegation_fraction(dom.s, dom.c, p.gamma), p);
        u[i] = usage_indicator(d[i], p.theta_use);
    }

    for (std::size_t i = 0; i < kDomainCount; ++i) {
        const auto& dom = state.domains[i];
        auto& out = next.domains[i];

        // (4)
        double spill = 0.0;
        for (std::size_t j = 0; j < kDomainCount; ++j) {
            if (j != i) spill += p.coupling[i][j] * d[j];
        }
        // (5), (6), (7)
        out.c = capacity_step(dom.c, d[i], u[i], spill, p, dt);
        out.v_e = value_step(dom.v_e, state.v_h, dom.c, p, dt);
        out.s = salience_step(i, std::abs(state.v_h - dom.v_e), p, next.t, dt);
        refresh_delegation(out, p);
    }
    return next;
}

SystemState uniform_initial_state(const ModelParams& p, double c0) {
    SystemState state;
    for (std::size_t i = 0; i < kDomainCount; ++i) {
        auto& dom = state.domains[i];
        dom.c = c0;
        dom.s = p.salience_schedule.at(0.0, i);
        refresh_delegation(dom, p);
    }
    return state;
}

}  // namespace disempower
