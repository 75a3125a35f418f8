#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ecsim/error.hpp"
#include "ecsim/io/csv.hpp"
#include "ecsim/ledger/events.hpp"
#include "ecsim/ledger/world.hpp"
#include "ecsim/stats.hpp"

namespace ecsim::ledger {

struct EntityDecl {
    std::string name;
    Role role = Role::External;
    bool operator==(const EntityDecl&) const = default;
};

/// A priced equity round of the currency firm: invested cash at a post-money valuation.
struct CapRound {
    std::string name;
    Money invested;
    Money post_money;
    bool operator==(const CapRound&) const = default;
};

struct Scenario {
    std::string name;
    std::vector<EntityDecl> entities;
    std::vector<double> checkpoints;
    std::vector<CapRound> cap_table;
    std::vector<ScenarioEvent> events;
    bool operator==(const Scenario&) const = default;
};

struct MetricsSnapshot {
    double t = 0.0;
    Money ec_supply;
    Money liquid_reserves;
    Money capital_reserves;
    Money total_value;
    Money primary_savings;
    std::optional<double> liquid_ratio;
    std::optional<double> total_ratio;
    std::optional<double> m_e_observed;
    std::optional<double> S0_observed;
    World world;  // full balance sheets at t
};

inline bool in_group(const Entity& e) { return e.role != Role::External; }

/// Group-level aggregates: liquid = cash + strategic reserve, capital = tangible +
/// IP + goodwill + EC saved by subsidiaries.
inline MetricsSnapshot measure(const World& w, double t) {
    using A = AccountClass;
    MetricsSnapshot s;
    s.t = t;
    s.world = w;
    for (const auto& e : w.entities()) {
        s.ec_supply += e[A::ECInCirculation];
        if (!in_group(e)) continue;
        s.liquid_reserves += e[A::CashUSD] + e[A::StrategicReserve];
        s.capital_reserves += e[A::TangibleCapital] + e[A::IntangibleIP] + e[A::Goodwill];
        if (e.role == Role::Subsidiary) s.primary_savings += e[A::ECHeld];
    }
    s.capital_reserves += s.primary_savings;
    s.total_value = s.liquid_reserves + s.capital_reserves;
    const auto ratio = [](Money a, Money b) -> std::optional<double> {
        if (b <= Money(0)) return std::nullopt;
        return static_cast<double>(a.millions()) / static_cast<double>(b.millions());
    };
    s.liquid_ratio = ratio(s.liquid_reserves, s.ec_supply);
    s.total_ratio = ratio(s.total_value, s.ec_supply);
    s.m_e_observed = ratio(s.ec_supply, s.primary_savings);
    return s;
}

/// Savings turnover time: primary savings over the subsidiaries' yearly EC spending
/// since the previous snapshot.
inline void attach_turnover(MetricsSnapshot& s, const MetricsSnapshot& prev) {
    const double dt = s.t - prev.t;
    if (!(dt > 0.0)) return;
    Money spent;
    for (const auto& e : s.world.entities())
        if (e.role == Role::Subsidiary) spent += e.flows.ec_spent;
    for (const auto& e : prev.world.entities())
        if (e.role == Role::Subsidiary) spent -= e.flows.ec_spent;
    if (spent <= Money(0) || s.primary_savings <= Money(0)) return;
    s.S0_observed = static_cast<double>(s.primary_savings.millions()) / (static_cast<double>(spent.millions()) / dt);
}

inline World build_world(const Scenario& sc) {
    World w;
    for (const auto& d : sc.entities) w.add_entity(d.name, d.role);
    return w;
}

/// Replays the events and snapshots the world after every event with time <= checkpoint.
/// With no checkpoints a single snapshot is taken after the last event.
inline std::vector<MetricsSnapshot> run_scenario(const Scenario& sc) {
    for (std::size_t i = 1; i < sc.events.size(); ++i)
        if (sc.events[i].time < sc.events[i - 1].time)
            throw DomainError("run_scenario: events must be time-ordered (event " + std::to_string(i) + ")");
    for (std::size_t i = 1; i < sc.checkpoints.size(); ++i)
        if (!(sc.checkpoints[i] > sc.checkpoints[i - 1])) throw DomainError("run_scenario: checkpoints must increase");
    std::vector<double> cps = sc.checkpoints;
    if (cps.empty()) cps.push_back(sc.events.empty() ? 0.0 : sc.events.back().time);

    World w = build_world(sc);
    std::vector<MetricsSnapshot> out;
    std::size_t next = 0;
    for (double t : cps) {
        while (next < sc.events.size() && sc.events[next].time <= t) post_in_place(w, sc.events[next++]);
        out.push_back(measure(w, t));
        if (out.size() > 1) attach_turnover(out.back(), out[out.size() - 2]);
    }
    return out;
}

struct ReserveRatios {
    double liquid = 0.0;
    double total = 0.0;
};

inline ReserveRatios reserve_ratios(const World& w) {
    const auto s = measure(w, 0.0);
    if (!s.liquid_ratio) throw DomainError("reserve_ratios: no EC in circulation");
    return {*s.liquid_ratio, *s.total_ratio};
}

struct GrowthFit {
    double rate = 0.0;  // continuous, 1/years
    double intercept = 0.0;
    std::vector<std::pair<std::string, double>> round_multiples;  // value multiple per cap-table round
};

/// Fraction of the firm each round holds after all later rounds have diluted it.
inline std::vector<double> diluted_ownership(const std::vector<CapRound>& rounds) {
    std::vector<double> own(rounds.size());
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        if (rounds[i].post_money <= Money(0) || rounds[i].invested > rounds[i].post_money)
            throw DomainError("cap table: round '" + rounds[i].name + "' has an invalid valuation");
        own[i] = static_cast<double>(rounds[i].invested.millions()) / static_cast<double>(rounds[i].post_money.millions());
        for (std::size_t k = 0; k < i; ++k) own[k] *= 1.0 - own[i];
    }
    return own;
}

/// Least-squares slope of ln(total_value) against t. Round multiples use the last snapshot's value.
inline GrowthFit growth_fit(const std::vector<MetricsSnapshot>& snaps, const std::vector<CapRound>& cap_table = {}) {
    if (snaps.size() < 3) throw DomainError("growth_fit: needs at least three snapshots");
    std::vector<double> t, y;
    for (const auto& s : snaps) {
        if (s.total_value <= Money(0)) throw DomainError("growth_fit: total value must be positive");
        t.push_back(s.t);
        y.push_back(std::log(static_cast<double>(s.total_value.millions())));
    }
    const auto fit = stats::least_squares(t, y);
    GrowthFit g{fit.slope, fit.intercept, {}};
    const auto own = diluted_ownership(cap_table);
    const double final_value = static_cast<double>(snaps.back().total_value.millions());
    for (std::size_t i = 0; i < cap_table.size(); ++i)
        g.round_multiples.emplace_back(cap_table[i].name,
                                       own[i] * final_value / static_cast<double>(cap_table[i].invested.millions()));
    return g;
}

inline std::vector<MetricsSnapshot> window(const std::vector<MetricsSnapshot>& snaps, double t0, double t1) {
    std::vector<MetricsSnapshot> out;
    for (const auto& s : snaps)
        if (s.t >= t0 && s.t <= t1) out.push_back(s);
    return out;
}

inline const std::vector<std::string> kMetricsColumns{"t",           "ec_supply",   "liquid_reserves",
                                                      "capital_reserves", "total_value", "liquid_ratio",
                                                      "total_ratio", "m_e_observed", "S0_observed"};

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricsSnapshot>& snaps) {
    io::CsvWriter w(os, kMetricsColumns);
    const auto opt = [](const std::optional<double>& v) -> io::Cell {
        if (!v) return std::monostate{};
        return *v;
    };
    for (const auto& s : snaps)
        w.cells({s.t, static_cast<long long>(s.ec_supply.millions()), static_cast<long long>(s.liquid_reserves.millions()),
                 static_cast<long long>(s.capital_reserves.millions()), static_cast<long long>(s.total_value.millions()),
                 opt(s.liquid_ratio), opt(s.total_ratio), opt(s.m_e_observed), opt(s.S0_observed)});
}

/// T-account style listing of every entity's non-zero balances.
inline void write_balance_sheets(std::ostream& os, const World& w, double t) {
    os << "Balance sheets at t = " << io::format_number(t) << " (millions)\n";
    for (const auto& e : w.entities()) {
        os << "\n" << e.name << " [" << name(e.role) << "]\n";
        for (auto a : kAllAccounts) {
            if (e[a] == Money(0)) continue;
            os << "  " << (is_asset(a) ? "asset  " : "claim  ") << std::left << std::setw(18) << name(a) << std::right
               << std::setw(14) << e[a].str() << "\n";
        }
        os << "  assets " << e.assets().str() << " = liabilities " << e.liabilities().str() << " + equity "
           << e.equity().str() << "\n";
    }
}

}  // namespace ecsim::ledger
