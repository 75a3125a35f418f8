#pragma once

#include <string>
#include <string_view>

#include "ecsim/error.hpp"
#include "ecsim/ledger/scenario.hpp"
#include "ecsim/ledger/scenario_io.hpp"

namespace ecsim::ledger {

// Amounts in millions. Each phase's events sit inside the two-year interval that ends
// at the next checkpoint.
inline constexpr std::string_view kNewEnergyJson = R"json({
  "name": "new-energy",
  "entities": [
    {"name": "NewEnergy", "role": "CurrencyFirm"},
    {"name": "NMHydrocarbons", "role": "Subsidiary"},
    {"name": "NMHydrogen", "role": "Subsidiary"},
    {"name": "USHydrocarbons", "role": "Subsidiary"},
    {"name": "USHydrogen", "role": "Subsidiary"},
    {"name": "Market", "role": "External"}
  ],
  "checkpoints": [0, 2, 4, 6, 8, 10, 12, 14, 16],
  "cap_table": [
    {"name": "seed", "invested": 20, "post_money": 60},
    {"name": "ipo", "invested": 3000, "post_money": 15000}
  ],
  "events": [
    {"time": 0, "kind": "SeedEquity", "entity": "NewEnergy", "cash": 20, "intangible": 40},
    {"time": 1, "kind": "SpendOpex", "entity": "NewEnergy", "amount": 14},
    {"time": 2, "kind": "SpendOpex", "entity": "NewEnergy", "amount": 6},
    {"time": 2, "kind": "StockIssue", "entity": "NewEnergy", "cash": 3000, "intangible": 11960},

    {"time": 2.5, "kind": "IssueEC", "entity": "NewEnergy", "amount": 31000},
    {"time": 2.5, "kind": "SellECForCash", "entity": "NewEnergy", "amount": 8500},
    {"time": 3, "kind": "AcquireCompany", "entity": "NewEnergy", "target": "NMHydrocarbons", "ec": 22500, "cash": 2500, "debt": 5000},
    {"time": 3, "kind": "PayDebt", "entity": "NewEnergy", "debtor": "NMHydrocarbons", "amount": 5000},
    {"time": 3, "kind": "IssueEC", "entity": "NewEnergy", "amount": 25000},
    {"time": 3, "kind": "InvestECInSubsidiary", "entity": "NewEnergy", "subsidiary": "NMHydrocarbons", "amount": 25000},
    {"time": 3.5, "kind": "IssueEC", "entity": "NewEnergy", "amount": 13500},
    {"time": 3.5, "kind": "InvestECInSubsidiary", "entity": "NewEnergy", "subsidiary": "NMHydrogen", "amount": 10000},
    {"time": 3.5, "kind": "SellECForCash", "entity": "NewEnergy", "amount": 3500},

    {"time": 4.5, "kind": "Operate", "entity": "NMHydrocarbons", "ec_cost": 20000, "market_value": 18000, "disposition": "reserve"},
    {"time": 4.5, "kind": "SpendOpex", "entity": "NMHydrocarbons", "amount": 5000, "currency": "EC", "capitalize": "tangible"},
    {"time": 4.5, "kind": "SpendOpex", "entity": "NMHydrogen", "amount": 1000, "currency": "EC", "capitalize": "ip"},
    {"time": 4.5, "kind": "SpendOpex", "entity": "NMHydrogen", "amount": 9000, "currency": "EC", "capitalize": "tangible"},
    {"time": 5.5, "kind": "IssueEC", "entity": "NewEnergy", "amount": 30000},
    {"time": 5.5, "kind": "InvestECInSubsidiary", "entity": "NewEnergy", "subsidiary": "NMHydrocarbons", "amount": 20000},
    {"time": 5.5, "kind": "InvestECInSubsidiary", "entity": "NewEnergy", "subsidiary": "NMHydrogen", "amount": 10000},

    {"time": 6.5, "kind": "SellReserve", "entity": "NMHydrocarbons", "price": 60000},
    {"time": 6.5, "kind": "Operate", "entity": "NMHydrocarbons", "ec_cost": 20000, "market_value": 60000, "disposition": "sale"},
    {"time": 7, "kind": "RemitCashForEC", "entity": "NMHydrocarbons", "firm": "NewEnergy", "cash": 120000, "ec": 20000},
    {"time": 7, "kind": "Operate", "entity": "NMHydrogen", "ec_cost": 6000, "market_value": 8000, "disposition": "sale"},
    {"time": 7, "kind": "RemitCashForEC", "entity": "NMHydrogen", "firm": "NewEnergy", "cash": 8000, "ec": 6000},

    {"time": 8.5, "kind": "IssueEC", "entity": "NewEnergy", "amount": 90000},
    {"time": 8.5, "kind": "AcquireCompany", "entity": "NewEnergy", "target": "USHydrocarbons", "ec": 90000, "cash": 30000, "debt": 15000},
    {"time": 8.5, "kind": "PayDebt", "entity": "NewEnergy", "debtor": "USHydrocarbons", "amount": 15000},
    {"time": 9, "kind": "IssueEC", "entity": "NewEnergy", "amount": 80000},
    {"time": 9, "kind": "InvestECInSubsidiary", "entity": "NewEnergy", "subsidiary": "USHydrocarbons", "amount": 80000},
    {"time": 9.5, "kind": "IssueEC", "entity": "NewEnergy", "amount": 500000},
    {"time": 9.5, "kind": "InvestECInSubsidiary", "entity": "NewEnergy", "subsidiary": "USHydrogen", "amount": 500000},

    {"time": 10.5, "kind": "Operate", "entity": "USHydrocarbons", "ec_cost": 70000, "market_value": 60000, "disposition": "reserve"},
    {"time": 10.5, "kind": "SpendOpex", "entity": "USHydrocarbons", "amount": 10000, "currency": "EC", "capitalize": "tangible"},
    {"time": 10.5, "kind": "SpendOpex", "entity": "USHydrogen", "amount": 450000, "currency": "EC", "capitalize": "tangible"},
    {"time": 10.5, "kind": "Operate", "entity": "NMHydrocarbons", "ec_cost": 20000, "market_value": 16000, "disposition": "reserve"},
    {"time": 10.5, "kind": "Operate", "entity": "NMHydrogen", "ec_cost": 6000, "market_value": 6000, "disposition": "sale"},
    {"time": 11, "kind": "RemitCashForEC", "entity": "NMHydrogen", "firm": "NewEnergy", "cash": 6000, "ec": 6000},
    {"time": 11.5, "kind": "IssueEC", "entity": "NewEnergy", "amount": 400000},
    {"time": 11.5, "kind": "InvestECInSubsidiary", "entity": "NewEnergy", "subsidiary": "USHydrocarbons", "amount": 80000},
    {"time": 11.5, "kind": "InvestECInSubsidiary", "entity": "NewEnergy", "subsidiary": "USHydrogen", "amount": 320000},
    {"time": 11.5, "kind": "IssueEC", "entity": "NewEnergy", "amount": 20000},
    {"time": 11.5, "kind": "InvestECInSubsidiary", "entity": "NewEnergy", "subsidiary": "NMHydrocarbons", "amount": 20000},

    {"time": 12.5, "kind": "SellReserve", "entity": "USHydrocarbons", "price": 210000},
    {"time": 12.5, "kind": "Operate", "entity": "USHydrocarbons", "ec_cost": 70000, "market_value": 210000, "disposition": "sale"},
    {"time": 12.5, "kind": "SellReserve", "entity": "NMHydrocarbons", "price": 60000},
    {"time": 12.5, "kind": "Operate", "entity": "NMHydrocarbons", "ec_cost": 20000, "market_value": 60000, "disposition": "sale"},
    {"time": 13, "kind": "RemitCashForEC", "entity": "USHydrocarbons", "firm": "NewEnergy", "cash": 420000, "ec": 70000},
    {"time": 13, "kind": "RemitCashForEC", "entity": "NMHydrocarbons", "firm": "NewEnergy", "cash": 120000, "ec": 20000},
    {"time": 13, "kind": "Operate", "entity": "USHydrogen", "ec_cost": 100000, "market_value": 100000, "disposition": "sale"},
    {"time": 13, "kind": "SpendOpex", "entity": "USHydrogen", "amount": 250000, "currency": "EC", "capitalize": "tangible"},
    {"time": 13.5, "kind": "RemitCashForEC", "entity": "USHydrogen", "firm": "NewEnergy", "cash": 100000, "ec": 350000},
    {"time": 13.5, "kind": "Operate", "entity": "NMHydrogen", "ec_cost": 6000, "market_value": 6000, "disposition": "sale"},
    {"time": 13.5, "kind": "RemitCashForEC", "entity": "NMHydrogen", "firm": "NewEnergy", "cash": 6000, "ec": 6000},

    {"time": 14.5, "kind": "Operate", "entity": "USHydrocarbons", "ec_cost": 70000, "market_value": 210000, "disposition": "sale"},
    {"time": 14.5, "kind": "RemitCashForEC", "entity": "USHydrocarbons", "firm": "NewEnergy", "cash": 140000},
    {"time": 14.5, "kind": "BuyECOpenMarket", "entity": "USHydrocarbons", "amount": 70000},
    {"time": 14.5, "kind": "RemitCashForEC", "entity": "USHydrocarbons", "firm": "NewEnergy", "ec": 40000},
    {"time": 14.5, "kind": "Operate", "entity": "USHydrogen", "ec_cost": 150000, "market_value": 150000, "disposition": "sale"},
    {"time": 14.5, "kind": "SpendOpex", "entity": "USHydrogen", "amount": 220000, "currency": "EC", "capitalize": "tangible"},
    {"time": 14.5, "kind": "BuyECOpenMarket", "entity": "USHydrogen", "amount": 150000},
    {"time": 14.5, "kind": "RemitCashForEC", "entity": "USHydrogen", "firm": "NewEnergy", "ec": 250000},
    {"time": 14.5, "kind": "Operate", "entity": "NMHydrogen", "ec_cost": 6000, "market_value": 8000, "disposition": "sale"},
    {"time": 14.5, "kind": "BuyECOpenMarket", "entity": "NMHydrogen", "amount": 4000},
    {"time": 14.5, "kind": "RemitCashForEC", "entity": "NMHydrogen", "firm": "NewEnergy", "cash": 4000, "ec": 7000},
    {"time": 14.5, "kind": "Operate", "entity": "NMHydrocarbons", "ec_cost": 20000, "market_value": 60000, "disposition": "sale"},
    {"time": 14.5, "kind": "BuyECOpenMarket", "entity": "NMHydrocarbons", "amount": 20000},
    {"time": 14.5, "kind": "RemitCashForEC", "entity": "NMHydrocarbons", "firm": "NewEnergy", "cash": 40000, "ec": 10000},
    {"time": 15.5, "kind": "Sequester", "entity": "NewEnergy", "amount": 430000},
    {"time": 15.5, "kind": "Dividend", "entity": "NewEnergy", "amount": 160000}
  ]
})json";

inline Scenario new_energy() { return parse_scenario(std::string(kNewEnergyJson)); }

/// Built-in scenarios addressable by name from the command line.
inline std::optional<Scenario> builtin_scenario(std::string_view name) {
    if (name == "new-energy") return new_energy();
    return std::nullopt;
}

/// Interval of the growth stage used for the exponential fit: IPO to maturity.
inline constexpr double kGrowthFrom = 2.0;
inline constexpr double kGrowthTo = 14.0;

/// Reference producer operated for discounted cash flow.
struct TargetEnergyParams {
    Money annual_expenditure{4000};
    Money liquid_savings{200};
    Money profit{11000};  // over the comparison window, as reported
    double years = 4.0;
    double nm_velocity = 0.5;  // per year, as reported for NM Hydrocarbons
};

struct TargetEnergyReport {
    Money nm_activity;  // EC spent by NM Hydrocarbons over the window
    Money nm_profit;    // sales minus EC spent over the window
    Money target_activity;
    Money target_profit;
    double activity_ratio = 0.0;
    double profit_ratio = 0.0;
    double target_velocity = 0.0;  // per year
    double nm_velocity = 0.0;
    double target_turnover_days = 0.0;
    double nm_turnover_years = 0.0;
};

/// NM Hydrocarbons figures come from replaying the built-in scenario over years 4 to 8.
inline TargetEnergyReport target_energy_compare(const TargetEnergyParams& p = {}) {
    auto sc = new_energy();
    sc.checkpoints = {4.0, 8.0};
    const auto snaps = run_scenario(sc);
    const auto& a = snaps[0].world.entity("NMHydrocarbons").flows;
    const auto& b = snaps[1].world.entity("NMHydrocarbons").flows;
    TargetEnergyReport r;
    r.nm_activity = b.ec_spent - a.ec_spent;
    r.nm_profit = (b.sales - a.sales) - r.nm_activity;
    r.target_activity = Money(static_cast<std::int64_t>(std::llround(p.annual_expenditure.millions() * p.years)));
    r.target_profit = p.profit;
    r.activity_ratio = static_cast<double>(r.nm_activity.millions()) / static_cast<double>(r.target_activity.millions());
    r.profit_ratio = static_cast<double>(r.nm_profit.millions()) / static_cast<double>(r.target_profit.millions());
    r.target_velocity =
        static_cast<double>(p.annual_expenditure.millions()) / static_cast<double>(p.liquid_savings.millions());
    r.nm_velocity = p.nm_velocity;
    r.target_turnover_days = 365.0 / r.target_velocity;
    r.nm_turnover_years = 1.0 / r.nm_velocity;
    return r;
}

}  // namespace ecsim::ledger
