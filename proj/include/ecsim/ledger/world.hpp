#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecsim/error.hpp"
#include "ecsim/ledger/money.hpp"

namespace ecsim::ledger {

enum class Role { CurrencyFirm, Subsidiary, External };

enum class AccountClass {
    CashUSD,
    ECHeld,
    StrategicReserve,
    TangibleCapital,
    IntangibleIP,
    Goodwill,
    ECLoanAsset,
    DebtOwed,
    ECInCirculation,
    StockEquity,
    RetainedEarnings,
};

inline constexpr std::size_t kAccountCount = 11;

inline constexpr std::array<AccountClass, kAccountCount> kAllAccounts{
    AccountClass::CashUSD,         AccountClass::ECHeld,      AccountClass::StrategicReserve,
    AccountClass::TangibleCapital, AccountClass::IntangibleIP, AccountClass::Goodwill,
    AccountClass::ECLoanAsset,     AccountClass::DebtOwed,    AccountClass::ECInCirculation,
    AccountClass::StockEquity,     AccountClass::RetainedEarnings,
};

inline constexpr bool is_asset(AccountClass a) { return static_cast<int>(a) <= static_cast<int>(AccountClass::ECLoanAsset); }

inline constexpr std::string_view name(AccountClass a) {
    switch (a) {
        case AccountClass::CashUSD: return "CashUSD";
        case AccountClass::ECHeld: return "ECHeld";
        case AccountClass::StrategicReserve: return "StrategicReserve";
        case AccountClass::TangibleCapital: return "TangibleCapital";
        case AccountClass::IntangibleIP: return "IntangibleIP";
        case AccountClass::Goodwill: return "Goodwill";
        case AccountClass::ECLoanAsset: return "ECLoanAsset";
        case AccountClass::DebtOwed: return "DebtOwed";
        case AccountClass::ECInCirculation: return "ECInCirculation";
        case AccountClass::StockEquity: return "StockEquity";
        case AccountClass::RetainedEarnings: return "RetainedEarnings";
    }
    return "?";
}

inline constexpr std::string_view name(Role r) {
    switch (r) {
        case Role::CurrencyFirm: return "CurrencyFirm";
        case Role::Subsidiary: return "Subsidiary";
        case Role::External: return "External";
    }
    return "?";
}

inline std::optional<AccountClass> parse_account(std::string_view s) {
    for (auto a : kAllAccounts)
        if (name(a) == s) return a;
    return std::nullopt;
}

inline std::optional<Role> parse_role(std::string_view s) {
    for (auto r : {Role::CurrencyFirm, Role::Subsidiary, Role::External})
        if (name(r) == s) return r;
    return std::nullopt;
}

/// Cumulative operating flows, used for activity and turnover metrics.
struct Flows {
    Money ec_spent;  // EC paid out on operations and construction
    Money sales;     // cash received for production and reserve sales
};

struct Entity {
    std::string name;
    Role role = Role::External;
    std::array<Money, kAccountCount> balances{};
    Flows flows;

    Money& operator[](AccountClass a) { return balances[static_cast<std::size_t>(a)]; }
    Money operator[](AccountClass a) const { return balances[static_cast<std::size_t>(a)]; }

    Money assets() const {
        Money s;
        for (auto a : kAllAccounts)
            if (is_asset(a)) s += (*this)[a];
        return s;
    }
    Money liabilities() const { return (*this)[AccountClass::DebtOwed]; }
    Money equity() const {
        return (*this)[AccountClass::ECInCirculation] + (*this)[AccountClass::StockEquity] +
               (*this)[AccountClass::RetainedEarnings];
    }
};

enum class Side { Debit, Credit };

struct Posting {
    std::size_t entity = 0;
    AccountClass account = AccountClass::CashUSD;
    Side side = Side::Debit;
    Money amount;
};

using Journal = std::vector<Posting>;

class World {
public:
    World() = default;

    std::size_t add_entity(std::string name, Role role) {
        if (index_.count(name)) throw DomainError("ledger: duplicate entity " + name);
        index_[name] = entities_.size();
        entities_.push_back({std::move(name), role, {}, {}});
        return entities_.size() - 1;
    }

    std::size_t find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ReferenceError("ledger: unknown entity '" + name + "'");
        return it->second;
    }
    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    const Entity& entity(std::size_t i) const { return entities_.at(i); }
    const Entity& entity(const std::string& name) const { return entities_[find(name)]; }
    const std::vector<Entity>& entities() const { return entities_; }

    std::optional<std::size_t> first_with_role(Role r) const {
        for (std::size_t i = 0; i < entities_.size(); ++i)
            if (entities_[i].role == r) return i;
        return std::nullopt;
    }

    Money total(AccountClass a, std::optional<Role> role = std::nullopt) const {
        Money s;
        for (const auto& e : entities_)
            if (!role || e.role == *role) s += e[a];
        return s;
    }

    /// Validates and applies a journal atomically; the world is unchanged on error.
    void apply(const Journal& j) {
        std::vector<std::pair<Money, Money>> sums(entities_.size());
        for (const auto& p : j) {
            if (p.entity >= entities_.size()) throw ConsistencyError("ledger: posting to unknown entity index");
            if (p.amount < Money(0)) throw ConsistencyError("ledger: negative posting amount");
            (p.side == Side::Debit ? sums[p.entity].first : sums[p.entity].second) += p.amount;
        }
        for (std::size_t i = 0; i < sums.size(); ++i)
            if (sums[i].first != sums[i].second)
                throw ConsistencyError("ledger: unbalanced journal for " + entities_[i].name + " (debits " +
                                       sums[i].first.str() + ", credits " + sums[i].second.str() + ")");

        auto next = entities_;
        for (const auto& p : j) {
            const bool increases = (p.side == Side::Debit) == is_asset(p.account);
            next[p.entity][p.account] += increases ? p.amount : -p.amount;
        }
        for (const auto& e : next) check_overdraft(e);
        check_conservation(next);
        entities_ = std::move(next);
    }

    Flows& flows(std::size_t i) { return entities_.at(i).flows; }

private:
    static void check_overdraft(const Entity& e) {
        for (auto a : kAllAccounts) {
            if (e.role == Role::External && a != AccountClass::ECHeld) continue;
            if (a == AccountClass::RetainedEarnings || a == AccountClass::StockEquity) continue;
            if (e[a] < Money(0))
                throw OverdraftError("ledger: overdraft on " + e.name + "." + std::string(name(a)) + " (balance " +
                                     e[a].str() + ")");
        }
    }

    static void check_conservation(const std::vector<Entity>& es) {
        Money issued, held, loans, parent_stake;
        for (const auto& e : es) {
            issued += e[AccountClass::ECInCirculation];
            held += e[AccountClass::ECHeld];
            loans += e[AccountClass::ECLoanAsset];
            if (e.role == Role::Subsidiary) parent_stake += e[AccountClass::StockEquity];
            const Money gap = e.assets() - e.liabilities() - e.equity();
            if (gap != Money(0)) throw ConsistencyError("ledger: balance identity broken for " + e.name);
        }
        if (issued != held) throw ConsistencyError("ledger: EC in circulation does not match EC held");
        if (loans != parent_stake) throw ConsistencyError("ledger: EC loans do not mirror subsidiary equity");
    }

    std::vector<Entity> entities_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace ecsim::ledger
