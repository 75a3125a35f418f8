#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ecsim/error.hpp"
#include "ecsim/ledger/money.hpp"
#include "ecsim/ledger/world.hpp"

namespace ecsim::ledger {

enum class EventKind {
    SeedEquity,
    SpendOpex,
    StockIssue,
    IssueEC,
    SellECForCash,
    AcquireCompany,
    PayDebt,
    InvestECInSubsidiary,
    Operate,
    SellReserve,
    RemitCashForEC,
    BuyECOpenMarket,
    Dividend,
    Sequester,
    Revalue,
};

inline constexpr std::array<EventKind, 15> kAllEventKinds{
    EventKind::SeedEquity,     EventKind::SpendOpex,       EventKind::StockIssue,     EventKind::IssueEC,
    EventKind::SellECForCash,  EventKind::AcquireCompany,  EventKind::PayDebt,        EventKind::InvestECInSubsidiary,
    EventKind::Operate,        EventKind::SellReserve,     EventKind::RemitCashForEC, EventKind::BuyECOpenMarket,
    EventKind::Dividend,       EventKind::Sequester,       EventKind::Revalue,
};

inline constexpr std::string_view name(EventKind k) {
    switch (k) {
        case EventKind::SeedEquity: return "SeedEquity";
        case EventKind::SpendOpex: return "SpendOpex";
        case EventKind::StockIssue: return "StockIssue";
        case EventKind::IssueEC: return "IssueEC";
        case EventKind::SellECForCash: return "SellECForCash";
        case EventKind::AcquireCompany: return "AcquireCompany";
        case EventKind::PayDebt: return "PayDebt";
        case EventKind::InvestECInSubsidiary: return "InvestECInSubsidiary";
        case EventKind::Operate: return "Operate";
        case EventKind::SellReserve: return "SellReserve";
        case EventKind::RemitCashForEC: return "RemitCashForEC";
        case EventKind::BuyECOpenMarket: return "BuyECOpenMarket";
        case EventKind::Dividend: return "Dividend";
        case EventKind::Sequester: return "Sequester";
        case EventKind::Revalue: return "Revalue";
    }
    return "?";
}

inline std::optional<EventKind> parse_event_kind(std::string_view s) {
    for (auto k : kAllEventKinds)
        if (name(k) == s) return k;
    return std::nullopt;
}

enum class Currency { USD, EC };
enum class Capitalize { None, Tangible, IP };
enum class Disposition { Reserve, Sale };

/// One economic transaction. Which fields matter depends on kind:
///   SeedEquity, StockIssue   entity, cash, intangible, counterparty (investor)
///   SpendOpex                entity, amount, currency, capitalize, counterparty (payee)
///   IssueEC                  entity (currency firm), amount into its treasury
///   SellECForCash            entity, amount, counterparty (buyer)
///   AcquireCompany           entity (buyer), other (target), ec, cash, debt, tangible_book, counterparty (seller)
///   PayDebt                  entity (payer), other (debtor), amount, counterparty (creditor)
///   InvestECInSubsidiary     entity (currency firm), other (subsidiary), amount from treasury
///   Operate                  entity, amount (EC cost), market_value, disposition, counterparty
///   SellReserve              entity, amount (price), counterparty (buyer)
///   RemitCashForEC           entity (subsidiary), other (currency firm), cash, ec (newly issued)
///   BuyECOpenMarket          entity (buyer), amount, counterparty (seller), retire
///   Dividend, Sequester      entity, amount, counterparty (payee)
///   Revalue                  entity, account, delta (signed)
struct ScenarioEvent {
    double time = 0.0;
    EventKind kind = EventKind::SpendOpex;
    std::string entity;
    std::string other;
    std::string counterparty;  // empty selects the first External entity
    Money amount;
    Money cash;
    Money ec;
    Money intangible;
    Money debt;
    Money market_value;
    std::optional<Money> tangible_book;
    Money delta;
    Currency currency = Currency::USD;
    Capitalize capitalize = Capitalize::None;
    Disposition disposition = Disposition::Reserve;
    AccountClass account = AccountClass::StrategicReserve;
    bool retire = false;

    bool operator==(const ScenarioEvent&) const = default;
};

namespace detail {

class JournalBuilder {
public:
    explicit JournalBuilder(Journal& j) : j_(j) {}
    void debit(std::size_t e, AccountClass a, Money m) { add(e, a, Side::Debit, m); }
    void credit(std::size_t e, AccountClass a, Money m) { add(e, a, Side::Credit, m); }
    /// Asset and equity move together in the same direction: positive grows both.
    void grow(std::size_t e, AccountClass asset, AccountClass claim, Money m) {
        if (m >= Money(0)) {
            debit(e, asset, m);
            credit(e, claim, m);
        } else {
            credit(e, asset, -m);
            debit(e, claim, -m);
        }
    }

private:
    void add(std::size_t e, AccountClass a, Side s, Money m) {
        if (m != Money(0)) j_.push_back({e, a, s, m});
    }
    Journal& j_;
};

inline void require_role(const World& w, std::size_t i, Role r, const char* what) {
    if (w.entity(i).role != r)
        throw DomainError(std::string("ledger: ") + what + " must be a " + std::string(name(r)) + ", '" +
                          w.entity(i).name + "' is " + std::string(name(w.entity(i).role)));
}

inline void require_non_negative(std::initializer_list<Money> ms) {
    for (Money m : ms)
        if (m < Money(0)) throw DomainError("ledger: event amounts must be non-negative");
}

}  // namespace detail

/// Expands an event into balanced postings against the current world.
inline Journal expand(const World& w, const ScenarioEvent& ev) {
    using A = AccountClass;
    Journal j;
    detail::JournalBuilder b(j);
    const std::size_t self = w.find(ev.entity);
    const auto party = [&]() -> std::size_t {
        if (!ev.counterparty.empty()) return w.find(ev.counterparty);
        auto ext = w.first_with_role(Role::External);
        if (!ext) throw ReferenceError("ledger: event needs an External counterparty and none is declared");
        return *ext;
    };
    detail::require_non_negative({ev.amount, ev.cash, ev.ec, ev.intangible, ev.debt, ev.market_value,
                                  ev.tangible_book.value_or(Money(0))});

    switch (ev.kind) {
        case EventKind::SeedEquity:
        case EventKind::StockIssue: {
            detail::require_role(w, self, Role::CurrencyFirm, "stock issuer");
            const std::size_t inv = party();
            b.debit(self, A::CashUSD, ev.cash);
            b.debit(self, A::IntangibleIP, ev.intangible);
            b.credit(self, A::StockEquity, ev.cash + ev.intangible);
            b.grow(inv, A::CashUSD, A::RetainedEarnings, -ev.cash);
            break;
        }
        case EventKind::SpendOpex: {
            const std::size_t payee = party();
            const A from = ev.currency == Currency::USD ? A::CashUSD : A::ECHeld;
            const A to = ev.capitalize == Capitalize::Tangible ? A::TangibleCapital
                         : ev.capitalize == Capitalize::IP     ? A::IntangibleIP
                                                               : A::RetainedEarnings;
            b.credit(self, from, ev.amount);
            b.debit(self, to, ev.amount);
            b.grow(payee, from, A::RetainedEarnings, ev.amount);
            break;
        }
        case EventKind::IssueEC:
            detail::require_role(w, self, Role::CurrencyFirm, "EC issuer");
            b.grow(self, A::ECHeld, A::ECInCirculation, ev.amount);
            break;
        case EventKind::SellECForCash: {
            detail::require_role(w, self, Role::CurrencyFirm, "EC seller");
            const std::size_t buyer = party();
            b.debit(self, A::CashUSD, ev.amount);
            b.credit(self, A::ECHeld, ev.amount);
            b.debit(buyer, A::ECHeld, ev.amount);
            b.credit(buyer, A::CashUSD, ev.amount);
            break;
        }
        case EventKind::AcquireCompany: {
            detail::require_role(w, self, Role::CurrencyFirm, "acquirer");
            const std::size_t target = w.find(ev.other);
            detail::require_role(w, target, Role::Subsidiary, "acquisition target");
            const std::size_t seller = party();
            const Money price = ev.ec + ev.cash;
            const Money enterprise = price + ev.debt;
            const Money tangible = ev.tangible_book.value_or(enterprise);
            if (tangible > enterprise) throw DomainError("ledger: tangible book exceeds purchase price plus debt");
            b.debit(self, A::ECLoanAsset, price);
            b.credit(self, A::ECHeld, ev.ec);
            b.credit(self, A::CashUSD, ev.cash);
            b.debit(target, A::TangibleCapital, tangible);
            b.debit(target, A::Goodwill, enterprise - tangible);
            b.credit(target, A::DebtOwed, ev.debt);
            b.credit(target, A::StockEquity, price);
            b.debit(seller, A::ECHeld, ev.ec);
            b.debit(seller, A::CashUSD, ev.cash);
            b.credit(seller, A::RetainedEarnings, price);
            break;
        }
        case EventKind::PayDebt: {
            const std::size_t debtor = w.find(ev.other);
            const std::size_t creditor = party();
            b.debit(debtor, A::DebtOwed, ev.amount);
            if (debtor == self) {
                b.credit(self, A::CashUSD, ev.amount);
            } else {
                detail::require_role(w, self, Role::CurrencyFirm, "payer of a subsidiary's debt");
                detail::require_role(w, debtor, Role::Subsidiary, "debtor");
                b.credit(debtor, A::StockEquity, ev.amount);
                b.debit(self, A::ECLoanAsset, ev.amount);
                b.credit(self, A::CashUSD, ev.amount);
            }
            b.grow(creditor, A::CashUSD, A::RetainedEarnings, ev.amount);
            break;
        }
        case EventKind::InvestECInSubsidiary: {
            detail::require_role(w, self, Role::CurrencyFirm, "investor");
            const std::size_t sub = w.find(ev.other);
            detail::require_role(w, sub, Role::Subsidiary, "investee");
            b.debit(self, A::ECLoanAsset, ev.amount);
            b.credit(self, A::ECHeld, ev.amount);
            b.grow(sub, A::ECHeld, A::StockEquity, ev.amount);
            break;
        }
        case EventKind::Operate: {
            const std::size_t other = party();
            b.credit(self, A::ECHeld, ev.amount);
            b.grow(other, A::ECHeld, A::RetainedEarnings, ev.amount);
            if (ev.disposition == Disposition::Reserve) {
                // produced at cost, then marked to market
                b.debit(self, A::StrategicReserve, ev.amount);
                b.grow(self, A::StrategicReserve, A::RetainedEarnings, ev.market_value - ev.amount);
            } else {
                b.debit(self, A::RetainedEarnings, ev.amount);
                b.grow(self, A::CashUSD, A::RetainedEarnings, ev.market_value);
                b.grow(other, A::CashUSD, A::RetainedEarnings, -ev.market_value);
            }
            break;
        }
        case EventKind::SellReserve: {
            const std::size_t buyer = party();
            const Money book = w.entity(self)[A::StrategicReserve];
            b.credit(self, A::StrategicReserve, book);
            b.debit(self, A::CashUSD, ev.amount);
            if (ev.amount >= book)
                b.credit(self, A::RetainedEarnings, ev.amount - book);
            else
                b.debit(self, A::RetainedEarnings, book - ev.amount);
            b.grow(buyer, A::CashUSD, A::RetainedEarnings, -ev.amount);
            break;
        }
        case EventKind::RemitCashForEC: {
            detail::require_role(w, self, Role::Subsidiary, "remitter");
            const std::size_t firm = w.find(ev.other);
            detail::require_role(w, firm, Role::CurrencyFirm, "EC issuer");
            b.credit(self, A::CashUSD, ev.cash);
            b.debit(firm, A::CashUSD, ev.cash);
            b.debit(self, A::ECHeld, ev.ec);
            b.credit(firm, A::ECInCirculation, ev.ec);
            if (ev.cash >= ev.ec) {
                // surplus first repays the parent's stake, the rest is a dividend to the parent
                const Money surplus = ev.cash - ev.ec;
                const Money repay = min(surplus, w.entity(self)[A::StockEquity]);
                b.debit(self, A::StockEquity, repay);
                b.credit(firm, A::ECLoanAsset, repay);
                b.debit(self, A::RetainedEarnings, surplus - repay);
                b.credit(firm, A::RetainedEarnings, surplus - repay);
            } else {
                const Money extra = ev.ec - ev.cash;
                b.credit(self, A::StockEquity, extra);
                b.debit(firm, A::ECLoanAsset, extra);
            }
            break;
        }
        case EventKind::BuyECOpenMarket: {
            const std::size_t seller = party();
            b.credit(self, A::CashUSD, ev.amount);
            b.debit(seller, A::CashUSD, ev.amount);
            b.credit(seller, A::ECHeld, ev.amount);
            if (ev.retire) {
                detail::require_role(w, self, Role::CurrencyFirm, "retiring buyer");
                b.debit(self, A::ECInCirculation, ev.amount);
            } else {
                b.debit(self, A::ECHeld, ev.amount);
            }
            break;
        }
        case EventKind::Dividend:
        case EventKind::Sequester: {
            const std::size_t payee = party();
            b.grow(self, A::CashUSD, A::RetainedEarnings, -ev.amount);
            b.grow(payee, A::CashUSD, A::RetainedEarnings, ev.amount);
            break;
        }
        case EventKind::Revalue:
            if (!is_asset(ev.account) || ev.account == A::CashUSD || ev.account == A::ECHeld ||
                ev.account == A::ECLoanAsset)
                throw DomainError("ledger: only reserve, capital, IP and goodwill accounts can be revalued");
            b.grow(self, ev.account, A::RetainedEarnings, ev.delta);
            break;
    }
    return j;
}

/// Applies one event in place and records operating flows.
inline void post_in_place(World& w, const ScenarioEvent& ev) {
    w.apply(expand(w, ev));
    const std::size_t self = w.find(ev.entity);
    switch (ev.kind) {
        case EventKind::Operate:
            w.flows(self).ec_spent += ev.amount;
            if (ev.disposition == Disposition::Sale) w.flows(self).sales += ev.market_value;
            break;
        case EventKind::SpendOpex:
            if (ev.currency == Currency::EC) w.flows(self).ec_spent += ev.amount;
            break;
        case EventKind::SellReserve:
            w.flows(self).sales += ev.amount;
            break;
        default:
            break;
    }
}

inline World post(World w, const ScenarioEvent& ev) {
    post_in_place(w, ev);
    return w;
}

}  // namespace ecsim::ledger
