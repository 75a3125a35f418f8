#pragma once

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecsim/error.hpp"
#include "ecsim/ledger/events.hpp"
#include "ecsim/ledger/scenario.hpp"

namespace ecsim::ledger {

namespace detail {

enum class Field { Money, SignedMoney, Name, Other, Currency, Capitalize, Disposition, Account, Flag };

struct FieldSpec {
    const char* key;
    Field type;
    bool required;
};

inline std::vector<FieldSpec> schema(EventKind k) {
    using F = Field;
    switch (k) {
        case EventKind::SeedEquity:
        case EventKind::StockIssue:
            return {{"cash", F::Money, true}, {"intangible", F::Money, false}, {"counterparty", F::Name, false}};
        case EventKind::SpendOpex:
            return {{"amount", F::Money, true},
                    {"currency", F::Currency, false},
                    {"capitalize", F::Capitalize, false},
                    {"counterparty", F::Name, false}};
        case EventKind::IssueEC: return {{"amount", F::Money, true}};
        case EventKind::SellECForCash:
        case EventKind::Dividend:
        case EventKind::Sequester: return {{"amount", F::Money, true}, {"counterparty", F::Name, false}};
        case EventKind::AcquireCompany:
            return {{"target", F::Other, true},      {"ec", F::Money, false},
                    {"cash", F::Money, false},       {"debt", F::Money, false},
                    {"tangible_book", F::Money, false}, {"counterparty", F::Name, false}};
        case EventKind::PayDebt:
            return {{"debtor", F::Other, true}, {"amount", F::Money, true}, {"counterparty", F::Name, false}};
        case EventKind::InvestECInSubsidiary: return {{"subsidiary", F::Other, true}, {"amount", F::Money, true}};
        case EventKind::Operate:
            return {{"ec_cost", F::Money, true},
                    {"market_value", F::Money, true},
                    {"disposition", F::Disposition, true},
                    {"counterparty", F::Name, false}};
        case EventKind::SellReserve: return {{"price", F::Money, true}, {"counterparty", F::Name, false}};
        case EventKind::RemitCashForEC:
            return {{"firm", F::Other, true}, {"cash", F::Money, false}, {"ec", F::Money, false}};
        case EventKind::BuyECOpenMarket:
            return {{"amount", F::Money, true}, {"counterparty", F::Name, false}, {"retire", F::Flag, false}};
        case EventKind::Revalue: return {{"account", F::Account, true}, {"delta", F::SignedMoney, true}};
    }
    return {};
}

inline Money* money_slot(ScenarioEvent& ev, std::string_view key) {
    if (key == "amount" || key == "ec_cost" || key == "price") return &ev.amount;
    if (key == "cash") return &ev.cash;
    if (key == "ec") return &ev.ec;
    if (key == "intangible") return &ev.intangible;
    if (key == "debt") return &ev.debt;
    if (key == "market_value") return &ev.market_value;
    if (key == "delta") return &ev.delta;
    return nullptr;
}

inline const Money* money_slot(const ScenarioEvent& ev, std::string_view key) {
    return money_slot(const_cast<ScenarioEvent&>(ev), key);
}

template <class E>
std::string enum_text(E v, std::initializer_list<std::pair<E, const char*>> table) {
    for (auto& [e, s] : table)
        if (e == v) return s;
    return "?";
}

template <class E>
E parse_enum(const nlohmann::json& j, const std::string& where, std::initializer_list<std::pair<E, const char*>> table) {
    if (j.is_string())
        for (auto& [e, s] : table)
            if (j.get<std::string>() == s) return e;
    std::string allowed;
    for (auto& [e, s] : table) allowed += std::string(allowed.empty() ? "" : ", ") + s;
    throw ParseError(where + ": expected one of " + allowed);
}

inline const std::initializer_list<std::pair<Currency, const char*>> kCurrencies{{Currency::USD, "USD"},
                                                                                  {Currency::EC, "EC"}};
inline const std::initializer_list<std::pair<Capitalize, const char*>> kCapitalize{
    {Capitalize::None, "none"}, {Capitalize::Tangible, "tangible"}, {Capitalize::IP, "ip"}};
inline const std::initializer_list<std::pair<Disposition, const char*>> kDispositions{{Disposition::Reserve, "reserve"},
                                                                                       {Disposition::Sale, "sale"}};

inline Money parse_money(const nlohmann::json& j, const std::string& where, bool allow_negative) {
    if (!j.is_number_integer()) throw ParseError(where + ": expected an integer amount in millions");
    const auto v = j.get<std::int64_t>();
    if (v < 0 && !allow_negative) throw ParseError(where + ": amount must be non-negative");
    return Money(v);
}

inline std::string parse_name(const nlohmann::json& j, const std::string& where) {
    if (!j.is_string() || j.get<std::string>().empty()) throw ParseError(where + ": expected a non-empty entity name");
    return j.get<std::string>();
}

inline double parse_time(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number() || !std::isfinite(j.get<double>())) throw ParseError(where + ": expected a finite number");
    return j.get<double>();
}

inline ScenarioEvent parse_event(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    ScenarioEvent ev;
    if (!j.contains("kind")) throw ParseError(where + ".kind: missing");
    const auto kind = j["kind"].is_string() ? parse_event_kind(j["kind"].get<std::string>()) : std::nullopt;
    if (!kind) throw ParseError(where + ".kind: unknown event kind");
    ev.kind = *kind;
    if (!j.contains("time")) throw ParseError(where + ".time: missing");
    ev.time = parse_time(j["time"], where + ".time");
    if (!j.contains("entity")) throw ParseError(where + ".entity: missing");
    ev.entity = parse_name(j["entity"], where + ".entity");

    const auto spec = schema(ev.kind);
    std::set<std::string> known{"kind", "time", "entity"};
    for (const auto& f : spec) {
        known.insert(f.key);
        const std::string at = where + "." + f.key;
        if (!j.contains(f.key)) {
            if (f.required) throw ParseError(at + ": missing (required for " + std::string(name(ev.kind)) + ")");
            continue;
        }
        const auto& v = j[f.key];
        switch (f.type) {
            case Field::Money:
                if (std::string_view(f.key) == "tangible_book")
                    ev.tangible_book = parse_money(v, at, false);
                else
                    *money_slot(ev, f.key) = parse_money(v, at, false);
                break;
            case Field::SignedMoney: *money_slot(ev, f.key) = parse_money(v, at, true); break;
            case Field::Name: ev.counterparty = parse_name(v, at); break;
            case Field::Other: ev.other = parse_name(v, at); break;
            case Field::Currency: ev.currency = parse_enum(v, at, kCurrencies); break;
            case Field::Capitalize: ev.capitalize = parse_enum(v, at, kCapitalize); break;
            case Field::Disposition: ev.disposition = parse_enum(v, at, kDispositions); break;
            case Field::Account: {
                const auto a = v.is_string() ? parse_account(v.get<std::string>()) : std::nullopt;
                if (!a) throw ParseError(at + ": unknown account class");
                ev.account = *a;
                break;
            }
            case Field::Flag:
                if (!v.is_boolean()) throw ParseError(at + ": expected true or false");
                ev.retire = v.get<bool>();
                break;
        }
    }
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ParseError(where + "." + it.key() + ": not a field of " + std::string(name(ev.kind)));
    return ev;
}

inline nlohmann::ordered_json event_json(const ScenarioEvent& ev) {
    nlohmann::ordered_json j;
    j["time"] = ev.time;
    j["kind"] = std::string(name(ev.kind));
    j["entity"] = ev.entity;
    for (const auto& f : schema(ev.kind)) {
        switch (f.type) {
            case Field::Money:
                if (std::string_view(f.key) == "tangible_book") {
                    if (ev.tangible_book) j[f.key] = ev.tangible_book->millions();
                } else if (f.required || *money_slot(ev, f.key) != Money(0)) {
                    j[f.key] = money_slot(ev, f.key)->millions();
                }
                break;
            case Field::SignedMoney: j[f.key] = money_slot(ev, f.key)->millions(); break;
            case Field::Name:
                if (!ev.counterparty.empty()) j[f.key] = ev.counterparty;
                break;
            case Field::Other: j[f.key] = ev.other; break;
            case Field::Currency:
                if (ev.currency != Currency::USD) j[f.key] = enum_text(ev.currency, kCurrencies);
                break;
            case Field::Capitalize:
                if (ev.capitalize != Capitalize::None) j[f.key] = enum_text(ev.capitalize, kCapitalize);
                break;
            case Field::Disposition: j[f.key] = enum_text(ev.disposition, kDispositions); break;
            case Field::Account: j[f.key] = std::string(name(ev.account)); break;
            case Field::Flag:
                if (ev.retire) j[f.key] = true;
                break;
        }
    }
    return j;
}

inline std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("scenario: syntax error at " + detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    if (!j.is_object()) throw ParseError("scenario: top level must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const std::set<std::string> top{"name", "entities", "checkpoints", "cap_table", "events"};
        if (!top.count(it.key())) throw ParseError("scenario." + it.key() + ": unknown field");
    }
    Scenario sc;
    if (j.contains("name")) sc.name = detail::parse_name(j["name"], "scenario.name");
    const auto array = [&](const char* key) -> const nlohmann::json& {
        static const nlohmann::json empty = nlohmann::json::array();
        if (!j.contains(key)) return empty;
        if (!j[key].is_array()) throw ParseError(std::string("scenario.") + key + ": expected an array");
        return j[key];
    };
    std::size_t i = 0;
    for (const auto& e : array("entities")) {
        const std::string at = "entities[" + std::to_string(i++) + "]";
        if (!e.is_object() || !e.contains("name") || !e.contains("role"))
            throw ParseError(at + ": expected {\"name\", \"role\"}");
        const auto role = e["role"].is_string() ? parse_role(e["role"].get<std::string>()) : std::nullopt;
        if (!role) throw ParseError(at + ".role: expected CurrencyFirm, Subsidiary or External");
        sc.entities.push_back({detail::parse_name(e["name"], at + ".name"), *role});
    }
    i = 0;
    for (const auto& c : array("checkpoints")) sc.checkpoints.push_back(detail::parse_time(c, "checkpoints[" + std::to_string(i++) + "]"));
    i = 0;
    for (const auto& r : array("cap_table")) {
        const std::string at = "cap_table[" + std::to_string(i++) + "]";
        if (!r.is_object() || !r.contains("name") || !r.contains("invested") || !r.contains("post_money"))
            throw ParseError(at + ": expected {\"name\", \"invested\", \"post_money\"}");
        sc.cap_table.push_back({detail::parse_name(r["name"], at + ".name"),
                                detail::parse_money(r["invested"], at + ".invested", false),
                                detail::parse_money(r["post_money"], at + ".post_money", false)});
    }
    i = 0;
    for (const auto& e : array("events")) sc.events.push_back(detail::parse_event(e, "events[" + std::to_string(i++) + "]"));
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("scenario: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return parse_scenario(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline nlohmann::ordered_json to_json(const Scenario& sc) {
    nlohmann::ordered_json j;
    j["name"] = sc.name;
    j["entities"] = nlohmann::ordered_json::array();
    for (const auto& e : sc.entities) j["entities"].push_back({{"name", e.name}, {"role", std::string(name(e.role))}});
    j["checkpoints"] = sc.checkpoints;
    j["cap_table"] = nlohmann::ordered_json::array();
    for (const auto& r : sc.cap_table)
        j["cap_table"].push_back(
            {{"name", r.name}, {"invested", r.invested.millions()}, {"post_money", r.post_money.millions()}});
    j["events"] = nlohmann::ordered_json::array();
    for (const auto& ev : sc.events) j["events"].push_back(detail::event_json(ev));
    return j;
}

}  // namespace ecsim::ledger
