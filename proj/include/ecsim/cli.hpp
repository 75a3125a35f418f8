#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecsim/control.hpp"
#include "ecsim/dynamics.hpp"
#include "ecsim/error.hpp"
#include "ecsim/io/csv.hpp"
#include "ecsim/ledger.hpp"
#include "ecsim/risk.hpp"
#include "ecsim/valuation.hpp"

namespace ecsim::cli {

enum class Command { RunScenario, DemoKapitza, DemoDissipationSweep, DemoForecast, DemoArbitrage, Valuation };
enum class Format { Csv, Json };

inline constexpr const char* kOutDirEnv = "ECSIM_OUT_DIR";
inline constexpr std::uint64_t kDefaultSeed = 42;

struct RunConfig {
    Command command = Command::RunScenario;
    std::string input;    // scenario name or path; valuation input file (optional)
    std::string out_dir;  // empty: $ECSIM_OUT_DIR, else "out"
    std::uint64_t seed = kDefaultSeed;
    Format format = Format::Csv;

    // demo-kapitza
    double amplitude = 70.0;
    // demo-forecast
    std::string forecast_mode = "both";
    std::size_t realizations = 20;
    double horizon = 20.0;
    // valuation; unset values fall back to defaults and are reported as such
    std::optional<double> m_e, S_0, T_I, nu, T_0, mu;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Parse: return 2;
        case ErrorKind::Domain: return 3;
        case ErrorKind::Numerical: return 4;
    }
    return 1;
}

inline std::filesystem::path resolve_out_dir(const RunConfig& c) {
    if (!c.out_dir.empty()) return c.out_dir;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
    return "out";
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot write " + p.string());
    return f;
}

inline void finish(std::ofstream& f, const std::filesystem::path& p) {
    f.flush();
    if (!f) throw IoError("write failed for " + p.string());
}

// --- plot data --------------------------------------------------------------------

/// Columns t,total_value,ec_supply,liquid in millions.
inline void emit_valuation_plotdata(const std::vector<ledger::MetricsSnapshot>& snaps, const std::filesystem::path& path) {
    if (snaps.empty()) throw DomainError("plot data: empty valuation result");
    auto f = open_out(path);
    io::CsvWriter w(f, {"t", "total_value", "ec_supply", "liquid"});
    for (const auto& s : snaps)
        w.cells({s.t, static_cast<long long>(s.total_value.millions()), static_cast<long long>(s.ec_supply.millions()),
                 static_cast<long long>(s.liquid_reserves.millions())});
    finish(f, path);
}

/// Columns t,q_uncontrolled,q_controlled on the shared time grid of both runs.
inline void emit_control_plotdata(const std::vector<dynamics::PhaseState>& uncontrolled,
                                  const std::vector<dynamics::PhaseState>& controlled, const std::filesystem::path& path) {
    if (uncontrolled.empty() || controlled.empty()) throw DomainError("plot data: empty control result");
    if (uncontrolled.size() != controlled.size()) throw ShapeError("plot data: control runs have different lengths");
    auto f = open_out(path);
    io::CsvWriter w(f, {"t", "q_uncontrolled", "q_controlled"});
    for (std::size_t i = 0; i < controlled.size(); ++i) w.row({controlled[i].t, uncontrolled[i].q, controlled[i].q});
    finish(f, path);
}

// --- commands ---------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

inline void write_json(const nlohmann::ordered_json& j, const std::filesystem::path& path) {
    auto f = open_out(path);
    f << j.dump(2) << '\n';
    finish(f, path);
}

inline nlohmann::ordered_json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline int run_scenario_cmd(const RunConfig& c, const std::filesystem::path& out, std::ostream& log) {
    if (c.input.empty()) throw ParseError("run-scenario: needs a scenario name or file");
    auto builtin = ledger::builtin_scenario(c.input);
    const ledger::Scenario sc = builtin ? *builtin : ledger::load_scenario(c.input);
    const auto snaps = ledger::run_scenario(sc);

    if (c.format == Format::Csv) {
        auto f = open_out(out / "metrics.csv");
        ledger::write_metrics_csv(f, snaps);
        finish(f, out / "metrics.csv");
    } else {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& s : snaps)
            j.push_back({{"t", s.t},
                         {"ec_supply", s.ec_supply.millions()},
                         {"liquid_reserves", s.liquid_reserves.millions()},
                         {"capital_reserves", s.capital_reserves.millions()},
                         {"total_value", s.total_value.millions()},
                         {"liquid_ratio", opt_json(s.liquid_ratio)},
                         {"total_ratio", opt_json(s.total_ratio)},
                         {"m_e_observed", opt_json(s.m_e_observed)},
                         {"S0_observed", opt_json(s.S0_observed)}});
        write_json(j, out / "metrics.json");
    }
    {
        auto f = open_out(out / "balance_sheets.txt");
        for (const auto& s : snaps) {
            ledger::write_balance_sheets(f, s.world, s.t);
            f << '\n';
        }
        finish(f, out / "balance_sheets.txt");
    }
    emit_valuation_plotdata(snaps, out / "plot_valuation.csv");

    log << "scenario " << (sc.name.empty() ? c.input : sc.name) << ": " << sc.events.size() << " events, "
        << snaps.size() << " checkpoints (millions)\n";
    log << "     t    ec_supply       liquid      capital        value  liquid%  total%\n";
    for (const auto& s : snaps) {
        log << std::setw(6) << io::format_number(s.t) << std::setw(13) << s.ec_supply.str() << std::setw(13)
            << s.liquid_reserves.str() << std::setw(13) << s.capital_reserves.str() << std::setw(13)
            << s.total_value.str() << std::setw(9) << (s.liquid_ratio ? fmt(100 * *s.liquid_ratio, 1) : "-")
            << std::setw(8) << (s.total_ratio ? fmt(100 * *s.total_ratio, 1) : "-") << "\n";
    }
    if (builtin && c.input == "new-energy") {
        const auto g = ledger::growth_fit(ledger::window(snaps, ledger::kGrowthFrom, ledger::kGrowthTo), sc.cap_table);
        log << "growth rate (t=" << io::format_number(ledger::kGrowthFrom) << ".." << io::format_number(ledger::kGrowthTo)
            << "): " << fmt(g.rate) << " /yr\n";
        for (const auto& [name, m] : g.round_multiples) log << "  " << name << " multiple: " << fmt(m, 1) << "x\n";
        if (snaps.back().m_e_observed) log << "steady-state m_e observed: " << fmt(*snaps.back().m_e_observed) << "\n";
        const auto t = ledger::target_energy_compare();
        log << "NM Hydrocarbons vs Target Energy: activity " << t.nm_activity.str() << " vs " << t.target_activity.str()
            << ", profit " << t.nm_profit.str() << " vs " << t.target_profit.str() << ", savings turnover "
            << fmt(t.nm_turnover_years, 1) << " yr vs " << fmt(t.target_turnover_days, 2) << " days\n";
    }
    return 0;
}

inline int kapitza_cmd(const RunConfig& c, const std::filesystem::path& out, std::ostream& log) {
    const auto model = dynamics::pendulum();
    const auto controlled_policy = control::kapitza_policy(c.amplitude);
    const auto free_policy = control::kapitza_policy(0.0);
    const dynamics::PhaseState start{std::numbers::pi + 0.01, 0.0, 0.0};
    const double duration = 20.0 * numeric::kTwoPi;
    control::StabilizeOptions opt;
    opt.dt = numeric::kTwoPi / controlled_policy.omega_sp / 100.0;
    opt.record_stride = 10;
    const auto ctl = control::stabilize_run(model, controlled_policy, start, duration, c.seed, opt);
    const auto unc = control::stabilize_run(model, free_policy, start, duration, c.seed, opt);
    emit_control_plotdata(unc.trajectory, ctl.trajectory, out / "plot_control.csv");

    const double threshold = control::kapitza_threshold(controlled_policy.omega_sp, controlled_policy.omega_0);
    if (c.format == Format::Json) {
        write_json({{"amplitude", c.amplitude},
                    {"seed", c.seed},
                    {"verdict", control::to_string(ctl.verdict)},
                    {"uncontrolled_verdict", control::to_string(unc.verdict)},
                    {"x_point", ctl.x_point},
                    {"bound", ctl.bound},
                    {"final_half_max_distance", ctl.final_half_max_distance},
                    {"uncontrolled_exit_time", unc.first_exit_time},
                    {"averaged_threshold", threshold}},
                   out / "kapitza.json");
    } else {
        auto f = open_out(out / "kapitza.csv");
        io::CsvWriter w(f, {"amplitude", "seed", "verdict", "final_half_max_distance", "bound", "uncontrolled_exit_time"});
        w.cells({c.amplitude, static_cast<long long>(c.seed), std::string(control::to_string(ctl.verdict)),
                 ctl.final_half_max_distance, ctl.bound, unc.first_exit_time});
        finish(f, out / "kapitza.csv");
    }
    log << "kapitza: amplitude " << io::format_number(c.amplitude) << ", drive " << io::format_number(controlled_policy.omega_sp)
        << " rad/s, seed " << c.seed << "\n";
    log << "  uncontrolled: " << control::to_string(unc.verdict);
    if (unc.first_exit_time >= 0.0) log << " (left the x-point at t = " << fmt(unc.first_exit_time, 2) << ")";
    log << "\n  controlled:   " << control::to_string(ctl.verdict) << " (max distance in final half "
        << fmt(ctl.final_half_max_distance) << ", bound " << fmt(ctl.bound) << ")\n";
    log << "  averaged-dynamics threshold: " << fmt(threshold, 2) << "\n";
    log << "verdict: " << control::to_string(ctl.verdict) << "\n";
    return 0;
}

inline int dissipation_cmd(const RunConfig& c, const std::filesystem::path& out, std::ostream& log) {
    const auto model = dynamics::double_well_action();
    std::vector<double> nus;
    for (int i = 0; i <= 40; ++i) nus.push_back(0.05 * i);
    const auto rows = control::dissipation_sweep(model, nus);
    const double nu_cr = control::critical_nu(model, 0.0, 3.0);
    if (c.format == Format::Json) {
        nlohmann::ordered_json j;
        j["nu_critical"] = nu_cr;
        j["sweep"] = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json e = nlohmann::ordered_json::array();
            for (const auto& q : r.equilibria)
                e.push_back({{"P_star", q.P_star}, {"E_star", q.E_star}, {"stability", dynamics::to_string(q.stability)}});
            j["sweep"].push_back({{"nu", r.nu}, {"equilibria", e}});
        }
        write_json(j, out / "dissipation_sweep.json");
    } else {
        auto f = open_out(out / "dissipation_sweep.csv");
        control::write_sweep_csv(f, rows);
        finish(f, out / "dissipation_sweep.csv");
    }
    log << "dissipation sweep on " << model.name << ": " << rows.size() << " values of nu in [0, 2]\n";
    log << "  equilibria at nu=0: " << rows.front().equilibria.size() << ", at nu=2: " << rows.back().equilibria.size()
        << "\n  critical nu: " << fmt(nu_cr) << "\n";
    return 0;
}

inline int forecast_cmd(const RunConfig& c, const std::filesystem::path& out, std::ostream& log) {
    if (c.forecast_mode != "both" && c.forecast_mode != "conservative" && c.forecast_mode != "diffusive")
        throw ParseError("demo-forecast: --mode must be conservative, diffusive or both");
    const auto emit = [&](const std::vector<risk::Realization>& set, const std::string& stem) {
        if (c.format == Format::Json) {
            nlohmann::ordered_json j = nlohmann::ordered_json::array();
            for (const auto& r : set) j.push_back({{"realization_id", r.id}, {"t", r.t}, {"value", r.value}});
            write_json(j, out / (stem + ".json"));
        } else {
            auto f = open_out(out / (stem + ".csv"));
            risk::write_realizations_csv(f, set);
            finish(f, out / (stem + ".csv"));
        }
    };
    log << "forecast: " << c.realizations << " realizations, horizon " << io::format_number(c.horizon) << ", seed "
        << c.seed << "\n";
    if (c.forecast_mode != "diffusive") {
        risk::ForecastRequest req;
        req.mode = risk::ForecastMode::Conservative;
        req.model = dynamics::pendulum();
        req.start = {1.0, 0.0, 0.0};
        req.horizon = c.horizon;
        req.n_realizations = c.realizations;
        req.seed = c.seed;
        const auto set = risk::forecast(req);
        emit(set, "forecast_conservative");
        double lo = 0.0, hi = 0.0;
        for (const auto& r : set)
            for (double v : r.value) lo = std::min(lo, v), hi = std::max(hi, v);
        log << "  conservative (pendulum, amplitude 1): values within [" << fmt(lo) << ", " << fmt(hi) << "]\n";
    }
    if (c.forecast_mode != "conservative") {
        risk::ForecastRequest req;
        req.mode = risk::ForecastMode::Diffusive;
        req.diffusion = risk::diffusion_scalings(1.0, std::sqrt(10.0), std::sqrt(10.0));
        req.H = [](double J) { return J; };
        req.start = {5.0, 0.0, 0.0};
        req.horizon = c.horizon;
        req.n_realizations = c.realizations;
        req.seed = c.seed;
        const auto set = risk::forecast(req);
        emit(set, "forecast_diffusive");
        std::vector<double> last;
        for (const auto& r : set) last.push_back(r.value.back());
        if (!last.empty())
            log << "  diffusive (H = J from J = 5): terminal mean " << fmt(stats::mean(last)) << ", variance "
                << fmt(stats::variance(last)) << "\n";
    }
    return 0;
}

inline int arbitrage_cmd(const RunConfig& c, const std::filesystem::path& out, std::ostream& log) {
    control::ArbitrageConfig cfg;
    cfg.y0 = 2.0;
    cfg.noise = 1.0;
    cfg.impact = 0.2;
    cfg.seed = c.seed;
    const auto r = control::arbitrage_run(cfg);
    if (c.format == Format::Json) {
        nlohmann::ordered_json trades = nlohmann::ordered_json::array();
        for (const auto& t : r.trades)
            trades.push_back({{"t", t.t}, {"side", t.side == control::Side::Buy ? "buy" : "sell"}, {"price", t.price}, {"cash", t.cash}});
        write_json({{"seed", c.seed},
                    {"variance_controlled", r.variance_controlled},
                    {"variance_uncontrolled", r.variance_uncontrolled},
                    {"completed_cycles", r.completed_cycles},
                    {"whole_cycle_profit", r.whole_cycle_profit},
                    {"trades", trades}},
                   out / "arbitrage.json");
    } else {
        auto f = open_out(out / "trades.csv");
        control::write_trades_csv(f, r.trades);
        finish(f, out / "trades.csv");
    }
    {
        auto f = open_out(out / "plot_arbitrage.csv");
        io::CsvWriter w(f, {"t", "price_uncontrolled", "price_controlled", "cash"});
        for (std::size_t i = 0; i < r.t.size(); ++i) w.row({r.t[i], r.price_uncontrolled[i], r.price_controlled[i], r.cash[i]});
        finish(f, out / "plot_arbitrage.csv");
    }
    log << "arbitrage: " << r.trades.size() << " trades, " << r.completed_cycles << " whole cycles, seed " << c.seed << "\n";
    log << "  price variance: controlled " << fmt(r.variance_controlled) << " vs uncontrolled "
        << fmt(r.variance_uncontrolled) << "\n  whole-cycle profit: " << fmt(r.whole_cycle_profit) << "\n";
    return 0;
}

struct ValuationInput {
    valuation::CurvePair curves;
    valuation::CashflowProfile profile;
};

inline std::vector<valuation::Segment> parse_segments(const nlohmann::json& j, const std::string& where) {
    std::vector<valuation::Segment> out;
    if (!j.is_array()) throw ParseError(where + ": expected an array of [t0, t1, rate]");
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& s = j[i];
        if (!s.is_array() || s.size() != 3 || !s[0].is_number() || !s[2].is_number() || !(s[1].is_number() || s[1] == "inf"))
            throw ParseError(where + "[" + std::to_string(i) + "]: expected [t0, t1, rate]");
        const double t1 = s[1].is_number() ? s[1].get<double>() : std::numeric_limits<double>::infinity();
        out.push_back({s[0].get<double>(), t1, s[2].get<double>()});
    }
    return out;
}

/// Built-in curves R = 10Q - Q^2, E = Q^2 on [0, 10]; profile of 10/yr revenue at a
/// 20% margin over ten years after a 50 investment in the first year.
inline ValuationInput default_valuation_input() {
    ValuationInput in{valuation::sample_curves([](double Q) { return 10.0 * Q - Q * Q; }, [](double Q) { return Q * Q; }, 0.0, 10.0), {}};
    in.profile.R = {{0.0, 10.0, 10.0}};
    in.profile.E = {{0.0, 10.0, 8.0}};
    in.profile.I = {{0.0, 1.0, 50.0}};
    in.profile.nu = 0.1;
    in.profile.horizon = 10.0;
    return in;
}

inline ValuationInput load_valuation_input(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("valuation: cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": syntax error at byte " + std::to_string(e.byte));
    }
    ValuationInput in = default_valuation_input();
    if (j.contains("curves")) {
        const auto& c = j["curves"];
        for (const char* k : {"lo", "hi", "R", "E"})
            if (!c.contains(k)) throw ParseError(path + ": curves." + k + " missing");
        if (!c["lo"].is_number() || !c["hi"].is_number()) throw ParseError(path + ": curves.lo and curves.hi must be numbers");
        const auto samples = [&](const char* k) {
            if (!c[k].is_array()) throw ParseError(path + ": curves." + k + " must be an array of samples");
            std::vector<double> v;
            for (const auto& x : c[k]) {
                if (!x.is_number()) throw ParseError(path + ": curves." + k + " must contain numbers");
                v.push_back(x.get<double>());
            }
            return v;
        };
        const double lo = c["lo"].get<double>(), hi = c["hi"].get<double>();
        in.curves = {CubicSpline(lo, hi, samples("R")), CubicSpline(lo, hi, samples("E"))};
    }
    if (j.contains("profile")) {
        const auto& p = j["profile"];
        if (p.contains("R")) in.profile.R = parse_segments(p["R"], path + ": profile.R");
        if (p.contains("E")) in.profile.E = parse_segments(p["E"], path + ": profile.E");
        if (p.contains("I")) in.profile.I = parse_segments(p["I"], path + ": profile.I");
    }
    return in;
}

inline int valuation_cmd(const RunConfig& c, const std::filesystem::path& out, std::ostream& log) {
    ValuationInput in = c.input.empty() ? default_valuation_input() : load_valuation_input(c.input);
    valuation::Provenance prov;
    const auto pick = [&](const char* key, const std::optional<double>& v, double fallback) {
        prov[key] = v ? "cli" : "default";
        return v.value_or(fallback);
    };
    const valuation::KtParams kp{pick("m_e", c.m_e, 3.5), pick("S_0", c.S_0, 2.0), pick("T_I", c.T_I, 1.0)};
    in.profile.nu = pick("nu", c.nu, in.profile.nu);
    in.profile.horizon = pick("T_0", c.T_0, in.profile.horizon);
    in.profile.T_I = kp.T_I;
    const auto kt = valuation::kuhn_tucker_optimize(in.curves, kp, c.mu);
    const auto cmp = valuation::constraint_compare(in.profile, kp);

    auto j = valuation::to_json(cmp, kp, in.profile, prov);
    j["kuhn_tucker"] = {{"ratio", kt.ratio},
                        {"slope_factor", kt.slope_factor},
                        {"Q_star", kt.point.Q_star},
                        {"lambda_star", std::isinf(kt.point.lambda_star) ? nlohmann::ordered_json("inf")
                                                                          : nlohmann::ordered_json(kt.point.lambda_star)},
                        {"mu", kt.point.mu},
                        {"R_prime", kt.point.R_prime},
                        {"E_prime", kt.point.E_prime},
                        {"mu_max", kt.mu_max},
                        {"mu_min", opt_json(kt.mu_min)},
                        {"gap_closed_form", kt.gap_closed_form},
                        {"slope_gap_measured", opt_json(kt.slope_gap_measured)},
                        {"mu_gap_measured", opt_json(kt.mu_gap_measured)}};
    j["curves_source"] = c.input.empty() ? "default" : "input";
    if (c.format == Format::Json) {
        write_json(j, out / "valuation.json");
    } else {
        auto f = open_out(out / "valuation.csv");
        io::CsvWriter w(f, {"quantity", "value"});
        for (const auto& [k, v] : j["kuhn_tucker"].items())
            if (v.is_number()) w.cells({"kuhn_tucker." + k, v.get<double>()});
        for (const char* k : {"NPV_constraint_value", "DeltaM_constraint_value", "DCF", "R_mSR", "headroom_ratio"})
            w.cells({std::string(k), j[k].get<double>()});
        finish(f, out / "valuation.csv");
    }
    const double k = kt.ratio;
    log << "valuation: m_e = " << io::format_number(kp.m_e) << ", S_0 = " << io::format_number(kp.S_0)
        << " yr, T_I = " << io::format_number(kp.T_I) << " yr\n";
    log << "  ratio m_e*S_0/T_I = " << io::format_number(k) << "\n";
    log << "  slope relation at mu_max: R' = E'/" << io::format_number(k + 1.0) << " (R'/E' = " << fmt(kt.slope_factor, 6)
        << ")\n";
    log << "  gap 1/(ratio+1) = " << fmt(kt.gap_closed_form, 6);
    if (kt.mu_gap_measured) log << ", measured level gap on these curves = " << fmt(*kt.mu_gap_measured, 6);
    log << "\n  Q* = " << fmt(kt.point.Q_star, 6) << ", mu_max = " << fmt(kt.mu_max, 6) << "\n";
    log << "  NPV constraint " << fmt(cmp.NPV_constraint_value, 3) << ", Delta M constraint "
        << fmt(cmp.DeltaM_constraint_value, 3) << ", headroom ratio " << fmt(cmp.headroom_ratio, 3) << "\n";
    return 0;
}

}  // namespace detail

/// Executes one command, writing files under the output directory and a summary to `log`.
/// Errors are reported on `err` and mapped to exit codes 2 (parse), 3 (domain),
/// 4 (numerical) and 1 (I/O and anything else).
inline int run(const RunConfig& c, std::ostream& log, std::ostream& err) {
    try {
        const auto out = resolve_out_dir(c);
        std::error_code ec;
        std::filesystem::create_directories(out, ec);
        if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
        switch (c.command) {
            case Command::RunScenario: return detail::run_scenario_cmd(c, out, log);
            case Command::DemoKapitza: return detail::kapitza_cmd(c, out, log);
            case Command::DemoDissipationSweep: return detail::dissipation_cmd(c, out, log);
            case Command::DemoForecast: return detail::forecast_cmd(c, out, log);
            case Command::DemoArbitrage: return detail::arbitrage_cmd(c, out, log);
            case Command::Valuation: return detail::valuation_cmd(c, out, log);
        }
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace ecsim::cli
