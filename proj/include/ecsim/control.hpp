#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ecsim/dynamics.hpp"
#include "ecsim/error.hpp"
#include "ecsim/io/csv.hpp"
#include "ecsim/numeric.hpp"
#include "ecsim/random.hpp"

namespace ecsim::control {

using dynamics::HamiltonianModel;
using dynamics::PhaseState;

enum class PolicyKind { RewardShaping, Feedback, Ponderomotive, None };

struct ControlPolicy {
    PolicyKind kind = PolicyKind::None;
    double omega_sf = 0.0;
    double epsilon_P = 0.0;
    double f_0 = 0.0;
    double omega_sp = 0.0;
    double omega_0 = 1.0;
    double J_0 = 1.0;
    std::optional<double> target;
};

/// Checks the operating band of each policy kind. A ponderomotive policy with
/// f_0 = 0 is a drive that has been switched off and skips the amplitude band.
inline void validate(const ControlPolicy& p) {
    if (!(p.omega_0 > 0.0) || !(p.J_0 > 0.0)) throw ConfigurationError("policy: omega_0 and J_0 must be positive");
    if (p.epsilon_P < 0.0) throw ConfigurationError("policy: epsilon_P must be non-negative");
    switch (p.kind) {
        case PolicyKind::Feedback:
            if (!p.target) throw ConfigurationError("feedback policy: target P* is not set");
            if (p.omega_sf < p.omega_0) throw ConfigurationError("feedback policy: omega_sf must be at least omega_0");
            break;
        case PolicyKind::Ponderomotive:
            if (p.omega_sp < 10.0 * p.omega_0)
                throw ConfigurationError("ponderomotive policy: omega_sp must be at least 10 omega_0");
            if (p.f_0 < 0.0) throw ConfigurationError("ponderomotive policy: f_0 must be non-negative");
            if (p.f_0 > 0.0 && (p.f_0 < p.J_0 * p.omega_0 || p.f_0 > 0.3 * p.J_0 * p.omega_sp))
                throw ConfigurationError("ponderomotive policy: f_0 outside [J_0 omega_0, 0.3 J_0 omega_sp]");
            break;
        default:
            break;
    }
}

// --- reward shaping ------------------------------------------------------------

struct RewardMap {
    std::function<double(double)> R;
    double lo = 0.0;
    double hi = 0.0;
};

class ControlForce {
public:
    ControlForce(RewardMap target, RewardMap base) : target_(std::move(target)), base_(std::move(base)) {
        if (target_.lo != base_.lo || target_.hi != base_.hi)
            throw DomainError("control_force_reward: reward maps are defined on different domains");
        if (!(target_.hi > target_.lo)) throw DomainError("control_force_reward: empty domain");
        h_ = 1e-5 * (target_.hi - target_.lo);
    }

    double operator()(double q) const {
        if (q < target_.lo || q > target_.hi) throw DomainError("control force evaluated outside its domain");
        return -numeric::centered_difference(target_.R, q, h_) + numeric::centered_difference(base_.R, q, h_);
    }

    double lo() const { return target_.lo; }
    double hi() const { return target_.hi; }
    double step() const { return h_; }

private:
    RewardMap target_, base_;
    double h_;
};

/// F_c = -grad R_target + grad R_0: added to dynamics in the potential R_0 it
/// reproduces the forces of the potential R_target.
inline ControlForce control_force_reward(RewardMap R_target, RewardMap R_0) {
    return ControlForce(std::move(R_target), std::move(R_0));
}

// --- feedback and ponderomotive forces -------------------------------------------

inline double feedback_force(const ControlPolicy& policy, double P, const std::function<double(double)>& omega_Q) {
    if (policy.kind != PolicyKind::Feedback) throw ConfigurationError("feedback_force: policy is not Feedback");
    if (!policy.target) throw ConfigurationError("feedback_force: target P* is not set");
    return -policy.omega_sf * (P - *policy.target) - policy.epsilon_P * omega_Q(P);
}

inline double kick_window_length(const ControlPolicy& p) { return numeric::kTwoPi / p.omega_0; }

inline std::int64_t kick_window(const ControlPolicy& p, double t) {
    return static_cast<std::int64_t>(std::floor(t / kick_window_length(p)));
}

/// Number of kick windows whose opening instant lies in [t0, t1).
inline std::int64_t kick_count(const ControlPolicy& p, double t0, double t1) {
    if (!(t1 > t0)) return 0;
    const double w = kick_window_length(p);
    return static_cast<std::int64_t>(std::ceil(t1 / w - 1e-12)) - static_cast<std::int64_t>(std::ceil(t0 / w - 1e-12));
}

/// Real cosine drive f_0 cos(omega_sp t).
inline double ponderomotive_drive(const ControlPolicy& p, double t) { return p.f_0 * std::cos(p.omega_sp * t); }

/// Cooling kick: a pulse of rate s_k omega_0 eps_P during the first 1/omega_0 of
/// window k, so each window delivers Delta P = s_k eps_P with s_k = +-1.
inline double kick_rate(const ControlPolicy& p, double t, std::uint64_t seed) {
    if (p.epsilon_P == 0.0) return 0.0;
    const auto k = kick_window(p, t);
    const double into = t - static_cast<double>(k) * kick_window_length(p);
    if (into >= 1.0 / p.omega_0) return 0.0;
    return random::sign_draw(seed, static_cast<std::uint64_t>(k)) * p.omega_0 * p.epsilon_P;
}

inline double ponderomotive_force(const ControlPolicy& p, double t, std::uint64_t seed) {
    if (p.kind != PolicyKind::Ponderomotive) throw ConfigurationError("ponderomotive_force: policy is not Ponderomotive");
    return ponderomotive_drive(p, t) + kick_rate(p, t, seed);
}

// --- stabilization of the inverted pendulum -----------------------------------------

enum class Verdict { Stabilized, NotStabilized };

inline const char* to_string(Verdict v) { return v == Verdict::Stabilized ? "Stabilized" : "NotStabilized"; }

struct StabilizationResult {
    std::vector<PhaseState> trajectory;
    Verdict verdict = Verdict::NotStabilized;
    double x_point = 0.0;
    double bound = 0.0;
    double final_half_max_distance = 0.0;
    double first_exit_time = -1.0;  // first time the distance exceeds 1, or -1
};

struct StabilizeOptions {
    double dt = 0.0;  // 0 picks 1/100 of the fastest period
    std::size_t record_stride = 1;
};

/// Runs the pendulum from `start` under the policy and judges whether it stays
/// near the x-point of its potential landscape.
///
/// The ponderomotive drive moves the pivot, so it enters the equation of motion
/// multiplied by sin q; the cooling kicks act on p directly.
inline StabilizationResult stabilize_run(const HamiltonianModel& model, const ControlPolicy& policy,
                                         const PhaseState& start, double duration, std::uint64_t seed,
                                         const StabilizeOptions& opt = {}) {
    if (model.kind != dynamics::ModelKind::Pendulum)
        throw UnsupportedModelError("stabilize_run: needs a pendulum model");
    if (!(duration > 0.0)) throw DomainError("stabilize_run: duration must be positive");
    validate(policy);
    if (policy.kind != PolicyKind::None && policy.kind != PolicyKind::Ponderomotive)
        throw UnsupportedModelError("stabilize_run: policy kind is not applicable to the pendulum");

    const double omega0 = model.params.empty() ? 1.0 : model.params[0];
    const auto landscape = dynamics::custom_action("pendulum-potential", model.potential, model.dpotential);
    const auto eq = dynamics::find_equilibria(landscape, -std::numbers::pi / 2, 3 * std::numbers::pi / 2, 400);
    const dynamics::Equilibrium* x = nullptr;
    for (const auto& e : eq)
        if (e.stability == dynamics::Stability::Unstable &&
            (!x || std::abs(numeric::angle_difference(start.q, e.P_star)) <
                       std::abs(numeric::angle_difference(start.q, x->P_star))))
            x = &e;
    if (!x) throw DomainError("stabilize_run: model has no unstable equilibrium");
    double half_width = std::numeric_limits<double>::infinity();
    for (const auto& e : eq)
        if (e.stability == dynamics::Stability::Stable)
            half_width = std::min(half_width, std::abs(numeric::angle_difference(e.P_star, x->P_star)));

    StabilizationResult res;
    res.x_point = x->P_star;
    res.bound = 0.5 * half_width;

    double fastest = omega0;
    if (policy.kind == PolicyKind::Ponderomotive) fastest = std::max(fastest, policy.omega_sp);
    const double dt_target = opt.dt > 0.0 ? opt.dt : numeric::kTwoPi / fastest / 100.0;
    const auto n = static_cast<std::size_t>(std::ceil(duration / dt_target));
    const double dt = duration / static_cast<double>(n);

    dynamics::ForceField force;
    if (policy.kind == PolicyKind::Ponderomotive) {
        force = [&policy, seed](double t, double q, double) {
            return -ponderomotive_drive(policy, t) * std::sin(q) + kick_rate(policy, t, seed);
        };
    }

    PhaseState s = start;
    const double t_half = start.t + 0.5 * duration;
    res.trajectory.push_back(s);
    for (std::size_t i = 1; i <= n; ++i) {
        s = dynamics::leapfrog_step(model, s, dt, force);
        if (!dynamics::finite_state(s)) throw IntegrationBlowup(i);
        const double d = std::abs(numeric::angle_difference(s.q, res.x_point));
        if (res.first_exit_time < 0.0 && d > 1.0) res.first_exit_time = s.t - start.t;
        if (s.t >= t_half) res.final_half_max_distance = std::max(res.final_half_max_distance, d);
        if (opt.record_stride && i % opt.record_stride == 0) res.trajectory.push_back(s);
    }
    res.verdict = res.final_half_max_distance < res.bound ? Verdict::Stabilized : Verdict::NotStabilized;
    return res;
}

/// Canonical Kapitza setup: inverted pendulum with natural frequency omega_0,
/// drive at omega_sp, cooling eps_P.
inline ControlPolicy kapitza_policy(double f_0, double omega_sp = 40.0, double omega_0 = 1.0, double J_0 = 8.0,
                                    double epsilon_P = 0.01) {
    ControlPolicy p;
    p.kind = PolicyKind::Ponderomotive;
    p.f_0 = f_0;
    p.omega_sp = omega_sp;
    p.omega_0 = omega_0;
    p.J_0 = J_0;
    p.epsilon_P = epsilon_P;
    return p;
}

/// Averaged-dynamics stability threshold for a pivot drive: f_0 > sqrt(2) omega_sp omega_0.
inline double kapitza_threshold(double omega_sp, double omega_0) { return std::sqrt(2.0) * omega_sp * omega_0; }

struct SweepPoint {
    double amplitude = 0.0;
    double stabilized_fraction = 0.0;
    Verdict verdict = Verdict::NotStabilized;  // majority over seeds
};

inline std::vector<SweepPoint> kapitza_sweep(const std::vector<double>& amplitudes, std::uint64_t seed,
                                             std::size_t n_seeds, double offset = 0.01, double periods = 20.0,
                                             double omega_sp = 40.0) {
    const auto model = dynamics::pendulum();
    std::vector<SweepPoint> out;
    for (std::size_t a = 0; a < amplitudes.size(); ++a) {
        const auto policy = kapitza_policy(amplitudes[a], omega_sp);
        std::size_t ok = 0;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            const std::uint64_t run_seed = random::splitmix64(seed ^ random::splitmix64(s));
            StabilizeOptions opt;
            opt.record_stride = 0;
            const auto r = stabilize_run(model, policy, {std::numbers::pi + offset, 0.0, 0.0},
                                         periods * numeric::kTwoPi, run_seed, opt);
            ok += r.verdict == Verdict::Stabilized;
        }
        const double frac = n_seeds ? static_cast<double>(ok) / static_cast<double>(n_seeds) : 0.0;
        out.push_back({amplitudes[a], frac, frac >= 0.5 ? Verdict::Stabilized : Verdict::NotStabilized});
    }
    return out;
}

/// Smallest swept amplitude from which every later point (after 3-point
/// majority smoothing) is Stabilized; nullopt when the sweep never stabilizes.
inline std::optional<double> sweep_threshold(const std::vector<SweepPoint>& sweep) {
    const std::size_t n = sweep.size();
    std::vector<int> smooth(n);
    for (std::size_t i = 0; i < n; ++i) {
        int votes = 0, count = 0;
        for (std::size_t j = (i ? i - 1 : 0); j <= std::min(n - 1, i + 1); ++j, ++count)
            votes += sweep[j].verdict == Verdict::Stabilized;
        smooth[i] = 2 * votes > count;
    }
    std::optional<double> th;
    for (std::size_t i = n; i-- > 0;) {
        if (!smooth[i]) break;
        th = sweep[i].amplitude;
    }
    return th;
}

/// True when no NotStabilized point follows a Stabilized one after smoothing.
inline bool sweep_monotone(const std::vector<SweepPoint>& sweep) {
    const std::size_t n = sweep.size();
    bool seen = false;
    for (std::size_t i = 0; i < n; ++i) {
        int votes = 0, count = 0;
        for (std::size_t j = (i ? i - 1 : 0); j <= std::min(n - 1, i + 1); ++j, ++count)
            votes += sweep[j].verdict == Verdict::Stabilized;
        const bool st = 2 * votes > count;
        if (seen && !st) return false;
        seen = seen || st;
    }
    return true;
}

// --- embedded dissipation ------------------------------------------------------------

/// Landscape with embedded dissipation: omega_nu(P) = omega_Q(P) + nu P,
/// i.e. E_nu(P) = E_P(P) + nu P^2 / 2.
inline HamiltonianModel embed_dissipation(const HamiltonianModel& model, double nu) {
    if (!model.action_level) throw UnsupportedModelError("embed_dissipation: model has no action landscape");
    if (!(nu >= 0.0)) throw DomainError("embed_dissipation: nu must be non-negative");
    if (nu == 0.0) return model;
    auto E = model.kinetic;
    auto w = model.dkinetic;
    auto m = dynamics::action_model(model.kind, model.name + "+dissipation",
                                    [E, nu](double P) { return E(P) + 0.5 * nu * P * P; },
                                    [w, nu](double P) { return w(P) + nu * P; }, model.params);
    m.params.push_back(nu);
    return m;
}

struct EquilibriumDomain {
    double lo = -2.0;
    double hi = 2.0;
    std::size_t n_seeds = 2000;
};

inline std::size_t equilibrium_count(const HamiltonianModel& model, double nu, const EquilibriumDomain& d) {
    return dynamics::find_equilibria(embed_dissipation(model, nu), d.lo, d.hi, d.n_seeds).size();
}

/// Smallest nu in [nu_lo, nu_hi] at which the equilibrium count has fallen to
/// its value at nu_hi, bisected to 1% relative.
inline double critical_nu(const HamiltonianModel& model, double nu_lo, double nu_hi, const EquilibriumDomain& d = {}) {
    if (!(nu_hi > nu_lo) || nu_lo < 0.0) throw DomainError("critical_nu: empty or negative nu range");
    const auto terminal = equilibrium_count(model, nu_hi, d);
    if (equilibrium_count(model, nu_lo, d) == terminal) return nu_lo;
    double lo = nu_lo, hi = nu_hi;
    while (hi - lo > 0.01 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (equilibrium_count(model, mid, d) == terminal) hi = mid;
        else lo = mid;
    }
    return hi;
}

struct DissipationSweepRow {
    double nu = 0.0;
    std::vector<dynamics::Equilibrium> equilibria;
};

inline std::vector<DissipationSweepRow> dissipation_sweep(const HamiltonianModel& model, const std::vector<double>& nus,
                                                          const EquilibriumDomain& d = {}) {
    std::vector<DissipationSweepRow> out;
    for (double nu : nus)
        out.push_back({nu, dynamics::find_equilibria(embed_dissipation(model, nu), d.lo, d.hi, d.n_seeds)});
    return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<DissipationSweepRow>& rows) {
    io::CsvWriter w(os, {"parameter", "equilibrium_count", "E_star"});
    for (const auto& r : rows) {
        std::string es;
        for (std::size_t i = 0; i < r.equilibria.size(); ++i)
            es += (i ? ";" : "") + io::format_number(r.equilibria[i].E_star);
        w.cells({r.nu, static_cast<long long>(r.equilibria.size()), es});
    }
}

/// Action-angle motion with the resistive term: dP/dt = -nu P, dQ/dt = omega_nu(P).
/// P decays exactly; Q uses the midpoint action of each step.
inline std::vector<PhaseState> damped_trajectory(const HamiltonianModel& model, double nu, const PhaseState& start,
                                                 double dt, std::size_t n) {
    const auto m = embed_dissipation(model, nu);
    if (!(dt > 0.0)) throw DomainError("damped_trajectory: dt must be positive");
    const double decay = std::exp(-nu * dt);
    const double half = std::exp(-0.5 * nu * dt);
    std::vector<PhaseState> out{start};
    out.reserve(n + 1);
    PhaseState s = start;
    for (std::size_t i = 1; i <= n; ++i) {
        const double Pm = s.p * half;
        s.q = numeric::wrap_angle(s.q + dt * m.dEdP(Pm));
        s.p *= decay;
        s.t += dt;
        if (!dynamics::finite_state(s)) throw IntegrationBlowup(i);
        out.push_back(s);
    }
    return out;
}

// --- FASER ----------------------------------------------------------------------------

struct FaserLevels {
    double E_0 = 0.0;
    double E_star = 0.0;
    double E_p = 0.0;
    double E_d = 0.0;
};

/// Pump-dump gain. Excited: dE_d - dE_p with dE_d = E* - E_d, dE_p = E_p - E*.
/// From the ground state there is nothing to dump, and pumping costs E_p - E_0.
inline double faser_gain(const FaserLevels& l, bool excited) {
    for (double v : {l.E_0, l.E_star, l.E_p, l.E_d})
        if (!std::isfinite(v)) throw DomainError("faser_gain: non-finite level");
    if (!(l.E_p >= l.E_star && l.E_star >= l.E_d)) throw DomainError("faser_gain: levels must satisfy E_p >= E* >= E_d");
    if (excited) return (l.E_star - l.E_d) - (l.E_p - l.E_star);
    return -(l.E_p - l.E_0);
}

// --- arbitrage heat pump ----------------------------------------------------------------

struct ArbitrageConfig {
    double P_star = 100.0;       // known equilibrium price
    double omega = numeric::kTwoPi;  // natural frequency of price deviations
    double y0 = 0.0;             // initial deviation
    double v0 = 0.0;             // initial deviation rate
    double delta = 0.5;          // half spread paid per trade
    double impact = 0.0;         // deviation removed by each trade
    double noise = 0.0;          // volatility of random forcing (rate units per sqrt time)
    double lot = 1.0;
    int max_position = 1;        // in lots
    double duration = 20.0;
    double dt = 1e-3;
    std::uint64_t seed = 42;
    // external pump-and-dump force: inject_amplitude cos(omega t) on [inject_start, inject_end)
    double inject_amplitude = 0.0;
    double inject_start = 0.0;
    double inject_end = 0.0;
    std::size_t record_stride = 10;
};

enum class Side { Buy, Sell };

struct Trade {
    double t = 0.0;
    Side side = Side::Buy;
    double price = 0.0;
    double cash = 0.0;  // trader cash after the trade
    int position = 0;
    bool against_injector = false;
};

struct ArbitrageResult {
    std::vector<Trade> trades;
    std::vector<double> t, price_controlled, price_uncontrolled, cash;
    double variance_controlled = 0.0;
    double variance_uncontrolled = 0.0;
    std::size_t completed_cycles = 0;
    double whole_cycle_profit = 0.0;  // cash change up to the last flat position
    double final_cash = 0.0;
    int final_position = 0;
    double injector_cash = 0.0;
    double spread_paid = 0.0;
    double mean_executed_band = 0.0;  // mean |P - P*| at execution
};

/// Deviations y = P - P* follow y'' = -omega^2 y + noise + injection. The trader
/// sells one lot at a local maximum with y > delta and buys one at a local
/// minimum with y < -delta, within +-max_position lots. Buys fill at P + delta,
/// sells at P - delta, and each fill pushes y toward zero by `impact`.
inline ArbitrageResult arbitrage_run(const ArbitrageConfig& c) {
    if (!(c.delta > 0.0)) throw DomainError("arbitrage_run: spread delta must be positive");
    if (!(c.dt > 0.0) || !(c.duration > 0.0)) throw DomainError("arbitrage_run: dt and duration must be positive");
    if (c.impact < 0.0 || c.noise < 0.0 || c.max_position < 1) throw DomainError("arbitrage_run: invalid configuration");

    const auto n = static_cast<std::size_t>(std::ceil(c.duration / c.dt));
    const double dt = c.duration / static_cast<double>(n);
    const double w2 = c.omega * c.omega;
    auto g = random::stream(c.seed, 0);
    random::Gaussian normal;

    ArbitrageResult r;
    double yu = c.y0, vu = c.v0;  // uncontrolled
    double y = c.y0, v = c.v0;    // controlled
    double cash = 0.0, flat_cash = 0.0;
    int pos = 0;
    double band_sum = 0.0;
    double su = 0.0, suu = 0.0, sc = 0.0, scc = 0.0;
    auto sample = [&](double t) {
        r.t.push_back(t);
        r.price_controlled.push_back(c.P_star + y);
        r.price_uncontrolled.push_back(c.P_star + yu);
        r.cash.push_back(cash);
    };
    if (c.record_stride) sample(0.0);

    for (std::size_t i = 1; i <= n; ++i) {
        const double t0 = static_cast<double>(i - 1) * dt;
        const double t1 = static_cast<double>(i) * dt;
        const double tm = 0.5 * (t0 + t1);
        double ext = c.noise * normal(g) / std::sqrt(dt);
        const bool injecting = c.inject_amplitude != 0.0 && tm >= c.inject_start && tm < c.inject_end;
        if (injecting) ext += c.inject_amplitude * std::cos(c.omega * tm);

        const double v_prev = v;
        // semi-implicit Euler on both copies with the same forcing
        vu += dt * (-w2 * yu + ext);
        yu += dt * vu;
        v += dt * (-w2 * y + ext);
        y += dt * v;

        const bool peak = v_prev > 0.0 && v <= 0.0;
        const bool trough = v_prev < 0.0 && v >= 0.0;
        if ((peak && y > c.delta && pos > -c.max_position) || (trough && y < -c.delta && pos < c.max_position)) {
            Trade tr;
            tr.t = t1;
            tr.against_injector = injecting;
            if (peak) {
                tr.side = Side::Sell;
                tr.price = c.P_star + y - c.delta;
                cash += tr.price * c.lot;
                --pos;
            } else {
                tr.side = Side::Buy;
                tr.price = c.P_star + y + c.delta;
                cash -= tr.price * c.lot;
                ++pos;
            }
            if (injecting) r.injector_cash -= (tr.side == Side::Sell ? tr.price : -tr.price) * c.lot;
            r.spread_paid += c.delta * c.lot;
            band_sum += std::abs(y);
            const double shift = std::min(c.impact, std::abs(y));
            y -= std::copysign(shift, y);
            tr.cash = cash;
            tr.position = pos;
            r.trades.push_back(tr);
            if (pos == 0) {
                ++r.completed_cycles;
                flat_cash = cash;
            }
        }
        if (!std::isfinite(y) || !std::isfinite(yu)) throw IntegrationBlowup(i);
        su += yu;
        suu += yu * yu;
        sc += y;
        scc += y * y;
        if (c.record_stride && i % c.record_stride == 0) sample(t1);
    }
    const double nn = static_cast<double>(n);
    r.variance_uncontrolled = suu / nn - (su / nn) * (su / nn);
    r.variance_controlled = scc / nn - (sc / nn) * (sc / nn);
    r.whole_cycle_profit = flat_cash;
    r.final_cash = cash;
    r.final_position = pos;
    r.mean_executed_band = r.trades.empty() ? 0.0 : band_sum / static_cast<double>(r.trades.size());
    return r;
}

inline void write_trades_csv(std::ostream& os, const std::vector<Trade>& trades) {
    io::CsvWriter w(os, {"t", "side", "price", "cash"});
    for (const auto& t : trades)
        w.cells({t.t, std::string(t.side == Side::Buy ? "buy" : "sell"), t.price, t.cash});
}

}  // namespace ecsim::control
