#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "ecsim/error.hpp"
#include "ecsim/io/csv.hpp"
#include "ecsim/numeric.hpp"

namespace ecsim::dynamics {

struct PhaseState {
    double q = 0.0;
    double p = 0.0;
    double t = 0.0;
};

enum class ModelKind { Pendulum, Harmonic, DoubleWellAction, QuarticAction, Custom };

using ScalarMap = std::function<double(double)>;
using ForceField = std::function<double(double t, double q, double p)>;

// Separable Hamiltonian H(q, p) = T(p) + V(q).
//
// Action-level models live directly in (Q, P) coordinates: T is the landscape
// E_P(P), V vanishes, and the angle Q simply advances at omega_Q = dE_P/dP.
// For those models `state.q` holds Q and `state.p` holds P.
struct HamiltonianModel {
    ModelKind kind = ModelKind::Custom;
    std::string name;
    ScalarMap kinetic;     // T(p)
    ScalarMap dkinetic;    // T'(p)
    ScalarMap potential;   // V(q)
    ScalarMap dpotential;  // V'(q)
    bool action_level = false;
    std::vector<double> params;

    double energy(double q, double p) const { return kinetic(p) + potential(q); }
    double energy(const PhaseState& s) const { return energy(s.q, s.p); }

    // E_P and omega_Q are only meaningful on action-level models.
    double action_energy(double P) const { return kinetic(P); }
    double dEdP(double P) const {
        if (!action_level || !dkinetic) throw UnsupportedModelError(name + ": model has no action landscape");
        return dkinetic(P);
    }
};

// --- model constructors ----------------------------------------------------

/// E = p^2/2 - omega0^2 cos q
inline HamiltonianModel pendulum(double omega0 = 1.0) {
    if (!(omega0 > 0.0)) throw DomainError("pendulum: omega0 must be positive");
    const double w2 = omega0 * omega0;
    HamiltonianModel m;
    m.kind = ModelKind::Pendulum;
    m.name = "pendulum";
    m.kinetic = [](double p) { return 0.5 * p * p; };
    m.dkinetic = [](double p) { return p; };
    m.potential = [w2](double q) { return -w2 * std::cos(q); };
    m.dpotential = [w2](double q) { return w2 * std::sin(q); };
    m.params = {omega0};
    return m;
}

/// E = p^2/2 + omega^2 q^2/2
inline HamiltonianModel harmonic(double omega = 1.0) {
    if (!(omega > 0.0)) throw DomainError("harmonic: omega must be positive");
    const double w2 = omega * omega;
    HamiltonianModel m;
    m.kind = ModelKind::Harmonic;
    m.name = "harmonic";
    m.kinetic = [](double p) { return 0.5 * p * p; };
    m.dkinetic = [](double p) { return p; };
    m.potential = [w2](double q) { return 0.5 * w2 * q * q; };
    m.dpotential = [w2](double q) { return w2 * q; };
    m.params = {omega};
    return m;
}

/// Action-level landscape from an energy function and its exact derivative.
inline HamiltonianModel action_model(ModelKind kind, std::string name, ScalarMap E_P, ScalarMap omega_Q,
                                     std::vector<double> params = {}) {
    HamiltonianModel m;
    m.kind = kind;
    m.name = std::move(name);
    m.kinetic = std::move(E_P);
    m.dkinetic = std::move(omega_Q);
    m.potential = [](double) { return 0.0; };
    m.dpotential = [](double) { return 0.0; };
    m.action_level = true;
    m.params = std::move(params);
    return m;
}

/// E_P = c4 P^4/4 + c2 P^2/2 + c1 P
inline HamiltonianModel quartic_action(double c4, double c2, double c1 = 0.0) {
    return action_model(
        ModelKind::QuarticAction, "quartic-action",
        [=](double P) { return 0.25 * c4 * P * P * P * P + 0.5 * c2 * P * P + c1 * P; },
        [=](double P) { return c4 * P * P * P + c2 * P + c1; }, {c4, c2, c1});
}

/// Two-basin landscape E_P = P^4/4 - P^2/2.
inline HamiltonianModel double_well_action() {
    auto m = quartic_action(1.0, -1.0, 0.0);
    m.kind = ModelKind::DoubleWellAction;
    m.name = "double-well-action";
    return m;
}

inline HamiltonianModel custom_action(std::string name, ScalarMap E_P, ScalarMap omega_Q) {
    return action_model(ModelKind::Custom, std::move(name), std::move(E_P), std::move(omega_Q));
}

inline HamiltonianModel custom_separable(std::string name, ScalarMap T, ScalarMap dT, ScalarMap V, ScalarMap dV) {
    HamiltonianModel m;
    m.kind = ModelKind::Custom;
    m.name = std::move(name);
    m.kinetic = std::move(T);
    m.dkinetic = std::move(dT);
    m.potential = std::move(V);
    m.dpotential = std::move(dV);
    return m;
}

// --- integration -----------------------------------------------------------

inline bool finite_state(const PhaseState& s) {
    return std::isfinite(s.q) && std::isfinite(s.p) && std::isfinite(s.t);
}

/// One kick-drift-kick leapfrog step. The force is sampled at the start and
/// end positions so that the scheme stays time-symmetric when F depends on q only.
inline PhaseState leapfrog_step(const HamiltonianModel& model, const PhaseState& s, double dt,
                                const ForceField& force) {
    const double half = 0.5 * dt;
    double f0 = -model.dpotential(s.q);
    if (force) f0 += force(s.t, s.q, s.p);
    const double p_half = s.p + half * f0;
    const double q1 = s.q + dt * model.dkinetic(p_half);
    const double t1 = s.t + dt;
    double f1 = -model.dpotential(q1);
    if (force) f1 += force(t1, q1, p_half);
    return {q1, p_half + half * f1, t1};
}

/// Fixed-step symplectic integration. A negative dt runs the flow backwards.
inline std::vector<PhaseState> integrate_trajectory(const HamiltonianModel& model, const PhaseState& start,
                                                    double dt, std::size_t n, const ForceField& force = {}) {
    if (!std::isfinite(dt) || dt == 0.0) throw DomainError("integrate_trajectory: dt must be finite and non-zero");
    if (!finite_state(start) || !std::isfinite(model.energy(start)))
        throw DomainError("integrate_trajectory: start state has non-finite energy");
    std::vector<PhaseState> out;
    out.reserve(n + 1);
    out.push_back(start);
    PhaseState s = start;
    for (std::size_t i = 1; i <= n; ++i) {
        s = leapfrog_step(model, s, dt, force);
        if (!finite_state(s)) throw IntegrationBlowup(i);
        out.push_back(s);
    }
    return out;
}

/// Discrete work sum  sum F * dq  along a trajectory, with F evaluated at the
/// midpoint time and position of each step.
inline double work_sum(const std::vector<PhaseState>& traj, const ForceField& force) {
    double w = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const auto& a = traj[i - 1];
        const auto& b = traj[i];
        const double f = force(0.5 * (a.t + b.t), 0.5 * (a.q + b.q), 0.5 * (a.p + b.p));
        w += f * (b.q - a.q);
    }
    return w;
}

inline void write_trajectory_csv(std::ostream& os, const HamiltonianModel& model,
                                 const std::vector<PhaseState>& traj) {
    io::CsvWriter w(os, {"t", "q", "p", "E"});
    for (const auto& s : traj) w.row({s.t, s.q, s.p, model.energy(s)});
}

// --- action-angle ----------------------------------------------------------

struct ActionAngle {
    double P = 0.0;
    double Q = 0.0;
};

namespace detail {

inline double pendulum_omega0(const HamiltonianModel& m) { return m.params.empty() ? 1.0 : m.params[0]; }

// Elliptic modulus of a libration orbit; rejects rotation and separatrix.
inline double libration_modulus(double E, double w2) {
    const double k2 = 0.5 * (1.0 + E / w2);
    if (!(k2 >= 0.0)) throw DomainError("pendulum: energy below the ground state");
    if (k2 >= 1.0 - 1e-12) throw DomainError("pendulum: state on the separatrix or in the rotation domain");
    return std::sqrt(k2);
}

// (1/2pi) \oint p dq for the libration orbit of modulus k, by quadrature in
// the substitution sin(q/2) = k sin(phi).
inline double pendulum_action_from_modulus(double k, double omega0) {
    const double k2 = k * k;
    const double I = numeric::integrate(
        [k2](double phi) {
            const double s = std::sin(phi);
            const double c = std::cos(phi);
            return k2 * c * c / std::sqrt(1.0 - k2 * s * s);
        },
        0.0, std::numbers::pi / 2, 1e-15);
    return 8.0 / std::numbers::pi * omega0 * I;
}

// Jacobi amplitude: phi in [-pi/2, pi/2] with F(phi, k) = u, |u| <= K.
inline double amplitude(double u, double k, double K) {
    if (u >= K) return std::numbers::pi / 2;
    if (u <= -K) return -std::numbers::pi / 2;
    auto g = [&](double phi) { return std::ellint_1(k, phi) - u; };
    return numeric::refine_root(g, -std::numbers::pi / 2, std::numbers::pi / 2, -K - u, K - u);
}

}  // namespace detail

/// Action of a pendulum libration orbit at energy E.
inline double pendulum_action(double E, double omega0 = 1.0) {
    const double k = detail::libration_modulus(E, omega0 * omega0);
    if (k == 0.0) return 0.0;
    return detail::pendulum_action_from_modulus(k, omega0);
}

/// Orbit frequency of a pendulum libration at energy E: pi*omega0 / (2K(k)).
inline double pendulum_frequency(double E, double omega0 = 1.0) {
    const double k = detail::libration_modulus(E, omega0 * omega0);
    return std::numbers::pi * omega0 / (2.0 * std::comp_ellint_1(k));
}

/// Inverse of pendulum_action: the libration energy with the given action.
inline double pendulum_energy_from_action(double P, double omega0 = 1.0) {
    const double w2 = omega0 * omega0;
    if (!(P >= 0.0)) throw DomainError("pendulum: action must be non-negative");
    const double P_sep = 8.0 * omega0 / std::numbers::pi;
    if (P >= P_sep) throw DomainError("pendulum: action beyond the separatrix");
    if (P == 0.0) return -w2;
    double lo = -w2, hi = w2 * (1.0 - 1e-11);
    // small-amplitude guess E = -omega0^2 + omega0 * P
    double E = std::clamp(-w2 + omega0 * P, lo, hi);
    for (int it = 0; it < 100; ++it) {
        const double r = pendulum_action(E, omega0) - P;
        if (r > 0.0) hi = E; else lo = E;
        if (std::abs(r) <= 1e-15 * std::max(1.0, P)) break;
        double next = E - r * pendulum_frequency(E, omega0);  // dP/dE = 1/omega
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - E) <= 1e-16 * std::max(1.0, std::abs(E))) { E = next; break; }
        E = next;
    }
    return E;
}

/// Canonical action-angle coordinates. The angle is zero at the orbit's
/// maximum q and is measured so that Q = pi/2 where q = 0, p > 0.
inline ActionAngle action_angle(const HamiltonianModel& model, const PhaseState& s) {
    if (!finite_state(s)) throw DomainError("action_angle: non-finite state");
    switch (model.kind) {
        case ModelKind::Harmonic: {
            const double w = model.params.empty() ? 1.0 : model.params[0];
            const double E = model.energy(s);
            return {E / w, numeric::wrap_angle(std::atan2(s.p / w, s.q))};
        }
        case ModelKind::Pendulum: {
            const double w0 = detail::pendulum_omega0(model);
            const double E = model.energy(s);
            const double k = detail::libration_modulus(E, w0 * w0);
            if (k == 0.0) return {0.0, 0.0};
            const double P = detail::pendulum_action_from_modulus(k, w0);
            const double K = std::comp_ellint_1(k);
            const double ratio = std::clamp(std::sin(0.5 * s.q) / k, -1.0, 1.0);
            const double F = std::ellint_1(k, std::asin(ratio));
            // u is the elapsed orbit time (in units of 1/omega0) from q = 0
            // moving upward; the orbit's maximum is at u = K.
            const double u = s.p >= 0.0 ? F : 2.0 * K - F;
            const double Q = numeric::kTwoPi * std::fmod(5.0 * K - u, 4.0 * K) / (4.0 * K);
            return {P, numeric::wrap_angle(Q)};
        }
        default:
            if (model.action_level) return {s.p, numeric::wrap_angle(s.q)};
            throw UnsupportedModelError("action_angle: no action-angle map for model " + model.name);
    }
}

/// Inverse of action_angle.
inline PhaseState from_action_angle(const HamiltonianModel& model, double P, double Q, double t = 0.0) {
    switch (model.kind) {
        case ModelKind::Harmonic: {
            const double w = model.params.empty() ? 1.0 : model.params[0];
            if (!(P >= 0.0)) throw DomainError("from_action_angle: action must be non-negative");
            const double a = std::sqrt(2.0 * P / w);
            return {a * std::cos(Q), a * w * std::sin(Q), t};
        }
        case ModelKind::Pendulum: {
            const double w0 = detail::pendulum_omega0(model);
            const double E = pendulum_energy_from_action(P, w0);
            const double k = detail::libration_modulus(E, w0 * w0);
            if (k == 0.0) return {0.0, 0.0, t};
            const double K = std::comp_ellint_1(k);
            // orbit time from the upward zero crossing, folded onto [-K, 3K)
            double u = K - numeric::wrap_angle(Q) / numeric::kTwoPi * 4.0 * K;
            if (u < -K) u += 4.0 * K;
            double sign = 1.0;
            double v = u;
            if (u > K) {
                v = 2.0 * K - u;
                sign = -1.0;
            }
            const double phi = detail::amplitude(v, k, K);
            const double sn = std::sin(phi);
            const double q = 2.0 * std::asin(std::clamp(k * sn, -1.0, 1.0));
            const double p = sign * 2.0 * w0 * k * std::cos(phi);
            return {q, p, t};
        }
        default:
            if (model.action_level) return {numeric::wrap_angle(Q), P, t};
            throw UnsupportedModelError("from_action_angle: no action-angle map for model " + model.name);
    }
}

// --- equilibria ------------------------------------------------------------

enum class Stability { Stable, Unstable };

inline const char* to_string(Stability s) { return s == Stability::Stable ? "Stable" : "Unstable"; }

struct Equilibrium {
    double P_star = 0.0;
    double E_star = 0.0;
    Stability stability = Stability::Stable;
};

inline constexpr double kMergeTolerance = 1e-7;

/// Zeros of omega_Q = dE_P/dP on the half-open interval [lo, hi).
inline std::vector<Equilibrium> find_equilibria(const HamiltonianModel& model, double lo, double hi,
                                                std::size_t n_seeds = 1000) {
    if (!model.action_level || !model.dkinetic)
        throw UnsupportedModelError("find_equilibria: model " + model.name + " has no dE/dP");
    if (!(hi > lo)) return {};
    if (n_seeds == 0) n_seeds = 1;

    const auto omega = [&](double P) { return model.dkinetic(P); };
    const double h = (hi - lo) / static_cast<double>(n_seeds);
    std::vector<double> x(n_seeds + 1), w(n_seeds + 1);
    double scale = 0.0;
    for (std::size_t i = 0; i <= n_seeds; ++i) {
        x[i] = (i == n_seeds) ? hi : lo + h * static_cast<double>(i);
        w[i] = omega(x[i]);
        if (!std::isfinite(w[i])) throw NumericalError("find_equilibria: non-finite dE/dP at P = " + std::to_string(x[i]));
        scale = std::max(scale, std::abs(w[i]));
    }
    const double tol = 1e-9 * std::max(scale, 1e-300);

    struct Root { double P; int crossing; };  // crossing: +1 rising, -1 falling, 0 unknown
    std::vector<Root> roots;
    for (std::size_t i = 0; i < n_seeds; ++i) {
        if (std::abs(w[i]) <= tol) {
            int dir = 0;
            if (i > 0 && std::abs(w[i - 1]) > tol) dir = w[i - 1] < 0.0 ? +1 : -1;
            if (dir == 0 && std::abs(w[i + 1]) > tol) dir = w[i + 1] > 0.0 ? +1 : -1;
            roots.push_back({x[i], dir});
        } else if (std::abs(w[i + 1]) > tol && (w[i] < 0.0) != (w[i + 1] < 0.0)) {
            const double r = numeric::refine_root(omega, x[i], x[i + 1], w[i], w[i + 1]);
            if (r < hi) roots.push_back({r, w[i] < 0.0 ? +1 : -1});
        }
    }
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) { return a.P < b.P; });

    std::vector<Equilibrium> out;
    double last = -std::numeric_limits<double>::infinity();
    for (const auto& r : roots) {
        if (r.P - last <= kMergeTolerance) continue;
        last = r.P;
        const double dh = 1e-5 * std::max(1.0, std::abs(r.P));
        const double slope = numeric::centered_difference(omega, r.P, dh);
        Stability st;
        if (std::abs(slope) > 1e-12 * std::max(scale, 1.0)) st = slope > 0.0 ? Stability::Stable : Stability::Unstable;
        else st = r.crossing >= 0 ? Stability::Stable : Stability::Unstable;
        out.push_back({r.P, model.action_energy(r.P), st});
    }
    return out;
}

}  // namespace ecsim::dynamics
