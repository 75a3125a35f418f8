#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ecsim/dynamics.hpp"

using namespace ecsim;
using namespace ecsim::dynamics;

namespace {

constexpr double pi = std::numbers::pi;

// Closed-form pendulum libration action (omega0 = 1):
// P = (8/pi) [E(k) - (1 - k^2) K(k)],  k^2 = (1 + E)/2.
double elliptic_action(double energy) {
    const double k = std::sqrt(0.5 * (1.0 + energy));
    return 8.0 / pi * (std::comp_ellint_2(k) - (1.0 - k * k) * std::comp_ellint_1(k));
}

// Direct loop integral (1/2pi) \oint p dq on a fine midpoint grid, with the
// turning-point singularity removed by q = q_max sin(theta).
double loop_integral_action(double energy) {
    const double qmax = std::acos(-energy);
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double th = -pi / 2 + (i + 0.5) * pi / n;
        const double q = qmax * std::sin(th);
        const double p = std::sqrt(std::max(0.0, 2.0 * (energy + std::cos(q))));
        sum += p * qmax * std::cos(th) * (pi / n);
    }
    return 2.0 * sum / (2.0 * pi);
}

// Grid sign-change oracle: count and approximate locations of omega_Q zeros.
std::vector<double> grid_zero_scan(const HamiltonianModel& m, double lo, double hi, int n) {
    std::vector<double> z;
    const double h = (hi - lo) / n;
    double prev = m.dEdP(lo);
    if (std::abs(prev) < 1e-12) z.push_back(lo);
    for (int i = 1; i < n; ++i) {
        const double x = lo + i * h;
        const double cur = m.dEdP(x);
        if (std::abs(cur) < 1e-12) z.push_back(x);
        else if (std::abs(prev) >= 1e-12 && (prev < 0) != (cur < 0)) z.push_back(x - 0.5 * h);
        prev = cur;
    }
    return z;
}

}  // namespace

TEST(Integrate, ZeroStepsReturnsStart) {
    const auto m = pendulum();
    const PhaseState s{0.3, -0.2, 1.5};
    const auto traj = integrate_trajectory(m, s, 1e-3, 0);
    ASSERT_EQ(traj.size(), 1u);
    EXPECT_EQ(traj[0].q, s.q);
    EXPECT_EQ(traj[0].p, s.p);
    EXPECT_EQ(traj[0].t, s.t);
}

TEST(Integrate, FixedPointIsStationary) {
    const auto traj = integrate_trajectory(pendulum(), {0.0, 0.0, 0.0}, 1e-2, 1000);
    ASSERT_EQ(traj.size(), 1001u);
    for (const auto& s : traj) {
        EXPECT_EQ(s.q, 0.0);
        EXPECT_EQ(s.p, 0.0);
    }
}

TEST(Integrate, PendulumEnergyDriftSmallAmplitude) {
    const auto m = pendulum();
    const auto traj = integrate_trajectory(m, {0.1, 0.0, 0.0}, 1e-3, 100000);
    const double e0 = m.energy(traj.front());
    double drift = 0.0;
    for (const auto& s : traj) drift = std::max(drift, std::abs(m.energy(s) - e0));
    EXPECT_LE(drift, 1e-6);

    // halving the step shrinks the bounded energy error by about four
    const auto fine = integrate_trajectory(m, {0.1, 0.0, 0.0}, 5e-4, 200000);
    double drift_fine = 0.0;
    for (const auto& s : fine) drift_fine = std::max(drift_fine, std::abs(m.energy(s) - e0));
    EXPECT_NEAR(drift / drift_fine, 4.0, 0.5);
}

TEST(Integrate, PendulumRelativeDriftOverFiftyPeriods) {
    const auto m = pendulum();
    const PhaseState start{2.0, 0.0, 0.0};
    const double period = 2.0 * pi / pendulum_frequency(m.energy(start));
    const auto n = static_cast<std::size_t>(std::ceil(50.0 * period / 1e-3));
    const auto traj = integrate_trajectory(m, start, 1e-3, n);
    const double e0 = m.energy(start);
    double drift = 0.0;
    for (const auto& s : traj) drift = std::max(drift, std::abs(m.energy(s) - e0));
    EXPECT_LE(drift / std::abs(e0), 1e-5);
}

TEST(Integrate, TimeReversal) {
    const auto m = pendulum();
    const PhaseState start{1.2, 0.4, 0.0};
    const auto fwd = integrate_trajectory(m, start, 1e-3, 20000);
    const auto back = integrate_trajectory(m, fwd.back(), -1e-3, 20000);
    EXPECT_NEAR(back.back().q, start.q, 1e-8);
    EXPECT_NEAR(back.back().p, start.p, 1e-8);
    EXPECT_NEAR(back.back().t, start.t, 1e-8);
}

TEST(Integrate, WorkEnergyTheoremConstantForce) {
    const auto m = pendulum();
    const double F = 0.3;
    const ForceField force = [F](double, double, double) { return F; };
    const auto traj = integrate_trajectory(m, {0.2, 0.0, 0.0}, 1e-4, 100000, force);
    const double dE = m.energy(traj.back()) - m.energy(traj.front());
    const double work = work_sum(traj, force);
    EXPECT_NEAR(dE, work, 1e-6 * std::abs(work));
    EXPECT_GT(std::abs(work), 0.01);
}

TEST(Integrate, BlowupNamesStep) {
    // V = -q^4 drives q to infinity in finite time
    const auto m = custom_separable(
        "runaway", [](double p) { return 0.5 * p * p; }, [](double p) { return p; },
        [](double q) { return -q * q * q * q; }, [](double q) { return -4.0 * q * q * q; });
    try {
        integrate_trajectory(m, {1.0, 0.0, 0.0}, 0.1, 1000);
        FAIL() << "expected blow-up";
    } catch (const IntegrationBlowup& e) {
        EXPECT_GT(e.step(), 0u);
        EXPECT_NE(std::string(e.what()).find(std::to_string(e.step())), std::string::npos);
        EXPECT_EQ(e.kind(), ErrorKind::Numerical);
    }
}

TEST(Integrate, RejectsZeroStepAndNonFiniteStart) {
    EXPECT_THROW(integrate_trajectory(pendulum(), {0.0, 0.0, 0.0}, 0.0, 1), DomainError);
    EXPECT_THROW(integrate_trajectory(pendulum(), {NAN, 0.0, 0.0}, 1e-3, 1), DomainError);
}

TEST(Integrate, CsvExportColumns) {
    const auto m = pendulum();
    const auto traj = integrate_trajectory(m, {0.1, 0.0, 0.0}, 0.5, 2);
    std::ostringstream os;
    write_trajectory_csv(os, m, traj);
    std::istringstream is(os.str());
    const auto table = io::read_csv(is);
    EXPECT_EQ(table.header, (std::vector<std::string>{"t", "q", "p", "E"}));
    ASSERT_EQ(table.rows.size(), 3u);
    EXPECT_DOUBLE_EQ(*io::parse_number(table.rows[2][0]), 1.0);
}

TEST(ActionAngle, HarmonicExamples) {
    const auto m = harmonic();
    auto a = action_angle(m, {1.0, 0.0, 0.0});
    EXPECT_NEAR(a.P, 0.5, 1e-15);
    EXPECT_NEAR(a.Q, 0.0, 1e-15);
    a = action_angle(m, {0.0, 1.0, 0.0});
    EXPECT_NEAR(a.P, 0.5, 1e-15);
    EXPECT_NEAR(a.Q, pi / 2, 1e-15);
}

TEST(ActionAngle, PendulumSmallAmplitude) {
    const double q0 = 0.01;
    const auto a = action_angle(pendulum(), {q0, 0.0, 0.0});
    EXPECT_NEAR(a.P, q0 * q0 / 2, 0.01 * q0 * q0 / 2);
    EXPECT_NEAR(a.P, loop_integral_action(-std::cos(q0)), 1e-6 * a.P);
}

TEST(ActionAngle, PendulumActionMatchesEllipticClosedForm) {
    for (double E : {-0.99, -0.7, -0.3, 0.0, 0.4, 0.8, 0.97}) {
        EXPECT_NEAR(pendulum_action(E), elliptic_action(E), 1e-11) << "E=" << E;
        EXPECT_NEAR(pendulum_action(E), loop_integral_action(E), 1e-6) << "E=" << E;
    }
}

TEST(ActionAngle, PendulumAngleConventionMatchesHarmonic) {
    const auto m = pendulum();
    const double q0 = 1.0;
    EXPECT_NEAR(action_angle(m, {q0, 0.0, 0.0}).Q, 0.0, 1e-12);
    const double pmax = std::sqrt(2.0 * (1.0 - std::cos(q0)));
    EXPECT_NEAR(action_angle(m, {0.0, pmax, 0.0}).Q, pi / 2, 1e-9);
    EXPECT_NEAR(action_angle(m, {-q0, 0.0, 0.0}).Q, pi, 1e-9);
    EXPECT_NEAR(action_angle(m, {0.0, -pmax, 0.0}).Q, 3 * pi / 2, 1e-9);
}

TEST(ActionAngle, AngleAdvancesUniformlyAlongOrbit) {
    const auto m = pendulum();
    const PhaseState start{1.5, 0.0, 0.0};
    const double w = pendulum_frequency(m.energy(start));
    const auto traj = integrate_trajectory(m, start, 1e-4, 20000);
    const double Q0 = action_angle(m, traj.front()).Q;
    const double Q1 = action_angle(m, traj.back()).Q;
    // Q decreases at rate omega in this convention
    EXPECT_NEAR(numeric::angle_difference(Q0 - w * traj.back().t, Q1), 0.0, 1e-6);
}

TEST(ActionAngle, RoundTrip) {
    const auto m = pendulum();
    for (double q : {-2.5, -1.0, -0.1, 0.0, 0.3, 1.7, 2.9}) {
        for (double p : {-1.0, -0.3, 0.0, 0.2, 0.9}) {
            const PhaseState s{q, p, 0.0};
            if (m.energy(s) >= 0.999) continue;
            const auto a = action_angle(m, s);
            EXPECT_GE(a.P, 0.0);
            EXPECT_GE(a.Q, 0.0);
            EXPECT_LT(a.Q, 2 * pi);
            const auto back = from_action_angle(m, a.P, a.Q);
            EXPECT_NEAR(back.q, q, 1e-8) << q << "," << p;
            EXPECT_NEAR(back.p, p, 1e-8) << q << "," << p;
        }
    }
    const auto h = harmonic(2.0);
    const auto a = action_angle(h, {0.4, -0.7, 0.0});
    const auto b = from_action_angle(h, a.P, a.Q);
    EXPECT_NEAR(b.q, 0.4, 1e-12);
    EXPECT_NEAR(b.p, -0.7, 1e-12);
}

TEST(ActionAngle, RejectsRotationAndSeparatrix) {
    const auto m = pendulum();
    EXPECT_THROW(action_angle(m, {0.0, 3.0, 0.0}), DomainError);
    EXPECT_THROW(action_angle(m, {pi, 0.0, 0.0}), DomainError);
}

TEST(Equilibria, DoubleWell) {
    const auto eq = find_equilibria(double_well_action(), -2.0, 2.0, 1000);
    ASSERT_EQ(eq.size(), 3u);
    EXPECT_NEAR(eq[0].P_star, -1.0, 1e-12);
    EXPECT_EQ(eq[0].stability, Stability::Stable);
    EXPECT_NEAR(eq[1].P_star, 0.0, 1e-12);
    EXPECT_EQ(eq[1].stability, Stability::Unstable);
    EXPECT_NEAR(eq[2].P_star, 1.0, 1e-12);
    EXPECT_EQ(eq[2].stability, Stability::Stable);
    EXPECT_NEAR(eq[0].E_star, -0.25, 1e-12);
}

TEST(Equilibria, LinearLandscapeHasNone) {
    const auto m = custom_action("linear", [](double P) { return P; }, [](double) { return 1.0; });
    EXPECT_TRUE(find_equilibria(m, -5.0, 5.0, 100).empty());
}

TEST(Equilibria, CosineLandscapeAgainstGridOracle) {
    const auto m = custom_action("cosine", [](double P) { return -std::cos(P); },
                                 [](double P) { return std::sin(P); });
    const auto eq = find_equilibria(m, 0.0, 2 * pi, 1000);
    ASSERT_EQ(eq.size(), 2u);
    EXPECT_NEAR(eq[0].P_star, 0.0, 1e-12);
    EXPECT_EQ(eq[0].stability, Stability::Stable);
    EXPECT_NEAR(eq[1].P_star, pi, 1e-12);
    EXPECT_EQ(eq[1].stability, Stability::Unstable);

    const auto oracle = grid_zero_scan(m, 0.0, 2 * pi, 10000);
    ASSERT_EQ(oracle.size(), eq.size());
    for (std::size_t i = 0; i < eq.size(); ++i) EXPECT_NEAR(eq[i].P_star, oracle[i], 2 * pi / 10000);
}

TEST(Equilibria, BuiltinModelsAgainstGridOracle) {
    const std::vector<HamiltonianModel> models{double_well_action(), quartic_action(1.0, -3.0, 0.5),
                                               quartic_action(0.5, 1.0, -2.0)};
    for (const auto& m : models) {
        const auto eq = find_equilibria(m, -3.0, 3.0, 997);
        const auto oracle = grid_zero_scan(m, -3.0, 3.0, 10000);
        ASSERT_EQ(eq.size(), oracle.size()) << m.name;
        for (std::size_t i = 0; i < eq.size(); ++i) {
            EXPECT_NEAR(eq[i].P_star, oracle[i], 6.0 / 10000) << m.name;
            EXPECT_LE(std::abs(m.dEdP(eq[i].P_star)), 1e-9 * 30.0);
            if (i > 0) {
                EXPECT_GT(eq[i].P_star - eq[i - 1].P_star, kMergeTolerance);
            }
        }
    }
}

TEST(Equilibria, ExactDerivativeInvariant) {
    for (const auto& m : {double_well_action(), quartic_action(2.0, -1.0, 0.3)}) {
        for (double P : {-1.7, -0.4, 0.25, 1.3}) {
            const double h = 1e-5;
            const double fd = (m.action_energy(P + h) - m.action_energy(P - h)) / (2 * h);
            EXPECT_NEAR(fd, m.dEdP(P), 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(Equilibria, EmptyDomainAndUnsupportedModel) {
    EXPECT_TRUE(find_equilibria(double_well_action(), 1.0, 1.0, 10).empty());
    EXPECT_TRUE(find_equilibria(double_well_action(), 2.0, 1.0, 10).empty());
    EXPECT_THROW(find_equilibria(pendulum(), 0.0, 1.0, 10), UnsupportedModelError);
}
