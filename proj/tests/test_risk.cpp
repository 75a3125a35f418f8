#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ecsim/risk.hpp"
#include "ecsim/stats.hpp"

using namespace ecsim;
using namespace ecsim::risk;

namespace {

// omega_0 = J_0 = sqrt(10), T = 1 gives nu_c = sigma_c = kappa = 1.
DiffusionParams unit_params() { return diffusion_scalings(1.0, std::sqrt(10.0), std::sqrt(10.0)); }

const EnergyMap linear_H = [](double J) { return J; };
const EnergyMap quadratic_H = [](double J) { return 0.5 * J * J; };

}  // namespace

TEST(Scalings, SmallTemperatureExample) {
    const auto d = diffusion_scalings(0.01, 1.0, 1.0);
    EXPECT_NEAR(d.nu_c, 0.1, 1e-15);
    EXPECT_NEAR(d.sigma_c, 0.1, 1e-15);
    EXPECT_NEAR(d.kappa, 0.001, 1e-15);
    EXPECT_FALSE(d.high_temperature);
}

TEST(Scalings, UnitRatioIsDegenerateWithWarning) {
    const auto d = diffusion_scalings(6.0, 2.0, 3.0);
    EXPECT_DOUBLE_EQ(d.nu_c, 2.0);
    EXPECT_DOUBLE_EQ(d.sigma_c, 3.0);
    EXPECT_TRUE(d.high_temperature);
}

TEST(Scalings, BusinessCycleOverride) {
    const double omega0 = 2.5, J0 = 4.0;
    const auto d = business_cycle_scalings(1e-6 * omega0 * J0, omega0, J0);
    EXPECT_NEAR(d.nu_c, 0.1 * omega0, 1e-12);
}

TEST(Scalings, ClosedFormsAgainstIndependentArithmetic) {
    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> u(0.1, 10.0), r(1e-4, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double w = u(g), J = u(g), ratio = r(g);
        const auto d = diffusion_scalings(ratio * w * J, w, J);
        EXPECT_NEAR(d.kappa, std::pow(ratio, 1.5) * w * J * J, 1e-12 * d.kappa);
        EXPECT_NEAR(d.nu_c / w, d.sigma_c / J, 1e-14);
        EXPECT_NEAR(d.kappa, d.nu_c * d.sigma_c * d.sigma_c, 1e-12 * d.kappa);
    }
}

TEST(Scalings, DomainErrors) {
    EXPECT_THROW(diffusion_scalings(0.0, 1.0, 1.0), DomainError);
    EXPECT_THROW(diffusion_scalings(1.0, -1.0, 1.0), DomainError);
    EXPECT_THROW(diffusion_scalings(2.0, 1.0, 1.0), DomainError);
}

TEST(FokkerPlanck, ZeroTimeIsIdentity) {
    const auto f0 = point_mass(0.0, 20.0, 1000, 1.0);
    const auto f = fp_solve(linear_H, unit_params(), f0, 0.0);
    EXPECT_EQ(f.values, f0.values);
}

TEST(FokkerPlanck, LinearHamiltonianRelaxesToBoltzmann) {
    const auto p = unit_params();
    const auto f0 = point_mass(0.0, 20.0, 1000, 1.0);
    const auto snaps = fp_evolve(linear_H, p, f0, {1.0, 5.0, 10.0, 20.0 / p.nu_c});
    for (const auto& s : snaps) EXPECT_NEAR(s.mass(), 1.0, 1e-8);
    const auto& f = snaps.back();
    EXPECT_NEAR(f.mean(), 1.0, 0.02);
    // analytic e^{-J} on the same cells, independent of the solver's helpers
    auto exact = make_grid(0.0, 20.0, 1000);
    double norm = 0.0;
    for (std::size_t i = 0; i < exact.n_cells; ++i) norm += std::exp(-exact.center(i)) * exact.width();
    for (std::size_t i = 0; i < exact.n_cells; ++i) exact.values[i] = std::exp(-exact.center(i)) / norm;
    EXPECT_LE(l1_distance(f, exact), 0.05);
}

TEST(FokkerPlanck, QuadraticHamiltonianRelaxesToGaussian) {
    const auto p = unit_params();
    const auto f = fp_solve(quadratic_H, p, point_mass(0.0, 20.0, 1000, 2.0), 20.0 / p.nu_c);
    EXPECT_NEAR(f.mass(), 1.0, 1e-8);
    const auto eq = equilibrium_density(quadratic_H, p.T, 0.0, 20.0, 1000);
    EXPECT_LE(l1_distance(f, eq), 0.05);
    EXPECT_NEAR(f.mean(), std::sqrt(2.0 / std::numbers::pi), 0.02);
}

TEST(FokkerPlanck, DriftOnlyMovesTowardMinimum) {
    DiffusionParams p;
    p.nu_c = 1.0;
    p.sigma_c = 1.0;
    p.kappa = 0.0;
    const auto f0 = point_mass(0.0, 10.0, 500, 5.0);
    const auto f = fp_solve(linear_H, p, f0, 2.0);
    EXPECT_NEAR(f.mass(), 1.0, 1e-12);
    EXPECT_NEAR(f.mean(), f0.mean() - 2.0, 0.05);
    for (double v : f.values) EXPECT_GE(v, 0.0);
}

TEST(FokkerPlanck, RejectsBadInputs) {
    const auto p = unit_params();
    auto f0 = point_mass(0.0, 20.0, 1000, 1.0);
    f0.values[3] += 1.0;
    EXPECT_THROW(fp_solve(linear_H, p, f0, 1.0), DomainError);
    EXPECT_THROW(fp_solve(linear_H, p, point_mass(0.0, 20.0, 40, 1.0), 1.0), DomainError);
}

TEST(MonteCarlo, SinglePathZeroTime) {
    const auto s = mc_ensemble(linear_H, unit_params(), 3.25, 1, 0.0, 42);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], 3.25);
}

TEST(MonteCarlo, DeterministicAndOrderIndependent) {
    McOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const auto a = mc_ensemble(linear_H, unit_params(), 1.0, 257, 2.0, 9, one);
    const auto b = mc_ensemble(linear_H, unit_params(), 1.0, 257, 2.0, 9, four);
    const auto c = mc_ensemble(linear_H, unit_params(), 1.0, 257, 2.0, 9, one);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    const auto d = mc_ensemble(linear_H, unit_params(), 1.0, 257, 2.0, 10, one);
    EXPECT_NE(a, d);
}

TEST(MonteCarlo, EquilibriumMeanAndAgreementWithSolver) {
    const auto p = unit_params();
    const double t_end = 20.0 / p.nu_c;
    const auto samples = mc_ensemble(linear_H, p, 1.0, 20000, t_end, 42);
    EXPECT_NEAR(stats::mean(samples), 1.0, 0.03);
    const auto f = fp_solve(linear_H, p, point_mass(0.0, 20.0, 1000, 1.0), t_end);
    EXPECT_LE(stats::ks_statistic(samples, [&](double x) { return f.cdf(x); }), 0.02);
}

TEST(Forecast, ConservativePreservesAmplitude) {
    ForecastRequest req;
    req.mode = ForecastMode::Conservative;
    req.model = dynamics::pendulum();
    req.start = {1.0, 0.0, 0.0};
    const double period = 2.0 * std::numbers::pi / dynamics::pendulum_frequency(-std::cos(1.0));
    req.horizon = 10.0 * period;
    req.n_realizations = 6;
    req.dt = 1e-3;
    req.output_stride = 1;
    const auto set = forecast(req);
    ASSERT_EQ(set.size(), 6u);
    for (const auto& r : set) {
        const auto [lo, hi] = std::minmax_element(r.value.begin(), r.value.end());
        EXPECT_NEAR(*hi - *lo, 2.0, 0.02);
    }
}

TEST(Forecast, DiffusiveVarianceGrowsLinearly) {
    ForecastRequest req;
    req.mode = ForecastMode::Diffusive;
    req.diffusion = unit_params();
    req.H = linear_H;
    req.start = {50.0, 0.0, 0.0};
    req.horizon = 2.0;
    req.n_realizations = 4000;
    req.dt = 0.01;
    req.output_stride = 50;
    const auto set = forecast(req);
    std::vector<double> terminal;
    double mean_first = 0.0;
    for (const auto& r : set) {
        terminal.push_back(r.value.back());
        mean_first += r.value.front();
    }
    mean_first /= static_cast<double>(set.size());
    EXPECT_NEAR(set[0].t.back(), 2.0, 1e-12);
    EXPECT_LT(stats::mean(terminal), mean_first);
    const double expected = 2.0 * req.diffusion->kappa * req.horizon;
    EXPECT_NEAR(stats::variance(terminal), expected, 0.2 * expected);
}

TEST(Forecast, EdgeCases) {
    ForecastRequest req;
    req.model = dynamics::pendulum();
    req.start = {0.5, 0.0, 0.0};
    req.horizon = 1.0;
    req.n_realizations = 0;
    EXPECT_TRUE(forecast(req).empty());
    req.horizon = 0.0;
    EXPECT_THROW(forecast(req), DomainError);
    req.horizon = 1.0;
    req.n_realizations = 1;
    req.mode = ForecastMode::Diffusive;
    EXPECT_THROW(forecast(req), ConfigurationError);
}

TEST(Forecast, LongFormatCsv) {
    std::vector<Realization> set{{0, {0.0, 0.5}, {1.0, 1.5}}, {1, {0.0}, {2.0}}};
    std::ostringstream os;
    write_realizations_csv(os, set);
    EXPECT_EQ(os.str(), "realization_id,t,value\n0,0,1\n0,0.5,1.5\n1,0,2\n");
}
