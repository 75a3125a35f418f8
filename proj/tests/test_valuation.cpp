#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ecsim/valuation.hpp"

using namespace ecsim;
using namespace ecsim::valuation;

namespace {

// R = 10Q - Q^2, E = Q^2 on [0, 10] with m_e S_0 / T_I = 7
CurvePair worked_curves() {
    return sample_curves([](double Q) { return 10.0 * Q - Q * Q; }, [](double Q) { return Q * Q; }, 0.0, 10.0);
}
const KtParams worked{7.0, 1.0, 1.0};

}  // namespace

TEST(Spline, ReproducesCubicsExactly) {
    const auto f = [](double x) { return 2.0 - x + 0.5 * x * x - 0.1 * x * x * x; };
    const auto s = CubicSpline::sample(f, -1.0, 3.0, 9);
    for (double x = -1.0; x <= 3.0; x += 0.137) {
        EXPECT_NEAR(s(x), f(x), 1e-12);
        EXPECT_NEAR(s.derivative(x), -1.0 + x - 0.3 * x * x, 1e-11);
    }
    EXPECT_THROW(s(3.5), DomainError);
    EXPECT_THROW(CubicSpline(0.0, 1.0, {1.0, 2.0}), DomainError);
}

TEST(Multiplier, LevelSumsMatchGeometricSeries) {
    // R = R_0 m; with V_0/V_i = 2^-i the weighted sum is R_0 / (1 - q/2)
    const double m = 3.0, R0 = 2.0, q = 1.0 - 1.0 / m;
    const auto uniform = level_sums(m, R0, [](std::size_t) { return 1.0; });
    EXPECT_NEAR(uniform.R, R0 * m, 1e-10);
    EXPECT_NEAR(uniform.Sbar_e, 1.0, 1e-14);
    const auto halving = level_sums(m, R0, [](std::size_t i) { return std::ldexp(1.0, -static_cast<int>(i)); });
    EXPECT_NEAR(halving.Sbar_e, (1.0 / (1.0 - q / 2.0)) / m, 1e-10);
    EXPECT_NEAR(halving.Sbar_e, 0.5, 1e-10);
    const auto two = level_sums(2.0, 100.0, [](std::size_t i) { return std::ldexp(1.0, -static_cast<int>(i)); });
    EXPECT_NEAR(two.R, 200.0, 1e-8);
    EXPECT_NEAR(two.Sbar_e, 2.0 / 3.0, 1e-10);
}

TEST(Multiplier, RejectsBadInputs) {
    EXPECT_THROW(level_sums(1.0, 1.0, [](std::size_t) { return 1.0; }), DomainError);
    EXPECT_THROW(level_sums(2.0, 1.0, [](std::size_t) { return 1.5; }), DomainError);
    EXPECT_THROW(level_sums(2.0, 1.0, [](std::size_t) { return 0.0; }), DomainError);
}

TEST(Currency, FactorizationsAgreeBitForBit) {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(0.01, 50.0), s(0.01, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const EconomyParams p{u(g), u(g), s(g), u(g), u(g), u(g)};
        const double a = currency_demand(p);
        EXPECT_EQ(a, currency_demand_via_S_e(p));
        EXPECT_EQ(a, currency_demand_via_Sbar(p));
        EXPECT_NEAR(a, p.m_e() * p.S_0 * p.R_0, 1e-12 * a);
        EXPECT_NEAR(a, p.m * p.S_e() * p.R_0, 1e-12 * a);
    }
}

TEST(Currency, PriceAndErrors) {
    EconomyParams p{4.0, 2.0, 0.5, 10.0, 8.0, 1.0};
    EXPECT_DOUBLE_EQ(currency_price(p), 40.0 / 8.0);
    p.N_ec = 0.0;
    EXPECT_THROW(currency_price(p), DomainError);
    p.N_ec = 1.0;
    p.Sbar_e = 1.5;
    EXPECT_THROW(currency_demand(p), DomainError);
}

TEST(Investment, VerdictFollowsSignOfDeltaM) {
    const EconomyParams p{3.0, 2.0, 1.0, 1.0, 1.0, 1.0};
    EXPECT_EQ(investment_decision(p, 1.0, 5.0).verdict, InvestVerdict::Invest);
    EXPECT_DOUBLE_EQ(investment_decision(p, 1.0, 6.0).delta_M, 0.0);
    EXPECT_EQ(investment_decision(p, 1.0, 6.0).verdict, InvestVerdict::Invest);
    EXPECT_EQ(investment_decision(p, 1.0, 7.0).verdict, InvestVerdict::Reject);
    EXPECT_THROW(investment_decision(p, 1.0, -1.0), DomainError);
}

TEST(KuhnTucker, WorkedExampleClosedForm) {
    const auto r = kuhn_tucker_optimize(worked_curves(), worked);
    EXPECT_NEAR(r.point.Q_star, 40.0 / 9.0, 1e-9);
    EXPECT_NEAR(r.mu_max, 1600.0 / 9.0, 1e-8);
    ASSERT_TRUE(r.Q_min && r.mu_min);
    EXPECT_NEAR(*r.Q_min, 5.0, 1e-9);
    EXPECT_NEAR(*r.mu_min, 175.0, 1e-8);
    EXPECT_TRUE(std::isinf(r.point.lambda_star));
    EXPECT_NEAR(r.point.R_prime / r.point.E_prime, 1.0 / 8.0, 1e-9);
    EXPECT_NEAR(r.slope_factor, 0.125, 1e-15);
    EXPECT_NEAR(*r.slope_gap_measured, r.gap_closed_form, 1e-9);
    // the level gap between the two regimes is not 1/(k+1) for these curves
    EXPECT_NEAR(*r.mu_gap_measured, 1.0 / 64.0, 1e-9);
}

TEST(KuhnTucker, AgreesWithBruteForceGrid) {
    const auto c = worked_curves();
    double best = -1e300, best_Q = 0.0;
    for (int i = 0; i <= 100000; ++i) {
        const double Q = 10.0 * i / 100000.0;
        const double dM = 8.0 * (10.0 * Q - Q * Q) - Q * Q;
        if (dM > best) best = dM, best_Q = Q;
    }
    const auto r = kuhn_tucker_optimize(c, worked);
    EXPECT_NEAR(r.point.Q_star, best_Q, 1e-4);
    EXPECT_NEAR(r.mu_max, best, 1e-6);
}

TEST(KuhnTucker, InteriorMultiplier) {
    // pick mu between the regimes; the active constraint root and lambda follow from the quadratic
    const double mu = 176.0;
    const auto r = kuhn_tucker_optimize(worked_curves(), worked, mu);
    const double Q = (80.0 + std::sqrt(6400.0 - 36.0 * mu)) / 18.0;
    EXPECT_NEAR(r.point.Q_star, Q, 1e-9);
    const double lambda = -7.0 * (10.0 - 2.0 * Q) / (80.0 - 18.0 * Q);
    EXPECT_NEAR(r.point.lambda_star, lambda, 1e-7);
    EXPECT_GT(r.point.lambda_star, 0.0);
    const auto slack = kuhn_tucker_optimize(worked_curves(), worked, 100.0);
    EXPECT_NEAR(slack.point.Q_star, 5.0, 1e-9);
    EXPECT_EQ(slack.point.lambda_star, 0.0);
    EXPECT_THROW(kuhn_tucker_optimize(worked_curves(), worked, 200.0), DomainError);
}

TEST(KuhnTucker, ShapeAndBracketErrors) {
    const auto convex_R = sample_curves([](double Q) { return Q * Q; }, [](double Q) { return Q * Q; }, 0.0, 10.0);
    EXPECT_THROW(kuhn_tucker_optimize(convex_R, worked), ShapeError);
    // Delta M keeps increasing on a short interval
    const auto short_c =
        sample_curves([](double Q) { return 10.0 * Q - Q * Q; }, [](double Q) { return Q * Q; }, 0.0, 1.0);
    EXPECT_THROW(kuhn_tucker_optimize(short_c, worked), BracketingError);
}

TEST(Npv, ConstantPerpetuity) {
    CashflowProfile p;
    p.R = {{0.0, std::numeric_limits<double>::infinity(), 3.0}};
    p.E = {{0.0, std::numeric_limits<double>::infinity(), 1.0}};
    p.I = {{0.0, 1.0, 15.0}};
    p.nu = 0.1;
    const auto r = npv(p);
    EXPECT_NEAR(r.DCF, 2.0 / 0.1, 1e-12);
    EXPECT_NEAR(r.NPV, 5.0, 1e-12);
    p.nu = 0.0;
    EXPECT_THROW(npv(p), DivergenceError);
    // zero net cash flow on an infinite horizon is finite
    p.E = {{0.0, std::numeric_limits<double>::infinity(), 3.0}};
    EXPECT_NEAR(npv(p).DCF, 0.0, 1e-15);
}

TEST(Npv, FiniteSegmentsAgainstQuadrature) {
    CashflowProfile p;
    p.R = {{0.0, 2.0, 1.0}, {2.0, 7.0, 4.0}};
    p.E = {{1.0, 5.0, 2.0}};
    p.nu = 0.07;
    p.horizon = 6.0;
    const auto rate = [](double t) { return (t < 2.0 ? 1.0 : 4.0) - (t >= 1.0 && t < 5.0 ? 2.0 : 0.0); };
    double q = 0.0;
    for (auto [a, b] : {std::pair{0.0, 1.0}, {1.0, 2.0}, {2.0, 5.0}, {5.0, 6.0}})
        q += numeric::integrate([&](double t) { return rate(0.5 * (a + b)) * std::exp(-0.07 * t); }, a, b);
    EXPECT_NEAR(npv(p).DCF, q, 1e-10);
}

TEST(Constraint, HeadroomNeedsDiscounting) {
    CashflowProfile p;
    p.R = {{0.0, 10.0, 10.0}};
    p.E = {{0.0, 10.0, 8.0}};
    p.I = {{0.0, 1.0, 50.0}};
    p.horizon = 10.0;
    p.T_I = 1.0;
    const KtParams k{7.0, 1.0, 1.0};
    p.nu = 0.0;
    const auto flat = constraint_compare(p, k);
    EXPECT_NEAR(flat.margin, 0.2, 1e-12);
    EXPECT_NEAR(flat.headroom_ratio, 7.0 / 0.2, 1e-9);
    p.nu = 0.1;
    const auto disc = constraint_compare(p, k);
    EXPECT_NEAR(disc.headroom_ratio, 7.0 * 10.0 * 0.1 / (0.2 * -std::expm1(-1.0)), 1e-9);
    EXPECT_GT(disc.headroom_ratio, flat.headroom_ratio);
    EXPECT_NEAR(disc.DCF_stylized, (1.0 / 7.0) * 0.2 * std::exp(-0.1) / 1.0 * 700.0, 1e-9);
    EXPECT_NEAR(disc.DeltaM_constraint_value, 700.0 - 50.0, 1e-9);
    const auto j = to_json(disc, k, p, {{"m_e", "cli"}});
    EXPECT_EQ(j["parameters"]["m_e"]["source"], "cli");
    EXPECT_EQ(j["parameters"]["nu"]["source"], "default");
    EXPECT_TRUE(j.contains("NPV_constraint_value"));
}
