// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ecsim/control.hpp"
#include "ecsim/dynamics.hpp"
#include "ecsim/ledger.hpp"
#include "ecsim/risk.hpp"
#include "ecsim/stats.hpp"
#include "ecsim/valuation.hpp"

using namespace ecsim;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
    void near(double got, double want, double tol, const std::string& what) {
        expect(std::abs(got - want) <= tol, what + " = " + std::to_string(got) + ", want " + std::to_string(want));
    }
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail << " [exception: " << e.what() << "]";
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0.0) c.expect(elapsed < budget_s, "runtime budget " + std::to_string(budget_s) + " s");
    if (!c.ok) ++failures;
    std::printf("%s %2d %-28s %.2fs |%s\n", c.ok ? "PASS" : "FAIL", id, name, elapsed, c.detail.str().c_str());
    std::fflush(stdout);
}

valuation::CurvePair worked_curves() {
    return valuation::sample_curves([](double Q) { return 10.0 * Q - Q * Q; }, [](double Q) { return Q * Q; }, 0.0, 10.0);
}

}  // namespace

int main() {
    criterion(1, "kuhn-tucker-ratio", 1.0, [](Check& c) {
        const valuation::KtParams p{3.5, 2.0, 1.0};
        const auto r = valuation::kuhn_tucker_optimize(worked_curves(), p);
        c.near(r.ratio, 7.0, 1e-6, "ratio");
        // slope relation measured at the optimizer's operating point
        c.near(r.point.R_prime / r.point.E_prime, 1.0 / 8.0, 1e-6, "R'/E'");
        c.near(r.gap_closed_form, 1.0 / 8.0, 1e-6, "gap");
        c.expect(r.slope_gap_measured.has_value(), "slope gap available");
        if (r.slope_gap_measured) c.near(*r.slope_gap_measured, 1.0 / 8.0, 1e-6, "slope gap between regimes");
        c.detail << " ratio=" << r.ratio << " R'/E'=" << r.point.R_prime / r.point.E_prime
                 << " slope_gap=" << r.slope_gap_measured.value_or(NAN);
        if (r.mu_gap_measured) c.detail << " (level gap on these curves " << *r.mu_gap_measured << ")";
    });

    criterion(2, "target-energy-contrast", 1.0, [](Check& c) {
        const valuation::KtParams p{2.0, 1.0 / 20.0, 1.0};
        const auto r = valuation::kuhn_tucker_optimize(worked_curves(), p);
        c.near(r.ratio, 0.1, 1e-6, "ratio");
        c.near(r.point.R_prime / r.point.E_prime, 10.0 / 11.0, 1e-6, "R'/E'");
        c.detail << " ratio=" << r.ratio << " R'/E'=" << r.point.R_prime / r.point.E_prime;
    });

    criterion(3, "ledger-golden-checkpoints", 1.0, [](Check& c) {
        const auto snaps = ledger::run_scenario(ledger::new_energy());
        const auto at = [&](double t) -> const ledger::MetricsSnapshot* {
            for (const auto& s : snaps)
                if (s.t == t) return &s;
            return nullptr;
        };
        const auto* y8 = at(8.0);
        const auto* y14 = at(14.0);
        c.expect(y8 && y14, "checkpoints 8 and 14 present");
        if (!y8 || !y14) return;
        ledger::Money ip;
        for (const auto& e : y8->world.entities())
            if (e.role != ledger::Role::External) ip += e[ledger::AccountClass::IntangibleIP];
        c.expect(y8->liquid_reserves.millions() == 135500, "year-8 cash");
        c.expect(y8->capital_reserves.millions() == 87000, "year-8 capital");
        c.expect(ip.millions() == 13000, "year-8 IP");
        c.expect(y8->ec_supply.millions() == 125500, "year-8 EC");
        c.expect(y8->total_value.millions() == 222500, "year-8 value");
        c.expect(y14->ec_supply.millions() == 1667500, "year-14 EC");
        c.expect(y14->total_value.millions() == 2124500, "year-14 value");
        c.expect(y14->liquid_reserves.millions() == 742500, "year-14 cash");
        c.expect(y14->capital_reserves.millions() == 1382000, "year-14 capital");
        double min_liquid = INFINITY, min_total = INFINITY;
        for (const auto& s : snaps) {
            if (!s.liquid_ratio) continue;
            min_liquid = std::min(min_liquid, *s.liquid_ratio);
            min_total = std::min(min_total, *s.total_ratio);
        }
        c.expect(min_liquid >= 0.10, "liquid ratio >= 10%");
        c.expect(min_total >= 1.00, "total ratio >= 100%");
        c.detail << " y8 value=" << y8->total_value.str() << " y14 value=" << y14->total_value.str()
                 << " min liquid=" << min_liquid << " min total=" << min_total;
    });

    criterion(4, "growth-and-multiplier", 0.0, [](Check& c) {
        const auto sc = ledger::new_energy();
        const auto snaps = ledger::run_scenario(sc);
        const auto g = ledger::growth_fit(ledger::window(snaps, ledger::kGrowthFrom, ledger::kGrowthTo), sc.cap_table);
        c.expect(g.rate >= 0.35 && g.rate <= 0.45, "growth rate in [0.35, 0.45]");
        const auto& last = snaps.back();
        c.expect(last.m_e_observed.has_value(), "m_e observed");
        const double m_e = last.m_e_observed.value_or(0.0);
        c.expect(std::abs(m_e - 3.5) <= 0.02 * 3.5, "m_e within 2% of 3.5");
        c.detail << " rate=" << g.rate << " m_e=" << m_e << " (" << last.ec_supply.str() << "/"
                 << last.primary_savings.str() << ")";
    });

    criterion(5, "fokker-planck-equilibrium", 30.0, [](Check& c) {
        const auto p = risk::diffusion_scalings(1.0, std::sqrt(10.0), std::sqrt(10.0));
        const risk::EnergyMap H = [](double J) { return J; };
        const double t_end = 20.0 / p.nu_c;
        const auto f = risk::fp_solve(H, p, risk::point_mass(0.0, 20.0, 1000, 1.0), t_end);
        auto exact = risk::make_grid(0.0, 20.0, 1000);
        double norm = 0.0;
        for (std::size_t i = 0; i < exact.n_cells; ++i) norm += std::exp(-exact.center(i)) * exact.width();
        for (std::size_t i = 0; i < exact.n_cells; ++i) exact.values[i] = std::exp(-exact.center(i)) / norm;
        const double l1 = risk::l1_distance(f, exact);
        c.expect(l1 <= 0.05, "L1 to e^-J");
        c.near(f.mass(), 1.0, 1e-8, "mass");
        const auto samples = risk::mc_ensemble(H, p, 1.0, 100000, t_end, 42);
        const double ks = stats::ks_statistic(samples, [&](double x) { return f.cdf(x); });
        c.expect(ks <= 0.02, "KS MC vs PDE");
        c.detail << " L1=" << l1 << " mass-1=" << f.mass() - 1.0 << " KS=" << ks;
    });

    criterion(6, "diffusion-scalings", 1.0, [](Check& c) {
        std::mt19937_64 g(2024);
        std::uniform_real_distribution<double> logu(std::log(0.01), std::log(100.0)), r(1e-6, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double w = std::exp(logu(g)), J = std::exp(logu(g)), T = r(g) * w * J;
            const auto d = risk::diffusion_scalings(T, w, J);
            const double s = std::sqrt(T / (J * w));
            worst = std::max({worst, std::abs(d.kappa - d.nu_c * d.sigma_c * d.sigma_c) / d.kappa,
                              std::abs(d.nu_c / w - s) / s, std::abs(d.sigma_c / J - s) / s});
        }
        c.expect(worst <= 1e-12, "relative identity error");
        c.detail << " draws=100 worst relative error=" << worst;
    });

    criterion(7, "kapitza-stabilization", 60.0, [](Check& c) {
        const auto model = dynamics::pendulum();
        const control::ControlPolicy none;
        const auto free = control::stabilize_run(model, none, {std::numbers::pi + 0.01, 0.0, 0.0}, 10 * numeric::kTwoPi, 42);
        c.expect(free.first_exit_time > 0.0, "uncontrolled departs within 10 periods");
        const std::vector<double> amps{0.0, 20.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0};
        const auto sweep = control::kapitza_sweep(amps, 42, 200);
        const auto th = control::sweep_threshold(sweep);
        c.expect(th.has_value(), "sweep has a threshold");
        c.expect(control::sweep_monotone(sweep), "verdict monotone in amplitude");
        double worst = 1.0;
        for (const auto& s : sweep)
            if (th && s.amplitude >= *th) worst = std::min(worst, s.stabilized_fraction);
        c.expect(worst >= 0.95, ">= 95% of 200 seeds above threshold");
        c.detail << " exit t=" << free.first_exit_time << " threshold=" << th.value_or(NAN)
                 << " min fraction above=" << worst << " fractions:";
        for (const auto& s : sweep) c.detail << ' ' << s.amplitude << ':' << s.stabilized_fraction;
    });

    criterion(8, "dissipation-topology", 30.0, [](Check& c) {
        const auto m = dynamics::double_well_action();
        const control::EquilibriumDomain dom;
        std::size_t prev = SIZE_MAX;
        bool monotone = true;
        for (int i = 0; i <= 60; ++i) {
            const auto n = control::equilibrium_count(m, 0.05 * i, dom);
            monotone = monotone && n <= prev;
            prev = n;
        }
        c.expect(monotone, "count non-increasing in nu");
        c.expect(prev == 1, "single zero-point at large nu");
        const double nu_cr = control::critical_nu(m, 0.0, 3.0, dom);
        c.expect(std::isfinite(nu_cr) && nu_cr > 0.0, "finite nu_cr");
        c.expect(control::equilibrium_count(m, nu_cr * 1.01, dom) == 1, "one equilibrium just above nu_cr");
        double worst = 0.0;
        for (double nu : {1.05 * nu_cr, 1.5 * nu_cr, 2.0 * nu_cr, 3.0 * nu_cr}) {
            const auto mn = control::embed_dissipation(m, nu);
            for (double P0 = -1.9; P0 <= 1.91; P0 += 0.2) {
                const double dt = 1e-3;
                const auto n = static_cast<std::size_t>(std::ceil(10.0 / nu / dt));
                const auto traj = control::damped_trajectory(m, nu, {0.0, P0, 0.0}, dt, n);
                worst = std::max(worst, std::abs(mn.action_energy(traj.back().p)) / std::abs(mn.action_energy(P0)));
            }
        }
        c.expect(worst < 0.01, "|E| < 1% of initial by t = 10/nu");
        c.detail << " nu_cr=" << nu_cr << " worst |E|/|E0|=" << worst;
    });

    criterion(9, "faser-arithmetic", 1.0, [](Check& c) {
        std::mt19937_64 g(9);
        std::uniform_real_distribution<double> u(-100.0, 100.0);
        double worst = 0.0;
        int bad_sign = 0;
        for (int i = 0; i < 1000; ++i) {
            std::vector<double> lv{u(g), u(g), u(g)};
            std::sort(lv.begin(), lv.end());
            const control::FaserLevels L{u(g), lv[1], lv[2], lv[0]};
            const double want = (L.E_star - L.E_d) - (L.E_p - L.E_star);
            worst = std::max(worst, std::abs(control::faser_gain(L, true) - want));
            if (L.E_p > L.E_0 && !(control::faser_gain(L, false) < 0.0)) ++bad_sign;
        }
        c.expect(worst <= 1e-12, "excited gain formula");
        c.expect(bad_sign == 0, "ground-state gain negative");
        c.detail << " cases=1000 worst error=" << worst << " ground-state sign violations=" << bad_sign;
    });

    criterion(10, "heat-pump-arbitrage", 0.0, [](Check& c) {
        double min_profit = INFINITY, max_var_ratio = 0.0;
        int bad = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            control::ArbitrageConfig cfg;
            cfg.seed = seed;
            cfg.y0 = 2.0;
            cfg.noise = 1.0;
            cfg.impact = 0.2;
            cfg.record_stride = 0;
            const auto r = control::arbitrage_run(cfg);
            min_profit = std::min(min_profit, r.whole_cycle_profit);
            max_var_ratio = std::max(max_var_ratio, r.variance_controlled / r.variance_uncontrolled);
            bad += !(r.whole_cycle_profit >= 0.0 && r.variance_controlled < r.variance_uncontrolled);
        }
        c.expect(bad == 0, "profit >= 0 and variance reduced on every seed");
        c.detail << " seeds=100 min profit=" << min_profit << " max variance ratio=" << max_var_ratio;
    });

    criterion(11, "optimizer-oracle", 0.0, [](Check& c) {
        std::mt19937_64 g(11);
        std::uniform_real_distribution<double> u(0.5, 2.0);
        std::uniform_real_distribution<double> k(0.1, 10.0);
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            // concave revenue, convex cost, alternating between polynomial and exponential families
            const double a = u(g), b = u(g), e = u(g), ratio = k(g);
            std::function<double(double)> R, E;
            if (i % 2 == 0) {
                R = [=](double Q) { return a * (10.0 * Q - 0.5 * b * Q * Q); };
                E = [=](double Q) { return e * Q * Q + 0.1 * Q * Q * Q; };
            } else {
                R = [=](double Q) { return 10.0 * a * (1.0 - std::exp(-b * Q / 4.0)); };
                E = [=](double Q) { return e * (std::exp(Q / 4.0) - 1.0); };
            }
            const double lo = 0.0, hi = 10.0;
            const valuation::KtParams p{ratio, 1.0, 1.0};
            const auto r = valuation::kuhn_tucker_optimize(valuation::sample_curves(R, E, lo, hi), p);
            const int n = 100000;
            const double h = (hi - lo) / n;
            double best = -INFINITY, best_Q = lo;
            for (int j = 0; j <= n; ++j) {
                const double Q = lo + j * h;
                const double v = (ratio + 1.0) * R(Q) - E(Q);
                if (v > best) best = v, best_Q = Q;
            }
            const double err = std::abs(r.point.Q_star - best_Q) / h;
            worst = std::max(worst, err);
            c.expect(err <= 1.0, "instance " + std::to_string(i) + " Q* off by " + std::to_string(err) + " grid steps");
        }
        c.detail << " instances=20 worst |Q*-Q_grid|/spacing=" << worst;
    });

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
