#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "ecsim/dynamics.hpp"
#include "ecsim/error.hpp"
#include "ecsim/io/csv.hpp"
#include "ecsim/numeric.hpp"
#include "ecsim/random.hpp"

namespace ecsim::risk {

using EnergyMap = std::function<double(double)>;

struct DiffusionParams {
    double nu_c = 0.0;
    double sigma_c = 0.0;
    double kappa = 0.0;
    double T = 0.0;
    double omega_0 = 0.0;
    double J_0 = 0.0;
    bool high_temperature = false;  // set when T exceeds 0.1 * J_0 * omega_0
};

/// Adiabatic collision scalings with r = T / (J_0 omega_0):
///   nu_c = sqrt(r) omega_0,  sigma_c = sqrt(r) J_0,  kappa = r^{3/2} omega_0 J_0^2.
inline DiffusionParams diffusion_scalings(double T, double omega_0, double J_0) {
    if (!(T > 0.0) || !(omega_0 > 0.0) || !(J_0 > 0.0))
        throw DomainError("diffusion_scalings: T, omega_0 and J_0 must be positive");
    const double r = T / (J_0 * omega_0);
    if (r > 1.0) throw DomainError("diffusion_scalings: T must not exceed J_0 * omega_0");
    const double s = std::sqrt(r);
    DiffusionParams d;
    d.T = T;
    d.omega_0 = omega_0;
    d.J_0 = J_0;
    d.nu_c = s * omega_0;
    d.sigma_c = s * J_0;
    d.kappa = d.nu_c * d.sigma_c * d.sigma_c;
    d.high_temperature = r > 0.1;
    return d;
}

/// Scalings for a process whose true temperature T_e is hidden behind a
/// business-cycle rate: the effective ratio is (T_e / (omega_0 J_0))^{1/3}.
inline DiffusionParams business_cycle_scalings(double T_e, double omega_0, double J_0) {
    if (!(T_e > 0.0) || !(omega_0 > 0.0) || !(J_0 > 0.0))
        throw DomainError("business_cycle_scalings: inputs must be positive");
    const double r = std::cbrt(T_e / (omega_0 * J_0));
    return diffusion_scalings(r * omega_0 * J_0, omega_0, J_0);
}

// --- density grid ------------------------------------------------------------

struct DensityGrid {
    double j_min = 0.0;
    double j_max = 1.0;
    std::size_t n_cells = 0;
    std::vector<double> values;
    double t = 0.0;

    double width() const { return (j_max - j_min) / static_cast<double>(n_cells); }
    double center(std::size_t i) const { return j_min + (static_cast<double>(i) + 0.5) * width(); }

    double mass() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * width();
    }

    double mean() const {
        double s = 0.0;
        for (std::size_t i = 0; i < n_cells; ++i) s += values[i] * center(i);
        return s * width() / mass();
    }

    /// CDF of the cell-wise constant density.
    double cdf(double x) const {
        if (x <= j_min) return 0.0;
        const double h = width();
        double acc = 0.0;
        for (std::size_t i = 0; i < n_cells; ++i) {
            const double lo = j_min + static_cast<double>(i) * h;
            if (x < lo + h) return acc + values[i] * (x - lo);
            acc += values[i] * h;
        }
        return acc;
    }
};

inline DensityGrid make_grid(double j_min, double j_max, std::size_t n_cells) {
    if (!(j_max > j_min) || n_cells == 0) throw DomainError("make_grid: empty action interval");
    DensityGrid g;
    g.j_min = j_min;
    g.j_max = j_max;
    g.n_cells = n_cells;
    g.values.assign(n_cells, 0.0);
    return g;
}

/// Unit mass in the cell containing j0.
inline DensityGrid point_mass(double j_min, double j_max, std::size_t n_cells, double j0) {
    auto g = make_grid(j_min, j_max, n_cells);
    if (!(j0 >= j_min && j0 <= j_max)) throw DomainError("point_mass: j0 outside the grid");
    auto i = static_cast<std::size_t>((j0 - j_min) / g.width());
    i = std::min(i, n_cells - 1);
    g.values[i] = 1.0 / g.width();
    return g;
}

/// Normalized e^{-H/T} sampled at cell centers.
inline DensityGrid equilibrium_density(const EnergyMap& H, double T, double j_min, double j_max, std::size_t n_cells) {
    auto g = make_grid(j_min, j_max, n_cells);
    const double h0 = H(g.center(0));
    for (std::size_t i = 0; i < n_cells; ++i) g.values[i] = std::exp(-(H(g.center(i)) - h0) / T);
    const double m = g.mass();
    for (double& v : g.values) v /= m;
    return g;
}

inline double l1_distance(const DensityGrid& a, const DensityGrid& b) {
    if (a.n_cells != b.n_cells || a.j_min != b.j_min || a.j_max != b.j_max)
        throw ShapeError("l1_distance: grids differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.n_cells; ++i) s += std::abs(a.values[i] - b.values[i]);
    return s * a.width();
}

inline void write_density_csv(std::ostream& os, const DensityGrid& g) {
    io::CsvWriter w(os, {"J", "f"});
    for (std::size_t i = 0; i < g.n_cells; ++i) w.row({g.center(i), g.values[i]});
}

// --- Fokker-Planck solver ----------------------------------------------------
//
//   df/dt = d/dJ ( nu sigma(J) f ) + kappa d2f/dJ2,   sigma(J) = (sigma_c/nu) omega(J)
//
// so the advection velocity is -sigma_c omega(J). Fluxes live on cell faces:
// drift is donor-cell upwinded, diffusion is a two-point gradient, and both
// outer faces carry zero flux.

inline constexpr double kNegativeDensityTolerance = 1e-12;

inline std::vector<DensityGrid> fp_evolve(const EnergyMap& H, const DiffusionParams& params, const DensityGrid& f0,
                                          const std::vector<double>& output_times) {
    if (!(params.sigma_c > 0.0) || !(params.kappa >= 0.0))
        throw DomainError("fp_solve: sigma_c must be positive and kappa non-negative");
    if (f0.values.size() != f0.n_cells || f0.n_cells < 2) throw ShapeError("fp_solve: malformed density grid");
    if (std::abs(f0.mass() - 1.0) > 1e-8) throw DomainError("fp_solve: initial density is not normalized");
    const double h = f0.width();
    if (h > 0.25 * params.sigma_c) throw DomainError("fp_solve: grid does not resolve sigma_c (need width <= sigma_c/4)");
    for (double v : f0.values)
        if (!(v >= 0.0)) throw DomainError("fp_solve: initial density has negative or non-finite values");

    const std::size_t n = f0.n_cells;
    // velocity at interior face i+1/2, i = 0..n-2
    std::vector<double> vel(n - 1);
    double vmax = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double omega = (H(f0.center(i + 1)) - H(f0.center(i))) / h;
        vel[i] = -params.sigma_c * omega;
        vmax = std::max(vmax, std::abs(vel[i]));
    }
    const double dt_max = 0.9 / (2.0 * params.kappa / (h * h) + vmax / h);
    const double D = params.kappa / h;

    std::vector<DensityGrid> out;
    DensityGrid f = f0;
    std::vector<double> flux(n + 1, 0.0);
    double t_prev = 0.0;
    for (double target : output_times) {
        if (!(target >= t_prev)) throw DomainError("fp_solve: output times must be non-negative and increasing");
        const double span = target - t_prev;
        if (span > 0.0) {
            const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / dt_max)));
            const double dt = span / static_cast<double>(steps);
            const double c = dt / h;
            for (std::size_t s = 0; s < steps; ++s) {
                for (std::size_t i = 0; i + 1 < n; ++i) {
                    const double v = vel[i];
                    const double up = v > 0.0 ? f.values[i] : f.values[i + 1];
                    flux[i + 1] = v * up - D * (f.values[i + 1] - f.values[i]);
                }
                for (std::size_t i = 0; i < n; ++i) {
                    f.values[i] -= c * (flux[i + 1] - flux[i]);
                    if (f.values[i] < -kNegativeDensityTolerance)
                        throw NumericalError("fp_solve: solver instability, negative density in cell " +
                                             std::to_string(i));
                }
            }
        }
        f.t = f0.t + target;
        out.push_back(f);
        t_prev = target;
    }
    return out;
}

inline DensityGrid fp_solve(const EnergyMap& H, const DiffusionParams& params, const DensityGrid& f0, double t_end) {
    if (!(t_end >= 0.0)) throw DomainError("fp_solve: t_end must be non-negative");
    if (t_end == 0.0) return f0;
    return fp_evolve(H, params, f0, {t_end}).back();
}

// --- Monte Carlo -------------------------------------------------------------

struct McOptions {
    double dt = 0.01;
    double j_min = 0.0;                                        // reflecting
    double j_max = std::numeric_limits<double>::infinity();   // reflecting when finite
    unsigned threads = 0;                                      // 0: hardware concurrency
};

inline double local_frequency(const EnergyMap& H, double J) {
    const double d = 1e-6 * std::max(1.0, std::abs(J));
    return (H(J + d) - H(J - d)) / (2.0 * d);
}

inline double reflect(double J, double lo, double hi) {
    for (int k = 0; k < 64; ++k) {
        if (J < lo) J = 2.0 * lo - J;
        else if (J > hi) J = 2.0 * hi - J;
        else return J;
    }
    return std::clamp(J, lo, hi);
}

/// Reflected Euler-Maruyama path of dJ = -sigma_c omega(J) dt + sqrt(2 kappa) dW.
inline double langevin_path(const EnergyMap& H, const DiffusionParams& p, double j0, double t_end, std::uint64_t seed,
                            std::uint64_t index, const McOptions& opt, std::vector<double>* record = nullptr,
                            std::size_t record_stride = 1) {
    auto g = random::stream(seed, index);
    random::Gaussian normal;
    double J = j0;
    if (record) record->push_back(J);
    if (t_end <= 0.0) return J;
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / opt.dt));
    const double dt = t_end / static_cast<double>(steps);
    const double amp = std::sqrt(2.0 * p.kappa * dt);
    for (std::size_t s = 1; s <= steps; ++s) {
        J += -p.sigma_c * local_frequency(H, J) * dt + amp * normal(g);
        J = reflect(J, opt.j_min, opt.j_max);
        if (!std::isfinite(J)) throw IntegrationBlowup(s);
        if (record && s % record_stride == 0) record->push_back(J);
    }
    return J;
}

/// Terminal values of n_paths independent Langevin paths. Path i always uses
/// stream (seed, i), so the output is independent of thread scheduling.
inline std::vector<double> mc_ensemble(const EnergyMap& H, const DiffusionParams& params, double j0,
                                       std::size_t n_paths, double t_end, std::uint64_t seed,
                                       const McOptions& opt = {}) {
    if (n_paths == 0) throw DomainError("mc_ensemble: n_paths must be at least 1");
    if (!(params.kappa >= 0.0) || !(params.sigma_c >= 0.0)) throw DomainError("mc_ensemble: invalid diffusion parameters");
    if (!(t_end >= 0.0)) throw DomainError("mc_ensemble: t_end must be non-negative");
    if (!(opt.dt > 0.0)) throw DomainError("mc_ensemble: dt must be positive");
    std::vector<double> out(n_paths);
    unsigned workers = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_paths));
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = langevin_path(H, params, j0, t_end, seed, i, opt);
    };
    if (workers <= 1) {
        work(0, n_paths);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n_paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk, e = std::min(n_paths, b + chunk);
        pool.emplace_back([&, w, b, e] {
            try {
                work(b, e);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// --- forecasting ---------------------------------------------------------------

enum class ForecastMode { Diffusive, Conservative };

struct Realization {
    std::size_t id = 0;
    std::vector<double> t;
    std::vector<double> value;
};

struct ForecastRequest {
    ForecastMode mode = ForecastMode::Conservative;
    std::optional<dynamics::HamiltonianModel> model;  // Conservative
    std::optional<DiffusionParams> diffusion;         // Diffusive
    EnergyMap H;                                      // Diffusive landscape H(J)
    dynamics::PhaseState start;                       // Diffusive uses start.q as J
    double horizon = 0.0;
    std::size_t n_realizations = 0;
    std::uint64_t seed = 42;
    double dt = 0.01;
    std::size_t output_stride = 10;
};

/// Conservative realizations share the start's energy orbit and differ only in
/// phase; diffusive realizations are independent Langevin paths from the start.
inline std::vector<Realization> forecast(const ForecastRequest& req) {
    if (!(req.horizon > 0.0)) throw DomainError("forecast: horizon must be positive");
    if (!(req.dt > 0.0) || req.output_stride == 0) throw DomainError("forecast: dt and output stride must be positive");
    std::vector<Realization> out;
    if (req.n_realizations == 0) return out;
    const auto steps = static_cast<std::size_t>(std::ceil(req.horizon / req.dt));
    const double dt = req.horizon / static_cast<double>(steps);

    if (req.mode == ForecastMode::Conservative) {
        if (!req.model) throw ConfigurationError("forecast: conservative mode needs a Hamiltonian model");
        const auto& m = *req.model;
        const auto aa = dynamics::action_angle(m, req.start);
        for (std::size_t r = 0; r < req.n_realizations; ++r) {
            auto g = random::stream(req.seed, r);
            const double phase = aa.Q + numeric::kTwoPi * random::Gaussian::unit(g);
            auto s0 = dynamics::from_action_angle(m, aa.P, phase, req.start.t);
            const auto traj = dynamics::integrate_trajectory(m, s0, dt, steps);
            Realization real{r, {}, {}};
            for (std::size_t i = 0; i < traj.size(); i += req.output_stride) {
                real.t.push_back(traj[i].t);
                real.value.push_back(traj[i].q);
            }
            out.push_back(std::move(real));
        }
        return out;
    }

    if (!req.diffusion || !req.H) throw ConfigurationError("forecast: diffusive mode needs diffusion parameters and H(J)");
    McOptions opt;
    opt.dt = dt;
    for (std::size_t r = 0; r < req.n_realizations; ++r) {
        Realization real{r, {}, {}};
        langevin_path(req.H, *req.diffusion, req.start.q, req.horizon, req.seed, r, opt, &real.value, req.output_stride);
        for (std::size_t i = 0; i < real.value.size(); ++i)
            real.t.push_back(req.start.t + static_cast<double>(i * req.output_stride) * dt);
        out.push_back(std::move(real));
    }
    return out;
}

inline void write_realizations_csv(std::ostream& os, const std::vector<Realization>& set) {
    io::CsvWriter w(os, {"realization_id", "t", "value"});
    for (const auto& r : set)
        for (std::size_t i = 0; i < r.t.size(); ++i)
            w.cells({static_cast<long long>(r.id), r.t[i], r.value[i]});
}

}  // namespace ecsim::risk
