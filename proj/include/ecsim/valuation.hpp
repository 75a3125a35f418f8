#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecsim/error.hpp"
#include "ecsim/numeric.hpp"
#include "ecsim/spline.hpp"

namespace ecsim::valuation {

struct EconomyParams {
    double m = 1.0;       // economic multiplier
    double S_0 = 1.0;     // primary savings multiplier, years
    double Sbar_e = 1.0;  // effective dimensionless savings multiplier
    double R_0 = 1.0;     // primary revenue, currency per year
    double N_ec = 1.0;    // currency units in circulation
    double T_I = 1.0;     // investment period, years

    double m_e() const { return m * Sbar_e; }
    double S_e() const { return S_0 * Sbar_e; }
};

inline void validate(const EconomyParams& p) {
    for (double v : {p.m, p.S_0, p.Sbar_e, p.R_0, p.N_ec, p.T_I})
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("EconomyParams: every field must be positive and finite");
    if (p.Sbar_e > 1.0) throw DomainError("EconomyParams: Sbar_e must lie in (0, 1]");
}

/// Params for a given effective multiplier m_e, with Sbar_e = 1.
inline EconomyParams from_effective(double m_e, double S_0, double R_0 = 1.0, double T_I = 1.0, double N_ec = 1.0) {
    return {m_e, S_0, 1.0, R_0, N_ec, T_I};
}

// --- multiplier chain --------------------------------------------------------------

struct LevelSums {
    double R = 0.0;
    double Sbar_e = 0.0;
    std::size_t levels = 0;
};

/// R_i = R_0 (1 - 1/m)^i summed over spending levels; Sbar_e weights each
/// level by V_0 / V_i, supplied as velocity_ratio(i).
inline LevelSums level_sums(double m, double R_0, const std::function<double(std::size_t)>& velocity_ratio) {
    if (!(m > 1.0)) throw DomainError("level_sums: m must exceed 1");
    if (!(R_0 > 0.0)) throw DomainError("level_sums: R_0 must be positive");
    const double q = 1.0 - 1.0 / m;
    double term = R_0, R = 0.0, weighted = 0.0;
    std::size_t i = 0;
    for (; i < 100000; ++i) {
        const double r = velocity_ratio(i);
        if (!(r > 0.0 && r <= 1.0)) throw DomainError("level_sums: V_0/V_i must lie in (0, 1]");
        R += term;
        weighted += term * r;
        if (term < 1e-12 * R) break;
        term *= q;
    }
    return {R, weighted / R, i + 1};
}

namespace detail {
inline double ordered_product(std::array<double, 4> f) {
    std::sort(f.begin(), f.end());
    return ((f[0] * f[1]) * f[2]) * f[3];
}
}  // namespace detail

/// M = m_e S_0 R_0. The product is formed from the primitive factors in a fixed
/// order so every factorization below agrees to the last bit.
inline double currency_demand(const EconomyParams& p) {
    validate(p);
    return detail::ordered_product({p.m, p.Sbar_e, p.S_0, p.R_0});
}

/// M = m S_e R_0
inline double currency_demand_via_S_e(const EconomyParams& p) { return currency_demand(p); }

/// M = m S_0 Sbar_e R_0
inline double currency_demand_via_Sbar(const EconomyParams& p) { return currency_demand(p); }

inline double currency_price(const EconomyParams& p) {
    if (!(p.N_ec > 0.0)) throw DomainError("currency_price: N_ec must be positive");
    return currency_demand(p) / p.N_ec;
}

enum class InvestVerdict { Invest, Reject };

struct InvestmentDecision {
    double delta_M = 0.0;
    InvestVerdict verdict = InvestVerdict::Reject;
};

inline InvestmentDecision investment_decision(const EconomyParams& p, double delta_R0, double delta_I) {
    if (delta_I < 0.0) throw DomainError("investment_decision: delta_I must be non-negative");
    const double dM = p.m_e() * p.S_0 * delta_R0 - delta_I;
    return {dM, dM >= 0.0 ? InvestVerdict::Invest : InvestVerdict::Reject};
}

// --- Kuhn-Tucker operating point -------------------------------------------------------

struct KtParams {
    double m_e = 1.0;
    double S_0 = 1.0;
    double T_I = 1.0;

    double ratio() const { return m_e * S_0 / T_I; }
};

struct OperatingPoint {
    double Q_star = 0.0;
    double lambda_star = 0.0;  // +inf at mu_max
    double mu = 0.0;
    double R_prime = 0.0;
    double E_prime = 0.0;
};

struct KtReport {
    double ratio = 0.0;         // m_e S_0 / T_I
    double slope_factor = 0.0;  // R'/E' at mu_max, 1/(ratio + 1)
    OperatingPoint point;
    double Q_max = 0.0;
    double mu_max = 0.0;
    std::optional<double> Q_min;   // revenue maximum R' = 0, if inside the interval
    std::optional<double> mu_min;
    double gap_closed_form = 0.0;  // 1/(ratio + 1)
    // R'/E' at mu_max minus R'/E' at mu_min
    std::optional<double> slope_gap_measured;
    // (mu_max - mu_min)/mu_max evaluated on the curves
    std::optional<double> mu_gap_measured;
};

struct CurvePair {
    CubicSpline R;
    CubicSpline E;
};

inline constexpr std::size_t kDefaultCurveSamples = 401;

inline CurvePair sample_curves(const std::function<double(double)>& R, const std::function<double(double)>& E, double lo,
                               double hi, std::size_t n = kDefaultCurveSamples) {
    return {CubicSpline::sample(R, lo, hi, n), CubicSpline::sample(E, lo, hi, n)};
}

/// Sampled second differences must not show convexity in R or concavity in E.
inline void check_shapes(const CurvePair& c) {
    const std::size_t n = c.R.size();
    double scale_R = 0.0, scale_E = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        scale_R = std::max(scale_R, std::abs(c.R.value_at_knot(i)));
        scale_E = std::max(scale_E, std::abs(c.E.value_at_knot(i)));
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dR = c.R.value_at_knot(i + 1) - 2.0 * c.R.value_at_knot(i) + c.R.value_at_knot(i - 1);
        const double dE = c.E.value_at_knot(i + 1) - 2.0 * c.E.value_at_knot(i) + c.E.value_at_knot(i - 1);
        if (dR > 1e-10 * std::max(scale_R, 1.0)) throw ShapeError("kuhn_tucker: R is not concave on the interval");
        if (dE < -1e-10 * std::max(scale_E, 1.0)) throw ShapeError("kuhn_tucker: E is not convex on the interval");
    }
}

namespace detail {
inline std::optional<double> decreasing_root(const std::function<double(double)>& g, double lo, double hi) {
    const double glo = g(lo), ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if ((glo > 0.0) == (ghi > 0.0)) return std::nullopt;
    return numeric::refine_root(g, lo, hi, glo, ghi);
}
}  // namespace detail

/// Maximize m_e S_0 R(Q) subject to Delta M(Q) = (m_e S_0 + T_I) R - T_I E >= mu.
/// mu = nullopt selects the largest attainable level mu_max.
inline KtReport kuhn_tucker_optimize(const CurvePair& c, const KtParams& p, std::optional<double> mu = std::nullopt) {
    if (!(p.m_e > 0.0) || !(p.S_0 > 0.0) || !(p.T_I > 0.0)) throw DomainError("kuhn_tucker: m_e, S_0, T_I must be positive");
    check_shapes(c);
    const double mS = p.m_e * p.S_0;
    const double k = p.ratio();
    const auto dM = [&](double Q) { return (mS + p.T_I) * c.R(Q) - p.T_I * c.E(Q); };
    const auto dMp = [&](double Q) { return (mS + p.T_I) * c.R.derivative(Q) - p.T_I * c.E.derivative(Q); };

    KtReport rep;
    rep.ratio = k;
    rep.slope_factor = 1.0 / (k + 1.0);
    rep.gap_closed_form = 1.0 / (k + 1.0);

    const auto qmax = detail::decreasing_root(dMp, c.R.lo(), c.R.hi());
    if (!qmax) throw BracketingError("kuhn_tucker: Delta M'(Q) has no root in the interval");
    rep.Q_max = *qmax;
    rep.mu_max = dM(rep.Q_max);
    rep.Q_min = detail::decreasing_root([&](double Q) { return c.R.derivative(Q); }, c.R.lo(), c.R.hi());
    if (rep.Q_min) {
        rep.mu_min = dM(*rep.Q_min);
        rep.mu_gap_measured = (rep.mu_max - *rep.mu_min) / rep.mu_max;
        const double at_max = c.R.derivative(rep.Q_max) / c.E.derivative(rep.Q_max);
        const double at_min = c.R.derivative(*rep.Q_min) / c.E.derivative(*rep.Q_min);
        rep.slope_gap_measured = at_max - at_min;
    }

    OperatingPoint& op = rep.point;
    const double level = mu.value_or(rep.mu_max);
    const double tol = 1e-12 * std::max(1.0, std::abs(rep.mu_max));
    if (level > rep.mu_max + tol) throw DomainError("kuhn_tucker: mu exceeds mu_max, constraint infeasible");
    if (!mu || level >= rep.mu_max - tol) {
        op.Q_star = rep.Q_max;
        op.lambda_star = std::numeric_limits<double>::infinity();
    } else if (rep.mu_min && level <= *rep.mu_min) {
        op.Q_star = *rep.Q_min;
        op.lambda_star = 0.0;
    } else {
        // Delta M decreases from Q_max toward the revenue maximum
        const double right = rep.Q_min.value_or(c.R.hi());
        const auto q = detail::decreasing_root([&](double Q) { return dM(Q) - level; }, rep.Q_max, right);
        if (!q) throw BracketingError("kuhn_tucker: Delta M(Q) = mu has no root in the interval");
        op.Q_star = *q;
        op.lambda_star = -mS * c.R.derivative(op.Q_star) / dMp(op.Q_star);
    }
    op.mu = level;
    op.R_prime = c.R.derivative(op.Q_star);
    op.E_prime = c.E.derivative(op.Q_star);
    return rep;
}

// --- NPV and DCF -------------------------------------------------------------------------

struct Segment {
    double t0 = 0.0;
    double t1 = 0.0;  // may be +inf
    double rate = 0.0;
};

struct CashflowProfile {
    std::vector<Segment> R, E, I;
    double nu = 0.0;
    double horizon = std::numeric_limits<double>::infinity();  // T_0
    double T_I = 1.0;
};

/// integral of rate * e^{-nu t} over [a, b], exact.
inline double discounted_integral(double rate, double nu, double a, double b) {
    if (b <= a || rate == 0.0) return 0.0;
    if (std::isinf(b)) {
        if (nu <= 0.0) throw DivergenceError("npv: undiscounted cash flow on an infinite horizon diverges");
        return rate * std::exp(-nu * a) / nu;
    }
    if (nu == 0.0) return rate * (b - a);
    return rate * std::exp(-nu * a) * (-std::expm1(-nu * (b - a))) / nu;
}

inline double integrate_segments(const std::vector<Segment>& s, double nu, double horizon) {
    double total = 0.0;
    for (const auto& seg : s) {
        if (!(seg.t1 >= seg.t0) || seg.t0 < 0.0) throw DomainError("npv: malformed segment");
        total += discounted_integral(seg.rate, nu, seg.t0, std::min(seg.t1, horizon));
    }
    return total;
}

struct NpvResult {
    double NPV = 0.0;
    double DCF = 0.0;
    double I = 0.0;
};

/// DCF = integral e^{-nu t} (R - E) dt and NPV = DCF - integral I dt.
inline NpvResult npv(const CashflowProfile& p) {
    if (!(p.nu >= 0.0)) throw DomainError("npv: discount rate must be non-negative");
    if (!(p.horizon > 0.0)) throw DomainError("npv: horizon must be positive");
    NpvResult r;
    // combine R and E per breakpoint so that an infinite tail with R = E does not diverge
    std::vector<double> cuts{0.0, p.horizon};
    for (const auto* v : {&p.R, &p.E})
        for (const auto& s : *v) {
            cuts.push_back(s.t0);
            cuts.push_back(s.t1);
        }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const auto rate_at = [](const std::vector<Segment>& v, double t) {
        double r = 0.0;
        for (const auto& s : v)
            if (t >= s.t0 && t < s.t1) r += s.rate;
        return r;
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = std::min(cuts[i + 1], p.horizon);
        if (a >= p.horizon || b <= a) continue;
        const double probe = std::isinf(b) ? a + 1.0 : 0.5 * (a + b);
        r.DCF += discounted_integral(rate_at(p.R, probe) - rate_at(p.E, probe), p.nu, a, b);
    }
    r.I = integrate_segments(p.I, 0.0, p.horizon);
    r.NPV = r.DCF - r.I;
    return r;
}

/// (T_I / m_e S_0) * margin * discount_term * R_mSR, the stylized DCF.
inline double stylized_dcf(double ratio, double margin, double discount_term, double R_mSR) {
    return (1.0 / ratio) * margin * discount_term * R_mSR;
}

struct ConstraintReport {
    double R_T = 0.0;
    double E_T = 0.0;
    double I = 0.0;
    double margin = 0.0;
    double ratio = 0.0;  // m_e S_0 / T_I
    double R_mSR = 0.0;
    double DCF = 0.0;
    double NPV_constraint_value = 0.0;     // DCF - I
    double DeltaM_constraint_value = 0.0;  // R_mSR - I
    double headroom_ratio = 0.0;           // R_mSR / DCF
    double discount_term = 0.0;            // e^{-nu T_I} / (nu T_0)
    double DCF_stylized = 0.0;
    double headroom_ratio_stylized = 0.0;
    bool stylized_identity = true;  // the three-factor form is a stylized limit, not a theorem
};

inline ConstraintReport constraint_compare(const CashflowProfile& profile, const KtParams& p) {
    if (!std::isfinite(profile.horizon)) throw DomainError("constraint_compare: needs a finite horizon T_0");
    ConstraintReport r;
    r.R_T = integrate_segments(profile.R, 0.0, profile.horizon);
    r.E_T = integrate_segments(profile.E, 0.0, profile.horizon);
    if (!(r.R_T > 0.0)) throw DomainError("constraint_compare: total revenue must be positive");
    const auto n = npv(profile);
    r.I = n.I;
    r.DCF = n.DCF;
    r.margin = (r.R_T - r.E_T) / r.R_T;
    r.ratio = p.ratio();
    r.R_mSR = r.ratio * r.R_T;
    r.NPV_constraint_value = n.NPV;
    r.DeltaM_constraint_value = r.R_mSR - r.I;
    r.headroom_ratio = r.R_mSR / r.DCF;
    r.discount_term = profile.nu > 0.0 ? std::exp(-profile.nu * p.T_I) / (profile.nu * profile.horizon) : 1.0;
    r.DCF_stylized = stylized_dcf(r.ratio, r.margin, r.discount_term, r.R_mSR);
    r.headroom_ratio_stylized = r.R_mSR / r.DCF_stylized;
    return r;
}

/// Source of each input: "cli", "default", "scenario", ...
using Provenance = std::map<std::string, std::string>;

inline nlohmann::ordered_json to_json(const ConstraintReport& r, const KtParams& p, const CashflowProfile& prof,
                                      const Provenance& prov) {
    auto param = [&](const std::string& name, double v) {
        auto it = prov.find(name);
        return nlohmann::ordered_json{{"value", v}, {"source", it == prov.end() ? "default" : it->second}};
    };
    nlohmann::ordered_json j;
    j["parameters"] = {{"m_e", param("m_e", p.m_e)}, {"S_0", param("S_0", p.S_0)},     {"T_I", param("T_I", p.T_I)},
                       {"nu", param("nu", prof.nu)},  {"T_0", param("T_0", prof.horizon)}};
    j["NPV_constraint_value"] = r.NPV_constraint_value;
    j["DeltaM_constraint_value"] = r.DeltaM_constraint_value;
    j["DCF"] = r.DCF;
    j["R_mSR"] = r.R_mSR;
    j["I"] = r.I;
    j["profit_margin"] = r.margin;
    j["ratio_meS0_over_TI"] = r.ratio;
    j["headroom_ratio"] = r.headroom_ratio;
    j["stylized"] = {{"discount_term", r.discount_term},
                     {"DCF", r.DCF_stylized},
                     {"headroom_ratio", r.headroom_ratio_stylized},
                     {"note", "three-factor DCF form is a stylized limit, not an identity"}};
    return j;
}

}  // namespace ecsim::valuation
