#pragma once

// Decay fits, decay envelopes, the smallness condition for exponential decay,
// sup bounds, and numerical oracles for the functional inequalities
//
//   a ||f||^2 <= ||f_x||^2,  a^2 ||f||^2 <= ||f_xx||^2,  a ||f_x||^2 <= ||f_xx||^2   (f = 0 at both ends)
//   ||f||_inf <= sqrt(2) ||f_xx||^{1/4} ||f||^{3/4}                                 (f = f_x = 0 at both ends)
//   ||D^i f|| <= A1 ||D^5 f||^{i/5} ||f||^{1 - i/5} + A2 ||f||                       (constants reported only)

#include "benney/domain.hpp"
#include "benney/energy.hpp"
#include "benney/operators.hpp"
#include "benney/stepper.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace benney {

// --- decay fit ------------------------------------------------------------

struct DecayFit {
    double lambda_hat = std::numeric_limits<double>::quiet_NaN();
    double t_start = 0.0, t_end = 0.0;
    double r_squared = 0.0;
    std::optional<double> lambda_theory;
    bool underflow = false;
    int points = 0;
};

/// Smallest value of ||u||^2 treated as a live solution in a fit.
inline constexpr double fit_floor = 1e-290;

/// Least squares on log y(t) over [t_start, t_end]: lambda_hat = -slope.
inline DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y, double t_start, double t_end) {
    DecayFit f;
    f.t_start = t_start;
    f.t_end = t_end;
    double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
    int m = 0;
    for (std::size_t i = 0; i < t.size() && i < y.size(); ++i) {
        if (t[i] < t_start || t[i] > t_end) continue;
        if (!(y[i] > fit_floor)) {
            f.underflow = true;
            return f;
        }
        const double ly = std::log(y[i]);
        st += t[i];
        sy += ly;
        stt += t[i] * t[i];
        sty += t[i] * ly;
        syy += ly * ly;
        ++m;
    }
    f.points = m;
    if (m < 2) return f;
    const double n = m, den = n * stt - st * st;
    if (!(den > 0.0)) return f;
    const double slope = (n * sty - st * sy) / den;
    const double intercept = (sy - slope * st) / n;
    f.lambda_hat = -slope;
    double ss_res = 0, ss_tot = syy - sy * sy / n;
    for (std::size_t i = 0; i < t.size() && i < y.size(); ++i) {
        if (t[i] < t_start || t[i] > t_end) continue;
        const double e = std::log(y[i]) - (intercept + slope * t[i]);
        ss_res += e * e;
    }
    f.r_squared = ss_tot > 1e-300 * n ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    return f;
}

inline DecayFit fit_decay(const TimeSeries& s, double t_start, double t_end,
                          std::optional<StabilityParams> params = std::nullopt) {
    std::vector<double> y;
    y.reserve(s.records.size());
    for (const auto& r : s.records) y.push_back(r.l2_sq);
    auto f = fit_decay(s.times, y, t_start, t_end);
    if (params) f.lambda_theory = predicted_decay_rate(*params);
    return f;
}

// --- envelopes ------------------------------------------------------------

enum class CheckStatus { Holds, Violated, NotApplicable, ConditionNotMet };

inline std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Holds: return "Holds";
        case CheckStatus::Violated: return "Violated";
        case CheckStatus::NotApplicable: return "NotApplicable";
        case CheckStatus::ConditionNotMet: return "ConditionNotMet";
    }
    return "?";
}

struct EnvelopeReport {
    CheckStatus status = CheckStatus::NotApplicable;
    bool pointwise = false;   // exponential envelope
    bool cumulative = false;  // value plus dissipated integral
    // min over t of 1 - value / bound for each branch; negative means violated.
    double pointwise_margin = std::numeric_limits<double>::infinity();
    double cumulative_margin = std::numeric_limits<double>::infinity();
    double worst_time = 0.0;

    bool holds() const { return status == CheckStatus::Holds; }
    double worst_margin() const { return std::min(pointwise_margin, cumulative_margin); }
};

namespace detail {

inline void finish(EnvelopeReport& r) {
    r.pointwise = r.pointwise_margin >= 0.0;
    r.cumulative = r.cumulative_margin >= 0.0;
    r.status = r.pointwise && r.cumulative ? CheckStatus::Holds : CheckStatus::Violated;
}

inline double margin(double value, double bound) {
    if (bound > 0.0) return 1.0 - value / bound;
    return value <= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// ||u||^2(t) <= ||u0||^2 e^{-2 a^2 theta t} (1 + tol) and
/// ||u||^2(t) + 2 theta int_0^t ||u_xx||^2 <= ||u0||^2 (1 + tol), trapezoid in time.
inline EnvelopeReport check_decay_envelope(const TimeSeries& s, const StabilityParams& p, double tol = 0.05) {
    EnvelopeReport r;
    if (!(p.theta > 0.0) || s.records.empty()) return r;
    const double e0 = s.records.front().l2_sq;
    const double rate = *predicted_decay_rate(p);
    double integral = 0.0;
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        const auto& rec = s.records[i];
        if (i > 0) {
            const auto& prev = s.records[i - 1];
            integral += 0.5 * (rec.t - prev.t) * (rec.dxx_sq + prev.dxx_sq);
        }
        const double mp = detail::margin(rec.l2_sq, e0 * std::exp(-rate * rec.t) * (1.0 + tol));
        const double mc = detail::margin(rec.l2_sq + 2.0 * p.theta * integral, e0 * (1.0 + tol));
        if (std::min(mp, mc) < r.worst_margin()) r.worst_time = rec.t;
        r.pointwise_margin = std::min(r.pointwise_margin, mp);
        r.cumulative_margin = std::min(r.cumulative_margin, mc);
    }
    detail::finish(r);
    return r;
}

// --- smallness ------------------------------------------------------------

enum class SmallnessRegime { kLess8, kEquals8, NotApplicable };

inline std::string to_string(SmallnessRegime r) {
    switch (r) {
        case SmallnessRegime::kLess8: return "k<8";
        case SmallnessRegime::kEquals8: return "k=8";
        case SmallnessRegime::NotApplicable: return "NotApplicable";
    }
    return "?";
}

struct SmallnessReport {
    int k = 1;
    double theta = 0.0;
    double a = 0.0;
    double lhs_value = std::numeric_limits<double>::quiet_NaN();
    bool satisfied = false;
    SmallnessRegime regime = SmallnessRegime::NotApplicable;
    double u0_norm = 0.0;
    double ut0_norm = 0.0;
    std::string note = "mixed term read as ||u0||^2 ||u_t(0)||^2";
};

/// Left side of the smallness condition from ||u0|| and ||u_t(0)||.
///   k < 8: theta - 2^{k-2}/(a theta) [k ||u0||^2 ||u_t(0)||^2 / theta^2 + (8-k) ||u0||^{12k/(8-k)}]
///   k = 8: theta - 2^8/(a theta^3) ||u0||^14 ||u_t(0)||^2
inline SmallnessReport smallness_from_norms(double u0_norm, double ut0_norm, int k, const StabilityParams& p) {
    SmallnessReport r;
    r.k = k;
    r.theta = p.theta;
    r.a = p.a;
    r.u0_norm = u0_norm;
    r.ut0_norm = ut0_norm;
    if (k < 1 || k > 8 || !(p.theta > 0.0)) return r;
    const double u2 = u0_norm * u0_norm, ut2 = ut0_norm * ut0_norm, th = p.theta;
    if (k < 8) {
        r.regime = SmallnessRegime::kLess8;
        const double bracket = k * u2 * ut2 / (th * th) + (8 - k) * std::pow(u0_norm, 12.0 * k / (8.0 - k));
        r.lhs_value = th - std::ldexp(1.0, k - 2) / (p.a * th) * bracket;
    } else {
        r.regime = SmallnessRegime::kEquals8;
        r.lhs_value = th - 256.0 / (p.a * th * th * th) * std::pow(u0_norm, 14) * ut2;
    }
    r.satisfied = r.lhs_value > 0.0;
    return r;
}

/// u_t(0) from the equation at t = 0 (boundary-free stencils), then the
/// branch for k. The datum should be the sampled initial condition.
inline SmallnessReport smallness_check(const GridFunction& u0, int k, const StabilityParams& p, Coefficients c,
                                       NonlinearMode mode = NonlinearMode::SkewSplit) {
    c.k = std::max(k, 1);
    const double ut = k >= 1 && k <= 8 && p.theta > 0.0 ? norm_l2(initial_time_derivative(u0, c, mode)) : 0.0;
    return smallness_from_norms(norm_l2(u0), ut, k, p);
}

struct SmallnessThreshold {
    double amplitude = 0.0;  // largest amplitude with the condition satisfied
    int iterations = 0;
    bool found = false;
};

/// Bisection over c for the datum c * shape (lhs strictly decreasing in c).
inline SmallnessThreshold smallness_threshold(const GridFunction& shape, int k, const StabilityParams& p,
                                              const Coefficients& c, NonlinearMode mode = NonlinearMode::SkewSplit) {
    SmallnessThreshold out;
    if (k < 1 || k > 8 || !(p.theta > 0.0) || sup_norm(shape) == 0.0) return out;
    auto lhs = [&](double amp) {
        GridFunction u = shape;
        for (double& v : u.values) v *= amp;
        return smallness_check(u, k, p, c, mode).lhs_value;
    };
    // Bracket [lo, hi] with lhs(lo) > 0 >= lhs(hi).
    double lo = 1.0, hi = 1.0;
    if (lhs(1.0) > 0.0) {
        while (lhs(hi) > 0.0 && hi < 1e300) hi *= 2.0;
        lo = 0.5 * hi;
    } else {
        while (lhs(lo) <= 0.0 && lo > 1e-300) lo *= 0.5;
        hi = 2.0 * lo;
    }
    for (out.iterations = 0; out.iterations < 200 && hi - lo > 1e-14 * hi; ++out.iterations) {
        const double mid = 0.5 * (lo + hi);
        (lhs(mid) > 0.0 ? lo : hi) = mid;
    }
    out.amplitude = lo;
    out.found = lo > 0.0;
    return out;
}

// --- u_t envelopes --------------------------------------------------------

/// ||u_t||^2(t) + theta/2 int_0^t ||D^2 u_t||^2 <= ||u_t||^2(0) (1 + tol) and
/// ||u_t||^2(t) <= ||u_t||^2(0) e^{-(a^2 theta / 2) t} (1 + tol), with u_t the
/// backward difference of consecutive states and u_t(0) from the equation.
/// The integral uses right-endpoint rectangles over the recorded steps.
inline EnvelopeReport check_ut_decay(const TimeSeries& s, const StabilityParams& p, const SmallnessReport& small,
                                     double tol = 0.10) {
    EnvelopeReport r;
    if (!(p.theta > 0.0)) return r;
    if (!small.satisfied) {
        r.status = CheckStatus::ConditionNotMet;
        return r;
    }
    const double e0 = s.ut0_sq;
    const double rate = 0.5 * p.a * p.a * p.theta;
    double integral = 0.0;
    for (std::size_t i = 0; i < s.ut_sq.size(); ++i) {
        const double t = s.times[i];
        if (i > 0) integral += (t - s.times[i - 1]) * s.dxx_ut_sq[i];
        const double mp = detail::margin(s.ut_sq[i], e0 * std::exp(-rate * t) * (1.0 + tol));
        const double mc = detail::margin(s.ut_sq[i] + 0.5 * p.theta * integral, e0 * (1.0 + tol));
        if (std::min(mp, mc) < r.worst_margin()) r.worst_time = t;
        r.pointwise_margin = std::min(r.pointwise_margin, mp);
        r.cumulative_margin = std::min(r.cumulative_margin, mc);
    }
    detail::finish(r);
    return r;
}

// --- sup bound ------------------------------------------------------------

struct SupBound {
    double m_observed = 0.0;
    std::vector<double> running;  // running max at each record
};

inline SupBound sup_bound_monitor(const TimeSeries& s) {
    SupBound b;
    b.running.reserve(s.records.size());
    for (const auto& r : s.records) {
        b.m_observed = std::max(b.m_observed, r.sup_u);
        b.running.push_back(b.m_observed);
    }
    return b;
}

// --- inequality oracles ---------------------------------------------------

struct SteklovReport {
    double r_x = 0.0;    // ||f_x||^2 / ||f||^2        >= a
    double r_xx = 0.0;   // ||f_xx||^2 / ||f||^2       >= a^2
    double r_xx_x = 0.0; // ||f_xx||^2 / ||f_x||^2     >= a
    double a = 0.0;
    double slack = 1.0;
    bool pass_x = false, pass_xx = false, pass_xx_x = false;
    bool degenerate = false;

    bool pass() const { return degenerate || (pass_x && pass_xx && pass_xx_x); }
};

/// Ratios with forward differences for f_x and the nodal second difference
/// (closed by the boundary conditions of f) for f_xx; thresholds carry the
/// slack 1 - 10 h^2 / L^2.
inline SteklovReport steklov_oracle(const GridFunction& f) {
    SteklovReport r;
    const Grid& g = *f.grid;
    r.a = std::numbers::pi * std::numbers::pi / (g.L * g.L);
    r.slack = 1.0 - 10.0 * g.h * g.h / (g.L * g.L);
    const double n0 = norm_l2_sq(f), n1 = gradient_energy(f), n2 = detail::weighted_sq_second_difference(f);
    if (!(n0 > 0.0)) {
        r.degenerate = true;
        return r;
    }
    r.r_x = n1 / n0;
    r.r_xx = n2 / n0;
    r.r_xx_x = n1 > 0.0 ? n2 / n1 : std::numeric_limits<double>::infinity();
    r.pass_x = r.r_x >= r.a * r.slack;
    r.pass_xx = r.r_xx >= r.a * r.a * r.slack;
    r.pass_xx_x = r.r_xx_x >= r.a * r.slack;
    return r;
}

struct InterpolationReport {
    double sup = 0.0;          // ||f||_inf
    double rhs = 0.0;          // sqrt(2) ||f_xx||^{1/4} ||f||^{3/4}
    double slack = 1.0;        // 1 + 10 h
    bool pass = true;
    std::array<double, 5> a1{};  // a1[i]: smallest A1 for ||D^i f||, i = 1..4, with A2 = 1
};

inline InterpolationReport interpolation_oracle(const GridFunction& f) {
    InterpolationReport r;
    const Grid& g = *f.grid;
    r.slack = 1.0 + 10.0 * g.h;
    r.sup = sup_norm(f);
    const double n0 = norm_l2(f);
    const double n2 = std::sqrt(detail::weighted_sq_second_difference(f));
    r.rhs = std::sqrt(2.0) * std::pow(n2, 0.25) * std::pow(n0, 0.75);
    r.pass = r.sup <= r.rhs * r.slack;
    if (!(n0 > 0.0)) return r;
    GridFunction plain(f.grid, BoundaryConditionSet::free(), f.values);
    const double n5 = norm_l2(apply(build_derivative(f.grid, 5, plain.bc), plain));
    for (int i = 1; i <= 4; ++i) {
        const double ni = norm_l2(apply(build_derivative(f.grid, i, plain.bc), plain));
        const double scale = std::pow(n5, i / 5.0) * std::pow(n0, 1.0 - i / 5.0);
        r.a1[static_cast<std::size_t>(i)] = scale > 0.0 ? std::max(0.0, (ni - n0) / scale) : 0.0;
    }
    return r;
}

}  // namespace benney
