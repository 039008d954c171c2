#pragma once

// Per-step energy diagnostics and the residual of the discrete energy balance
//
//   d/dt ||u||^2 + 2 beta ||u_xx||^2 + 2 gamma (u_xx, u) - eta u_xx(0)^2 + 2 (N(u), u) = 2 (f, u)
//
// obtained by pairing the equation with 2u and integrating by parts under the
// boundary conditions (the alpha term drops out).

#include "benney/operators.hpp"

#include <cmath>
#include <limits>

namespace benney {

struct EnergyRecord {
    double t = 0.0;
    double l2_sq = 0.0;
    double dx_sq = 0.0;
    double dxx_sq = 0.0;
    double trace0_sq = 0.0;
    double sup_u = 0.0;
    double identity_residual = std::numeric_limits<double>::quiet_NaN();
};

struct EnergyTerms {
    Coefficients coeffs{};
    NonlinearMode mode = NonlinearMode::SkewSplit;
};

namespace detail {

inline double weighted_sq_second_difference(const GridFunction& u) {
    const auto d2 = detail::nodal_second_difference(*u.grid, u.bc);
    GridFunction v(u.grid, u.bc);
    d2.multiply(u.values, v.values);
    return norm_l2_sq(v);
}

}  // namespace detail

/// Norms of u itself, no residual.
inline EnergyRecord energy_snapshot(const GridFunction& u, double t) {
    EnergyRecord r;
    r.t = t;
    r.l2_sq = norm_l2_sq(u);
    r.dx_sq = gradient_energy(u);
    r.dxx_sq = detail::weighted_sq_second_difference(u);
    const double tr = boundary_trace_uxx0(u);
    r.trace0_sq = tr * tr;
    r.sup_u = sup_norm(u);
    return r;
}

/// Record at u with the balance residual over the step u_prev -> u, all terms
/// other than the time difference evaluated at the midpoint (u + u_prev)/2.
/// `forcing_mid`, when given, is the source term at the step midpoint.
inline EnergyRecord energy_record(const GridFunction& u, const GridFunction& u_prev, double dt, double t,
                                  const EnergyTerms& terms, const GridFunction* forcing_mid = nullptr) {
    if (!u.compatible(u_prev)) throw std::invalid_argument("energy record of incompatible states");
    EnergyRecord r = energy_snapshot(u, t);
    if (!(dt > 0.0)) return r;
    GridFunction mid(u.grid, u.bc);
    for (int i = 0; i < u.size(); ++i) mid[i] = 0.5 * (u[i] + u_prev[i]);
    const auto& c = terms.coeffs;
    const auto d2 = detail::nodal_second_difference(*u.grid, u.bc);
    GridFunction d2mid(u.grid, u.bc);
    d2.multiply(mid.values, d2mid.values);
    const double tr = closure_trace_uxx0(mid);
    double res = (norm_l2_sq(u) - norm_l2_sq(u_prev)) / dt + 2.0 * c.beta * norm_l2_sq(d2mid) +
                 2.0 * c.gamma * inner(d2mid, mid) - c.eta * tr * tr;
    if (terms.mode != NonlinearMode::Off) res += 2.0 * inner(nonlinear_term(mid, c.k, terms.mode), mid);
    if (forcing_mid) res -= 2.0 * inner(*forcing_mid, mid);
    r.identity_residual = res;
    return r;
}

}  // namespace benney
