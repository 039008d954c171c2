#pragma once

// Grid functions, discrete derivative operators D^1..D^5, trapezoid inner
// products and the banded linear operator eta D^5 + beta D^4 + alpha D^3 + gamma D^2.
//
// With homogeneous clamped conditions (u = u_x = 0 at both ends) and
// accuracy 2, the operators are built from two narrow factors:
//
//   D2n  nodal second difference; at an end with u_x = 0 the ghost value is
//        reflected, giving 2 (u_1 - u_0) / h^2,
//   D1s  first difference that satisfies summation by parts in the trapezoid
//        weights H (one-sided at the ends, centered inside),
//
// and composed as D4 = H^-1 D2n^T H D2n, D5 = H^-1 D2n^T H D1s D2n and
// D3 = skew_H(D1s D2n). For every u with u_0 = u_n = 0 this gives exactly
//
//   (D4 u, u) = ||D2n u||^2,  (D3 u, u) = 0,
//   (D5 u, u) = ((D2n u)_n^2 - (D2n u)_0^2) / 2,  (D2n u, u) = -|u|_1^2,
//
// the discrete counterparts of the integrations by parts behind the energy
// balance of the equation. Interior rows are the standard centered stencils.
// Other condition sets (and accuracy 4) use centered interior stencils with
// one-sided closures of the same order, generated from Fornberg weights.

#include "benney/banded.hpp"
#include "benney/domain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace benney {

struct GridFunction {
    GridPtr grid;
    BoundaryConditionSet bc;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(GridPtr g, BoundaryConditionSet b) : grid(std::move(g)), bc(std::move(b)) {
        values.assign(static_cast<std::size_t>(grid->size()), 0.0);
    }
    GridFunction(GridPtr g, BoundaryConditionSet b, std::vector<double> v)
        : grid(std::move(g)), bc(std::move(b)), values(std::move(v)) {
        if (static_cast<int>(values.size()) != grid->size())
            throw std::invalid_argument("grid function has " + std::to_string(values.size()) + " values for " +
                                        std::to_string(grid->size()) + " nodes");
    }

    static GridFunction sample(GridPtr g, BoundaryConditionSet b, const std::function<double(double)>& f) {
        GridFunction u(g, std::move(b));
        for (int i = 0; i < g->size(); ++i) u[i] = f(g->x(i));
        return u;
    }

    int size() const { return static_cast<int>(values.size()); }
    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }

    bool compatible(const GridFunction& o) const { return grid && o.grid && *grid == *o.grid && bc == o.bc; }
};

/// Nodes whose values the condition set pins to zero: the end nodes for
/// u = 0, and the node next to an end that also carries u_x = u_xx = 0
/// (reflected ghost plus a vanishing second difference at the end).
inline std::vector<int> constrained_nodes(const Grid& g, const BoundaryConditionSet& bc) {
    std::vector<int> nodes;
    if (bc.has_left(0)) nodes.push_back(0);
    if (bc.has_left(0) && bc.has_left(1) && bc.has_left(2)) nodes.push_back(1);
    if (bc.has_right(0) && bc.has_right(1) && bc.has_right(2)) nodes.push_back(g.n - 1);
    if (bc.has_right(0)) nodes.push_back(g.n);
    return nodes;
}

inline void enforce_constraints(GridFunction& u) {
    for (int i : constrained_nodes(*u.grid, u.bc)) u[i] = 0.0;
}

// --- norms --------------------------------------------------------------

inline std::vector<double> trapezoid_weights(const Grid& g) {
    std::vector<double> w(static_cast<std::size_t>(g.size()), g.h);
    w.front() = w.back() = 0.5 * g.h;
    return w;
}

inline double inner(const GridFunction& f, const GridFunction& g) {
    if (!(f.grid && g.grid && *f.grid == *g.grid)) throw std::invalid_argument("inner product of mismatched grids");
    const int n = f.grid->n;
    double s = 0.5 * (f[0] * g[0] + f[n] * g[n]);
    for (int i = 1; i < n; ++i) s += f[i] * g[i];
    return s * f.grid->h;
}

inline double norm_l2_sq(const GridFunction& f) { return inner(f, f); }
inline double norm_l2(const GridFunction& f) { return std::sqrt(inner(f, f)); }

inline double sup_norm(const GridFunction& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

/// h * sum ((f_{i+1} - f_i)/h)^2: the discrete ||f_x||^2 that pairs with the
/// second difference, -(D2 f, f) = gradient_energy(f) whenever f_0 = f_n = 0.
inline double gradient_energy(const GridFunction& f) {
    const double h = f.grid->h;
    double s = 0.0;
    for (int i = 0; i < f.grid->n; ++i) {
        const double d = f[i + 1] - f[i];
        s += d * d;
    }
    return s / h;
}

// --- stencils -----------------------------------------------------------

/// Finite-difference weights for d^m/dx^m at z from the given nodes
/// (Fornberg's recursion). Returns weights for derivative order m only.
inline std::vector<double> fornberg_weights(double z, std::span<const double> x, int m) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[static_cast<std::size_t>(i)] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k > 0; --k)
                    c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                        c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                              c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) / c2;
                c[static_cast<std::size_t>(i)][0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
            }
            for (int k = mn; k > 0; --k)
                c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
                    (c4 * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] -
                     k * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k - 1)]) / c3;
            c[static_cast<std::size_t>(j)][0] = c4 * c[static_cast<std::size_t>(j)][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)];
    return w;
}

/// factor * unit, where unit is the stencil on a unit-spacing grid. Unit
/// stencils have small dyadic entries, so their row sums (and the summation-by-
/// parts structure) survive rounding exactly; scaling the full matrix by h^-5
/// first would not.
struct ScaledStencil {
    double factor = 1.0;
    BandedMatrix<double> unit;
};

/// y = sum factor * (unit x), accumulated in extended precision.
inline void multiply_extended(const std::vector<ScaledStencil>& terms, std::span<const double> x, std::span<long double> y) {
    std::fill(y.begin(), y.end(), 0.0L);
    for (const auto& t : terms) {
        const auto& u = t.unit;
        for (int i = 0; i < u.size(); ++i) {
            long double acc = 0.0L;
            for (int j = u.row_begin(i); j < u.row_end(i); ++j)
                acc += static_cast<long double>(u(i, j)) * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] += static_cast<long double>(t.factor) * acc;
        }
    }
}

struct BandedOperator {
    BandedMatrix<double> matrix;      // sum of the terms, for plain application
    std::vector<ScaledStencil> terms;
    GridPtr grid;
    BoundaryConditionSet bc;
    int order = 0;     // derivative order; 0 for the composite linear operator
    int accuracy = 2;
};

namespace detail {

inline bool clamped_both_ends(const BoundaryConditionSet& bc) {
    return bc.has_left(0) && bc.has_left(1) && bc.has_right(0) && bc.has_right(1);
}

/// Centered interior stencil of the given half width, one-sided windows of
/// order + accuracy points where the centered one does not fit.
inline BandedMatrix<double> stencil_matrix(const Grid& g, int order, int accuracy) {
    const int half = (order + 1) / 2 + accuracy / 2 - 1;
    const int width = std::max(2 * half + 1, order + accuracy);
    const int one_sided = order + accuracy;
    const int nodes = g.size();
    if (width > nodes) throw std::invalid_argument("stencil wider than grid");
    const int band = one_sided - 1;
    BandedMatrix<double> m(nodes, band, band);
    std::vector<double> local;
    for (int i = 0; i < nodes; ++i) {
        int first, count;
        if (i - half >= 0 && i + half < nodes) {
            first = i - half;
            count = 2 * half + 1;
        } else {
            count = one_sided;
            first = std::clamp(i - count / 2, 0, nodes - count);
        }
        local.assign(static_cast<std::size_t>(count), 0.0);
        for (int j = 0; j < count; ++j) local[static_cast<std::size_t>(j)] = (first + j - i) * 1.0;
        const auto w = fornberg_weights(0.0, local, order);
        const double scale = std::pow(g.h, -order);
        for (int j = 0; j < count; ++j) m.ref(i, first + j) = w[static_cast<std::size_t>(j)] * scale;
    }
    return m;
}

inline BandedMatrix<double> nodal_second_difference(const Grid& g, const BoundaryConditionSet& bc) {
    const int n = g.n;
    const double s = 1.0 / (g.h * g.h);
    const bool left_ghost = bc.has_left(1), right_ghost = bc.has_right(1);
    BandedMatrix<double> m(n + 1, right_ghost ? 1 : 3, left_ghost ? 1 : 3);
    for (int i = 1; i < n; ++i) {
        m.ref(i, i - 1) = s;
        m.ref(i, i) = -2.0 * s;
        m.ref(i, i + 1) = s;
    }
    if (left_ghost) {
        m.ref(0, 0) = -2.0 * s;
        m.ref(0, 1) = 2.0 * s;
    } else {
        m.ref(0, 0) = 2.0 * s;
        m.ref(0, 1) = -5.0 * s;
        m.ref(0, 2) = 4.0 * s;
        m.ref(0, 3) = -s;
    }
    if (right_ghost) {
        m.ref(n, n) = -2.0 * s;
        m.ref(n, n - 1) = 2.0 * s;
    } else {
        m.ref(n, n) = 2.0 * s;
        m.ref(n, n - 1) = -5.0 * s;
        m.ref(n, n - 2) = 4.0 * s;
        m.ref(n, n - 3) = -s;
    }
    return m;
}

/// Q / h-scaled first difference with H D1s + (H D1s)^T = diag(-1, 0, ..., 0, 1).
inline BandedMatrix<double> sbp_first_difference(const Grid& g) {
    const int n = g.n;
    const double s = 1.0 / g.h;
    BandedMatrix<double> m(n + 1, 1, 1);
    m.ref(0, 0) = -s;
    m.ref(0, 1) = s;
    for (int i = 1; i < n; ++i) {
        m.ref(i, i - 1) = -0.5 * s;
        m.ref(i, i + 1) = 0.5 * s;
    }
    m.ref(n, n - 1) = -s;
    m.ref(n, n) = s;
    return m;
}

/// Centered first difference; rows at ends with u_x = 0 are zero.
inline BandedMatrix<double> centered_first_difference(const Grid& g, const BoundaryConditionSet& bc) {
    const int n = g.n;
    const double s = 0.5 / g.h;
    BandedMatrix<double> m(n + 1, 2, 2);
    for (int i = 1; i < n; ++i) {
        m.ref(i, i - 1) = -s;
        m.ref(i, i + 1) = s;
    }
    if (!bc.has_left(1)) {
        m.ref(0, 0) = -3.0 * s;
        m.ref(0, 1) = 4.0 * s;
        m.ref(0, 2) = -s;
    }
    if (!bc.has_right(1)) {
        m.ref(n, n) = 3.0 * s;
        m.ref(n, n - 1) = -4.0 * s;
        m.ref(n, n - 2) = s;
    }
    return m;
}

/// H^-1 M^T H for diagonal trapezoid H.
inline BandedMatrix<double> adjoint(const BandedMatrix<double>& m, const std::vector<double>& w) {
    std::vector<double> inv(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) inv[i] = 1.0 / w[i];
    return m.transposed().scaled(inv, w);
}

inline BandedMatrix<double> energy_consistent(const Grid& g, const BoundaryConditionSet& bc, int order) {
    const auto w = trapezoid_weights(g);
    const auto d2 = nodal_second_difference(g, bc);
    switch (order) {
        case 1: return centered_first_difference(g, bc);
        case 2: return d2;
        case 3: {
            const auto t = sbp_first_difference(g) * d2;
            return BandedMatrix<double>::combine(0.5, t, -0.5, adjoint(t, w));
        }
        case 4: return adjoint(d2, w) * d2;
        case 5: return adjoint(d2, w) * (sbp_first_difference(g) * d2);
        default: throw std::invalid_argument("derivative order must be 1..5");
    }
}

}  // namespace detail

/// D^order on the grid. Accuracy 2 with u = u_x = 0 at both ends gives the
/// summation-by-parts operators described at the top of this file; any other
/// request uses centered interior stencils with one-sided closures.
inline BandedOperator build_derivative(const GridPtr& grid, int order, const BoundaryConditionSet& bc, int accuracy = 2) {
    if (order < 1 || order > 5) throw std::invalid_argument("derivative order must be 1..5");
    if (accuracy != 2 && accuracy != 4) throw std::invalid_argument("accuracy must be 2 or 4");
    bc.require_homogeneous();
    BandedOperator op{{}, {}, grid, bc, order, accuracy};
    Grid unit = *grid;
    unit.h = 1.0;
    const bool dirichlet_pair = bc.has_left(0) && bc.has_right(0) && order <= 2;
    BandedMatrix<double> m;
    if (accuracy == 2 && (detail::clamped_both_ends(bc) || dirichlet_pair)) {
        if (grid->size() < 7) throw std::invalid_argument("stencil wider than grid");
        m = detail::energy_consistent(unit, bc, order);
    } else {
        m = detail::stencil_matrix(unit, order, accuracy);
    }
    const double factor = std::pow(grid->h, -order);
    op.matrix = BandedMatrix<double>::combine(factor, m, 0.0, BandedMatrix<double>(m.size(), 0, 0));
    op.terms.push_back({factor, std::move(m)});
    return op;
}

inline GridFunction apply(const BandedOperator& op, const GridFunction& f) {
    if (!f.grid || !(*f.grid == *op.grid)) throw std::invalid_argument("operator and grid function live on different grids");
    GridFunction out(f.grid, f.bc);
    op.matrix.multiply(f.values, out.values);
    return out;
}

struct Coefficients {
    double eta = -1.0;
    double beta = 1.0;
    double alpha = 1.0;
    double gamma = 1.0;
    int k = 1;

    friend bool operator==(const Coefficients&, const Coefficients&) = default;
};

/// A = eta D^5 + beta D^4 + alpha D^3 + gamma D^2 as one banded operator.
inline BandedOperator assemble_linear(const Coefficients& c, const GridPtr& grid, const BoundaryConditionSet& bc,
                                      int accuracy = 2) {
    if (c.k < 1) throw std::invalid_argument("nonlinearity exponent k must be >= 1");
    BandedOperator out{BandedMatrix<double>(grid->size(), 0, 0), {}, grid, bc, 0, accuracy};
    const std::pair<int, double> terms[] = {{5, c.eta}, {4, c.beta}, {3, c.alpha}, {2, c.gamma}};
    for (auto [order, coef] : terms) {
        if (coef == 0.0) continue;
        auto d = build_derivative(grid, order, bc, accuracy);
        out.matrix = BandedMatrix<double>::combine(1.0, out.matrix, coef, d.matrix);
        out.terms.push_back({coef * d.terms.front().factor, std::move(d.terms.front().unit)});
    }
    return out;
}

enum class NonlinearMode { Conservative, SkewSplit, Off };

inline std::string to_string(NonlinearMode m) {
    switch (m) {
        case NonlinearMode::Conservative: return "conservative";
        case NonlinearMode::SkewSplit: return "skew";
        case NonlinearMode::Off: return "off";
    }
    return "?";
}

inline std::vector<double> integer_power(std::span<const double> v, int k) {
    std::vector<double> out(v.size(), 1.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        for (int p = 0; p < k; ++p) out[i] *= v[i];
    return out;
}

/// Discretization of u^k u_x. SkewSplit averages the conservative and
/// advective forms so that (N(f), f) = 0 whenever f vanishes at both ends.
inline GridFunction nonlinear_term(const GridFunction& f, int k, NonlinearMode mode) {
    if (k < 1) throw std::invalid_argument("nonlinearity exponent k must be >= 1");
    GridFunction out(f.grid, f.bc);
    if (mode == NonlinearMode::Off) return out;
    const auto d1 = detail::centered_first_difference(*f.grid, f.bc);
    const auto fk = integer_power(f.values, k);
    std::vector<double> fk1(fk.size());
    for (std::size_t i = 0; i < fk.size(); ++i) fk1[i] = fk[i] * f.values[i];
    std::vector<double> dflux(fk.size());
    d1.multiply(fk1, dflux);
    if (mode == NonlinearMode::Conservative) {
        for (std::size_t i = 0; i < fk.size(); ++i) out.values[i] = dflux[i] / (k + 1);
        return out;
    }
    std::vector<double> df(fk.size());
    d1.multiply(f.values, df);
    for (std::size_t i = 0; i < fk.size(); ++i) out.values[i] = (dflux[i] + fk[i] * df[i]) / (k + 2);
    return out;
}

/// One-sided u_xx(0). With u_x(0) = 0 in the set, the Taylor fit through
/// u_0, u_1, u_2 under that condition: (-7 u_0 + 8 u_1 - u_2) / (2 h^2).
inline double boundary_trace_uxx0(const GridFunction& f) {
    const double h = f.grid->h;
    if (f.bc.has_left(1)) return (-7.0 * f[0] + 8.0 * f[1] - f[2]) / (2.0 * h * h);
    return (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
}

/// (D2 f)_0, the boundary value of the nodal second difference. This is the
/// trace that appears in the discrete energy balance of the operators above.
inline double closure_trace_uxx0(const GridFunction& f) {
    const double h = f.grid->h;
    if (f.bc.has_left(1)) return 2.0 * (f[1] - f[0]) / (h * h);
    return (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
}

}  // namespace benney
