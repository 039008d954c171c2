#pragma once

// Faedo-Galerkin approximation u^N = sum g_i(t) w_i(x) on the bump basis
//
//   r_i(x) = x^2 (L - x)^3 P_{i-1}(2x/L - 1),   i = 1..N,
//
// orthonormalized through the Cholesky factor of its Gram matrix, so every w_i
// satisfies w = w_x = 0 at 0 and w = w_x = w_xx = 0 at L identically. The
// projected system is  G g' = -K g - n(g)  with K_il = (A w_l, w_i) and
// n_i = ((u^N)^k D u^N, w_i).
//
// The bands of K reach the size of the fifth-derivative spectrum, so explicit
// integration is hopeless; the solver uses the integrating factor e^{-tJ},
// J = G^-1 K, with classical RK4 on the nonlinear remainder (Lawson's method)
// and step-doubling error control.

#include "benney/operators.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace benney {

class GramConditioningFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StiffnessFailure : public std::runtime_error {
public:
    StiffnessFailure(const std::string& what, double last_good_time)
        : std::runtime_error(what), last_good_time(last_good_time) {}
    double last_good_time;
};

inline constexpr int galerkin_max_modes = 64;

/// Gauss-Legendre nodes and weights on [a, b].
inline void gauss_legendre(int q, double a, double b, std::vector<double>& x, std::vector<double>& w) {
    x.assign(static_cast<std::size_t>(q), 0.0);
    w.assign(static_cast<std::size_t>(q), 0.0);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < (q + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int m = 2; m <= q; ++m) {
                const double p2 = ((2.0 * m - 1.0) * z * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            if (q == 1) p0 = 1.0;
            dp = q * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = z;
            for (int m = 2; m <= q; ++m) {
                const double p2 = ((2.0 * m - 1.0) * z * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            dp = q * (z * p1 - p0) / (z * z - 1.0);
        }
        const double wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[static_cast<std::size_t>(i)] = mid - half * z;
        x[static_cast<std::size_t>(q - 1 - i)] = mid + half * z;
        w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(q - 1 - i)] = half * wt;
    }
}

namespace detail {

/// Derivatives 0..5 of x^2 (L - x)^3 in factored form (exact zeros at the ends).
inline std::array<double, 6> bump_derivatives(double x, double L) {
    const double r = L - x;
    return {x * x * r * r * r,
            2.0 * x * r * r * r - 3.0 * x * x * r * r,
            2.0 * r * r * r - 12.0 * x * r * r + 6.0 * x * x * r,
            -18.0 * r * r + 36.0 * x * r - 6.0 * x * x,
            72.0 * r - 48.0 * x,
            -120.0};
}

/// p[m][j] = d^j P_m / d xi^j for m < count, j = 0..5.
inline std::vector<std::array<double, 6>> legendre_table(double xi, int count) {
    std::vector<std::array<double, 6>> p(static_cast<std::size_t>(std::max(count, 2)));
    p[0] = {1, 0, 0, 0, 0, 0};
    p[1] = {xi, 1, 0, 0, 0, 0};
    for (int m = 1; m + 1 < count; ++m)
        for (int j = 0; j <= 5; ++j) {
            const double lower = j > 0 ? j * p[static_cast<std::size_t>(m)][static_cast<std::size_t>(j - 1)] : 0.0;
            p[static_cast<std::size_t>(m + 1)][static_cast<std::size_t>(j)] =
                ((2.0 * m + 1.0) * (xi * p[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)] + lower) -
                 m * p[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(j)]) / (m + 1.0);
        }
    return p;
}

/// Row vector of d^order r_i(x), i = 1..N (unorthonormalized basis).
inline Eigen::RowVectorXd raw_basis(double x, double L, int N, int order) {
    static constexpr double binom[6][6] = {{1, 0, 0, 0, 0, 0},  {1, 1, 0, 0, 0, 0},   {1, 2, 1, 0, 0, 0},
                                           {1, 3, 3, 1, 0, 0},  {1, 4, 6, 4, 1, 0},   {1, 5, 10, 10, 5, 1}};
    const auto b = bump_derivatives(x, L);
    const auto p = legendre_table(2.0 * x / L - 1.0, N);
    const double chain = 2.0 / L;
    Eigen::RowVectorXd row(N);
    for (int i = 0; i < N; ++i) {
        double s = 0.0;
        for (int j = 0; j <= order; ++j)
            s += binom[order][j] * b[static_cast<std::size_t>(j)] *
                 p[static_cast<std::size_t>(i)][static_cast<std::size_t>(order - j)] * std::pow(chain, order - j);
        row(i) = s;
    }
    return row;
}

}  // namespace detail

struct GalerkinBasis {
    int N = 0;
    double L = 0.0;
    std::vector<double> nodes, weights;       // quadrature on [0, L]
    std::array<Eigen::MatrixXd, 6> values;    // values[m](q, i) = D^m w_i(x_q)
    Eigen::MatrixXd transform;                // w = transform * r
    Eigen::MatrixXd gram;                     // (w_i, w_j)
    std::array<Eigen::MatrixXd, 6> tensor;    // tensor[j](i, l) = (D^j w_l, w_i), j = 1..5

    /// d^order w_i(x) for all i.
    Eigen::VectorXd evaluate(double x, int order = 0) const {
        return transform * detail::raw_basis(x, L, N, order).transpose();
    }

    /// K = eta T5 + beta T4 + alpha T3 + gamma T2.
    Eigen::MatrixXd linear_matrix(const Coefficients& c) const {
        return c.eta * tensor[5] + c.beta * tensor[4] + c.alpha * tensor[3] + c.gamma * tensor[2];
    }
};

inline int galerkin_quadrature_points(int N) { return std::max(4 * N, 200); }

inline GalerkinBasis build_basis(double L, int N) {
    if (!(L > 0.0)) throw std::invalid_argument("basis length must be positive");
    if (N < 1 || N > galerkin_max_modes)
        throw std::invalid_argument("basis size must be in 1.." + std::to_string(galerkin_max_modes));
    GalerkinBasis b;
    b.N = N;
    b.L = L;
    const int q = galerkin_quadrature_points(N);
    gauss_legendre(q, 0.0, L, b.nodes, b.weights);
    std::array<Eigen::MatrixXd, 6> raw;
    for (int m = 0; m <= 5; ++m) {
        raw[static_cast<std::size_t>(m)].resize(q, N);
        for (int k = 0; k < q; ++k) raw[static_cast<std::size_t>(m)].row(k) = detail::raw_basis(b.nodes[static_cast<std::size_t>(k)], L, N, m);
    }
    const Eigen::Map<const Eigen::VectorXd> w(b.weights.data(), q);
    const Eigen::MatrixXd g = raw[0].transpose() * w.asDiagonal() * raw[0];
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw GramConditioningFailure("Gram matrix is not numerically positive definite");
    const Eigen::VectorXd diag = Eigen::MatrixXd(llt.matrixL()).diagonal();
    if (diag.minCoeff() <= 1e-7 * diag.maxCoeff())
        throw GramConditioningFailure("Gram matrix too ill-conditioned for " + std::to_string(N) + " modes");
    // r = C w with G = C C^T, hence w = C^-1 r. A second pass on the Gram
    // matrix of the first result removes the rounding left by the first.
    b.transform = llt.matrixL().solve(Eigen::MatrixXd::Identity(N, N));
    for (int pass = 0; pass < 2; ++pass) {
        for (int m = 0; m <= 5; ++m)
            b.values[static_cast<std::size_t>(m)] = raw[static_cast<std::size_t>(m)] * b.transform.transpose();
        b.gram = b.values[0].transpose() * w.asDiagonal() * b.values[0];
        if (pass == 1) break;
        Eigen::LLT<Eigen::MatrixXd> again(b.gram);
        if (again.info() != Eigen::Success) throw GramConditioningFailure("Gram matrix lost definiteness");
        b.transform = Eigen::MatrixXd(again.matrixL().solve(b.transform));
    }
    b.tensor[0] = b.gram;
    for (int j = 1; j <= 5; ++j)
        b.tensor[static_cast<std::size_t>(j)] = b.values[0].transpose() * w.asDiagonal() * b.values[static_cast<std::size_t>(j)];
    return b;
}

/// Coefficients of the orthogonal projection of f.
inline Eigen::VectorXd project(const GalerkinBasis& b, const std::function<double(double)>& f) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b.N);
    for (std::size_t k = 0; k < b.nodes.size(); ++k)
        rhs += b.weights[k] * f(b.nodes[k]) * b.values[0].row(static_cast<Eigen::Index>(k)).transpose();
    return b.gram.llt().solve(rhs);
}

struct GalerkinState {
    Eigen::VectorXd g;
    double t = 0.0;
};

/// n_i = ((u^N)^k D u^N, w_i) by quadrature.
inline Eigen::VectorXd galerkin_nonlinear(const GalerkinBasis& b, const Eigen::VectorXd& g, int k) {
    const Eigen::VectorXd u = b.values[0] * g, ux = b.values[1] * g;
    Eigen::VectorXd integrand(u.size());
    for (Eigen::Index q = 0; q < u.size(); ++q)
        integrand(q) = b.weights[static_cast<std::size_t>(q)] * std::pow(u(q), k) * ux(q);
    return b.values[0].transpose() * integrand;
}

/// g' from G g' = -K g - n(g); `nonlinear` false drops the u^k u_x term.
inline Eigen::VectorXd galerkin_rhs(const GalerkinState& s, const GalerkinBasis& b, const Coefficients& c,
                                    bool nonlinear = true) {
    Eigen::VectorXd f = -(b.linear_matrix(c) * s.g);
    if (nonlinear) f -= galerkin_nonlinear(b, s.g, c.k);
    return b.gram.llt().solve(f);
}

/// Terms of the energy balance for u^N: the right side of
/// d/dt ||u||^2 = -2 beta ||u_xx||^2 + 2 gamma ||u_x||^2 + eta u_xx(0)^2 - 2 (u^k u_x, u).
struct GalerkinEnergy {
    double dxx_sq = 0.0, dx_sq = 0.0, trace0 = 0.0, nonlinear = 0.0;
    double rate(const Coefficients& c) const {
        return -2.0 * c.beta * dxx_sq + 2.0 * c.gamma * dx_sq + c.eta * trace0 * trace0 - 2.0 * nonlinear;
    }
};

inline GalerkinEnergy galerkin_energy(const GalerkinBasis& b, const Eigen::VectorXd& g, const Coefficients& c,
                                      bool nonlinear = true) {
    const Eigen::Map<const Eigen::VectorXd> w(b.weights.data(), static_cast<Eigen::Index>(b.weights.size()));
    const Eigen::VectorXd u = b.values[0] * g, ux = b.values[1] * g, uxx = b.values[2] * g;
    GalerkinEnergy e;
    e.dxx_sq = w.dot(uxx.cwiseProduct(uxx));
    e.dx_sq = w.dot(ux.cwiseProduct(ux));
    e.trace0 = b.evaluate(0.0, 2).dot(g);
    if (nonlinear) e.nonlinear = galerkin_nonlinear(b, g, c.k).dot(g);
    return e;
}

struct GalerkinTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> coefficients;
    long accepted_steps = 0;
    long rejected_steps = 0;
};

struct GalerkinOptions {
    double rtol = 1e-8;
    double atol = 1e-14;
    double initial_step = 1e-4;
    bool nonlinear = true;
};

namespace detail {

class LawsonRK4 {
public:
    LawsonRK4(const GalerkinBasis& b, const Coefficients& c, bool nonlinear)
        : b_(b), c_(c), nonlinear_(nonlinear), gram_(b.gram.llt()) {
        j_ = gram_.solve(b.linear_matrix(c));
    }

    /// Remainder r(g) = -G^-1 n(g).
    Eigen::VectorXd remainder(const Eigen::VectorXd& g) const {
        if (!nonlinear_) return Eigen::VectorXd::Zero(g.size());
        return -gram_.solve(galerkin_nonlinear(b_, g, c_.k));
    }

    Eigen::VectorXd step(const Eigen::VectorXd& g, double h) {
        const auto& [e, e2] = exponentials(h);
        const Eigen::VectorXd k1 = remainder(g);
        const Eigen::VectorXd k2 = remainder(e2 * (g + 0.5 * h * k1));
        const Eigen::VectorXd k3 = remainder(e2 * g + 0.5 * h * k2);
        const Eigen::VectorXd k4 = remainder(e * g + h * (e2 * k3));
        return e * g + (h / 6.0) * (e * k1 + 2.0 * e2 * (k2 + k3) + k4);
    }

private:
    // e^{-hJ} and e^{-hJ/2}; step doubling alternates between h and h/2.
    const std::pair<Eigen::MatrixXd, Eigen::MatrixXd>& exponentials(double h) {
        for (const auto& [key, value] : cache_)
            if (key == h) return value;
        if (cache_.size() == 4) cache_.erase(cache_.begin());
        const Eigen::MatrixXd e2 = (-0.5 * h * j_).exp();
        cache_.push_back({h, {e2 * e2, e2}});
        return cache_.back().second;
    }

    const GalerkinBasis& b_;
    Coefficients c_;
    bool nonlinear_;
    Eigen::LLT<Eigen::MatrixXd> gram_;
    Eigen::MatrixXd j_;
    std::vector<std::pair<double, std::pair<Eigen::MatrixXd, Eigen::MatrixXd>>> cache_;
};

}  // namespace detail

/// Integrates from g0 at t = 0 and records the coefficients at each requested
/// time (sorted, non-negative). Step-doubling keeps the local error of every
/// step below rtol |g| + atol.
inline GalerkinTrajectory galerkin_solve(const GalerkinBasis& b, const Eigen::VectorXd& g0, const Coefficients& c,
                                         std::vector<double> output_times, const GalerkinOptions& opt = {}) {
    if (g0.size() != b.N) throw std::invalid_argument("coefficient vector does not match the basis");
    if (!g0.allFinite()) throw std::invalid_argument("initial coefficients must be finite");
    if (opt.rtol > 1e-8) throw std::invalid_argument("Galerkin tolerance must be at most 1e-8");
    std::sort(output_times.begin(), output_times.end());
    GalerkinTrajectory out;
    detail::LawsonRK4 rk(b, c, opt.nonlinear);
    Eigen::VectorXd g = g0;
    double t = 0.0, h = opt.initial_step;
    for (double target : output_times) {
        if (target < 0.0) throw std::invalid_argument("output times must be non-negative");
        while (t < target) {
            const double step = std::min(h, target - t);
            if (step < 1e-14 * std::max(1.0, t))
                throw StiffnessFailure("Galerkin step size underflow at t = " + std::to_string(t), t);
            const Eigen::VectorXd full = rk.step(g, step);
            const Eigen::VectorXd half = rk.step(rk.step(g, 0.5 * step), 0.5 * step);
            const double scale = opt.rtol * half.norm() + opt.atol;
            const double err = (half - full).norm() / 15.0 / scale;
            if (!half.allFinite()) throw StiffnessFailure("non-finite Galerkin coefficients", t);
            if (err <= 1.0) {
                g = half + (half - full) / 15.0;
                t = (step == target - t) ? target : t + step;
                ++out.accepted_steps;
            } else {
                ++out.rejected_steps;
            }
            const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 4.0;
            // Do not let a short final step toward an output time shrink h.
            if (err > 1.0 || step == h) h = step * std::clamp(factor, 0.2, 4.0);
        }
        out.times.push_back(target);
        out.coefficients.push_back(g);
    }
    return out;
}

/// u^N on the nodes of a finite-difference grid.
inline std::vector<double> reconstruct(const GalerkinBasis& b, const Eigen::VectorXd& g, const Grid& grid) {
    std::vector<double> v(static_cast<std::size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) v[static_cast<std::size_t>(i)] = b.evaluate(grid.x(i)).dot(g);
    return v;
}

}  // namespace benney
