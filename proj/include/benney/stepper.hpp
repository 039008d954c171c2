#pragma once

// IMEX time stepping of u_t = -A u - N(u) + f: banded implicit solve for the
// linear part, explicit nonlinearity.
//
//   ImplicitEuler_ExplicitEuler  (I + dt A) u' = u - dt N(u) + dt f(t + dt)
//   CrankNicolson_AB2            (I + dt/2 A) u' = (I - dt/2 A) u
//                                   - dt (3/2 N(u) - 1/2 N(u_old)) + dt/2 (f(t) + f(t + dt))
//
// The first CN step falls back to explicit Euler for N. Only unconstrained
// nodes are unknowns; constrained nodes are written as exact zeros.

#include "benney/banded.hpp"
#include "benney/domain.hpp"
#include "benney/energy.hpp"
#include "benney/operators.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace benney {

class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- polynomials (manufactured solution, bump profiles) -------------------

struct Polynomial {
    std::vector<double> c;  // c[i] x^i

    double operator()(double x) const {
        double s = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) s = s * x + c[i];
        return s;
    }
    Polynomial derivative(int times = 1) const {
        Polynomial p = *this;
        for (int t = 0; t < times; ++t) {
            if (p.c.size() <= 1) return Polynomial{{0.0}};
            std::vector<double> d(p.c.size() - 1);
            for (std::size_t i = 1; i < p.c.size(); ++i) d[i - 1] = static_cast<double>(i) * p.c[i];
            p.c = std::move(d);
        }
        return p;
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Polynomial p{std::vector<double>(a.c.size() + b.c.size() - 1, 0.0)};
        for (std::size_t i = 0; i < a.c.size(); ++i)
            for (std::size_t j = 0; j < b.c.size(); ++j) p.c[i + j] += a.c[i] * b.c[j];
        return p;
    }
};

/// x^2 (L - x)^3.
inline Polynomial bump_polynomial(double L) {
    const Polynomial x2{{0.0, 0.0, 1.0}}, lx{{L, -1.0}};
    return x2 * lx * lx * lx;
}

/// Evaluated in factored form so the end values are exact zeros.
inline double bump(double x, double L) {
    const double r = L - x;
    return x * x * r * r * r;
}

// --- initial conditions ---------------------------------------------------

struct InitialCondition {
    enum class Kind { PolyBump, Gaussian, Custom };
    Kind kind = Kind::PolyBump;
    double amplitude = 0.0;
    double x0 = 0.5;     // Gaussian centre, as a fraction of L
    double sigma = 0.1;  // Gaussian width, as a fraction of L
    std::vector<double> samples;  // Custom: one value per node

    static InitialCondition poly_bump(double c) { return {Kind::PolyBump, c, 0.5, 0.1, {}}; }
    static InitialCondition gaussian(double c, double x0, double sigma) { return {Kind::Gaussian, c, x0, sigma, {}}; }
    static InitialCondition custom(std::vector<double> v) { return {Kind::Custom, 0.0, 0.5, 0.1, std::move(v)}; }
};

inline std::string to_string(InitialCondition::Kind k) {
    switch (k) {
        case InitialCondition::Kind::PolyBump: return "polybump";
        case InitialCondition::Kind::Gaussian: return "gaussian";
        case InitialCondition::Kind::Custom: return "custom";
    }
    return "?";
}

inline constexpr double ic_boundary_tolerance = 1e-12;

/// The descriptor as a function of x; Custom data has no such form.
inline std::function<double(double)> initial_condition_function(const InitialCondition& ic, double L) {
    switch (ic.kind) {
        case InitialCondition::Kind::PolyBump:
            return [c = ic.amplitude, L](double x) { return c * bump(x, L); };
        case InitialCondition::Kind::Gaussian: {
            if (!(ic.sigma > 0.0)) throw std::invalid_argument("gaussian width must be positive");
            const double peak = bump(0.4 * L, L);
            return [ic, L, peak](double x) {
                const double z = (x / L - ic.x0) / ic.sigma;
                return ic.amplitude * std::exp(-0.5 * z * z) * bump(x, L) / peak;
            };
        }
        case InitialCondition::Kind::Custom: break;
    }
    throw std::invalid_argument("custom initial data has no closed form");
}

/// Samples the descriptor. The end values are stored as exact zeros; the node
/// next to the right end keeps its sampled value (the time stepper zeroes it as
/// the discrete u_xx(L) = 0), so derivatives of the datum stay smooth.
inline GridFunction initial_condition(const InitialCondition& ic, const GridPtr& grid, const BoundaryConditionSet& bc) {
    GridFunction u(grid, bc);
    switch (ic.kind) {
        case InitialCondition::Kind::PolyBump:
        case InitialCondition::Kind::Gaussian: {
            const auto f = initial_condition_function(ic, grid->L);
            for (int i = 0; i < u.size(); ++i) u[i] = f(grid->x(i));
            break;
        }
        case InitialCondition::Kind::Custom: {
            if (static_cast<int>(ic.samples.size()) != grid->size())
                throw std::invalid_argument("custom initial condition has " + std::to_string(ic.samples.size()) +
                                            " samples for " + std::to_string(grid->size()) + " nodes");
            u.values = ic.samples;
            const double scale = 1.0 + sup_norm(u);
            if (std::abs(u[0]) > ic_boundary_tolerance * scale || std::abs(u[grid->n]) > ic_boundary_tolerance * scale)
                throw std::invalid_argument("custom initial condition violates u = 0 at an end");
            for (double v : u.values)
                if (!std::isfinite(v)) throw std::invalid_argument("custom initial condition has non-finite samples");
            break;
        }
    }
    if (bc.has_left(0)) u[0] = 0.0;
    if (bc.has_right(0)) u[grid->n] = 0.0;
    return u;
}

// --- problem --------------------------------------------------------------

using Forcing = std::function<double(double x, double t)>;

struct ProblemSpec {
    DomainDescriptor domain = DomainDescriptor::bounded(1.0);
    Coefficients coeffs{};
    int n = 128;
    double dt = 0.0;  // 0 selects the default 0.25 h min(1, 1/sup|u0|^k)
    double t_end = 0.5;
    InitialCondition ic{};
    NonlinearMode nonlinear_mode = NonlinearMode::SkewSplit;
    Forcing forcing{};
};

enum class Scheme { ImplicitEuler_ExplicitEuler, CrankNicolson_AB2 };

inline std::string to_string(Scheme s) { return s == Scheme::CrankNicolson_AB2 ? "cn-ab2" : "ie-ee"; }

struct StepperConfig {
    Scheme scheme = Scheme::ImplicitEuler_ExplicitEuler;
    double tolerance = 1e-10;  // relative residual of the banded solve
    int snapshot_stride = 0;   // 0 keeps the first and last state only
    int refinement_passes = 2;
    // CN only: the first startup_steps steps are each taken as two implicit
    // Euler half steps (same matrix), damping the stiff start-up transient.
    int startup_steps = 0;
    double blowup_factor = 1e6;
};

inline double default_time_step(double h, double sup_u0, int k) {
    const double s = std::pow(sup_u0, k);
    return 0.25 * h * std::min(1.0, s > 0.0 ? 1.0 / s : 1.0);
}

/// Contiguous range [first, first + count) of unconstrained nodes.
struct FreeRange {
    int first = 0;
    int count = 0;
};

inline FreeRange free_range(const Grid& g, const BoundaryConditionSet& bc) {
    std::vector<char> pinned(static_cast<std::size_t>(g.size()), 0);
    for (int i : constrained_nodes(g, bc)) pinned[static_cast<std::size_t>(i)] = 1;
    int first = 0;
    while (first < g.size() && pinned[static_cast<std::size_t>(first)]) ++first;
    int last = g.size() - 1;
    while (last >= first && pinned[static_cast<std::size_t>(last)]) --last;
    for (int i = first; i <= last; ++i)
        if (pinned[static_cast<std::size_t>(i)]) throw std::invalid_argument("constrained nodes must sit at the ends");
    return {first, last - first + 1};
}

class Stepper {
public:
    Stepper(const ProblemSpec& spec, const StepperConfig& config, double dt)
        : spec_(spec), config_(config), dt_(dt) {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive");
        if (config.tolerance > 1e-10) throw std::invalid_argument("banded solve tolerance must be at most 1e-10");
        bc_ = boundary_conditions_for(spec.domain);
        grid_ = make_grid(spec.domain, spec.n);
        linear_ = assemble_linear(spec.coeffs, grid_, bc_);
        free_ = free_range(*grid_, bc_);
        const double w = config.scheme == Scheme::CrankNicolson_AB2 ? 0.5 : 1.0;
        implicit_weight_ = w * dt;
        const auto a_free = linear_.matrix.block(free_.first, free_.count);
        system_ = BandedMatrix<double>::combine(1.0, BandedMatrix<double>::identity(free_.count), w * dt, a_free);
        for (const auto& t : linear_.terms) free_terms_.push_back({t.factor, t.unit.block(free_.first, free_.count)});
        lu_.emplace(system_);
        reset();
        for (int i = 0; i < system_.size(); ++i) {
            double row = 0.0;
            for (int j = system_.row_begin(i); j < system_.row_end(i); ++j) row += std::abs(system_(i, j));
            system_norm_ = std::max(system_norm_, row);
        }
    }

    const GridPtr& grid() const { return grid_; }
    const BoundaryConditionSet& bc() const { return bc_; }
    const BandedOperator& linear() const { return linear_; }
    double dt() const { return dt_; }
    FreeRange free_nodes() const { return free_; }

    /// Forgets the multistep history (the next CN step is AB1).
    void reset() {
        previous_nonlinear_.reset();
        startup_left_ = config_.scheme == Scheme::CrankNicolson_AB2 ? config_.startup_steps : 0;
    }

    /// Advances u from t to t + dt.
    GridFunction step(const GridFunction& u, double t) {
        if (!u.grid || !(*u.grid == *grid_)) throw std::invalid_argument("state lives on a different grid");
        const int f0 = free_.first, m = free_.count;
        const double dt = dt_;
        const auto nl = nonlinear_term(u, spec_.coeffs.k, spec_.nonlinear_mode);
        std::vector<double> rhs(static_cast<std::size_t>(m));
        if (config_.scheme == Scheme::ImplicitEuler_ExplicitEuler) {
            for (int i = 0; i < m; ++i) {
                const int j = f0 + i;
                rhs[static_cast<std::size_t>(i)] = u[j] - dt * nl[j] + (spec_.forcing ? dt * spec_.forcing(grid_->x(j), t + dt) : 0.0);
            }
        } else if (startup_left_ > 0) {
            --startup_left_;
            const double half = 0.5 * dt;
            previous_nonlinear_ = nl.values;
            return half_step(half_step(u, t, half), t + half, half);
        } else {
            std::vector<long double> au(static_cast<std::size_t>(u.size()));
            multiply_extended(linear_.terms, u.values, au);
            for (int i = 0; i < m; ++i) {
                const int j = f0 + i;
                const double ab = previous_nonlinear_ ? 1.5 * nl[j] - 0.5 * (*previous_nonlinear_)[j] : nl[j];
                double r = static_cast<double>(u[j] - 0.5L * dt * au[static_cast<std::size_t>(j)]) - dt * ab;
                if (spec_.forcing) r += 0.5 * dt * (spec_.forcing(grid_->x(j), t) + spec_.forcing(grid_->x(j), t + dt));
                rhs[static_cast<std::size_t>(i)] = r;
            }
            previous_nonlinear_ = nl.values;
        }
        const auto x = solve(rhs);
        GridFunction out(grid_, bc_);
        for (int i = 0; i < m; ++i) out[f0 + i] = x[static_cast<std::size_t>(i)];
        return out;
    }

private:
    /// Implicit Euler over dt/2 with the CN matrix I + dt/2 A.
    GridFunction half_step(const GridFunction& u, double t, double half) {
        const int f0 = free_.first, m = free_.count;
        const auto nl = nonlinear_term(u, spec_.coeffs.k, spec_.nonlinear_mode);
        std::vector<double> rhs(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            const int j = f0 + i;
            rhs[static_cast<std::size_t>(i)] =
                u[j] - half * nl[j] + (spec_.forcing ? half * spec_.forcing(grid_->x(j), t + half) : 0.0);
        }
        const auto x = solve(rhs);
        GridFunction out(grid_, bc_);
        for (int i = 0; i < m; ++i) out[f0 + i] = x[static_cast<std::size_t>(i)];
        return out;
    }

    /// LU solve plus iterative refinement with the residual accumulated in
    /// extended precision. The bands of I + dt A reach dt h^-5, so the plain
    /// LU backward error is far above the rounding of the solution itself.
    /// The right side is scaled to unit size by a power of two first, so
    /// decayed states deep in the subnormal range are solved as accurately
    /// as any other.
    std::vector<double> solve(const std::vector<double>& b) const {
        double bnorm = 0.0;
        for (double v : b) bnorm = std::max(bnorm, std::abs(v));
        if (bnorm == 0.0) return std::vector<double>(b.size(), 0.0);
        const int e = std::ilogb(bnorm);
        std::vector<double> rhs(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) rhs[i] = std::ldexp(b[i], -e);
        bnorm = std::ldexp(bnorm, -e);
        auto x = lu_->solve(rhs);
        std::vector<double> r(rhs.size());
        std::vector<long double> ax(rhs.size());
        double rel = 0.0;
        for (int pass = 0; pass <= config_.refinement_passes; ++pass) {
            double rnorm = 0.0, xnorm = 0.0;
            multiply_extended(free_terms_, x, ax);
            for (std::size_t i = 0; i < x.size(); ++i) {
                const long double acc = rhs[i] - x[i] - static_cast<long double>(implicit_weight_) * ax[i];
                r[i] = static_cast<double>(acc);
                rnorm = std::max(rnorm, std::abs(r[i]));
                xnorm = std::max(xnorm, std::abs(x[i]));
            }
            if (!std::isfinite(rnorm) || !std::isfinite(xnorm)) throw NumericFailure("non-finite values in the implicit solve");
            // Normwise backward error ||r|| / (||M|| ||x|| + ||b||).
            rel = rnorm / (system_norm_ * xnorm + bnorm);
            if (pass == config_.refinement_passes || rnorm == 0.0) break;
            lu_->solve_in_place(r);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += r[i];
        }
        if (rel > config_.tolerance) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "banded solve backward error %.3g above tolerance %.3g", rel, config_.tolerance);
            throw NumericFailure(msg);
        }
        for (double& v : x) v = std::ldexp(v, e);
        return x;
    }

    ProblemSpec spec_;
    StepperConfig config_;
    double dt_;
    GridPtr grid_;
    BoundaryConditionSet bc_;
    BandedOperator linear_;
    FreeRange free_;
    BandedMatrix<double> system_;
    double system_norm_ = 0.0;
    double implicit_weight_ = 0.0;
    std::vector<ScaledStencil> free_terms_;
    std::optional<BandedLU<double>> lu_;
    std::optional<std::vector<double>> previous_nonlinear_;
    int startup_left_ = 0;
};

/// A single step with a freshly assembled stepper.
inline GridFunction step(const GridFunction& state, double t, const ProblemSpec& spec, const StepperConfig& config) {
    const double dt = spec.dt > 0.0 ? spec.dt : default_time_step(state.grid->h, sup_norm(state), spec.coeffs.k);
    Stepper s(spec, config, dt);
    return s.step(state, t);
}

// --- u_t(0) ---------------------------------------------------------------

/// u_t(0) = -A u0 - u0^k u0_x evaluated with boundary-free one-sided stencils
/// (exact on quintic data such as the bump), rather than with the clamped
/// operators, whose closures are tuned for the energy balance and do not
/// converge pointwise near the ends.
inline GridFunction initial_time_derivative(const GridFunction& u0, const Coefficients& c, NonlinearMode mode) {
    const auto free = BoundaryConditionSet::free();
    GridFunction plain(u0.grid, free, u0.values);
    GridFunction ut(u0.grid, u0.bc);
    const std::pair<int, double> terms[] = {{5, c.eta}, {4, c.beta}, {3, c.alpha}, {2, c.gamma}};
    for (auto [order, coef] : terms) {
        if (coef == 0.0) continue;
        const auto d = apply(build_derivative(u0.grid, order, free), plain);
        for (int i = 0; i < ut.size(); ++i) ut[i] -= coef * d[i];
    }
    if (mode != NonlinearMode::Off) {
        const auto d1 = apply(build_derivative(u0.grid, 1, free), plain);
        const auto uk = integer_power(u0.values, c.k);
        for (int i = 0; i < ut.size(); ++i) ut[i] -= uk[static_cast<std::size_t>(i)] * d1[i];
    }
    return ut;
}

// --- runs -----------------------------------------------------------------

enum class RunStatus { Completed, BlowUpSuspected, TruncationContaminated, Error };

inline std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Completed: return "Completed";
        case RunStatus::BlowUpSuspected: return "BlowUpSuspected";
        case RunStatus::TruncationContaminated: return "TruncationContaminated";
        case RunStatus::Error: return "Error";
    }
    return "?";
}

struct Snapshot {
    double t = 0.0;
    GridFunction u;
};

struct TimeSeries {
    std::vector<double> times;
    std::vector<Snapshot> states;
    std::vector<EnergyRecord> records;
    // Backward-difference proxy of u_t: ut_sq[i] = ||(u^i - u^{i-1}) / dt||^2 and
    // dxx_ut_sq[i] the same for D^2; index 0 holds the t = 0 prescription.
    std::vector<double> ut_sq;
    std::vector<double> dxx_ut_sq;
    double dt = 0.0;
    double ut0_sq = 0.0;
    RunStatus status = RunStatus::Completed;
    std::optional<double> escape_time;     // first time the blow-up ceiling was crossed
    std::optional<double> truncation_time;  // first time the far-field mass check failed
    std::string message;
};

/// Mass of the last 10% of the interval.
inline double far_field_mass(const GridFunction& u) {
    const int n = u.grid->n;
    const int start = static_cast<int>(std::floor(0.9 * n));
    double s = 0.0;
    for (int i = start; i < n; ++i) s += 0.5 * (u[i] * u[i] + u[i + 1] * u[i + 1]);
    return s * u.grid->h;
}

inline constexpr double truncation_mass_fraction = 1e-8;

/// Integrates to t_end, one record per step. Stops early on blow-up.
/// `observer`, when set, sees every state (the initial one included).
inline TimeSeries run_simulation(const ProblemSpec& spec, const StepperConfig& config,
                                 const std::function<void(const GridFunction&, double)>& observer = {}) {
    if (!(spec.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    const auto bc = boundary_conditions_for(spec.domain);
    validate_boundary_conditions(spec.domain, bc);
    const auto grid = make_grid(spec.domain, spec.n);
    const auto raw = initial_condition(spec.ic, grid, bc);
    const double sup0 = sup_norm(raw);
    // The requested (or default) step, shortened so that a whole number of
    // steps lands on t_end.
    const double dt_max = spec.dt > 0.0 ? spec.dt : default_time_step(grid->h, sup0, spec.coeffs.k);
    const long steps = std::max(1L, static_cast<long>(std::ceil(spec.t_end / dt_max - 1e-9)));
    const double dt = spec.t_end / static_cast<double>(steps);
    Stepper stepper(spec, config, dt);

    TimeSeries ts;
    ts.dt = dt;
    const auto ut0 = initial_time_derivative(raw, spec.coeffs, spec.nonlinear_mode);
    ts.ut0_sq = norm_l2_sq(ut0);

    GridFunction u = raw;
    enforce_constraints(u);
    const EnergyTerms terms{spec.coeffs, spec.nonlinear_mode};
    const double ceiling = sup0 > 0.0 ? config.blowup_factor * sup0 : std::numeric_limits<double>::infinity();
    const double mass_limit = truncation_mass_fraction * norm_l2_sq(u);
    const bool half_line = spec.domain.kind == DomainKind::TruncatedHalfLine;
    const auto d2 = detail::nodal_second_difference(*grid, bc);

    ts.times.push_back(0.0);
    ts.records.push_back(energy_snapshot(u, 0.0));
    ts.ut_sq.push_back(ts.ut0_sq);
    ts.dxx_ut_sq.push_back(norm_l2_sq(apply(build_derivative(grid, 2, BoundaryConditionSet::free()), ut0)));
    ts.states.push_back({0.0, u});
    if (observer) observer(u, 0.0);

    GridFunction fmid(grid, bc);
    GridFunction du(grid, bc), d2du(grid, bc);
    for (long s = 1; s <= steps; ++s) {
        const double t0 = static_cast<double>(s - 1) * dt, t1 = s == steps ? spec.t_end : static_cast<double>(s) * dt;
        GridFunction next = stepper.step(u, t0);
        double sup = 0.0;
        bool finite = true;
        for (double v : next.values) {
            if (!std::isfinite(v)) finite = false;
            sup = std::max(sup, std::abs(v));
        }
        if (!finite || sup > ceiling) {
            ts.status = RunStatus::BlowUpSuspected;
            ts.escape_time = t1;
            ts.message = finite ? "sup|u| exceeded the blow-up ceiling" : "non-finite state";
            break;
        }
        const GridFunction* forcing = nullptr;
        if (spec.forcing) {
            for (int i = 0; i < fmid.size(); ++i) fmid[i] = spec.forcing(grid->x(i), 0.5 * (t0 + t1));
            forcing = &fmid;
        }
        ts.times.push_back(t1);
        ts.records.push_back(energy_record(next, u, dt, t1, terms, forcing));
        for (int i = 0; i < du.size(); ++i) du[i] = (next[i] - u[i]) / dt;
        d2.multiply(du.values, d2du.values);
        ts.ut_sq.push_back(norm_l2_sq(du));
        ts.dxx_ut_sq.push_back(norm_l2_sq(d2du));
        if (half_line && !ts.truncation_time && far_field_mass(next) > mass_limit) {
            ts.truncation_time = t1;
            ts.status = RunStatus::TruncationContaminated;
        }
        u = std::move(next);
        if (observer) observer(u, t1);
        if ((config.snapshot_stride > 0 && s % config.snapshot_stride == 0) || s == steps) ts.states.push_back({t1, u});
    }
    if (ts.status == RunStatus::BlowUpSuspected && ts.states.back().t != ts.times.back())
        ts.states.push_back({ts.times.back(), u});
    return ts;
}

// --- manufactured solution ------------------------------------------------

/// u*(x, t) = e^{-t} x^2 (L - x)^3 with the forcing that makes it exact.
struct ManufacturedSolution {
    double L;
    Coefficients coeffs;

    double exact(double x, double t) const { return std::exp(-t) * bump(x, L); }

    Forcing forcing() const {
        const auto p = bump_polynomial(L);
        const auto d1 = p.derivative(1), d2 = p.derivative(2), d3 = p.derivative(3), d4 = p.derivative(4),
                   d5 = p.derivative(5);
        const Coefficients c = coeffs;
        const double len = L;
        return [=](double x, double t) {
            const double e = std::exp(-t);
            const double u = e * bump(x, len);
            const double lin = c.eta * d5(x) + c.beta * d4(x) + c.alpha * d3(x) + c.gamma * d2(x);
            return -u + e * lin + std::pow(u, c.k) * e * d1(x);
        };
    }

    ProblemSpec problem(int n, double dt, double t_end) const {
        ProblemSpec s;
        s.domain = DomainDescriptor::bounded(L);
        s.coeffs = coeffs;
        s.n = n;
        s.dt = dt;
        s.t_end = t_end;
        s.ic = InitialCondition::poly_bump(1.0);
        s.nonlinear_mode = NonlinearMode::SkewSplit;
        s.forcing = forcing();
        return s;
    }

    /// Trapezoid L2 error against u* at time t on all nodes.
    double error(const GridFunction& u, double t) const {
        GridFunction e(u.grid, u.bc);
        for (int i = 0; i < u.size(); ++i) e[i] = u[i] - exact(u.grid->x(i), t);
        return norm_l2(e);
    }
};

// --- continuous dependence ------------------------------------------------

struct DependenceResult {
    std::vector<double> times;
    std::vector<double> gap;  // ||w||(t), w = difference of the two runs
    double sup_ratio = 0.0;   // sup_t ||w|| / ||w(0)||
    double sup_gap = 0.0;
    std::optional<double> c_hat;       // least-squares slope of log ||w||^2 through log ||w(0)||^2
    std::optional<double> c_hat_free;  // same with a free intercept
    double envelope_excess = 0.0;      // max_t ||w||^2 / (||w(0)||^2 e^{c_hat t})
    bool degenerate = false;
};

/// Two runs whose data differ by delta * PolyBump(1), executed concurrently.
inline DependenceResult continuous_dependence_experiment(const ProblemSpec& spec, const StepperConfig& config, double delta) {
    ProblemSpec other = spec;
    const auto grid = make_grid(spec.domain, spec.n);
    const auto bc = boundary_conditions_for(spec.domain);
    auto base = initial_condition(spec.ic, grid, bc);
    std::vector<double> perturbed = base.values;
    for (int i = 0; i < grid->size(); ++i) perturbed[static_cast<std::size_t>(i)] += delta * bump(grid->x(i), grid->L);
    other.ic = InitialCondition::custom(perturbed);
    // Shared time step so the two records align.
    ProblemSpec first = spec;
    if (!(first.dt > 0.0)) {
        const double s = std::max(sup_norm(base), sup_norm(GridFunction(grid, bc, perturbed)));
        first.dt = default_time_step(grid->h, s, spec.coeffs.k);
    }
    other.dt = first.dt;
    StepperConfig cfg = config;
    cfg.snapshot_stride = 1;
    auto fa = std::async(std::launch::async, [&] { return run_simulation(first, cfg); });
    auto fb = std::async(std::launch::async, [&] { return run_simulation(other, cfg); });
    const TimeSeries a = fa.get(), b = fb.get();

    DependenceResult r;
    const std::size_t count = std::min(a.states.size(), b.states.size());
    GridFunction w(grid, bc);
    for (std::size_t i = 0; i < count; ++i) {
        for (int j = 0; j < w.size(); ++j) w[j] = b.states[i].u[j] - a.states[i].u[j];
        r.times.push_back(a.states[i].t);
        r.gap.push_back(norm_l2(w));
    }
    if (r.gap.empty() || r.gap.front() == 0.0) {
        r.degenerate = true;
        return r;
    }
    for (double g : r.gap) r.sup_gap = std::max(r.sup_gap, g);
    r.sup_ratio = r.sup_gap / r.gap.front();
    // Least squares for log(||w||^2 / ||w(0)||^2) = C t, the model of the
    // envelope ||w||^2 <= ||w(0)||^2 e^{C t}; the free-intercept slope is kept
    // for reference.
    const double y0 = std::log(r.gap.front() * r.gap.front());
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < r.gap.size(); ++i) {
        if (!(r.gap[i] > 0.0)) continue;
        const double t = r.times[i], y = std::log(r.gap[i] * r.gap[i]) - y0;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        ++m;
    }
    if (m >= 2 && stt > 0.0) r.c_hat = sty / stt;
    const double den = static_cast<double>(m) * stt - st * st;
    if (m >= 2 && den > 0.0) r.c_hat_free = (static_cast<double>(m) * sty - st * sy) / den;
    for (std::size_t i = 0; r.c_hat && i < r.gap.size(); ++i) {
        const double bound = r.gap.front() * r.gap.front() * std::exp(*r.c_hat * r.times[i]);
        r.envelope_excess = std::max(r.envelope_excess, r.gap[i] * r.gap[i] / bound);
    }
    return r;
}

}  // namespace benney
