#include "benney/operators.hpp"
#include "benney/stepper.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace benney;

namespace {

constexpr double pi = std::numbers::pi;

GridPtr grid(double L, int n) { return make_grid(DomainDescriptor::bounded(L), n); }

double interior_max_error(const GridFunction& got, const std::function<double(double)>& want, int margin) {
    double e = 0.0;
    for (int i = margin; i <= got.grid->n - margin; ++i) e = std::max(e, std::abs(got[i] - want(got.grid->x(i))));
    return e;
}

// Random function satisfying the five boundary conditions, nodes pinned.
GridFunction random_bc_function(const GridPtr& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double c0 = u(rng), c1 = u(rng), c2 = u(rng), c3 = u(rng);
    auto f = GridFunction::sample(g, BoundaryConditionSet::benney_lin(), [&](double x) {
        const double s = x / g->L;
        return bump(x, g->L) * (c0 + c1 * s + c2 * s * s + c3 * std::sin(5 * s));
    });
    enforce_constraints(f);
    return f;
}

}  // namespace

TEST(Derivative, SecondOfQuadraticIsTwo) {
    const auto g = grid(1.0, 32);
    const auto f = GridFunction::sample(g, BoundaryConditionSet::free(), [](double x) { return x * x; });
    const auto d = apply(build_derivative(g, 2, f.bc), f);
    for (int i = 0; i <= g->n; ++i) EXPECT_NEAR(d[i], 2.0, 1e-9);
}

TEST(Derivative, FifthOfQuinticIs120) {
    const auto g = grid(1.0, 32);
    const auto f = GridFunction::sample(g, BoundaryConditionSet::free(), [](double x) { return std::pow(x, 5); });
    const auto d = apply(build_derivative(g, 5, f.bc), f);
    for (int i = 3; i <= g->n - 3; ++i) EXPECT_NEAR(d[i], 120.0, 1e-6 * 120.0);
}

TEST(Derivative, ThirdOfSineConvergesAtSecondOrder) {
    std::vector<double> err;
    for (int n : {64, 128, 256}) {
        const auto g = grid(pi / 2, n);
        const auto f = GridFunction::sample(g, BoundaryConditionSet::free(), [](double x) { return std::sin(x); });
        const auto d = apply(build_derivative(g, 3, f.bc), f);
        err.push_back(interior_max_error(d, [](double x) { return -std::cos(x); }, 2));
    }
    const double slope1 = std::log2(err[0] / err[1]), slope2 = std::log2(err[1] / err[2]);
    EXPECT_GE(slope1, 1.8);
    EXPECT_LE(slope1, 2.3);
    EXPECT_GE(slope2, 1.8);
    EXPECT_LE(slope2, 2.3);
}

TEST(Derivative, FourthOrderAccuracyOption) {
    std::vector<double> err;
    for (int n : {32, 64, 128}) {
        const auto g = grid(pi / 2, n);
        const auto f = GridFunction::sample(g, BoundaryConditionSet::free(), [](double x) { return std::sin(x); });
        const auto d = apply(build_derivative(g, 3, f.bc, 4), f);
        err.push_back(interior_max_error(d, [](double x) { return -std::cos(x); }, 3));
    }
    const double slope = std::log2(err[1] / err[2]);
    EXPECT_GE(slope, 3.8);
    EXPECT_LE(slope, 4.3);
}

TEST(Derivative, PolynomialExactnessInterior) {
    const auto g = grid(1.0, 40);
    for (int accuracy : {2, 4})
        for (int order = 1; order <= 5; ++order) {
            const int degree = order + accuracy - 1;
            const auto f = GridFunction::sample(g, BoundaryConditionSet::free(), [&](double x) { return std::pow(x, degree); });
            const auto d = apply(build_derivative(g, order, f.bc, accuracy), f);
            double coeff = 1.0;
            for (int j = 0; j < order; ++j) coeff *= degree - j;
            const double scale = coeff;
            const int margin = (order + 1) / 2 + accuracy / 2;
            const double e = interior_max_error(
                d, [&](double x) { return coeff * std::pow(x, degree - order); }, margin);
            EXPECT_LT(e, 1e-10 * scale * std::pow(g->h, -order)) << "order " << order << " accuracy " << accuracy;
        }
}

TEST(Derivative, RejectsBadArguments) {
    const auto g = grid(1.0, 32);
    EXPECT_THROW(build_derivative(g, 0, BoundaryConditionSet::free()), std::invalid_argument);
    EXPECT_THROW(build_derivative(g, 6, BoundaryConditionSet::free()), std::invalid_argument);
    EXPECT_THROW(build_derivative(g, 2, BoundaryConditionSet::free(), 3), std::invalid_argument);
}

TEST(Derivative, BitReproducible) {
    const auto g = grid(1.0, 64);
    const auto a = build_derivative(g, 5, BoundaryConditionSet::benney_lin());
    const auto b = build_derivative(g, 5, BoundaryConditionSet::benney_lin());
    std::mt19937_64 rng(3);
    const auto f = random_bc_function(g, rng);
    EXPECT_EQ(apply(a, f).values, apply(b, f).values);
}

TEST(Apply, ZeroAndLinearity) {
    const auto g = grid(1.0, 64);
    const auto bc = BoundaryConditionSet::benney_lin();
    const GridFunction zero(g, bc);
    for (double v : apply(build_derivative(g, 2, bc), zero).values) EXPECT_EQ(v, 0.0);
    std::mt19937_64 rng(5);
    const auto f = random_bc_function(g, rng);
    GridFunction cf = f;
    for (double& v : cf.values) v *= 3.5;
    const auto d1 = build_derivative(g, 1, bc);
    const auto a = apply(d1, cf), b = apply(d1, f);
    for (int i = 0; i <= g->n; ++i) EXPECT_NEAR(a[i], 3.5 * b[i], 1e-12 * (1 + std::abs(a[i])));
}

TEST(Apply, GridMismatchThrows) {
    const auto op = build_derivative(grid(1.0, 32), 2, BoundaryConditionSet::free());
    const GridFunction f(grid(1.0, 64), BoundaryConditionSet::free());
    EXPECT_THROW(apply(op, f), std::invalid_argument);
}

TEST(Apply, FourthDerivativeEigenfunction) {
    const double L = 1.0;
    const auto g = grid(L, 512);
    const auto f = GridFunction::sample(g, BoundaryConditionSet::free(), [&](double x) { return std::sin(pi * x / L); });
    const auto d = apply(build_derivative(g, 4, f.bc), f);
    const double k4 = std::pow(pi / L, 4);
    EXPECT_LT(interior_max_error(d, [&](double x) { return k4 * std::sin(pi * x / L); }, 3), 1e-4 * k4);
}

TEST(Norms, ZeroFunction) {
    const GridFunction f(grid(1.0, 32), BoundaryConditionSet::benney_lin());
    EXPECT_EQ(norm_l2(f), 0.0);
    EXPECT_EQ(sup_norm(f), 0.0);
}

TEST(Norms, SineSquaredConvergesToHalf) {
    double previous = 1.0;
    for (int n : {16, 64, 256}) {
        const auto f = GridFunction::sample(grid(1.0, n), BoundaryConditionSet::dirichlet(),
                                            [](double x) { return std::sin(pi * x); });
        const double e = std::abs(norm_l2_sq(f) - 0.5);
        EXPECT_LE(e, previous);
        previous = e;
    }
    EXPECT_LT(previous, 1e-12);
}

TEST(Norms, InnerSymmetricAndSupExact) {
    const auto g = grid(1.0, 64);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = random_bc_function(g, rng), h = random_bc_function(g, rng);
        EXPECT_EQ(inner(f, h), inner(h, f));
    }
    GridFunction f(g, BoundaryConditionSet::free());
    f[17] = -4.25;
    f[3] = 2.0;
    EXPECT_EQ(sup_norm(f), 4.25);
}

TEST(Linear, ZeroCoefficientsGiveZeroOperator) {
    const auto g = grid(1.0, 64);
    const auto A = assemble_linear({0, 0, 0, 0, 1}, g, BoundaryConditionSet::benney_lin());
    std::mt19937_64 rng(2);
    for (double v : apply(A, random_bc_function(g, rng)).values) EXPECT_EQ(v, 0.0);
}

TEST(Linear, FourthDerivativeCoefficientOnSine) {
    const double L = 1.0;
    const auto g = grid(L, 512);
    const auto f = GridFunction::sample(g, BoundaryConditionSet::free(), [&](double x) { return std::sin(pi * x / L); });
    const auto d = apply(assemble_linear({0, 1, 0, 0, 1}, g, f.bc), f);
    const double k4 = std::pow(pi / L, 4);
    EXPECT_LT(interior_max_error(d, [&](double x) { return k4 * std::sin(pi * x / L); }, 3), 1e-4 * k4);
}

TEST(Linear, SuperpositionOfDefaultCoefficients) {
    const auto g = grid(1.0, 128);
    const auto bc = BoundaryConditionSet::benney_lin();
    std::mt19937_64 rng(8);
    const auto f = random_bc_function(g, rng);
    const Coefficients c{};
    const auto total = apply(assemble_linear(c, g, bc), f);
    GridFunction sum(g, bc);
    const std::array<double, 4> coef{c.gamma, c.alpha, c.beta, c.eta};
    // Rounding scales with the stencil magnitude (2/h)^order, not the result.
    double scale = 0.0;
    for (int order = 2; order <= 5; ++order) {
        const auto part = apply(build_derivative(g, order, bc), f);
        for (int i = 0; i <= g->n; ++i) sum[i] += coef[static_cast<std::size_t>(order - 2)] * part[i];
        scale += std::abs(coef[static_cast<std::size_t>(order - 2)]) * std::pow(2.0 / g->h, order) * sup_norm(f);
    }
    for (int i = 0; i <= g->n; ++i) EXPECT_NEAR(total[i], sum[i], 1e-15 * scale);
}

TEST(Nonlinear, ZeroAndConstant) {
    const auto g = grid(1.0, 64);
    const GridFunction zero(g, BoundaryConditionSet::benney_lin());
    for (double v : nonlinear_term(zero, 2, NonlinearMode::SkewSplit).values) EXPECT_EQ(v, 0.0);
    GridFunction c(g, BoundaryConditionSet::free());
    for (double& v : c.values) v = 0.7;
    for (auto mode : {NonlinearMode::Conservative, NonlinearMode::SkewSplit}) {
        const auto n = nonlinear_term(c, 1, mode);
        for (int i = 1; i < g->n; ++i) EXPECT_NEAR(n[i], 0.0, 1e-12);
    }
    EXPECT_THROW(nonlinear_term(c, 0, NonlinearMode::SkewSplit), std::invalid_argument);
}

TEST(Nonlinear, ConservativeMatchesContinuum) {
    const auto g = grid(1.0, 1024);
    const auto f = GridFunction::sample(g, BoundaryConditionSet::benney_lin(), [](double x) { return bump(x, 1.0) * 20; });
    for (auto mode : {NonlinearMode::Conservative, NonlinearMode::SkewSplit}) {
        const auto n = nonlinear_term(f, 2, mode);
        for (int i = 8; i < g->n - 8; i += 37) {
            const double x = g->x(i), u = 20 * bump(x, 1.0);
            const double ux = 20 * (2 * x * std::pow(1 - x, 3) - 3 * x * x * std::pow(1 - x, 2));
            EXPECT_NEAR(n[i], u * u * ux, 1e-4);
        }
    }
}

TEST(Nonlinear, SkewSplitIsEnergyNeutral) {
    const auto g = grid(1.0, 128);
    const auto d1 = build_derivative(g, 1, BoundaryConditionSet::benney_lin());
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        auto f = random_bc_function(g, rng);
        for (double& v : f.values) v *= 3.0;
        for (int k : {1, 2, 4, 8}) {
            const double bound = 1e-12 * norm_l2_sq(f) * norm_l2(apply(d1, f));
            EXPECT_LT(std::abs(inner(nonlinear_term(f, k, NonlinearMode::SkewSplit), f)), bound) << "k " << k;
        }
    }
}

TEST(SummationByParts, FirstDerivativeBoundaryTermsVanish) {
    std::mt19937_64 rng(4);
    std::vector<double> worst;
    for (int n : {64, 128, 256}) {
        const auto g = grid(1.0, n);
        const auto d1 = build_derivative(g, 1, BoundaryConditionSet::benney_lin());
        double w = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const auto f = random_bc_function(g, rng), h = random_bc_function(g, rng);
            w = std::max(w, std::abs(inner(apply(d1, f), h) + inner(f, apply(d1, h))) / (norm_l2(f) * norm_l2(h)));
        }
        worst.push_back(w);
        EXPECT_LT(w, 50.0 * g->h * g->h);
    }
}

TEST(Trace, QuadraticAndBump) {
    const auto g = grid(1.0, 64);
    const GridFunction zero(g, BoundaryConditionSet::benney_lin());
    EXPECT_EQ(boundary_trace_uxx0(zero), 0.0);
    const auto q = GridFunction::sample(g, BoundaryConditionSet::benney_lin(), [](double x) { return x * x; });
    EXPECT_NEAR(boundary_trace_uxx0(q), 2.0, 1e-10);
    std::vector<double> err;
    for (int n : {64, 128, 256}) {
        for (double L : {1.0}) {
            const auto b = GridFunction::sample(grid(L, n), BoundaryConditionSet::benney_lin(),
                                                [L](double x) { return bump(x, L); });
            err.push_back(std::abs(boundary_trace_uxx0(b) - 2 * L * L * L));
        }
    }
    EXPECT_GT(std::log2(err[0] / err[1]), 1.8);
    EXPECT_LT(err.back(), 1e-3);
}
