#include "benney/galerkin.hpp"
#include "benney/stepper.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace benney;

TEST(Basis, SingleModeNormalized) {
    const auto b = build_basis(1.0, 1);
    ASSERT_EQ(b.gram.rows(), 1);
    EXPECT_NEAR(b.gram(0, 0), 1.0, 1e-14);
}

TEST(Basis, GramIsIdentity) {
    for (double L : {1.0, 2.5})
        for (int N : {4, 8, 12, 16, 24}) {
            const auto b = build_basis(L, N);
            const double err = (b.gram - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff();
            EXPECT_LT(err, 1e-10) << "L " << L << " N " << N;
        }
}

TEST(Basis, BoundaryConditionsHold) {
    const double L = 1.5;
    const auto b = build_basis(L, 16);
    for (int order : {0, 1}) EXPECT_LT(b.evaluate(0.0, order).cwiseAbs().maxCoeff(), 1e-12);
    for (int order : {0, 1, 2}) EXPECT_LT(b.evaluate(L, order).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Basis, SizeLimit) {
    EXPECT_THROW(build_basis(1.0, 0), std::invalid_argument);
    EXPECT_THROW(build_basis(1.0, galerkin_max_modes + 1), std::invalid_argument);
    EXPECT_EQ(galerkin_quadrature_points(8), 200);
    EXPECT_EQ(galerkin_quadrature_points(64), 256);
}

TEST(Basis, SecondDerivativeTensorMatchesFiniteDifferences) {
    const double L = 1.0;
    const int N = 8, n = 4096;
    const auto b = build_basis(L, N);
    const auto g = make_grid(DomainDescriptor::bounded(L), n);
    const auto d2 = build_derivative(g, 2, BoundaryConditionSet::free(), 4);
    std::vector<GridFunction> w;
    for (int i = 0; i < N; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(N, i);
        w.emplace_back(g, BoundaryConditionSet::free(), reconstruct(b, e, *g));
    }
    for (int i = 0; i < N; ++i) {
        const auto dw = apply(d2, w[static_cast<std::size_t>(i)]);
        for (int j = 0; j < N; ++j)
            EXPECT_NEAR(inner(dw, w[static_cast<std::size_t>(j)]), b.tensor[2](j, i), 1e-6 * (1 + std::abs(b.tensor[2](j, i))));
    }
}

TEST(Rhs, ZeroStateIsStationary) {
    const auto b = build_basis(1.0, 8);
    const GalerkinState s{Eigen::VectorXd::Zero(8), 0.0};
    EXPECT_EQ(galerkin_rhs(s, b, {}).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Rhs, SingleLinearMode) {
    const auto b = build_basis(1.0, 1);
    const Coefficients c{};
    const double lambda = b.linear_matrix(c)(0, 0);
    const GalerkinState s{Eigen::VectorXd::Constant(1, 0.7), 0.0};
    EXPECT_NEAR(galerkin_rhs(s, b, c, false)(0), -lambda * 0.7, 1e-12 * lambda);
}

TEST(Rhs, EnergyIdentity) {
    const auto b = build_basis(1.0, 8);
    const Coefficients c{};
    Eigen::VectorXd g(8);
    g << 0.4, -0.2, 0.1, 0.05, -0.03, 0.02, -0.01, 0.005;
    const Eigen::VectorXd gp = galerkin_rhs({g, 0.0}, b, c);
    const double lhs = 2.0 * g.dot(b.gram * gp);
    const double rhs = galerkin_energy(b, g, c).rate(c);
    EXPECT_NEAR(lhs, rhs, 1e-9 * std::abs(rhs));
    // Term by term for the default coefficients.
    const auto e = galerkin_energy(b, g, c);
    EXPECT_NEAR(rhs, -2 * e.dxx_sq + 2 * e.dx_sq - e.trace0 * e.trace0 - 2 * e.nonlinear, 1e-12 * std::abs(rhs));
}

TEST(Solve, ZeroTrajectory) {
    const auto b = build_basis(1.0, 8);
    const auto t = galerkin_solve(b, Eigen::VectorXd::Zero(8), {}, {0.1, 0.5});
    for (const auto& g : t.coefficients) EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Solve, LinearSingleModeExponential) {
    const auto b = build_basis(1.0, 1);
    const Coefficients c{};
    const double lambda = b.linear_matrix(c)(0, 0);
    GalerkinOptions opt;
    opt.nonlinear = false;
    const auto t = galerkin_solve(b, Eigen::VectorXd::Constant(1, 1.0), c, {1e-4, 1e-3, 2e-3}, opt);
    for (std::size_t i = 0; i < t.times.size(); ++i)
        EXPECT_NEAR(t.coefficients[i](0), std::exp(-lambda * t.times[i]), 1e-8 * std::exp(-lambda * t.times[i]));
}

TEST(Solve, RejectsLooseToleranceAndBadInput) {
    const auto b = build_basis(1.0, 4);
    GalerkinOptions opt;
    opt.rtol = 1e-6;
    EXPECT_THROW(galerkin_solve(b, Eigen::VectorXd::Zero(4), {}, {0.1}, opt), std::invalid_argument);
    EXPECT_THROW(galerkin_solve(b, Eigen::VectorXd::Zero(3), {}, {0.1}), std::invalid_argument);
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(4);
    bad(1) = std::nan("");
    EXPECT_THROW(galerkin_solve(b, bad, {}, {0.1}), std::invalid_argument);
}

TEST(Solve, ProjectionReproducesBump) {
    const double L = 1.0;
    const auto b = build_basis(L, 4);
    const auto g = project(b, [L](double x) { return 0.3 * bump(x, L); });
    for (double x : {0.1, 0.45, 0.8}) EXPECT_NEAR(b.evaluate(x).dot(g), 0.3 * bump(x, L), 1e-13);
}

TEST(Solve, AgreesWithFiniteDifferencesAtTwelveModes) {
    const double L = 1.0, amp = 0.1;
    ProblemSpec s;
    s.domain = DomainDescriptor::bounded(L);
    s.n = 512;
    s.t_end = 0.5;
    s.ic = InitialCondition::poly_bump(amp);
    const auto fd = run_simulation(s, {});
    const auto& u = fd.states.back().u;
    const auto b = build_basis(L, 12);
    const auto t = galerkin_solve(b, project(b, [&](double x) { return amp * bump(x, L); }), s.coeffs, {fd.states.back().t});
    GridFunction d(u.grid, u.bc, reconstruct(b, t.coefficients.back(), *u.grid));
    for (int i = 0; i < d.size(); ++i) d[i] -= u[i];
    EXPECT_LT(norm_l2(d), 1e-3 * norm_l2(fd.states.front().u));
}
