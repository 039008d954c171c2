#include "benney/diagnostics.hpp"
#include "benney/sampling.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace benney;

namespace {

constexpr double pi = std::numbers::pi;

GridFunction clamped_sample(double L, int n, const std::function<double(double)>& f) {
    return GridFunction::sample(make_grid(DomainDescriptor::bounded(L), n), BoundaryConditionSet::clamped(), f);
}

ProblemSpec small_bump(double L, double amplitude, int k = 1) {
    ProblemSpec s;
    s.domain = DomainDescriptor::bounded(L);
    s.coeffs.k = k;
    s.n = 128;
    s.t_end = 0.05;
    s.ic = InitialCondition::poly_bump(amplitude);
    return s;
}

}  // namespace

TEST(DecayFit, ExactExponential) {
    std::vector<double> t, y;
    for (int i = 0; i <= 50; ++i) {
        t.push_back(0.01 * i);
        y.push_back(3.0 * std::exp(-7.5 * t.back()));
    }
    const auto f = fit_decay(t, y, 0.1, 0.4);
    EXPECT_NEAR(f.lambda_hat, 7.5, 1e-10);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_EQ(f.points, 31);
    EXPECT_FALSE(f.underflow);
}

TEST(DecayFit, UnderflowIsFlagged) {
    std::vector<double> t{0.0, 1.0, 2.0, 3.0}, y{1.0, 1e-200, 0.0, 0.0};
    const auto f = fit_decay(t, y, 0.0, 3.0);
    EXPECT_TRUE(f.underflow);
}

TEST(DecayFit, TheoryRate) {
    const auto p = stability_params(DomainDescriptor::bounded(pi / 2));
    TimeSeries s;
    const auto f = fit_decay(s, 0.0, 1.0, p);
    ASSERT_TRUE(f.lambda_theory);
    EXPECT_NEAR(*f.lambda_theory, 2 * 16 * 0.75, 1e-12);
}

TEST(Envelope, HoldsForSmallDataAtHalfPi) {
    const auto s = small_bump(pi / 2, 0.01);
    const auto ts = run_simulation(s, {});
    ASSERT_EQ(ts.status, RunStatus::Completed);
    const auto p = stability_params(s.domain);
    const auto r = check_decay_envelope(ts, p);
    EXPECT_EQ(r.status, CheckStatus::Holds);
    EXPECT_TRUE(r.pointwise);
    EXPECT_TRUE(r.cumulative);
    EXPECT_GT(r.worst_margin(), 0.0);
}

TEST(Envelope, NotApplicableBeyondPi) {
    const auto s = small_bump(3.2, 0.01);
    auto q = s;
    q.t_end = 0.01;
    const auto ts = run_simulation(q, {});
    const auto p = stability_params(s.domain);
    EXPECT_LT(p.theta, 0.0);
    EXPECT_EQ(check_decay_envelope(ts, p).status, CheckStatus::NotApplicable);
    EXPECT_FALSE(predicted_decay_rate(p));
}

TEST(Envelope, ViolationIsDetected) {
    // A growing series cannot sit under a decaying envelope.
    TimeSeries ts;
    for (int i = 0; i <= 10; ++i) {
        EnergyRecord r;
        r.t = 0.01 * i;
        r.l2_sq = 1.0 + r.t;
        ts.times.push_back(r.t);
        ts.records.push_back(r);
    }
    const auto r = check_decay_envelope(ts, stability_params(DomainDescriptor::bounded(1.0)));
    EXPECT_EQ(r.status, CheckStatus::Violated);
    EXPECT_LT(r.worst_margin(), 0.0);
}

TEST(Smallness, SatisfiedForTinyData) {
    const double L = pi / 2;
    const auto p = stability_params(DomainDescriptor::bounded(L));
    const auto u = clamped_sample(L, 128, [L](double x) { return 0.01 * bump(x, L); });
    const auto r = smallness_check(u, 2, p, {});
    EXPECT_EQ(r.regime, SmallnessRegime::kLess8);
    EXPECT_TRUE(r.satisfied);
    EXPECT_GT(r.lhs_value, 0.0);
    EXPECT_LE(r.lhs_value, p.theta);
}

TEST(Smallness, RegimesAndLimits) {
    const auto p = stability_params(DomainDescriptor::bounded(1.0));
    EXPECT_EQ(smallness_from_norms(0.1, 0.1, 8, p).regime, SmallnessRegime::kEquals8);
    EXPECT_EQ(smallness_from_norms(0.1, 0.1, 9, p).regime, SmallnessRegime::NotApplicable);
    EXPECT_FALSE(smallness_from_norms(0.1, 0.1, 9, p).satisfied);
    // Zero data leaves theta itself.
    EXPECT_DOUBLE_EQ(smallness_from_norms(0.0, 0.0, 3, p).lhs_value, p.theta);
    // Large data fails.
    EXPECT_FALSE(smallness_from_norms(10.0, 10.0, 1, p).satisfied);
    const auto beyond = stability_params(DomainDescriptor::bounded(3.5));
    EXPECT_EQ(smallness_from_norms(0.0, 0.0, 1, beyond).regime, SmallnessRegime::NotApplicable);
}

TEST(Smallness, ThresholdSeparatesRegions) {
    const double L = pi / 2;
    const auto p = stability_params(DomainDescriptor::bounded(L));
    const auto shape = clamped_sample(L, 128, [L](double x) { return bump(x, L); });
    for (int k : {1, 2, 8}) {
        const auto th = smallness_threshold(shape, k, p, {});
        ASSERT_TRUE(th.found) << k;
        auto scaled = [&](double c) {
            GridFunction u = shape;
            for (double& v : u.values) v *= c;
            return smallness_check(u, k, p, {}).satisfied;
        };
        EXPECT_TRUE(scaled(0.99 * th.amplitude)) << k;
        EXPECT_FALSE(scaled(1.01 * th.amplitude)) << k;
    }
}

TEST(Smallness, NoThresholdForZeroShape) {
    const auto p = stability_params(DomainDescriptor::bounded(1.0));
    const auto zero = clamped_sample(1.0, 64, [](double) { return 0.0; });
    EXPECT_FALSE(smallness_threshold(zero, 1, p, {}).found);
}

TEST(UtDecay, ConditionNotMetIsReported) {
    const auto s = small_bump(pi / 2, 0.01);
    const auto ts = run_simulation(s, {});
    const auto p = stability_params(s.domain);
    SmallnessReport failed;
    EXPECT_EQ(check_ut_decay(ts, p, failed).status, CheckStatus::ConditionNotMet);
    const auto& u0 = ts.states.front().u;
    const auto ok = smallness_check(u0, 1, p, s.coeffs);
    ASSERT_TRUE(ok.satisfied);
    EXPECT_EQ(check_ut_decay(ts, p, ok).status, CheckStatus::Holds);
}

TEST(SupBound, RunningMaximum) {
    TimeSeries ts;
    for (double v : {0.3, 0.5, 0.2, 0.4}) {
        EnergyRecord r;
        r.sup_u = v;
        ts.records.push_back(r);
    }
    const auto b = sup_bound_monitor(ts);
    EXPECT_EQ(b.m_observed, 0.5);
    EXPECT_EQ(b.running, (std::vector<double>{0.3, 0.5, 0.5, 0.5}));
}

TEST(Steklov, SineSatisfiesAllThree) {
    const double L = 1.0;
    const auto f = clamped_sample(L, 256, [](double x) { return std::sin(pi * x) * std::sin(pi * x); });
    const auto r = steklov_oracle(f);
    EXPECT_FALSE(r.degenerate);
    EXPECT_TRUE(r.pass());
    EXPECT_GE(r.r_x, r.a);
}

TEST(Steklov, SineFirstRatioNearSharp) {
    // sin(pi x) vanishes at both ends: ||f_x||^2 / ||f||^2 = pi^2.
    const auto g = make_grid(DomainDescriptor::bounded(1.0), 512);
    const auto f = GridFunction::sample(g, BoundaryConditionSet::dirichlet(), [](double x) { return std::sin(pi * x); });
    const auto r = steklov_oracle(f);
    EXPECT_NEAR(r.r_x / r.a, 1.0, 1e-4);
    EXPECT_TRUE(r.pass_x);
}

TEST(Steklov, ZeroIsDegenerate) {
    const auto f = clamped_sample(1.0, 64, [](double) { return 0.0; });
    EXPECT_TRUE(steklov_oracle(f).degenerate);
    EXPECT_TRUE(steklov_oracle(f).pass());
}

TEST(Interpolation, QuarticBump) {
    const double L = 1.0;
    const auto f = clamped_sample(L, 256, [L](double x) { return x * x * (L - x) * (L - x); });
    const auto r = interpolation_oracle(f);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.sup, 1.0 / 16.0, 1e-12);
    EXPECT_GT(r.rhs, r.sup);
    for (int i = 1; i <= 4; ++i) EXPECT_GE(r.a1[static_cast<std::size_t>(i)], 0.0);
}

TEST(Oracles, RandomSamplesPass) {
    const double L = 1.0;
    const auto basis = build_basis(L, 8);
    const auto grid = make_grid(DomainDescriptor::bounded(L), 128);
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto s = draw_oracle_sample(basis, grid, 7, i);
        const auto v = evaluate_oracles(s);
        EXPECT_TRUE(v.pass()) << i;
        for (double r : oracle_ratios(v)) EXPECT_GE(r, 1.0) << i;
    }
}

TEST(Oracles, SamplesAreReproducible) {
    const auto basis = build_basis(1.0, 8);
    const auto grid = make_grid(DomainDescriptor::bounded(1.0), 64);
    const auto a = draw_oracle_sample(basis, grid, 3, 11);
    const auto b = draw_oracle_sample(basis, grid, 3, 11);
    const auto c = draw_oracle_sample(basis, grid, 3, 12);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
    for (double v : a.coefficients) {
        EXPECT_GE(v, -1.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(EnergyIdentity, LinearCrankNicolsonResidualIsTiny) {
    auto s = small_bump(1.0, 0.1);
    s.nonlinear_mode = NonlinearMode::Off;
    s.dt = 1e-4;
    s.t_end = 0.01;
    StepperConfig cfg;
    cfg.scheme = Scheme::CrankNicolson_AB2;
    const auto ts = run_simulation(s, cfg);
    ASSERT_EQ(ts.status, RunStatus::Completed);
    double worst = 0.0;
    for (std::size_t i = 1; i < ts.records.size(); ++i) worst = std::max(worst, std::abs(ts.records[i].identity_residual));
    EXPECT_LT(worst, 1e-10 * ts.records.front().l2_sq / s.dt);
}

TEST(EnergyIdentity, SkewSplitNonlinearityIsNeutral) {
    // With the skew split the nonlinear pairing vanishes, so switching it on
    // does not change the balance residual of a CN step much.
    auto s = small_bump(1.0, 0.5, 2);
    s.dt = 1e-4;
    s.t_end = 0.005;
    StepperConfig cfg;
    cfg.scheme = Scheme::CrankNicolson_AB2;
    const auto ts = run_simulation(s, cfg);
    ASSERT_EQ(ts.status, RunStatus::Completed);
    for (std::size_t i = 1; i < ts.records.size(); ++i)
        EXPECT_TRUE(std::isfinite(ts.records[i].identity_residual));
    EXPECT_TRUE(std::isnan(ts.records.front().identity_residual));
}
