#include "benney/domain.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace benney;

constexpr double pi = std::numbers::pi;

TEST(Grid, UnitIntervalSixteenCells) {
    const auto g = make_grid(DomainDescriptor::bounded(1.0), 16);
    EXPECT_EQ(g->size(), 17);
    EXPECT_EQ(g->h, 1.0 / 16);
    EXPECT_EQ(g->x(0), 0.0);
    EXPECT_EQ(g->x(16), 1.0);
}

TEST(Grid, QuarterSpacing) {
    const auto g = make_grid(DomainDescriptor::bounded(pi / 2), 64);
    EXPECT_DOUBLE_EQ(g->h, pi / 128);
    EXPECT_EQ(g->nodes.back(), pi / 2);
}

TEST(Grid, HalfLineTruncation) {
    const auto g = make_grid(DomainDescriptor::half_line(40.0), 1024);
    EXPECT_EQ(g->h, 40.0 / 1024);
    EXPECT_EQ(g->size(), 1025);
    EXPECT_NEAR(g->h * g->n, 40.0, 1e-13);
}

TEST(Grid, UniformNodes) {
    const auto g = make_grid(DomainDescriptor::bounded(3.0), 100);
    for (int i = 1; i <= g->n; ++i) EXPECT_NEAR(g->x(i) - g->x(i - 1), g->h, 1e-14);
}

TEST(Grid, RejectsTooFewCells) {
    EXPECT_THROW(make_grid(DomainDescriptor::bounded(1.0), 15), std::invalid_argument);
    EXPECT_NO_THROW(make_grid(DomainDescriptor::bounded(1.0), 16));
}

TEST(Domain, RejectsBadLength) {
    EXPECT_THROW(DomainDescriptor::bounded(0.0), std::invalid_argument);
    EXPECT_THROW(DomainDescriptor::bounded(-1.0), std::invalid_argument);
    EXPECT_THROW(DomainDescriptor::half_line(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(Stability, AtPi) {
    const auto p = stability_params(DomainDescriptor::bounded(pi));
    EXPECT_NEAR(p.a, 1.0, 1e-15);
    EXPECT_NEAR(p.theta, 0.0, 1e-15);
    ASSERT_TRUE(predicted_decay_rate(p).has_value());
    EXPECT_NEAR(*predicted_decay_rate(p), 0.0, 1e-14);
}

TEST(Stability, AtHalfPi) {
    const auto p = stability_params(DomainDescriptor::bounded(pi / 2));
    EXPECT_NEAR(p.a, 4.0, 1e-14);
    EXPECT_NEAR(p.theta, 0.75, 1e-15);
    EXPECT_NEAR(*predicted_decay_rate(p), 24.0, 1e-12);
}

TEST(Stability, UnitLength) {
    const auto p = stability_params(DomainDescriptor::bounded(1.0));
    EXPECT_NEAR(p.a, pi * pi, 1e-13);
    EXPECT_NEAR(p.theta, 0.898679, 1e-6);
    EXPECT_NEAR(*predicted_decay_rate(p), 175.08, 0.01);
}

TEST(Stability, ScalingIdentityAndMonotonicity) {
    double previous = std::numeric_limits<double>::infinity();
    for (double L = 0.05; L < pi; L += 0.05) {
        const auto p = stability_params(DomainDescriptor::bounded(L));
        EXPECT_NEAR(p.a * L * L / (pi * pi), 1.0, 1e-14);
        EXPECT_GT(p.theta, 0.0);
        EXPECT_LT(p.theta, 1.0);
        const double r = *predicted_decay_rate(p);
        EXPECT_LT(r, previous);
        previous = r;
    }
    const auto beyond = stability_params(DomainDescriptor::bounded(3.2));
    EXPECT_LT(beyond.theta, 0.0);
    EXPECT_FALSE(predicted_decay_rate(beyond).has_value());
}

TEST(Stability, HalfLineNotApplicable) {
    EXPECT_THROW(stability_params(DomainDescriptor::half_line(40.0)), NotApplicable);
}

TEST(BoundaryConditions, RequiredSet) {
    const auto d = DomainDescriptor::bounded(1.0);
    const auto bc = boundary_conditions_for(d);
    EXPECT_TRUE(bc.has_left(0) && bc.has_left(1) && !bc.has_left(2));
    EXPECT_TRUE(bc.has_right(0) && bc.has_right(1) && bc.has_right(2));
    EXPECT_NO_THROW(validate_boundary_conditions(d, bc));
    EXPECT_NO_THROW(validate_boundary_conditions(DomainDescriptor::half_line(10.0), bc));
    EXPECT_THROW(validate_boundary_conditions(d, BoundaryConditionSet::clamped()), std::invalid_argument);
    auto inhomogeneous = bc;
    inhomogeneous.left[0].value = 1.0;
    EXPECT_THROW(validate_boundary_conditions(d, inhomogeneous), std::invalid_argument);
}
