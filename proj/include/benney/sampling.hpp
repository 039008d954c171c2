#pragma once

// Randomized bc-respecting samples for the inequality oracles: uniform
// coefficients in [-1, 1] on the orthonormal bump basis, evaluated on a grid.
// Every sample is a pure function of (seed, index), so a stored sample can be
// regenerated or replayed on its own.

#include "benney/diagnostics.hpp"
#include "benney/galerkin.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace benney {

/// splitmix64 finalizer, used to decorrelate (seed, index) pairs.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Uniform on [-1, 1) from the top 53 bits; portable unlike the std distributions.
inline double symmetric_unit(std::mt19937_64& rng) {
    return std::ldexp(static_cast<double>(rng() >> 11), -52) - 1.0;
}

struct OracleSample {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    double L = 1.0;
    int n = 128;
    std::vector<double> coefficients;
    std::vector<double> values;  // on the n + 1 nodes
};

inline OracleSample draw_oracle_sample(const GalerkinBasis& basis, const GridPtr& grid, std::uint64_t seed,
                                       std::uint64_t index) {
    std::mt19937_64 rng(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ull));
    OracleSample s;
    s.seed = seed;
    s.index = index;
    s.L = grid->L;
    s.n = grid->n;
    Eigen::VectorXd c(basis.N);
    for (int i = 0; i < basis.N; ++i) c(i) = symmetric_unit(rng);
    s.coefficients.assign(c.data(), c.data() + c.size());
    s.values = reconstruct(basis, c, *grid);
    // Exact zeros at the ends; the basis vanishes there up to rounding.
    s.values.front() = 0.0;
    s.values.back() = 0.0;
    return s;
}

/// Outcome per inequality for one sample.
struct OracleVerdict {
    SteklovReport steklov;
    InterpolationReport interpolation;

    bool pass() const { return steklov.pass() && interpolation.pass; }
};

inline OracleVerdict evaluate_oracles(const OracleSample& s) {
    const auto grid = make_grid(DomainDescriptor::bounded(s.L), s.n);
    const GridFunction f(grid, BoundaryConditionSet::clamped(), s.values);
    return {steklov_oracle(f), interpolation_oracle(f)};
}

inline const std::array<const char*, 4> oracle_names = {"steklov_x", "steklov_xx", "steklov_xx_x", "sup_interpolation"};

inline std::array<bool, 4> oracle_passes(const OracleVerdict& v) {
    const bool d = v.steklov.degenerate;
    return {d || v.steklov.pass_x, d || v.steklov.pass_xx, d || v.steklov.pass_xx_x, v.interpolation.pass};
}

/// value / threshold per inequality (>= 1 passes); infinity when degenerate.
inline std::array<double, 4> oracle_ratios(const OracleVerdict& v) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const auto& s = v.steklov;
    if (s.degenerate) return {inf, inf, inf, v.interpolation.sup > 0.0 ? v.interpolation.rhs * v.interpolation.slack / v.interpolation.sup : inf};
    return {s.r_x / (s.a * s.slack), s.r_xx / (s.a * s.a * s.slack), s.r_xx_x / (s.a * s.slack),
            v.interpolation.sup > 0.0 ? v.interpolation.rhs * v.interpolation.slack / v.interpolation.sup : inf};
}

}  // namespace benney
