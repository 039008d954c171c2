#pragma once

// Spatial domains, boundary-condition sets, uniform grids and the stability
// parameters a = pi^2/L^2, theta = 1 - 1/a.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace benney {

/// Precondition unmet for a quantity that only exists on some domains.
class NotApplicable : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class DomainKind { BoundedInterval, TruncatedHalfLine };

struct DomainDescriptor {
    DomainKind kind = DomainKind::BoundedInterval;
    double L = 1.0;  // interval length, or truncation length of R^+

    static DomainDescriptor bounded(double length) { return make(DomainKind::BoundedInterval, length); }
    static DomainDescriptor half_line(double truncation) { return make(DomainKind::TruncatedHalfLine, truncation); }

private:
    static DomainDescriptor make(DomainKind kind, double length) {
        if (!(length > 0.0) || !std::isfinite(length))
            throw std::invalid_argument("domain length must be positive and finite");
        return DomainDescriptor{kind, length};
    }
};

inline std::string to_string(DomainKind k) {
    return k == DomainKind::BoundedInterval ? "bounded" : "halfline";
}

/// A homogeneous condition D^order u = value at one end.
struct BoundaryCondition {
    int order = 0;
    double value = 0.0;
    friend bool operator==(const BoundaryCondition&, const BoundaryCondition&) = default;
};

struct BoundaryConditionSet {
    std::vector<BoundaryCondition> left;
    std::vector<BoundaryCondition> right;

    bool has_left(int order) const { return has(left, order); }
    bool has_right(int order) const { return has(right, order); }

    /// u = u_x = 0 at x = 0 and u = u_x = u_xx = 0 at the right end.
    static BoundaryConditionSet benney_lin() { return {{{0, 0.0}, {1, 0.0}}, {{0, 0.0}, {1, 0.0}, {2, 0.0}}}; }
    /// H^2_0: u = u_x = 0 at both ends.
    static BoundaryConditionSet clamped() { return {{{0, 0.0}, {1, 0.0}}, {{0, 0.0}, {1, 0.0}}}; }
    /// H^1_0: u = 0 at both ends.
    static BoundaryConditionSet dirichlet() { return {{{0, 0.0}}, {{0, 0.0}}}; }
    /// No conditions; operators fall back to one-sided stencils.
    static BoundaryConditionSet free() { return {}; }

    /// Homogeneous sets only.
    void require_homogeneous() const {
        for (const auto* side : {&left, &right})
            for (const auto& c : *side)
                if (c.value != 0.0) throw std::invalid_argument("only homogeneous boundary conditions are supported");
    }

    friend bool operator==(const BoundaryConditionSet&, const BoundaryConditionSet&) = default;

private:
    static bool has(const std::vector<BoundaryCondition>& side, int order) {
        for (const auto& c : side)
            if (c.order == order) return true;
        return false;
    }
};

/// The set required by both domain kinds: orders {0,1} left, {0,1,2} right (the
/// half-line clamps its artificial far end the same way), values zero.
inline BoundaryConditionSet boundary_conditions_for(const DomainDescriptor&) {
    return BoundaryConditionSet::benney_lin();
}

inline void validate_boundary_conditions(const DomainDescriptor& d, const BoundaryConditionSet& bc) {
    auto orders = [](const std::vector<BoundaryCondition>& side) {
        std::vector<int> o;
        for (const auto& c : side) {
            if (c.value != 0.0) throw std::invalid_argument("boundary values must be zero");
            o.push_back(c.order);
        }
        std::sort(o.begin(), o.end());
        return o;
    };
    if (orders(bc.left) != std::vector<int>{0, 1} || orders(bc.right) != std::vector<int>{0, 1, 2})
        throw std::invalid_argument(to_string(d.kind) +
                                    " domain requires orders {0,1} at the left end and {0,1,2} at the right end");
}

struct StabilityParams {
    double a = 0.0;
    double theta = 0.0;
};

inline StabilityParams stability_params(const DomainDescriptor& d) {
    if (d.kind != DomainKind::BoundedInterval)
        throw NotApplicable("stability parameters are defined for bounded intervals only");
    const double a = std::numbers::pi * std::numbers::pi / (d.L * d.L);
    return {a, 1.0 - 1.0 / a};
}

/// 2 a^2 theta: the guaranteed decay rate of ||u||^2 for small data on L < pi.
/// Empty when theta < 0; zero on the boundary case theta = 0.
inline std::optional<double> predicted_decay_rate(const StabilityParams& p) {
    if (p.theta < 0.0) return std::nullopt;
    return 2.0 * p.a * p.a * p.theta;
}

struct Grid {
    int n = 0;     // number of cells
    double L = 0;  // length
    double h = 0;  // spacing
    std::vector<double> nodes;

    int size() const { return n + 1; }
    double x(int i) const { return nodes[static_cast<std::size_t>(i)]; }
    friend bool operator==(const Grid& a, const Grid& b) { return a.n == b.n && a.L == b.L; }
};

using GridPtr = std::shared_ptr<const Grid>;

inline constexpr int min_grid_cells = 16;

inline GridPtr make_grid(const DomainDescriptor& d, int n) {
    if (n < min_grid_cells)
        throw std::invalid_argument("grid needs at least " + std::to_string(min_grid_cells) + " cells, got " +
                                    std::to_string(n));
    auto g = std::make_shared<Grid>();
    g->n = n;
    g->L = d.L;
    g->h = d.L / n;
    g->nodes.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < n; ++i) g->nodes[static_cast<std::size_t>(i)] = i * g->h;
    g->nodes.back() = d.L;
    return g;
}

}  // namespace benney
