#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "depcag/errors.hpp"

namespace depcag {

/// Node sequence t_0 < t_1 < ... < t_{n_max} together with the argument
/// values xi_n in [t_n, t_{n+1}]. The domain is truncated at the last node
/// (the horizon); every operation refuses times beyond it. Immutable after
/// construction, safe for concurrent reads.
class Grid {
public:
    static Grid uniform(double start, double step, std::size_t node_count);
    /// Delayed grid (xi_n = t_n).
    static Grid from_nodes(std::vector<double> nodes);
    static Grid from_nodes(std::vector<double> nodes, std::vector<double> xi);

    double t0() const { return nodes_.front(); }
    double horizon() const { return nodes_.back(); }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t interval_count() const { return nodes_.size() - 1; }

    double node(std::size_t n) const { return nodes_[n]; }
    double xi(std::size_t n) const { return xi_[n]; }
    double interval_length(std::size_t n) const { return nodes_[n + 1] - nodes_[n]; }
    const std::vector<double>& nodes() const { return nodes_; }

    /// True iff xi_n = t_n for every interval.
    bool delayed() const { return delayed_; }

    /// Index k with t_k <= t < t_{k+1}; binary search.
    /// OutOfDomain for t < t_0 or t >= horizon.
    std::size_t locate_interval(double t) const;

    /// Like locate_interval, but t == horizon maps to the last interval.
    /// Closure convention used by kernels that evaluate up to the horizon.
    std::size_t locate_closure(double t) const;

    /// gamma(t) = xi_{k_t}.
    double gamma(double t) const { return xi_[locate_interval(t)]; }

    bool contains(double t) const { return t >= nodes_.front() && t <= nodes_.back(); }

    /// Smallest interval index n with both s and t in [t_n, t_{n+1}].
    /// DomainError when no single interval contains both.
    std::size_t common_interval(double s, double t) const;

private:
    Grid(std::vector<double> nodes, std::vector<double> xi);

    std::vector<double> nodes_;
    std::vector<double> xi_;
    bool delayed_ = false;
};

/// Deviating argument g with the containment g([t_n,t_{n+1})) in [t_n,t_{n+1}).
struct DeviatingArgument {
    std::function<double(double)> g;

    static DeviatingArgument identity();
    /// g = gamma, the piecewise constant argument of the grid.
    static DeviatingArgument piecewise_constant(const Grid& grid);
};

struct DeviationViolation {
    std::size_t interval;
    double sample;
    double image;
};

struct DeviationReport {
    bool pass = true;
    /// First violating sample per failing interval.
    std::vector<DeviationViolation> violations;
};

/// Containment check of g by dense sampling; samples_per_interval >= 2.
DeviationReport validate_deviating(const Grid& grid, const DeviatingArgument& g,
                                   std::size_t samples_per_interval = 64);

} // namespace depcag
