#pragma once

#include <functional>
#include <optional>

#include "depcag/cauchy.hpp"
#include "depcag/trace.hpp"

namespace depcag {

/// Nonhomogeneous forcing term t -> f(t).
struct ForcingEvaluator {
    std::function<Vector(double)> f;
};

struct DirectOptions {
    /// Fixed RK4 substeps per grid interval.
    int steps_per_interval = 256;
};

/// Trace of Z(t,s) z0 at samples+1 equispaced times on [s, t_end].
SolutionTrace solve_homogeneous(const CauchyOperator& op, const Vector& z0, double s,
                                double t_end, std::size_t samples);

/// Interval-marching oracle, independent of the Cauchy machinery: inside
/// [t_n, t_{n+1}] solves x' = A(t)x + B(t)x(t_n) (+ f) with the held value
/// x(t_n) known, using classical fixed-step RK4. Requires a delayed grid
/// (NotDelayed otherwise) and a node as start time. The trace carries every
/// RK substep point.
SolutionTrace integrate_direct(const Grid& grid, const CoefficientEvaluator& a,
                               const CoefficientEvaluator& b, const Vector& z0, double s,
                               double t_end, const DirectOptions& opt = {},
                               const std::optional<ForcingEvaluator>& forcing = std::nullopt);

/// psi(t) = Z(t, t_{n0}) psi0 + int_{t_{n0}}^t Zhat(t,s) f(s) ds, the integral
/// split at grid nodes and at the branch seam of the one-interval kernel.
Vector variation_of_constants(const CauchyOperator& op, const Vector& psi0, std::size_t n0,
                              const ForcingEvaluator& f, double t);

} // namespace depcag
