#include "depcag/sim.hpp"

#include <algorithm>
#include <cmath>

namespace depcag {

SolutionTrace solve_homogeneous(const CauchyOperator& op, const Vector& z0, double s,
                                double t_end, std::size_t samples) {
    if (!(s <= t_end) || !op.grid().contains(s) || !op.grid().contains(t_end)) {
        raise(ErrorCode::OutOfDomain, "sample range outside the grid domain");
    }
    if (samples == 0) raise(ErrorCode::ValidationError, "need at least one sample step");
    SolutionTrace trace;
    trace.times.reserve(samples + 1);
    const double h = (t_end - s) / static_cast<double>(samples);
    for (std::size_t i = 0; i <= samples; ++i) {
        const double t = (i == samples) ? t_end : s + h * static_cast<double>(i);
        trace.times.push_back(t);
        trace.values.push_back(op.z(t, s) * z0);
        trace.intervals.push_back(op.grid().locate_closure(t));
    }
    return trace;
}

SolutionTrace integrate_direct(const Grid& grid, const CoefficientEvaluator& a,
                               const CoefficientEvaluator& b, const Vector& z0, double s,
                               double t_end, const DirectOptions& opt,
                               const std::optional<ForcingEvaluator>& forcing) {
    if (!grid.delayed()) {
        raise(ErrorCode::NotDelayed, "direct integration needs xi_n = t_n on every interval");
    }
    if (!grid.contains(s) || !grid.contains(t_end) || !(s <= t_end)) {
        raise(ErrorCode::OutOfDomain, "integration range outside the grid domain");
    }
    std::size_t start = grid.locate_closure(s);
    if (grid.node(start) != s) {
        raise(ErrorCode::ValidationError, "direct integration must start at a grid node");
    }
    if (opt.steps_per_interval < 1) {
        raise(ErrorCode::ValidationError, "need at least one step per interval");
    }

    SolutionTrace trace;
    trace.times.push_back(s);
    trace.values.push_back(z0);
    trace.intervals.push_back(start);

    Vector x = z0;
    for (std::size_t n = start; n < grid.interval_count() && grid.node(n) < t_end; ++n) {
        const double hi = std::min(grid.node(n + 1), t_end);
        const Vector held = x;  // x(t_n), frozen across the interval
        auto rhs = [&](double tau, const Vector& y) -> Vector {
            Vector out = a.eval(tau) * y + b.eval(tau) * held;
            if (forcing) out += forcing->f(tau);
            return out;
        };
        const int steps = opt.steps_per_interval;
        const double h = (hi - grid.node(n)) / steps;
        double tau = grid.node(n);
        for (int i = 0; i < steps; ++i) {
            const Vector k1 = rhs(tau, x);
            const Vector k2 = rhs(tau + 0.5 * h, x + 0.5 * h * k1);
            const Vector k3 = rhs(tau + 0.5 * h, x + 0.5 * h * k2);
            const Vector k4 = rhs(tau + h, x + h * k3);
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            // Land on the interval end exactly; accumulated steps can
            // overshoot it by an ulp on non-dyadic grids.
            tau = (i + 1 == steps) ? hi : grid.node(n) + (i + 1) * h;
            trace.times.push_back(tau);
            trace.values.push_back(x);
            trace.intervals.push_back(n);
        }
    }
    return trace;
}

Vector variation_of_constants(const CauchyOperator& op, const Vector& psi0, std::size_t n0,
                              const ForcingEvaluator& f, double t) {
    const Grid& grid = op.grid();
    if (n0 >= grid.node_count()) {
        raise(ErrorCode::OutOfDomain, "n0 beyond the grid");
    }
    const double start = grid.node(n0);
    if (t < start || !grid.contains(t)) {
        raise(ErrorCode::OutOfDomain, "t outside [t_{n0}, horizon]");
    }

    Vector psi = op.z(t, start) * psi0;
    if (t == start) return psi;

    const auto& quad_opt = op.settings().quad;
    const std::size_t k = grid.locate_closure(t);

    // Whole intervals [t_j, t_{j+1}], j = n0 .. k-1, carried to t through Z.
    for (std::size_t j = n0; j < k; ++j) {
        const double lo = grid.node(j);
        const double hi = grid.node(j + 1);
        auto integrand = [&](double s) -> Vector { return op.gamma_kernel(hi, s) * f.f(s); };
        Vector part = Vector::Zero(op.dim());
        const double seam = grid.xi(j);
        if (seam > lo && seam < hi) {
            part = quad(integrand, lo, seam, quad_opt) + quad(integrand, seam, hi, quad_opt);
        } else {
            part = quad(integrand, lo, hi, quad_opt);
        }
        psi += op.z(t, hi) * part;
    }

    // Partial interval [t_k, t].
    const double lo = grid.node(k);
    if (t > lo) {
        auto integrand = [&](double s) -> Vector { return op.gamma_kernel(t, s) * f.f(s); };
        const double seam = grid.xi(k);
        if (seam > lo && seam < t) {
            psi += quad(integrand, lo, seam, quad_opt) + quad(integrand, seam, t, quad_opt);
        } else {
            psi += quad(integrand, lo, t, quad_opt);
        }
    }
    return psi;
}

} // namespace depcag
