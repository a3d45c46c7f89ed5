#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <type_traits>

#include <Eigen/Dense>

#include "depcag/errors.hpp"

namespace depcag {

struct QuadOptions {
    double tol = 1e-10;  // absolute error target
    int max_depth = 40;  // bisection cap before NoConvergence
};

namespace quad_detail {

// 5-point Gauss-Legendre on [-1, 1]; exact through degree 9.
inline constexpr std::array<double, 5> kNodes = {
    -0.9061798459386639927976, -0.5384693101056830910363, 0.0,
    0.5384693101056830910363, 0.9061798459386639927976};
inline constexpr std::array<double, 5> kWeights = {
    0.2369268850561890875143, 0.4786286704993664680413, 0.5688888888888888888889,
    0.4786286704993664680413, 0.2369268850561890875143};

template <typename T>
double max_abs_diff(const T& a, const T& b) {
    if constexpr (std::is_base_of_v<Eigen::MatrixBase<T>, T>) {
        return (a - b).cwiseAbs().maxCoeff();
    } else {
        return std::abs(a - b);
    }
}

template <typename F>
auto gauss5(F&& f, double a, double b) -> std::decay_t<decltype(f(a))> {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    auto acc = std::decay_t<decltype(f(a))>(kWeights[0] * f(mid + half * kNodes[0]));
    for (std::size_t i = 1; i < kNodes.size(); ++i) {
        acc += kWeights[i] * f(mid + half * kNodes[i]);
    }
    return std::decay_t<decltype(f(a))>(half * acc);
}

template <typename F, typename T>
T adapt(F&& f, double a, double b, const T& whole, double tol, int depth, int max_depth) {
    const double mid = 0.5 * (a + b);
    const T left = gauss5(f, a, mid);
    const T right = gauss5(f, mid, b);
    const T refined = left + right;
    if (max_abs_diff<T>(whole, refined) <= tol) {
        return refined;
    }
    if (depth >= max_depth) {
        raise(ErrorCode::NoConvergence, "quadrature subdivision limit reached");
    }
    return adapt(f, a, mid, left, 0.5 * tol, depth + 1, max_depth) +
           adapt(f, mid, b, right, 0.5 * tol, depth + 1, max_depth);
}

} // namespace quad_detail

/// Adaptive composite quadrature of a scalar-, vector- or matrix-valued
/// integrand with absolute (entrywise) error control. Reversed limits give
/// the negated integral. Integrands must be smooth on [a, b]; callers split
/// at grid nodes first.
template <typename F>
auto quad(F&& f, double a, double b, const QuadOptions& opt = {})
    -> std::decay_t<decltype(f(a))> {
    using T = std::decay_t<decltype(f(a))>;
    if (!(opt.tol > 0.0)) raise(ErrorCode::ValidationError, "quadrature tolerance must be positive");
    if (a == b) return T(0.0 * f(a));
    if (a > b) return T(-quad(f, b, a, opt));
    const T whole = quad_detail::gauss5(f, a, b);
    return quad_detail::adapt(f, a, b, whole, opt.tol, 0, opt.max_depth);
}

} // namespace depcag
