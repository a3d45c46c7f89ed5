#include "depcag/linear_system.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace depcag {

ScalarExpr ScalarExpr::constant(Complex c) {
    ScalarExpr e;
    e.value_ = [c](double) { return c; };
    e.integral_ = [c](double s, double t) { return c * (t - s); };
    e.zero_ = (c == Complex(0.0, 0.0));
    return e;
}

ScalarExpr ScalarExpr::linear(Complex c0, Complex c1) {
    ScalarExpr e;
    e.value_ = [c0, c1](double t) { return c0 + c1 * t; };
    e.integral_ = [c0, c1](double s, double t) {
        return c0 * (t - s) + 0.5 * c1 * (t * t - s * s);
    };
    e.zero_ = (c0 == Complex(0.0) && c1 == Complex(0.0));
    return e;
}

ScalarExpr ScalarExpr::exp_decay(Complex c, double rate) {
    ScalarExpr e;
    e.value_ = [c, rate](double t) { return c * std::exp(-rate * t); };
    if (rate == 0.0) {
        e.integral_ = [c](double s, double t) { return c * (t - s); };
    } else {
        e.integral_ = [c, rate](double s, double t) {
            return (c / rate) * (std::exp(-rate * s) - std::exp(-rate * t));
        };
    }
    e.zero_ = (c == Complex(0.0));
    return e;
}

ScalarExpr ScalarExpr::from_callable(std::function<Complex(double)> f, QuadOptions quad_opt) {
    ScalarExpr e;
    e.value_ = std::move(f);
    auto fn = e.value_;
    e.integral_ = [fn, quad_opt](double s, double t) {
        return quad([&fn](double u) { return fn(u); }, s, t, quad_opt);
    };
    return e;
}

Complex ScalarExpr::integral(double s, double t) const { return integral_(s, t); }

CoefficientEvaluator CoefficientEvaluator::constant(Matrix value) {
    CoefficientEvaluator c;
    c.kind_ = Kind::Constant;
    c.dim_ = value.rows();
    c.zero_ = value.isZero(0.0);
    c.constant_ = std::move(value);
    return c;
}

CoefficientEvaluator CoefficientEvaluator::diagonal(std::vector<ScalarExpr> entries) {
    CoefficientEvaluator c;
    c.kind_ = Kind::Diagonal;
    c.dim_ = static_cast<Eigen::Index>(entries.size());
    c.zero_ = true;
    for (const auto& e : entries) {
        if (!e.is_zero()) c.zero_ = false;
    }
    c.diag_ = std::move(entries);
    return c;
}

CoefficientEvaluator CoefficientEvaluator::general(std::function<Matrix(double)> eval,
                                                   Eigen::Index dim) {
    CoefficientEvaluator c;
    c.kind_ = Kind::General;
    c.dim_ = dim;
    c.general_ = std::move(eval);
    return c;
}

CoefficientEvaluator CoefficientEvaluator::zero(Eigen::Index dim) {
    return constant(Matrix::Zero(dim, dim));
}

Matrix CoefficientEvaluator::eval(double t) const {
    switch (kind_) {
        case Kind::Constant:
            return constant_;
        case Kind::Diagonal: {
            Matrix m = Matrix::Zero(dim_, dim_);
            for (Eigen::Index i = 0; i < dim_; ++i) {
                m(i, i) = diag_[static_cast<std::size_t>(i)].value(t);
            }
            return m;
        }
        case Kind::General: {
            Matrix m = general_(t);
            if (m.rows() != dim_ || m.cols() != dim_ || !m.allFinite()) {
                raise(ErrorCode::EvaluationFailure,
                      "coefficient evaluation failed at t=" + std::to_string(t));
            }
            return m;
        }
    }
    raise(ErrorCode::EvaluationFailure, "unknown coefficient kind");
}

FundamentalMatrix::FundamentalMatrix(const Grid& grid, CoefficientEvaluator a,
                                     FundamentalOptions opt)
    : grid_(grid), a_(std::move(a)), opt_(opt) {
    if (a_.kind() != CoefficientEvaluator::Kind::General) return;

    // RK4 on X' = A(t) X per interval, anchored at the left node.
    const Eigen::Index n = a_.dim();
    cache_.resize(grid_.interval_count());
    node_prefix_.resize(grid_.node_count());
    node_prefix_[0] = Matrix::Identity(n, n);
    for (std::size_t iv = 0; iv < grid_.interval_count(); ++iv) {
        const int steps = opt_.steps_per_interval;
        const double h = grid_.interval_length(iv) / steps;
        auto& cell = cache_[iv];
        cell.values.resize(static_cast<std::size_t>(steps) + 1);
        cell.slopes.resize(static_cast<std::size_t>(steps) + 1);
        Matrix x = Matrix::Identity(n, n);
        double tau = grid_.node(iv);
        cell.values[0] = x;
        cell.slopes[0] = a_.eval(tau) * x;
        for (int i = 0; i < steps; ++i) {
            const Matrix k1 = cell.slopes[static_cast<std::size_t>(i)];
            const Matrix k2 = a_.eval(tau + 0.5 * h) * (x + 0.5 * h * k1);
            const Matrix k3 = a_.eval(tau + 0.5 * h) * (x + 0.5 * h * k2);
            const Matrix k4 = a_.eval(tau + h) * (x + h * k3);
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            tau = grid_.node(iv) + (i + 1) * h;
            cell.values[static_cast<std::size_t>(i) + 1] = x;
            cell.slopes[static_cast<std::size_t>(i) + 1] = a_.eval(tau) * x;
        }
        node_prefix_[iv + 1] = cell.values.back() * node_prefix_[iv];
    }
}

Matrix FundamentalMatrix::lattice_value(double t) const {
    // X(t, t_0) through the per-interval lattice with cubic Hermite dense output.
    const std::size_t iv = grid_.locate_closure(t);
    const auto& cell = cache_[iv];
    const int steps = opt_.steps_per_interval;
    const double h = grid_.interval_length(iv) / steps;
    const double offset = (t - grid_.node(iv)) / h;
    int idx = static_cast<int>(offset);
    if (idx >= steps) idx = steps - 1;
    const double theta = offset - idx;
    const auto i = static_cast<std::size_t>(idx);
    if (theta == 0.0) return cell.values[i] * node_prefix_[iv];
    const Matrix& y0 = cell.values[i];
    const Matrix& y1 = cell.values[i + 1];
    const Matrix m0 = h * cell.slopes[i];
    const Matrix m1 = h * cell.slopes[i + 1];
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    Matrix local = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + theta) * m0 +
                   (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
    return local * node_prefix_[iv];
}

Matrix FundamentalMatrix::eval(double t, double s) const {
    const Eigen::Index n = a_.dim();
    if (t == s) return Matrix::Identity(n, n);
    switch (a_.kind()) {
        case CoefficientEvaluator::Kind::Constant: {
            if (a_.is_zero()) return Matrix::Identity(n, n);
            Matrix arg = a_.constant_value() * Complex(t - s, 0.0);
            return arg.exp();
        }
        case CoefficientEvaluator::Kind::Diagonal: {
            Matrix m = Matrix::Zero(n, n);
            const auto& entries = a_.diagonal_entries();
            for (Eigen::Index i = 0; i < n; ++i) {
                m(i, i) = std::exp(entries[static_cast<std::size_t>(i)].integral(s, t));
            }
            return m;
        }
        case CoefficientEvaluator::Kind::General: {
            if (!grid_.contains(t) || !grid_.contains(s)) {
                raise(ErrorCode::OutOfDomain, "fundamental matrix evaluated outside the grid");
            }
            const Matrix xt = lattice_value(t);
            const Matrix xs = lattice_value(s);
            return xt * xs.partialPivLu().inverse();
        }
    }
    raise(ErrorCode::EvaluationFailure, "unknown coefficient kind");
}

} // namespace depcag
