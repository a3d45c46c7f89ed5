#include "depcag/cauchy.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace depcag {

namespace {

double smallest_singular_value(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().minCoeff();
}

} // namespace

InvertibilityReport certify_invertibility(const Grid& grid, const FundamentalMatrix& fm,
                                          const CoefficientEvaluator& b,
                                          const CauchySettings& settings) {
    InvertibilityReport report;
    report.floor = settings.singular_floor;
    const Eigen::Index dim = fm.dim();
    for (std::size_t n = 0; n < grid.interval_count(); ++n) {
        const double xi = grid.xi(n);
        auto d_at = [&](double t) -> Matrix {
            Matrix integral = quad(
                [&](double u) -> Matrix { return fm.eval(xi, u) * b.eval(u); }, xi, t,
                settings.quad);
            return Matrix::Identity(dim, dim) + integral;
        };
        InvertibilityReport::IntervalRecord rec{n, std::numeric_limits<double>::infinity(),
                                                grid.node(n)};
        auto probe = [&](double t) {
            const double sigma = b.is_zero() ? 1.0 : smallest_singular_value(d_at(t));
            if (sigma < rec.worst_sigma) {
                rec.worst_sigma = sigma;
                rec.worst_t = t;
            }
        };
        probe(grid.node(n));
        probe(grid.node(n + 1));
        const int m = settings.cheb_samples;
        for (int j = 0; j < m; ++j) {
            const double theta = M_PI * (2.0 * j + 1.0) / (2.0 * m);
            const double frac = 0.5 * (1.0 - std::cos(theta));
            probe(grid.node(n) + frac * grid.interval_length(n));
        }
        if (rec.worst_sigma < report.floor) report.pass = false;
        report.intervals.push_back(rec);
    }
    return report;
}

CauchyOperator::CauchyOperator(const Grid& grid, CoefficientEvaluator a, CoefficientEvaluator b,
                               CauchySettings settings)
    : grid_(grid), a_(std::move(a)), b_(std::move(b)), settings_(settings),
      fm_(std::make_shared<FundamentalMatrix>(grid_, a_, settings_.fundamental)) {
    if (a_.dim() != b_.dim()) {
        raise(ErrorCode::ValidationError, "coefficient dimensions disagree");
    }
    const auto report = certify_invertibility(grid_, *fm_, b_, settings_);
    if (!report.pass) {
        for (const auto& rec : report.intervals) {
            if (rec.worst_sigma < report.floor) {
                raise(ErrorCode::SingularD,
                      "D_" + std::to_string(rec.interval) + " near-singular at t=" +
                          std::to_string(rec.worst_t) +
                          " (sigma_min=" + std::to_string(rec.worst_sigma) + ")");
            }
        }
    }

    const Eigen::Index dim = fm_->dim();
    const std::size_t m = grid_.interval_count();
    d_start_.resize(m);
    d_end_.resize(m);
    d_start_lu_.reserve(m);
    h_.resize(m);
    phi_.resize(m + 1);
    phi_inv_.resize(m + 1);
    phi_[0] = Matrix::Identity(dim, dim);
    phi_inv_[0] = Matrix::Identity(dim, dim);
    for (std::size_t n = 0; n < m; ++n) {
        d_start_[n] = d_raw(n, grid_.node(n));
        d_end_[n] = d_raw(n, grid_.node(n + 1));
        d_start_lu_.emplace_back(d_start_[n]);
        if (b_.is_zero()) {
            h_[n] = fm_->eval(grid_.node(n + 1), grid_.node(n));
        } else {
            h_[n] = fm_->eval(grid_.node(n + 1), grid_.xi(n)) * d_end_[n] *
                    d_start_lu_[n].solve(fm_->eval(grid_.xi(n), grid_.node(n)));
        }
        phi_[n + 1] = h_[n] * phi_[n];
        phi_inv_[n + 1] = phi_[n + 1].partialPivLu().inverse();
        if (!phi_inv_[n + 1].allFinite()) {
            raise(ErrorCode::SingularZ, "Phi(" + std::to_string(n + 1) + ") not invertible");
        }
    }
}

Matrix CauchyOperator::d_raw(std::size_t n, double t) const {
    const Eigen::Index dim = fm_->dim();
    if (b_.is_zero() || t == grid_.xi(n)) return Matrix::Identity(dim, dim);
    const double xi = grid_.xi(n);
    Matrix integral = quad([&](double u) -> Matrix { return fm_->eval(xi, u) * b_.eval(u); },
                           xi, t, settings_.quad);
    return Matrix::Identity(dim, dim) + integral;
}

Matrix CauchyOperator::d_matrix(std::size_t n, double t) const {
    if (n >= grid_.interval_count()) {
        raise(ErrorCode::OutOfDomain, "interval index " + std::to_string(n) + " out of range");
    }
    if (t < grid_.node(n) || t > grid_.node(n + 1)) {
        raise(ErrorCode::OutOfDomain, "t outside interval " + std::to_string(n));
    }
    Matrix d = d_raw(n, t);
    if (!b_.is_zero() && smallest_singular_value(d) < settings_.singular_floor) {
        raise(ErrorCode::SingularD, "D_" + std::to_string(n) + "(t) singular at t=" +
                                        std::to_string(t));
    }
    return d;
}

const Matrix& CauchyOperator::h_matrix(std::size_t n) const {
    if (n >= h_.size()) {
        raise(ErrorCode::OutOfDomain, "interval index " + std::to_string(n) + " out of range");
    }
    return h_[n];
}

const Matrix& CauchyOperator::phi(std::size_t n) const {
    if (n >= phi_.size()) {
        raise(ErrorCode::OutOfDomain, "node index " + std::to_string(n) + " out of range");
    }
    return phi_[n];
}

Matrix CauchyOperator::z_within(std::size_t n, double t, double s) const {
    // Z(t,s) = X(t,xi_n) D_n(t) D_n(s)^{-1} X(xi_n,s) with both times in
    // interval n.
    if (b_.is_zero()) return fm_->eval(t, s);
    const double xi = grid_.xi(n);
    const Matrix dt = d_raw(n, t);
    const Matrix ds = d_raw(n, s);
    return fm_->eval(t, xi) * dt * ds.partialPivLu().solve(fm_->eval(xi, s));
}

Matrix CauchyOperator::z(double t, double s) const {
    const Eigen::Index dim = fm_->dim();
    if (t == s) return Matrix::Identity(dim, dim);
    if (!grid_.contains(t) || !grid_.contains(s)) {
        raise(ErrorCode::OutOfDomain, "Z arguments outside the grid domain");
    }
    if (t < s) {
        Matrix forward = z(s, t);
        Matrix inverse = forward.partialPivLu().inverse();
        if (!inverse.allFinite()) {
            raise(ErrorCode::SingularZ, "Z(s,t) not invertible");
        }
        return inverse;
    }
    if (b_.is_zero()) return fm_->eval(t, s);
    const std::size_t k = grid_.locate_closure(t);
    const std::size_t m = grid_.locate_closure(s);
    if (k == m) return z_within(k, t, s);

    Matrix left;
    if (t == grid_.node(k)) {
        left = Matrix::Identity(dim, dim);
    } else {
        left = fm_->eval(t, grid_.xi(k)) * d_raw(k, t) *
               d_start_lu_[k].solve(fm_->eval(grid_.xi(k), grid_.node(k)));
    }
    const Matrix mid = phi_[k] * phi_inv_[m + 1];
    Matrix right;
    if (s == grid_.node(m)) {
        right = h_[m];
    } else {
        const Matrix ds = d_raw(m, s);
        right = fm_->eval(grid_.node(m + 1), grid_.xi(m)) * d_end_[m] *
                ds.partialPivLu().solve(fm_->eval(grid_.xi(m), s));
    }
    return left * mid * right;
}

Matrix CauchyOperator::gamma_kernel(double t, double s) const {
    const std::size_t n = grid_.common_interval(s, t);
    // Branch seam sits at xi_n; the Z-carrying branch covers s up to and
    // including the seam, so Gamma(t, t_n) = Z(t, t_n) on delayed grids and
    // Zhat collapses to Z at node-to-node arguments.
    if (s <= grid_.xi(n)) {
        return z(t, grid_.node(n)) * fm_->eval(grid_.node(n), s);
    }
    return fm_->eval(t, s);
}

Matrix CauchyOperator::zhat_kernel(double t, double s) const {
    if (!grid_.contains(t) || !grid_.contains(s)) {
        raise(ErrorCode::OutOfDomain, "Zhat arguments outside the grid domain");
    }
    const std::size_t n = grid_.locate_closure(s);
    if (t >= grid_.node(n) && t <= grid_.node(n + 1)) {
        return gamma_kernel(t, s);
    }
    const double right_node = grid_.node(n + 1);
    return z(t, right_node) * gamma_kernel(right_node, s);
}

} // namespace depcag
