#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "depcag/grid.hpp"
#include "depcag/linear_system.hpp"

namespace depcag {

struct CauchySettings {
    QuadOptions quad;
    /// Interior sample count per interval for the invertibility certificate.
    int cheb_samples = 17;
    /// Smallest admissible singular value of D_n(t).
    double singular_floor = 1e-12;
    FundamentalOptions fundamental;
};

struct InvertibilityReport {
    struct IntervalRecord {
        std::size_t interval;
        double worst_sigma;
        double worst_t;
    };
    bool pass = true;
    double floor = 1e-12;
    std::vector<IntervalRecord> intervals;  // one record per interval, worst point
};

/// Certificate for the invertibility of D_n(t) = I + int_{xi_n}^t X(xi_n,u)B(u)du
/// on every interval: samples Chebyshev-distributed interior points plus both
/// endpoints and reports the smallest singular value found.
InvertibilityReport certify_invertibility(const Grid& grid, const FundamentalMatrix& fm,
                                          const CoefficientEvaluator& b,
                                          const CauchySettings& settings = {});

/// Cauchy machinery of the homogeneous piecewise-argument system
/// z' = A(t) z + B(t) z(gamma(t)): the correction matrices D_n, the interval
/// transitions H(n), the node products Phi(n), the solution operator Z(t,s),
/// and the variation-of-constants kernels Gamma and Zhat.
///
/// Construction certifies invertibility of D_n on every interval and fills
/// the H/Phi memo tables eagerly; afterwards the operator is read-only.
class CauchyOperator {
public:
    CauchyOperator(const Grid& grid, CoefficientEvaluator a, CoefficientEvaluator b,
                   CauchySettings settings = {});

    const Grid& grid() const { return grid_; }
    Eigen::Index dim() const { return fm_->dim(); }
    const FundamentalMatrix& fundamental() const { return *fm_; }
    const CoefficientEvaluator& a() const { return a_; }
    const CoefficientEvaluator& b() const { return b_; }
    const CauchySettings& settings() const { return settings_; }

    /// X(t,s) of the pure differential part.
    Matrix x(double t, double s) const { return fm_->eval(t, s); }

    /// D_n(t) = I + int_{xi_n}^t X(xi_n,u) B(u) du for t in [t_n, t_{n+1}];
    /// the integral is negatively oriented when t < xi_n. SingularD when the
    /// smallest singular value falls below the configured floor.
    Matrix d_matrix(std::size_t n, double t) const;

    /// H(n) = X(t_{n+1},xi_n) D_n(t_{n+1}) D_n(t_n)^{-1} X(xi_n,t_n); cached.
    const Matrix& h_matrix(std::size_t n) const;

    /// Phi(n) = H(n-1)...H(0), with Phi(0) = I by the empty-product convention.
    const Matrix& phi(std::size_t n) const;

    /// Solution operator: Z(s,s) = I, t -> Z(t,s) z0 solves the homogeneous
    /// system; Z(t,s) = Z(s,t)^{-1} for t < s.
    Matrix z(double t, double s) const;

    /// One-interval variation-of-constants kernel; s and t must share a grid
    /// interval (DomainError otherwise). Carries the Z-branch for s up to
    /// xi_n and the fundamental matrix beyond it.
    Matrix gamma_kernel(double t, double s) const;

    /// Whole-domain kernel of the variation-of-constants formula: Gamma when
    /// t shares the interval of s, otherwise Z(t, t_{n+1}) Gamma(t_{n+1}, s)
    /// with n the interval of s.
    Matrix zhat_kernel(double t, double s) const;

private:
    Matrix d_raw(std::size_t n, double t) const;
    Matrix z_within(std::size_t n, double t, double s) const;

    Grid grid_;
    CoefficientEvaluator a_;
    CoefficientEvaluator b_;
    CauchySettings settings_;
    std::shared_ptr<const FundamentalMatrix> fm_;

    std::vector<Matrix> d_start_;      // D_n(t_n)
    std::vector<Matrix> d_end_;        // D_n(t_{n+1})
    std::vector<Eigen::PartialPivLU<Matrix>> d_start_lu_;
    std::vector<Matrix> h_;
    std::vector<Matrix> phi_;          // phi_[n] = Phi(n), n = 0..interval_count
    std::vector<Matrix> phi_inv_;
};

} // namespace depcag
