#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "depcag/grid.hpp"
#include "depcag/quadrature.hpp"

namespace depcag {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Scalar coefficient of t that knows its own antiderivative when one exists
/// in closed form; otherwise the integral falls back to quadrature.
class ScalarExpr {
public:
    static ScalarExpr constant(Complex c);
    /// c0 + c1 t
    static ScalarExpr linear(Complex c0, Complex c1);
    /// c e^{-rate t}
    static ScalarExpr exp_decay(Complex c, double rate);
    static ScalarExpr from_callable(std::function<Complex(double)> f,
                                    QuadOptions quad = {});

    Complex value(double t) const { return value_(t); }
    Complex integral(double s, double t) const;
    bool is_zero() const { return zero_; }

private:
    std::function<Complex(double)> value_;
    std::function<Complex(double, double)> integral_;
    bool zero_ = false;
};

/// Time-dependent N x N coefficient matrix. The preset tag selects closed
/// forms downstream (matrix exponential for constant A, entrywise
/// exponentials for diagonal A).
class CoefficientEvaluator {
public:
    enum class Kind { Constant, Diagonal, General };

    static CoefficientEvaluator constant(Matrix value);
    static CoefficientEvaluator diagonal(std::vector<ScalarExpr> entries);
    static CoefficientEvaluator general(std::function<Matrix(double)> eval, Eigen::Index dim);
    static CoefficientEvaluator zero(Eigen::Index dim);

    Matrix eval(double t) const;
    Eigen::Index dim() const { return dim_; }
    Kind kind() const { return kind_; }
    bool is_zero() const { return zero_; }

    const Matrix& constant_value() const { return constant_; }
    const std::vector<ScalarExpr>& diagonal_entries() const { return diag_; }

private:
    CoefficientEvaluator() = default;

    Kind kind_ = Kind::Constant;
    Eigen::Index dim_ = 0;
    bool zero_ = false;
    Matrix constant_;
    std::vector<ScalarExpr> diag_;
    std::function<Matrix(double)> general_;
};

struct FundamentalOptions {
    /// RK4 lattice density per grid interval for general coefficients.
    int steps_per_interval = 512;
    QuadOptions quad;
};

/// Fundamental solution X(t,s) of x' = A(t) x on the grid domain.
/// Constant A: matrix exponential. Diagonal A: entrywise exponential of the
/// coefficient integrals. General A: RK4 propagation of the matrix equation
/// with a dense-output lattice cached per grid interval, so repeated
/// evaluations do not re-integrate.
class FundamentalMatrix {
public:
    FundamentalMatrix(const Grid& grid, CoefficientEvaluator a, FundamentalOptions opt = {});

    Matrix eval(double t, double s) const;
    Eigen::Index dim() const { return a_.dim(); }
    const CoefficientEvaluator& coefficients() const { return a_; }
    const Grid& grid() const { return grid_; }

private:
    Matrix lattice_value(double t) const;

    Grid grid_;
    CoefficientEvaluator a_;
    FundamentalOptions opt_;

    // Dense-output cache for the general path: per interval, X(tau, t_n) at
    // lattice points plus A(tau) X(tau, t_n) for Hermite interpolation, and
    // node-anchored prefix products X(t_n, t_0).
    struct IntervalCache {
        std::vector<Matrix> values;
        std::vector<Matrix> slopes;
    };
    std::vector<IntervalCache> cache_;
    std::vector<Matrix> node_prefix_;  // X(t_n, t_0)
};

} // namespace depcag
