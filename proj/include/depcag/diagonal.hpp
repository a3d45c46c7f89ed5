#pragma once

#include <cstdint>
#include <vector>

#include "depcag/levinson.hpp"
#include "depcag/sim.hpp"

namespace depcag {

struct BracketReport;
class DiagonalSystem;

/// Worst |1 + int ...| per mode and interval, sampled densely including both
/// endpoints, against the invertibility floor.
BracketReport check_brackets(const DiagonalSystem& sys, std::size_t samples_per_interval = 33);

/// Diagonal system z' = diag(a_l) z + diag(b_l) z(gamma(t)) on a delayed
/// grid, with the distinguished mode index k (1-based) of the corollary.
/// Whole-interval brackets and their running products are cached per mode.
class DiagonalSystem {
public:
    DiagonalSystem(Grid grid, std::vector<ScalarExpr> a, std::vector<ScalarExpr> b, int k,
                   QuadOptions quad = {});

    const Grid& grid() const { return grid_; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(a_.size()); }
    int k() const { return k_; }
    const std::vector<ScalarExpr>& a() const { return a_; }
    const std::vector<ScalarExpr>& b() const { return b_; }

    CoefficientEvaluator a_evaluator() const { return CoefficientEvaluator::diagonal(a_); }
    CoefficientEvaluator b_evaluator() const { return CoefficientEvaluator::diagonal(b_); }

    /// Closed-form mode transition: exponential of the coefficient integral,
    /// the inverse bracket at s, the product of whole-interval brackets, and
    /// the bracket at t; reciprocal for t < s. ZeroDenominator when a bracket
    /// vanishes. l is 1-based.
    Complex e_l(int l, double t, double s) const;

private:
    Complex bracket(int mode0, std::size_t m, double tau) const;
    Complex forward(int mode0, double t, double s) const;

    Grid grid_;
    std::vector<ScalarExpr> a_;
    std::vector<ScalarExpr> b_;
    int k_;
    QuadOptions quad_;

    std::vector<std::vector<Complex>> bracket_end_;  // [mode][interval]
    std::vector<std::vector<Complex>> prefix_;       // [mode][node]: prod of ends below

    friend BracketReport check_brackets(const DiagonalSystem&, std::size_t);
};

struct BracketReport {
    struct Record {
        int mode;  // 1-based
        std::size_t interval;
        double worst_abs;
        double worst_t;
    };
    bool pass = true;
    double floor = 1e-12;
    std::vector<Record> records;  // one per (mode, interval)
};

struct CorollaryConditionsReport {
    struct ModeTrend {
        int mode;        // 1-based
        double initial;  // |e_l/e_k| at the window start
        double final;    // at the window end
        bool monotone;
        bool pass;
    };
    bool pass_a = true;  // |e_l/e_k| -> 0 for l < k
    bool pass_b = true;  // |e_l/e_k| bounded for l >= k
    bool pass = true;
    double c_bound = 0.0;  // empirical C of condition (b)
    double h_sup = 0.0;    // empirical sup of the emitted h
    std::vector<ModeTrend> decaying;  // l < k
    std::vector<ModeTrend> bounded;   // l >= k
};

/// Checks the corollary's mode-dominance conditions and reports the
/// empirical constants. Boundedness is judged by trend: the late-window
/// maximum must not exceed twice the early-window maximum.
CorollaryConditionsReport corollary_conditions(const DiagonalSystem& sys,
                                               std::size_t sample_pairs = 200,
                                               std::uint64_t seed = 42);

/// The dichotomy weight h(t,s) = max_{l<k} |e_l(t,s)/e_k(t,s)| emitted by the
/// conditions check (h = 0 when k = 1).
DichotomyWeight corollary_weight(const DiagonalSystem& sys);

/// Locally integrable matrix perturbation R(t) with its operator norm.
class PerturbationMatrix {
public:
    static PerturbationMatrix scaled_identity_decay(Eigen::Index dim, double rho, double rate);
    static PerturbationMatrix constant(Matrix value);
    static PerturbationMatrix from_callable(std::function<Matrix(double)> eval,
                                            Eigen::Index dim);

    Matrix eval(double t) const { return eval_(t); }
    double norm(double t) const { return norm_(t); }
    Eigen::Index dim() const { return dim_; }

private:
    std::function<Matrix(double)> eval_;
    std::function<double(double)> norm_;
    Eigen::Index dim_ = 0;
};

struct L1Report {
    bool converged = true;
    std::vector<double> terms;         // int_{t_n}^{t_{n+1}} |e_k(s,t_n)^{-1}| |R(s)| ds
    std::vector<double> partial_sums;
    double last_term = 0.0;
    double tail_ratio = 0.0;  // last term / previous term
};

/// Partial sums of the corollary's summability condition with the last-term
/// magnitude as the convergence diagnostic: flagged non-convergent when the
/// terms stop decaying.
L1Report corollary_l1(const DiagonalSystem& sys, const PerturbationMatrix& r, std::size_t n0);

struct CorollaryOptions {
    double contraction_target = 0.5;
    double m_const = 1.0;
    LevinsonOptions levinson;
    CauchySettings cauchy;
    DirectOptions direct;
    std::size_t sample_pairs = 200;
    std::uint64_t seed = 42;
};

struct CorollaryRunResult {
    std::size_t n0 = 0;
    FixedPointResult fixed_point;
    AsymptoticReport asymptotic;
    BracketReport brackets;
    CorollaryConditionsReport conditions;
    L1Report summability;
    EigenDirectionReport eigendirection;
    ProjectionReport projection;
    DichotomyReport dichotomy;
    /// Largest pointwise deviation from direct integration of the merged
    /// linear system (B + R), taken at coinciding sample times.
    double direct_match_error = 0.0;
    LevinsonScenario scenario;
};

/// Assembles the Levinson scenario of the corollary (canonical e_k, lambda =
/// a_k, lambda_d = b_k, P onto the modes below k, empirical h, F = R v,
/// eta = |R|, g = gamma), finds n0, iterates to the fixed point, builds the
/// asymptotic report, and cross-checks the fixed point against direct
/// integration of the merged linear system.
CorollaryRunResult corollary_run(const DiagonalSystem& sys, const PerturbationMatrix& r,
                                 const CorollaryOptions& opt = {});

} // namespace depcag
