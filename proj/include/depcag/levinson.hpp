#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "depcag/cauchy.hpp"
#include "depcag/trace.hpp"

namespace depcag {

/// Direction data of the one-dimensional invariant subspace: a unit vector
/// e_hat with Z(t,s) e_hat = etilde(t,s) e_hat, where etilde is built from
/// the scalar pair (lambda, lambda_d).
struct EigenDirection {
    Vector e_hat;
    ScalarExpr lambda;
    ScalarExpr lambda_d;
};

/// Scalar multiplier etilde(t,s): the product of the leading exponential of
/// lambda, the partial-interval bracket ratios at t and s, and the
/// node-indexed product of whole-interval bracket ratios in between. Bracket
/// ends and the running node product are cached per interval; brackets at
/// interior times fall back to quadrature.
class EtildeEvaluator {
public:
    EtildeEvaluator(const Grid& grid, ScalarExpr lambda, ScalarExpr lambda_d,
                    QuadOptions quad = {});

    /// ZeroDenominator when a bracket 1 + int ... vanishes.
    Complex eval(double t, double s) const;

    const Grid& grid() const { return grid_; }
    const ScalarExpr& lambda() const { return lambda_; }
    const ScalarExpr& lambda_d() const { return lambda_d_; }

private:
    Complex bracket(std::size_t n, double tau) const;
    Complex forward(double t, double s) const;  // t >= s

    Grid grid_;
    ScalarExpr lambda_;
    ScalarExpr lambda_d_;
    QuadOptions quad_;
    bool trivial_ = false;  // lambda_d == 0: all brackets equal one

    std::vector<Complex> bracket_start_;  // bracket_n(t_n)
    std::vector<Complex> bracket_end_;    // bracket_n(t_{n+1})
    std::vector<Complex> prefix_;         // prefix_[n] = prod_{j<n} end_j / start_j
};

/// Weight h(t,s) of the dichotomy estimate. Separable weights
/// h(t,s) = omega(t)/omega(s) admit fast prefix evaluation of the Theta
/// integrals; arbitrary callables are supported as a fallback.
class DichotomyWeight {
public:
    static DichotomyWeight separable(std::function<double(double)> omega);
    static DichotomyWeight general(std::function<double(double, double)> h);

    double operator()(double t, double s) const;
    bool is_separable() const { return static_cast<bool>(omega_); }
    double omega(double t) const { return omega_(t); }

private:
    std::function<double(double)> omega_;
    std::function<double(double, double)> h_;
};

/// Projection and estimate data of the dichotomy hypotheses: P splits the
/// space, h weights the projected kernel, M is the common constant and
/// h_sup the bound of h (the implicit constant of the Green kernel
/// estimate).
struct DichotomyData {
    Matrix projection;
    double m_const = 1.0;
    double h_sup = 1.0;
    DichotomyWeight h = DichotomyWeight::general([](double, double) { return 1.0; });
};

/// Perturbation F(t, x(g(t))) with Lipschitz weight eta and deviation g.
struct Perturbation {
    std::function<Vector(double, const Vector&)> f;
    std::function<double(double)> eta;
    DeviatingArgument g;
};

struct LevinsonOptions {
    /// Sample panels per grid interval (even; endpoints shared).
    int samples_per_interval = 64;
    double fixed_point_tol = 1e-9;
    int max_iterations = 100;
    /// t-samples per interval when taking the sup of Theta.
    int theta_samples_per_interval = 8;
    double contraction_target = 0.5;
    double bracket_floor = 1e-12;
};

/// Everything the fixed-point run needs, over a delayed grid.
struct LevinsonScenario {
    std::shared_ptr<const CauchyOperator> op;
    EigenDirection direction;
    std::shared_ptr<const EtildeEvaluator> scale;
    DichotomyData dichotomy;
    Perturbation perturbation;
    LevinsonOptions options;

    const Grid& grid() const { return op->grid(); }
};

/// Builds the scenario, checking |e_hat| = 1 and that the grid is delayed.
LevinsonScenario make_scenario(std::shared_ptr<const CauchyOperator> op, EigenDirection ed,
                               DichotomyData dd, Perturbation pert, LevinsonOptions opt = {});

// ---------------------------------------------------------------------------
// Hypothesis reports
// ---------------------------------------------------------------------------

struct EigenDirectionReport {
    bool pass = true;
    double tolerance = 1e-7;
    double max_error = 0.0;
    double worst_t = 0.0;
    double worst_s = 0.0;
};

/// max over sampled (t,s) of |Z(t,s) e_hat - etilde(t,s) e_hat|.
EigenDirectionReport verify_eigendirection(const CauchyOperator& op,
                                           const EigenDirection& ed,
                                           const EtildeEvaluator& scale,
                                           std::size_t sample_pairs = 200,
                                           std::uint64_t seed = 42);

struct ProjectionReport {
    bool pass = true;
    double idempotency_error = 0.0;  // |P^2 - P|
    double direction_error = 0.0;    // |(I-P) e_hat - e_hat|
};

/// P^2 = P and e_hat in range(I-P).
ProjectionReport verify_projection(const DichotomyData& dd, const EigenDirection& ed);

struct DichotomyReport {
    struct Condition {
        bool pass = true;
        /// Largest violation found (value - bound, or the defect of the
        /// inequality); <= 0 means satisfied everywhere sampled.
        double worst_excess = 0.0;
        double worst_t = 0.0;
        double worst_s = 0.0;
    };
    bool pass = true;
    Condition forward;           // |Zhat(t,s) P| <= M |etilde| h,      t >= s
    Condition backward;          // |Zhat(t,s) (I-P)| <= M |etilde|,    t <= s
    Condition h_bounded;         // h <= h_sup
    Condition h_decay;           // h(t,s) nonincreasing in t
    Condition h_submultiplicative;  // h(t,s) <= h(t,T) h(T,s)
};

DichotomyReport verify_dichotomy(const CauchyOperator& op, const EtildeEvaluator& scale,
                                 const DichotomyData& dd, std::size_t sample_pairs = 200,
                                 std::uint64_t seed = 42);

struct PerturbationReport {
    bool pass = true;
    double worst_lipschitz_excess = 0.0;  // |F(t,a)-F(t,b)| - eta(t)|a-b|
    double worst_zero_error = 0.0;        // |F(t,0)|
};

PerturbationReport verify_perturbation(const Perturbation& pert, const Grid& grid,
                                       Eigen::Index dim, std::size_t samples = 200,
                                       std::uint64_t seed = 42);

// ---------------------------------------------------------------------------
// Green kernel, Theta and the fixed point
// ---------------------------------------------------------------------------

/// G(t,s) = Zhat(t,s) P for t >= s and -Zhat(t,s)(I-P) for t < s.
Matrix green_kernel(const CauchyOperator& op, const DichotomyData& dd, double t, double s);

struct ThetaResult {
    double value = 0.0;
    /// Contribution of the final interval before tail_to; reported so the
    /// truncation of the infinite upper limit stays visible.
    double tail_increment = 0.0;
};

/// Theta_{n0}(t) = M int_{t_{n0}}^t h(t,s) phi(s) ds + M int_t^{tail_to} phi(s) ds
/// with phi(s) = |etilde(s, g(s))|^{-1} eta(s); integrals split at nodes.
ThetaResult theta_detailed(const LevinsonScenario& sc, std::size_t n0, double t,
                           double tail_to);
double theta(const LevinsonScenario& sc, std::size_t n0, double t, double tail_to);

/// Sup of Theta_{n0} over the sampled window [t_{n0}, horizon].
double theta_sup(const LevinsonScenario& sc, std::size_t n0);

/// Smallest n0 whose sampled Theta sup is <= target; NoContraction when no
/// node below the horizon qualifies.
std::size_t find_n0(const LevinsonScenario& sc, double contraction_target);

struct FixedPointResult {
    std::size_t n0 = 0;
    SolutionTrace trace;
    /// Weighted-norm distances |y_{m+1} - y_m|_{n0} per iteration.
    std::vector<double> history;
    int iterations = 0;
    double theta_sup = 0.0;
    double tail_diagnostic = 0.0;
};

/// Applies the integral operator to sampled functions on the solver grid and
/// iterates it to its fixed point. The iterate lives on a per-interval
/// uniform sample grid with linear interpolation in between.
class FixedPointSolver {
public:
    FixedPointSolver(const LevinsonScenario& sc, std::size_t n0);

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& weights() const { return weights_; }

    /// y_0(t) = etilde(t, t_{n0}) e_hat.
    std::vector<Vector> initial() const;

    /// One application of the operator.
    std::vector<Vector> apply(const std::vector<Vector>& y) const;

    /// sup over samples of |etilde(t, t_{n0})|^{-1} |y(t)|.
    double weighted_norm(const std::vector<Vector>& y) const;
    double weighted_distance(const std::vector<Vector>& a, const std::vector<Vector>& b) const;

    FixedPointResult solve(double tol, int max_iter) const;

    SolutionTrace to_trace(const std::vector<Vector>& y) const;

private:
    struct IntervalPanel {
        std::size_t interval;
        std::size_t offset;       // global index of the left endpoint sample
        double h;                 // panel spacing
        std::vector<Matrix> x_back;   // X(t_j, s_i)
        std::vector<Matrix> x_fwd;    // X(s_i, t_j)
        std::vector<Matrix> d_along;  // D_j(s_i); empty when B = 0
        Matrix node_step;             // X(t_{j+1}, t_j)
        Matrix h_matrix;
        Eigen::PartialPivLU<Matrix> h_lu;
        std::vector<double> g_eval;   // g at samples, right endpoint nudged inward
    };

    Vector interpolate(const std::vector<Vector>& y, double t) const;

    const LevinsonScenario& sc_;
    std::size_t n0_;
    std::size_t first_interval_;
    int spi_;
    std::vector<double> times_;
    std::vector<std::size_t> sample_interval_;
    std::vector<Complex> scale_at_;   // etilde(t_i, t_{n0})
    std::vector<double> weights_;     // 1 / |scale_at_|
    std::vector<IntervalPanel> panels_;
    Matrix proj_p_;
    Matrix proj_q_;                   // I - P
};

FixedPointResult fixed_point_solve(const LevinsonScenario& sc, std::size_t n0, double tol,
                                   int max_iter);

struct AsymptoticReport {
    std::vector<double> times;
    std::vector<double> abs_w;        // |etilde(t,t_{n0})^{-1} y(t) - e_hat|
    std::vector<double> theta_bound;  // Theta_{n0}(t) |y|_{n0}
    double norm_y = 0.0;
    bool bound_holds = true;
    double worst_bound_excess = 0.0;
    double max_first_decile = 0.0;
    double max_last_decile = 0.0;
    double decay_ratio = 0.0;  // max_last_decile / max_first_decile
    bool decays = false;
};

/// w(t) = etilde(t,t_{n0})^{-1} y(t) - e_hat with the pointwise comparison
/// bound and the first/last-decile decay surrogate for w -> 0.
AsymptoticReport asymptotic_report(const LevinsonScenario& sc, const FixedPointResult& fp);

} // namespace depcag
