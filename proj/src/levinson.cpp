#include "depcag/levinson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace depcag {

namespace {

double operator_norm(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().maxCoeff();
}

double max_abs_vec(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

// Cumulative integral on a uniform panel: Simpson over even pairs, the
// quadratic through three neighbours for the odd half-panels. Requires an
// even panel count.
template <typename T>
std::vector<T> cumulative_integral(const std::vector<T>& f, double h) {
    std::vector<T> c(f.size());
    c[0] = T(0.0 * f[0]);
    for (std::size_t i = 0; i + 2 < f.size(); i += 2) {
        c[i + 1] = c[i] + (h / 12.0) * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
        c[i + 2] = c[i] + (h / 3.0) * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    }
    return c;
}

} // namespace

// ---------------------------------------------------------------------------
// EtildeEvaluator
// ---------------------------------------------------------------------------

EtildeEvaluator::EtildeEvaluator(const Grid& grid, ScalarExpr lambda, ScalarExpr lambda_d,
                                 QuadOptions quad_opt)
    : grid_(grid), lambda_(std::move(lambda)), lambda_d_(std::move(lambda_d)), quad_(quad_opt),
      trivial_(lambda_d_.is_zero()) {
    if (trivial_) return;
    const std::size_t m = grid_.interval_count();
    bracket_start_.resize(m);
    bracket_end_.resize(m);
    prefix_.resize(m + 1);
    prefix_[0] = Complex(1.0);
    for (std::size_t n = 0; n < m; ++n) {
        bracket_start_[n] = bracket(n, grid_.node(n));
        bracket_end_[n] = bracket(n, grid_.node(n + 1));
        if (std::abs(bracket_start_[n]) < 1e-12 || std::abs(bracket_end_[n]) < 1e-12) {
            raise(ErrorCode::ZeroDenominator,
                  "bracket of interval " + std::to_string(n) + " vanishes");
        }
        prefix_[n + 1] = prefix_[n] * bracket_end_[n] / bracket_start_[n];
    }
}

Complex EtildeEvaluator::bracket(std::size_t n, double tau) const {
    if (trivial_) return Complex(1.0);
    const double xi = grid_.xi(n);
    if (tau == xi) return Complex(1.0);
    return Complex(1.0) + quad(
                              [&](double u) {
                                  return std::exp(-lambda_.integral(xi, u)) *
                                         lambda_d_.value(u);
                              },
                              xi, tau, quad_);
}

Complex EtildeEvaluator::forward(double t, double s) const {
    const Complex expf = std::exp(lambda_.integral(s, t));
    if (trivial_) return expf;
    const std::size_t k = grid_.locate_closure(t);
    const std::size_t m = grid_.locate_closure(s);
    if (k == m) {
        const Complex den = bracket(k, s);
        if (std::abs(den) < 1e-12) {
            raise(ErrorCode::ZeroDenominator, "bracket vanishes at s");
        }
        return expf * bracket(k, t) / den;
    }
    const Complex den = bracket(m, s);
    if (std::abs(den) < 1e-12) {
        raise(ErrorCode::ZeroDenominator, "bracket vanishes at s");
    }
    const Complex at_t = bracket(k, t) / bracket_start_[k];
    const Complex across = prefix_[k] / prefix_[m + 1];
    const Complex at_s = bracket_end_[m] / den;
    return expf * at_t * across * at_s;
}

Complex EtildeEvaluator::eval(double t, double s) const {
    if (!grid_.contains(t) || !grid_.contains(s)) {
        raise(ErrorCode::OutOfDomain, "etilde arguments outside the grid domain");
    }
    if (t == s) return Complex(1.0);
    if (t < s) {
        const Complex fwd = forward(s, t);
        if (std::abs(fwd) == 0.0) {
            raise(ErrorCode::ZeroDenominator, "etilde(s,t) vanishes, no reciprocal");
        }
        return Complex(1.0) / fwd;
    }
    return forward(t, s);
}

// ---------------------------------------------------------------------------
// DichotomyWeight
// ---------------------------------------------------------------------------

DichotomyWeight DichotomyWeight::separable(std::function<double(double)> omega) {
    DichotomyWeight w;
    w.omega_ = std::move(omega);
    return w;
}

DichotomyWeight DichotomyWeight::general(std::function<double(double, double)> h) {
    DichotomyWeight w;
    w.h_ = std::move(h);
    return w;
}

double DichotomyWeight::operator()(double t, double s) const {
    if (omega_) {
        const double den = omega_(s);
        if (den == 0.0) return std::numeric_limits<double>::infinity();
        return omega_(t) / den;
    }
    return h_(t, s);
}

// ---------------------------------------------------------------------------
// Scenario assembly
// ---------------------------------------------------------------------------

LevinsonScenario make_scenario(std::shared_ptr<const CauchyOperator> op, EigenDirection ed,
                               DichotomyData dd, Perturbation pert, LevinsonOptions opt) {
    if (!op->grid().delayed()) {
        raise(ErrorCode::NotDelayed, "the asymptotic machinery needs xi_n = t_n");
    }
    if (std::abs(ed.e_hat.norm() - 1.0) > 1e-10) {
        raise(ErrorCode::ValidationError, "e_hat must be a unit vector");
    }
    if (dd.projection.rows() != op->dim() || dd.projection.cols() != op->dim()) {
        raise(ErrorCode::ValidationError, "projection dimension mismatch");
    }
    if (opt.samples_per_interval < 2 || opt.samples_per_interval % 2 != 0) {
        raise(ErrorCode::ValidationError, "samples_per_interval must be even and >= 2");
    }
    LevinsonScenario sc;
    sc.op = std::move(op);
    sc.scale = std::make_shared<EtildeEvaluator>(sc.op->grid(), ed.lambda, ed.lambda_d,
                                                 sc.op->settings().quad);
    sc.direction = std::move(ed);
    sc.dichotomy = std::move(dd);
    sc.perturbation = std::move(pert);
    sc.options = opt;
    return sc;
}

// ---------------------------------------------------------------------------
// Hypothesis reports
// ---------------------------------------------------------------------------

EigenDirectionReport verify_eigendirection(const CauchyOperator& op, const EigenDirection& ed,
                                           const EtildeEvaluator& scale,
                                           std::size_t sample_pairs, std::uint64_t seed) {
    EigenDirectionReport report;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(op.grid().t0(), op.grid().horizon());
    for (std::size_t i = 0; i < sample_pairs; ++i) {
        const double t = dist(rng);
        const double s = dist(rng);
        const Vector lhs = op.z(t, s) * ed.e_hat;
        const Vector rhs = scale.eval(t, s) * ed.e_hat;
        // Error relative to the mode magnitude, so growing modes do not fail
        // on roundoff alone.
        const double mag = std::max(1.0, std::abs(scale.eval(t, s)));
        const double err = (lhs - rhs).norm() / mag;
        if (err > report.max_error) {
            report.max_error = err;
            report.worst_t = t;
            report.worst_s = s;
        }
    }
    report.pass = report.max_error <= report.tolerance;
    return report;
}

ProjectionReport verify_projection(const DichotomyData& dd, const EigenDirection& ed) {
    ProjectionReport report;
    const Matrix& p = dd.projection;
    report.idempotency_error = (p * p - p).cwiseAbs().maxCoeff();
    const Matrix q = Matrix::Identity(p.rows(), p.cols()) - p;
    report.direction_error = (q * ed.e_hat - ed.e_hat).norm();
    report.pass = report.idempotency_error <= 1e-10 && report.direction_error <= 1e-10;
    return report;
}

DichotomyReport verify_dichotomy(const CauchyOperator& op, const EtildeEvaluator& scale,
                                 const DichotomyData& dd, std::size_t sample_pairs,
                                 std::uint64_t seed) {
    DichotomyReport report;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(op.grid().t0(), op.grid().horizon());
    const Matrix& p = dd.projection;
    const Matrix q = Matrix::Identity(p.rows(), p.cols()) - p;

    auto update = [](DichotomyReport::Condition& c, double excess, double t, double s) {
        if (excess > c.worst_excess) {
            c.worst_excess = excess;
            c.worst_t = t;
            c.worst_s = s;
        }
    };

    for (std::size_t i = 0; i < sample_pairs; ++i) {
        double t = dist(rng);
        double s = dist(rng);
        if (t < s) std::swap(t, s);
        const double etil = std::abs(scale.eval(t, s));
        const double hval = dd.h(t, s);
        // (forward) |Zhat(t,s) P| <= M |etilde(t,s)| h(t,s), t >= s
        {
            const double val = operator_norm(op.zhat_kernel(t, s) * p);
            const double bound = dd.m_const * etil * hval;
            update(report.forward, val - bound - 1e-9 * (1.0 + bound), t, s);
        }
        // (backward) |Zhat(s,t)(I-P)| <= M |etilde(s,t)|, with s <= t swapped roles
        {
            const double val = operator_norm(op.zhat_kernel(s, t) * q);
            const double bound = dd.m_const * std::abs(scale.eval(s, t));
            update(report.backward, val - bound - 1e-9 * (1.0 + bound), s, t);
        }
        update(report.h_bounded, hval - dd.h_sup - 1e-9 * (1.0 + dd.h_sup), t, s);
    }

    // h(t,s) -> 0 as monotone decrease along increasing t for fixed s.
    for (int rep = 0; rep < 5; ++rep) {
        const double s = dist(rng);
        double prev = std::numeric_limits<double>::infinity();
        const int steps = 24;
        for (int i = 0; i <= steps; ++i) {
            const double t =
                std::min(op.grid().horizon(), s + (op.grid().horizon() - s) * i / double(steps));
            const double hval = dd.h(t, s);
            update(report.h_decay, hval - prev - 1e-9 * (1.0 + std::abs(prev)), t, s);
            prev = hval;
        }
    }

    // h(t,s) <= h(t,T) h(T,s) on ordered triples.
    for (std::size_t i = 0; i < sample_pairs; ++i) {
        double a = dist(rng), b = dist(rng), c = dist(rng);
        if (a < b) std::swap(a, b);
        if (a < c) std::swap(a, c);
        if (b < c) std::swap(b, c);
        const double lhs = dd.h(a, c);
        const double rhs = dd.h(a, b) * dd.h(b, c);
        update(report.h_submultiplicative, lhs - rhs - 1e-9 * (1.0 + std::abs(rhs)), a, c);
    }

    report.forward.pass = report.forward.worst_excess <= 0.0;
    report.backward.pass = report.backward.worst_excess <= 0.0;
    report.h_bounded.pass = report.h_bounded.worst_excess <= 0.0;
    report.h_decay.pass = report.h_decay.worst_excess <= 0.0;
    report.h_submultiplicative.pass = report.h_submultiplicative.worst_excess <= 0.0;
    report.pass = report.forward.pass && report.backward.pass && report.h_bounded.pass &&
                  report.h_decay.pass && report.h_submultiplicative.pass;
    return report;
}

PerturbationReport verify_perturbation(const Perturbation& pert, const Grid& grid,
                                       Eigen::Index dim, std::size_t samples,
                                       std::uint64_t seed) {
    PerturbationReport report;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> time_dist(grid.t0(), grid.horizon());
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::uniform_real_distribution<double> scale_dist(0.0, 2.0);
    const Vector zero = Vector::Zero(dim);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = time_dist(rng);
        Vector a(dim), b(dim);
        const double s = std::pow(10.0, scale_dist(rng) - 1.0);
        for (Eigen::Index j = 0; j < dim; ++j) {
            a(j) = Complex(coord(rng), coord(rng)) * s;
            b(j) = Complex(coord(rng), coord(rng)) * s;
        }
        const double lhs = (pert.f(t, a) - pert.f(t, b)).norm();
        const double bound = pert.eta(t) * (a - b).norm();
        report.worst_lipschitz_excess = std::max(
            report.worst_lipschitz_excess, lhs - bound - 1e-9 * (1.0 + bound));
        report.worst_zero_error =
            std::max(report.worst_zero_error, pert.f(t, zero).norm());
    }
    report.pass =
        report.worst_lipschitz_excess <= 0.0 && report.worst_zero_error <= 1e-12;
    return report;
}

// ---------------------------------------------------------------------------
// Green kernel and Theta
// ---------------------------------------------------------------------------

Matrix green_kernel(const CauchyOperator& op, const DichotomyData& dd, double t, double s) {
    const Matrix& p = dd.projection;
    if (t >= s) return op.zhat_kernel(t, s) * p;
    const Matrix q = Matrix::Identity(p.rows(), p.cols()) - p;
    return -(op.zhat_kernel(t, s) * q);
}

namespace {

double phi_weight(const LevinsonScenario& sc, double s) {
    const double gs = sc.perturbation.g.g(s);
    const double mag = std::abs(sc.scale->eval(s, gs));
    return sc.perturbation.eta(s) / mag;
}

} // namespace

ThetaResult theta_detailed(const LevinsonScenario& sc, std::size_t n0, double t,
                           double tail_to) {
    const Grid& grid = sc.grid();
    const double start = grid.node(n0);
    if (t < start || t > tail_to || tail_to > grid.horizon()) {
        raise(ErrorCode::OutOfDomain, "Theta arguments outside [t_{n0}, horizon]");
    }
    const auto& quad_opt = sc.op->settings().quad;
    ThetaResult result;
    double term1 = 0.0;
    double term2 = 0.0;
    double last_panel = 0.0;

    // M int_{t_{n0}}^t h(t,s) phi(s) ds, split at nodes.
    if (t > start) {
        const std::size_t kt = grid.locate_closure(t);
        for (std::size_t j = n0; j <= kt; ++j) {
            const double lo = grid.node(j);
            const double hi = std::min(t, grid.node(j + 1));
            if (hi <= lo) continue;
            term1 += quad([&](double s) { return sc.dichotomy.h(t, s) * phi_weight(sc, s); },
                          lo, hi, quad_opt);
        }
    }

    // M int_t^{tail_to} phi(s) ds, split at nodes; the last panel is the
    // truncation diagnostic.
    if (tail_to > t) {
        const std::size_t kt = grid.locate_closure(t);
        const std::size_t kend = grid.locate_closure(tail_to);
        for (std::size_t j = kt; j <= kend; ++j) {
            const double lo = std::max(t, grid.node(j));
            const double hi = std::min(tail_to, grid.node(j + 1));
            if (hi <= lo) continue;
            last_panel = quad([&](double s) { return phi_weight(sc, s); }, lo, hi, quad_opt);
            term2 += last_panel;
        }
    }

    result.value = sc.dichotomy.m_const * (term1 + term2);
    result.tail_increment = sc.dichotomy.m_const * last_panel;
    return result;
}

double theta(const LevinsonScenario& sc, std::size_t n0, double t, double tail_to) {
    return theta_detailed(sc, n0, t, tail_to).value;
}

double theta_sup(const LevinsonScenario& sc, std::size_t n0) {
    const Grid& grid = sc.grid();
    double sup = 0.0;
    const int per = std::max(1, sc.options.theta_samples_per_interval);
    for (std::size_t j = n0; j < grid.interval_count(); ++j) {
        for (int i = 0; i < per; ++i) {
            const double t = grid.node(j) + grid.interval_length(j) * i / double(per);
            sup = std::max(sup, theta(sc, n0, t, grid.horizon()));
        }
    }
    sup = std::max(sup, theta(sc, n0, grid.horizon(), grid.horizon()));
    return sup;
}

std::size_t find_n0(const LevinsonScenario& sc, double contraction_target) {
    if (!(contraction_target > 0.0) || !(contraction_target < 1.0)) {
        raise(ErrorCode::ValidationError, "contraction target must lie in (0,1)");
    }
    for (std::size_t n0 = 0; n0 < sc.grid().interval_count(); ++n0) {
        if (theta_sup(sc, n0) <= contraction_target) return n0;
    }
    raise(ErrorCode::NoContraction,
          "no node below the horizon reaches the contraction target");
}

// ---------------------------------------------------------------------------
// Fixed-point solver
// ---------------------------------------------------------------------------

FixedPointSolver::FixedPointSolver(const LevinsonScenario& sc, std::size_t n0)
    : sc_(sc), n0_(n0), first_interval_(n0), spi_(sc.options.samples_per_interval) {
    const Grid& grid = sc_.grid();
    if (n0 >= grid.interval_count()) {
        raise(ErrorCode::OutOfDomain, "n0 beyond the last interval");
    }
    const Eigen::Index dim = sc_.op->dim();
    proj_p_ = sc_.dichotomy.projection;
    proj_q_ = Matrix::Identity(dim, dim) - proj_p_;

    const std::size_t intervals = grid.interval_count() - n0;
    const std::size_t total = intervals * static_cast<std::size_t>(spi_) + 1;
    times_.reserve(total);
    sample_interval_.reserve(total);
    panels_.reserve(intervals);

    const bool b_zero = sc_.op->b().is_zero();
    for (std::size_t j = n0; j < grid.interval_count(); ++j) {
        const bool last_panel = (j + 1 == grid.interval_count());
        IntervalPanel panel;
        panel.interval = j;
        panel.offset = times_.size();
        panel.h = grid.interval_length(j) / spi_;
        const double lo = grid.node(j);
        panel.x_back.resize(spi_ + 1);
        panel.x_fwd.resize(spi_ + 1);
        panel.g_eval.resize(spi_ + 1);
        for (int i = 0; i <= spi_; ++i) {
            const double s = (i == spi_) ? grid.node(j + 1) : lo + panel.h * i;
            // The shared right endpoint is owned by the next panel.
            if (i < spi_ || last_panel) {
                times_.push_back(s);
                sample_interval_.push_back(j);
            }
            panel.x_back[i] = sc_.op->x(lo, s);
            panel.x_fwd[i] = sc_.op->x(s, lo);
            // g evaluated just inside the interval at the right endpoint, so
            // the integrand keeps the interval's own argument value there.
            const double probe = (i == spi_) ? s - 1e-9 * grid.interval_length(j) : s;
            panel.g_eval[i] = sc_.perturbation.g.g(probe);
        }
        if (!b_zero) {
            panel.d_along.resize(spi_ + 1);
            for (int i = 0; i <= spi_; ++i) {
                const double s = (i == spi_) ? grid.node(j + 1) : lo + panel.h * i;
                panel.d_along[i] = sc_.op->d_matrix(j, s);
            }
        }
        panel.node_step = sc_.op->x(grid.node(j + 1), lo);
        panel.h_matrix = sc_.op->h_matrix(j);
        panel.h_lu = Eigen::PartialPivLU<Matrix>(panel.h_matrix);
        panels_.push_back(std::move(panel));
    }

    scale_at_.resize(times_.size());
    weights_.resize(times_.size());
    const double base = grid.node(n0);
    for (std::size_t i = 0; i < times_.size(); ++i) {
        scale_at_[i] = sc_.scale->eval(times_[i], base);
        const double mag = std::abs(scale_at_[i]);
        if (mag == 0.0) {
            raise(ErrorCode::ZeroDenominator, "etilde vanishes on the sample grid");
        }
        weights_[i] = 1.0 / mag;
    }
}

std::vector<Vector> FixedPointSolver::initial() const {
    std::vector<Vector> y(times_.size());
    for (std::size_t i = 0; i < times_.size(); ++i) {
        y[i] = scale_at_[i] * sc_.direction.e_hat;
    }
    return y;
}

Vector FixedPointSolver::interpolate(const std::vector<Vector>& y, double t) const {
    const Grid& grid = sc_.grid();
    const std::size_t j = grid.locate_closure(t);
    if (j < first_interval_) {
        raise(ErrorCode::OutOfDomain, "interpolation below t_{n0}");
    }
    const auto& panel = panels_[j - first_interval_];
    double pos = (t - grid.node(j)) / panel.h;
    int idx = static_cast<int>(pos);
    if (idx >= spi_) idx = spi_ - 1;
    const double w = pos - idx;
    const std::size_t base = panel.offset + static_cast<std::size_t>(idx);
    if (w == 0.0) return y[base];
    return (1.0 - w) * y[base] + w * y[base + 1];
}

std::vector<Vector> FixedPointSolver::apply(const std::vector<Vector>& y) const {
    const Eigen::Index dim = sc_.op->dim();
    const std::size_t np = panels_.size();
    std::vector<std::vector<Vector>> cum_p(np), cum_q(np);
    std::vector<Vector> moment_p(np), moment_q(np);

    for (std::size_t pj = 0; pj < np; ++pj) {
        const auto& panel = panels_[pj];
        std::vector<Vector> fp(spi_ + 1), fq(spi_ + 1);
        for (int i = 0; i <= spi_; ++i) {
            const double s = times_[panel.offset + i];
            const Vector y_g = interpolate(y, panel.g_eval[i]);
            const Vector forcing = sc_.perturbation.f(s, y_g);
            fp[i] = panel.x_back[i] * (proj_p_ * forcing);
            fq[i] = panel.x_back[i] * (proj_q_ * forcing);
        }
        cum_p[pj] = cumulative_integral(fp, panel.h);
        cum_q[pj] = cumulative_integral(fq, panel.h);
        moment_p[pj] = panel.node_step * cum_p[pj].back();
        moment_q[pj] = panel.node_step * cum_q[pj].back();
    }

    // Forward prefix A_j = sum_{i<j} Z(t_j, t_{i+1}) m^P_i and backward
    // suffix T_j = sum_{i>=j} Z(t_j, t_{i+1}) m^Q_i.
    std::vector<Vector> fwd(np + 1), bwd(np + 1);
    fwd[0] = Vector::Zero(dim);
    for (std::size_t pj = 0; pj < np; ++pj) {
        fwd[pj + 1] = panels_[pj].h_matrix * fwd[pj] + moment_p[pj];
    }
    bwd[np] = Vector::Zero(dim);
    for (std::size_t pj = np; pj-- > 0;) {
        bwd[pj] = panels_[pj].h_lu.solve(moment_q[pj] + bwd[pj + 1]);
    }

    std::vector<Vector> out(times_.size());
    for (std::size_t pj = 0; pj < np; ++pj) {
        const auto& panel = panels_[pj];
        const Vector beta = fwd[pj] - panel.h_lu.solve(bwd[pj + 1]);
        const Vector& q_end = cum_q[pj].back();
        const int last = (pj + 1 < np) ? spi_ - 1 : spi_;
        for (int i = 0; i <= last; ++i) {
            const Vector carried = panel.d_along.empty()
                                       ? beta
                                       : Vector(panel.d_along[i] * beta);
            const Vector local = carried + cum_p[pj][i] + cum_q[pj][i] - q_end;
            out[panel.offset + i] =
                scale_at_[panel.offset + i] * sc_.direction.e_hat + panel.x_fwd[i] * local;
        }
    }
    return out;
}

double FixedPointSolver::weighted_norm(const std::vector<Vector>& y) const {
    double norm = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        norm = std::max(norm, weights_[i] * y[i].norm());
    }
    return norm;
}

double FixedPointSolver::weighted_distance(const std::vector<Vector>& a,
                                           const std::vector<Vector>& b) const {
    double norm = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        norm = std::max(norm, weights_[i] * (a[i] - b[i]).norm());
    }
    return norm;
}

SolutionTrace FixedPointSolver::to_trace(const std::vector<Vector>& y) const {
    SolutionTrace trace;
    trace.times = times_;
    trace.values = y;
    trace.intervals = sample_interval_;
    return trace;
}

FixedPointResult FixedPointSolver::solve(double tol, int max_iter) const {
    FixedPointResult result;
    result.n0 = n0_;
    result.theta_sup = depcag::theta_sup(sc_, n0_);
    if (!(result.theta_sup < 1.0)) {
        raise(ErrorCode::NoContraction,
              "Theta sup is " + std::to_string(result.theta_sup) + " at n0=" +
                  std::to_string(n0_));
    }

    std::vector<Vector> y = initial();
    bool converged = false;
    for (int m = 0; m < max_iter; ++m) {
        std::vector<Vector> next = apply(y);
        const double dist = weighted_distance(next, y);
        result.history.push_back(dist);
        y = std::move(next);
        result.iterations = m + 1;
        if (dist <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        raise(ErrorCode::MaxIterExceeded,
              "no convergence to " + std::to_string(tol) + " within " +
                  std::to_string(max_iter) + " iterations");
    }

    // Truncation diagnostic: the backward moment of the final interval.
    {
        const auto& panel = panels_.back();
        std::vector<Vector> fq(spi_ + 1);
        for (int i = 0; i <= spi_; ++i) {
            const double s = times_[panel.offset + i];
            const Vector y_g = interpolate(y, panel.g_eval[i]);
            fq[i] = panel.x_back[i] * (proj_q_ * sc_.perturbation.f(s, y_g));
        }
        result.tail_diagnostic =
            max_abs_vec(Vector(panel.node_step * cumulative_integral(fq, panel.h).back()));
    }

    result.trace = to_trace(y);
    return result;
}

FixedPointResult fixed_point_solve(const LevinsonScenario& sc, std::size_t n0, double tol,
                                   int max_iter) {
    return FixedPointSolver(sc, n0).solve(tol, max_iter);
}

// ---------------------------------------------------------------------------
// Asymptotic report
// ---------------------------------------------------------------------------

AsymptoticReport asymptotic_report(const LevinsonScenario& sc, const FixedPointResult& fp) {
    AsymptoticReport report;
    const Grid& grid = sc.grid();
    const double base = grid.node(fp.n0);
    const std::size_t n = fp.trace.size();
    report.times = fp.trace.times;
    report.abs_w.resize(n);
    report.theta_bound.resize(n);

    std::vector<Vector> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex scale = sc.scale->eval(fp.trace.times[i], base);
        w[i] = fp.trace.values[i] / scale - sc.direction.e_hat;
        report.abs_w[i] = w[i].norm();
        report.norm_y = std::max(report.norm_y, fp.trace.values[i].norm() / std::abs(scale));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double th = theta(sc, fp.n0, fp.trace.times[i], grid.horizon());
        report.theta_bound[i] = th * report.norm_y;
        const double excess =
            report.abs_w[i] - report.theta_bound[i] - 1e-9 * (1.0 + report.theta_bound[i]);
        if (excess > report.worst_bound_excess) report.worst_bound_excess = excess;
    }
    report.bound_holds = report.worst_bound_excess <= 0.0;

    const std::size_t decile = std::max<std::size_t>(1, n / 10);
    for (std::size_t i = 0; i < decile; ++i) {
        report.max_first_decile = std::max(report.max_first_decile, report.abs_w[i]);
        report.max_last_decile = std::max(report.max_last_decile, report.abs_w[n - 1 - i]);
    }
    if (report.max_first_decile > 0.0) {
        report.decay_ratio = report.max_last_decile / report.max_first_decile;
        report.decays = report.decay_ratio < 1.0;
    } else {
        report.decay_ratio = (report.max_last_decile > 0.0)
                                 ? std::numeric_limits<double>::infinity()
                                 : 0.0;
        report.decays = report.max_last_decile == 0.0;
    }
    return report;
}

} // namespace depcag
