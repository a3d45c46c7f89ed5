#include "depcag/diagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace depcag {

DiagonalSystem::DiagonalSystem(Grid grid, std::vector<ScalarExpr> a, std::vector<ScalarExpr> b,
                               int k, QuadOptions quad_opt)
    : grid_(std::move(grid)), a_(std::move(a)), b_(std::move(b)), k_(k), quad_(quad_opt) {
    if (!grid_.delayed()) {
        raise(ErrorCode::NotDelayed, "the diagonal example assumes xi_n = t_n");
    }
    if (a_.empty() || a_.size() != b_.size()) {
        raise(ErrorCode::ValidationError, "coefficient lists must be nonempty and equal-sized");
    }
    if (k_ < 1 || k_ > static_cast<int>(a_.size())) {
        raise(ErrorCode::ValidationError, "k must name one of the modes");
    }
    const std::size_t modes = a_.size();
    const std::size_t m = grid_.interval_count();
    bracket_end_.assign(modes, std::vector<Complex>(m));
    prefix_.assign(modes, std::vector<Complex>(m + 1));
    for (std::size_t l = 0; l < modes; ++l) {
        prefix_[l][0] = Complex(1.0);
        for (std::size_t n = 0; n < m; ++n) {
            bracket_end_[l][n] = bracket(static_cast<int>(l), n, grid_.node(n + 1));
            prefix_[l][n + 1] = prefix_[l][n] * bracket_end_[l][n];
        }
    }
}

Complex DiagonalSystem::bracket(int mode0, std::size_t m, double tau) const {
    const double lo = grid_.node(m);
    if (tau == lo || b_[static_cast<std::size_t>(mode0)].is_zero()) return Complex(1.0);
    const auto& al = a_[static_cast<std::size_t>(mode0)];
    const auto& bl = b_[static_cast<std::size_t>(mode0)];
    return Complex(1.0) +
           quad([&](double sigma) { return std::exp(-al.integral(lo, sigma)) * bl.value(sigma); },
                lo, tau, quad_);
}

Complex DiagonalSystem::forward(int mode0, double t, double s) const {
    const auto l = static_cast<std::size_t>(mode0);
    const Complex expf = std::exp(a_[l].integral(s, t));
    if (b_[l].is_zero()) return expf;
    const std::size_t kt = grid_.locate_closure(t);
    const std::size_t ks = grid_.locate_closure(s);
    const Complex at_s = bracket(mode0, ks, s);
    if (std::abs(at_s) < 1e-12) {
        raise(ErrorCode::ZeroDenominator, "mode bracket vanishes at s");
    }
    if (kt == ks) return expf * bracket(mode0, kt, t) / at_s;
    const Complex across = prefix_[l][kt] / prefix_[l][ks];
    return expf / at_s * across * bracket(mode0, kt, t);
}

Complex DiagonalSystem::e_l(int l, double t, double s) const {
    if (l < 1 || l > static_cast<int>(a_.size())) {
        raise(ErrorCode::OutOfDomain, "mode index out of range");
    }
    if (!grid_.contains(t) || !grid_.contains(s)) {
        raise(ErrorCode::OutOfDomain, "e_l arguments outside the grid domain");
    }
    if (t == s) return Complex(1.0);
    if (t < s) {
        const Complex fwd = forward(l - 1, s, t);
        if (std::abs(fwd) == 0.0) {
            raise(ErrorCode::ZeroDenominator, "e_l(s,t) vanishes, no reciprocal");
        }
        return Complex(1.0) / fwd;
    }
    return forward(l - 1, t, s);
}

BracketReport check_brackets(const DiagonalSystem& sys, std::size_t samples_per_interval) {
    BracketReport report;
    if (samples_per_interval < 2) {
        raise(ErrorCode::ValidationError, "need at least two samples per interval");
    }
    const Grid& grid = sys.grid();
    for (int l = 1; l <= static_cast<int>(sys.dim()); ++l) {
        for (std::size_t m = 0; m < grid.interval_count(); ++m) {
            BracketReport::Record rec{l, m, std::numeric_limits<double>::infinity(),
                                   grid.node(m)};
            for (std::size_t i = 0; i < samples_per_interval; ++i) {
                const double tau = grid.node(m) + grid.interval_length(m) * double(i) /
                                                      double(samples_per_interval - 1);
                const double mag = std::abs(sys.bracket(l - 1, m, tau));
                if (mag < rec.worst_abs) {
                    rec.worst_abs = mag;
                    rec.worst_t = tau;
                }
            }
            if (rec.worst_abs < report.floor) report.pass = false;
            report.records.push_back(rec);
        }
    }
    return report;
}

CorollaryConditionsReport corollary_conditions(const DiagonalSystem& sys,
                                               std::size_t sample_pairs, std::uint64_t seed) {
    CorollaryConditionsReport report;
    const Grid& grid = sys.grid();
    const int k = sys.k();
    const double s0 = grid.t0();
    const int steps = 48;

    auto ratio = [&](int l, double t, double s) {
        return std::abs(sys.e_l(l, t, s) / sys.e_l(k, t, s));
    };

    // (a) |e_l/e_k| decreasing toward 0 along increasing t, l < k.
    for (int l = 1; l < k; ++l) {
        CorollaryConditionsReport::ModeTrend trend{l, ratio(l, s0, s0), 0.0, true, true};
        double prev = trend.initial;
        for (int i = 1; i <= steps; ++i) {
            const double t =
                std::min(grid.horizon(), s0 + (grid.horizon() - s0) * i / double(steps));
            const double r = ratio(l, t, s0);
            if (r > prev * (1.0 + 1e-9) + 1e-15) trend.monotone = false;
            prev = r;
        }
        trend.final = prev;
        trend.pass = trend.monotone && trend.final < trend.initial;
        if (!trend.pass) report.pass_a = false;
        report.decaying.push_back(trend);
    }

    // (b) |e_l/e_k| bounded, l >= k: report C and flag growth trends.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(grid.t0(), grid.horizon());
    for (int l = k; l <= static_cast<int>(sys.dim()); ++l) {
        CorollaryConditionsReport::ModeTrend trend{l, 0.0, 0.0, true, true};
        double early = 0.0, late = 0.0;
        for (int i = 0; i <= steps; ++i) {
            const double t =
                std::min(grid.horizon(), s0 + (grid.horizon() - s0) * i / double(steps));
            const double r = ratio(l, t, s0);
            report.c_bound = std::max(report.c_bound, r);
            if (i <= steps / 10) early = std::max(early, r);
            if (i >= steps - steps / 10) late = std::max(late, r);
            if (i == 0) trend.initial = r;
            if (i == steps) trend.final = r;
        }
        trend.pass = late <= 2.0 * std::max(early, 1e-300);
        if (!trend.pass) report.pass_b = false;
        report.bounded.push_back(trend);
    }
    for (std::size_t i = 0; i < sample_pairs; ++i) {
        double t = dist(rng), s = dist(rng);
        if (t < s) std::swap(t, s);
        for (int l = k; l <= static_cast<int>(sys.dim()); ++l) {
            report.c_bound = std::max(report.c_bound, ratio(l, t, s));
        }
        for (int l = 1; l < k; ++l) {
            report.h_sup = std::max(report.h_sup, ratio(l, t, s));
        }
    }

    report.pass = report.pass_a && report.pass_b;
    return report;
}

DichotomyWeight corollary_weight(const DiagonalSystem& sys) {
    const int k = sys.k();
    if (k == 1) {
        return DichotomyWeight::general([](double, double) { return 0.0; });
    }
    if (k == 2) {
        const double ref = sys.grid().t0();
        return DichotomyWeight::separable([sys, ref](double t) {
            return std::abs(sys.e_l(1, t, ref) / sys.e_l(2, t, ref));
        });
    }
    return DichotomyWeight::general([sys, k](double t, double s) {
        double worst = 0.0;
        for (int l = 1; l < k; ++l) {
            worst = std::max(worst, std::abs(sys.e_l(l, t, s) / sys.e_l(k, t, s)));
        }
        return worst;
    });
}

PerturbationMatrix PerturbationMatrix::scaled_identity_decay(Eigen::Index dim, double rho,
                                                             double rate) {
    PerturbationMatrix p;
    p.dim_ = dim;
    p.eval_ = [dim, rho, rate](double t) {
        return Matrix(std::exp(-rate * t) * rho * Matrix::Identity(dim, dim));
    };
    p.norm_ = [rho, rate](double t) { return std::abs(rho) * std::exp(-rate * t); };
    return p;
}

PerturbationMatrix PerturbationMatrix::constant(Matrix value) {
    PerturbationMatrix p;
    p.dim_ = value.rows();
    Eigen::JacobiSVD<Matrix> svd(value);
    const double norm = svd.singularValues().maxCoeff();
    p.eval_ = [value](double) { return value; };
    p.norm_ = [norm](double) { return norm; };
    return p;
}

PerturbationMatrix PerturbationMatrix::from_callable(std::function<Matrix(double)> eval,
                                                     Eigen::Index dim) {
    PerturbationMatrix p;
    p.dim_ = dim;
    p.eval_ = std::move(eval);
    auto fn = p.eval_;
    p.norm_ = [fn](double t) {
        Eigen::JacobiSVD<Matrix> svd(fn(t));
        return svd.singularValues().maxCoeff();
    };
    return p;
}

L1Report corollary_l1(const DiagonalSystem& sys, const PerturbationMatrix& r, std::size_t n0) {
    L1Report report;
    const Grid& grid = sys.grid();
    if (n0 >= grid.interval_count()) {
        raise(ErrorCode::OutOfDomain, "n0 beyond the last interval");
    }
    const int k = sys.k();
    QuadOptions quad_opt;
    double sum = 0.0;
    for (std::size_t n = n0; n < grid.interval_count(); ++n) {
        const double lo = grid.node(n);
        const double term =
            quad([&](double s) { return 1.0 / std::abs(sys.e_l(k, s, lo)) * r.norm(s); }, lo,
                 grid.node(n + 1), quad_opt);
        sum += term;
        report.terms.push_back(term);
        report.partial_sums.push_back(sum);
    }
    report.last_term = report.terms.back();
    if (report.terms.size() >= 2) {
        const double prev = report.terms[report.terms.size() - 2];
        report.tail_ratio = (prev > 0.0) ? report.last_term / prev : 0.0;
    }
    report.converged = report.last_term <= 1e-12 || report.tail_ratio < 0.98;
    return report;
}

CorollaryRunResult corollary_run(const DiagonalSystem& sys, const PerturbationMatrix& r,
                                 const CorollaryOptions& opt) {
    CorollaryRunResult result;
    const Grid& grid = sys.grid();
    const Eigen::Index dim = sys.dim();
    const int k = sys.k();

    result.brackets = check_brackets(sys);
    result.conditions = corollary_conditions(sys, opt.sample_pairs, opt.seed);

    auto op = std::make_shared<CauchyOperator>(grid, sys.a_evaluator(), sys.b_evaluator(),
                                               opt.cauchy);

    EigenDirection ed;
    ed.e_hat = Vector::Zero(dim);
    ed.e_hat(k - 1) = Complex(1.0);
    ed.lambda = sys.a()[static_cast<std::size_t>(k - 1)];
    ed.lambda_d = sys.b()[static_cast<std::size_t>(k - 1)];

    DichotomyData dd;
    dd.projection = Matrix::Zero(dim, dim);
    for (int l = 1; l < k; ++l) dd.projection(l - 1, l - 1) = Complex(1.0);
    dd.m_const = opt.m_const;
    dd.h = corollary_weight(sys);
    dd.h_sup = std::max(1.0, result.conditions.h_sup) * (1.0 + 1e-9);

    Perturbation pert;
    pert.f = [r](double t, const Vector& v) { return Vector(r.eval(t) * v); };
    pert.eta = [r](double t) { return r.norm(t); };
    pert.g = DeviatingArgument::piecewise_constant(grid);

    LevinsonScenario sc = make_scenario(op, ed, dd, pert, opt.levinson);

    result.eigendirection =
        verify_eigendirection(*op, sc.direction, *sc.scale, opt.sample_pairs, opt.seed);
    result.projection = verify_projection(sc.dichotomy, sc.direction);
    result.dichotomy = verify_dichotomy(*op, *sc.scale, sc.dichotomy, opt.sample_pairs, opt.seed);

    result.n0 = find_n0(sc, opt.contraction_target);
    result.summability = corollary_l1(sys, r, result.n0);
    result.fixed_point = fixed_point_solve(sc, result.n0, sc.options.fixed_point_tol,
                                           sc.options.max_iterations);
    result.asymptotic = asymptotic_report(sc, result.fixed_point);

    // Cross-check: with g = gamma the perturbed system is the linear
    // piecewise-argument system with coefficient B + R; march it directly
    // from the fixed point's initial value and compare at coinciding times.
    {
        auto b_eval = sys.b_evaluator();
        auto merged = CoefficientEvaluator::general(
            [b_eval, r](double t) { return Matrix(b_eval.eval(t) + r.eval(t)); }, dim);
        const auto direct =
            integrate_direct(grid, sys.a_evaluator(), merged, result.fixed_point.trace.values[0],
                             grid.node(result.n0), grid.horizon(), opt.direct);
        const auto& fp_trace = result.fixed_point.trace;
        for (std::size_t i = 0; i < fp_trace.size(); ++i) {
            const double t = fp_trace.times[i];
            auto it = std::lower_bound(direct.times.begin(), direct.times.end(), t - 1e-9);
            if (it == direct.times.end()) continue;
            const auto j = static_cast<std::size_t>(it - direct.times.begin());
            if (std::abs(direct.times[j] - t) > 1e-9) continue;
            const double err = (fp_trace.values[i] - direct.values[j]).cwiseAbs().maxCoeff();
            result.direct_match_error = std::max(result.direct_match_error, err);
        }
    }

    result.scenario = std::move(sc);
    return result;
}

} // namespace depcag
