#include "doctest.h"

#include <cmath>
#include <random>

#include "depcag/levinson.hpp"
#include "depcag/sim.hpp"

using namespace depcag;

namespace {

CoefficientEvaluator scalar_const(Complex v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return CoefficientEvaluator::constant(std::move(m));
}

// Worked two-mode scenario: a = (-1, 0), b = (0, 0), k = 2,
// R(t) = rho e^{-t} I, uniform unit delayed grid.
struct WorkedScenario {
    std::shared_ptr<CauchyOperator> op;
    LevinsonScenario sc;
};

WorkedScenario make_worked(double rho, std::size_t nodes = 21) {
    const Grid grid = Grid::uniform(0.0, 1.0, nodes);
    auto a = CoefficientEvaluator::diagonal({ScalarExpr::constant(-1.0), ScalarExpr::constant(0.0)});
    auto b = CoefficientEvaluator::diagonal({ScalarExpr::constant(0.0), ScalarExpr::constant(0.0)});
    auto op = std::make_shared<CauchyOperator>(grid, a, b);

    EigenDirection ed;
    ed.e_hat = Vector::Zero(2);
    ed.e_hat(1) = Complex(1.0);
    ed.lambda = ScalarExpr::constant(0.0);
    ed.lambda_d = ScalarExpr::constant(0.0);

    DichotomyData dd;
    dd.projection = Matrix::Zero(2, 2);
    dd.projection(0, 0) = Complex(1.0);
    dd.m_const = 1.0;
    dd.h_sup = 1.0 + 1e-9;
    dd.h = DichotomyWeight::separable([](double t) { return std::exp(-t); });

    Perturbation pert;
    pert.f = [rho](double t, const Vector& v) { return Vector(rho * std::exp(-t) * v); };
    pert.eta = [rho](double t) { return rho * std::exp(-t); };
    pert.g = DeviatingArgument::piecewise_constant(grid);

    WorkedScenario w{op, make_scenario(op, ed, dd, pert)};
    return w;
}

} // namespace

TEST_CASE("etilde point values and consistency with the scalar Cauchy operator") {
    SUBCASE("lambda_d = 0 reduces to the exponential") {
        const Grid grid = Grid::uniform(0.0, 1.0, 6);
        EtildeEvaluator scale(grid, ScalarExpr::constant(-0.5), ScalarExpr::constant(0.0));
        CHECK(std::abs(scale.eval(3.0, 1.0) - Complex(std::exp(-1.0))) < 1e-12);
    }

    SUBCASE("coincident arguments give one") {
        const Grid grid = Grid::uniform(0.0, 1.0, 6);
        EtildeEvaluator scale(grid, ScalarExpr::constant(0.3), ScalarExpr::constant(0.7));
        CHECK(std::abs(scale.eval(2.5, 2.5) - Complex(1.0)) < 1e-15);
    }

    SUBCASE("unit growth: etilde(2,0) = 4 = Z(2,0)") {
        const Grid grid = Grid::uniform(0.0, 1.0, 6);
        EtildeEvaluator scale(grid, ScalarExpr::constant(0.0), ScalarExpr::constant(1.0));
        CHECK(std::abs(scale.eval(2.0, 0.0) - Complex(4.0)) < 1e-11);
        CauchyOperator op(grid, scalar_const(0.0), scalar_const(1.0));
        CHECK(std::abs(scale.eval(2.0, 0.0) - op.z(2.0, 0.0)(0, 0)) < 1e-11);
    }

    SUBCASE("scalar consistency across presets, both argument orders") {
        const Grid grid = Grid::uniform(0.0, 1.0, 8);
        struct Preset {
            Complex a, b;
        };
        const Preset presets[] = {{Complex(0.0), Complex(1.0)},
                                  {Complex(-1.0), Complex(0.5)},
                                  {Complex(0.2, 0.3), Complex(-0.3, 0.1)}};
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> dist(0.0, 7.0);
        for (const auto& p : presets) {
            CauchyOperator op(grid, scalar_const(p.a), scalar_const(p.b));
            EtildeEvaluator scale(grid, ScalarExpr::constant(p.a), ScalarExpr::constant(p.b));
            for (int i = 0; i < 40; ++i) {
                const double t = dist(rng);
                const double s = dist(rng);
                const Complex expected = op.z(t, s)(0, 0);
                CHECK(std::abs(scale.eval(t, s) - expected) <=
                      1e-9 * std::max(1.0, std::abs(expected)));
            }
        }
    }

    SUBCASE("multiplicativity on random triples") {
        const Grid grid = Grid::uniform(0.0, 1.0, 8);
        EtildeEvaluator scale(grid, ScalarExpr::constant(-0.3), ScalarExpr::constant(0.4));
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> dist(0.0, 7.0);
        for (int i = 0; i < 50; ++i) {
            const double t = dist(rng), u = dist(rng), s = dist(rng);
            const Complex lhs = scale.eval(t, u) * scale.eval(u, s);
            const Complex rhs = scale.eval(t, s);
            CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(rhs)));
        }
    }

    SUBCASE("advanced grids carry the bracket ratios at interior xi") {
        const Grid grid = Grid::from_nodes({0.0, 1.0, 2.0, 3.0}, {0.4, 1.4, 2.4});
        CauchyOperator op(grid, scalar_const(0.1), scalar_const(0.5));
        EtildeEvaluator scale(grid, ScalarExpr::constant(0.1), ScalarExpr::constant(0.5));
        for (double t : {0.2, 0.9, 1.7, 2.9}) {
            for (double s : {0.0, 0.5, 1.3, 2.5}) {
                const Complex expected = op.z(t, s)(0, 0);
                CHECK(std::abs(scale.eval(t, s) - expected) <=
                      1e-9 * std::max(1.0, std::abs(expected)));
            }
        }
    }

    SUBCASE("vanishing bracket raises ZeroDenominator") {
        const Grid grid = Grid::uniform(0.0, 1.0, 3);
        CHECK_THROWS_AS(
            EtildeEvaluator(grid, ScalarExpr::constant(0.0), ScalarExpr::constant(-1.0)),
            Error);
    }
}

TEST_CASE("verify_eigendirection") {
    const Grid grid = Grid::uniform(0.0, 1.0, 8);

    SUBCASE("diagonal system with a canonical direction passes") {
        auto a = CoefficientEvaluator::diagonal(
            {ScalarExpr::constant(-1.0), ScalarExpr::constant(0.1)});
        auto b = CoefficientEvaluator::diagonal(
            {ScalarExpr::constant(0.2), ScalarExpr::constant(0.3)});
        CauchyOperator op(grid, a, b);
        EigenDirection ed;
        ed.e_hat = Vector::Zero(2);
        ed.e_hat(1) = Complex(1.0);
        ed.lambda = ScalarExpr::constant(0.1);
        ed.lambda_d = ScalarExpr::constant(0.3);
        EtildeEvaluator scale(grid, ed.lambda, ed.lambda_d);
        const auto report = verify_eigendirection(op, ed, scale, 150, 42);
        CHECK(report.pass);
        CHECK(report.max_error < 1e-8);
    }

    SUBCASE("a rotated direction fails") {
        auto a = CoefficientEvaluator::diagonal(
            {ScalarExpr::constant(-1.0), ScalarExpr::constant(0.0)});
        auto b = CoefficientEvaluator::diagonal(
            {ScalarExpr::constant(0.0), ScalarExpr::constant(0.0)});
        CauchyOperator op(grid, a, b);
        EigenDirection ed;
        ed.e_hat = Vector::Ones(2) / std::sqrt(2.0);
        ed.lambda = ScalarExpr::constant(0.0);
        ed.lambda_d = ScalarExpr::constant(0.0);
        EtildeEvaluator scale(grid, ed.lambda, ed.lambda_d);
        const auto report = verify_eigendirection(op, ed, scale, 150, 42);
        CHECK_FALSE(report.pass);
        CHECK(report.max_error > 1e-3);
    }

    SUBCASE("pure exponential with zero B") {
        CauchyOperator op(grid,
                          CoefficientEvaluator::diagonal(
                              {ScalarExpr::constant(-0.4), ScalarExpr::constant(0.2)}),
                          CoefficientEvaluator::zero(2));
        EigenDirection ed;
        ed.e_hat = Vector::Zero(2);
        ed.e_hat(0) = Complex(1.0);
        ed.lambda = ScalarExpr::constant(-0.4);
        ed.lambda_d = ScalarExpr::constant(0.0);
        EtildeEvaluator scale(grid, ed.lambda, ed.lambda_d);
        CHECK(verify_eigendirection(op, ed, scale, 100, 1).pass);
    }
}

TEST_CASE("projection and dichotomy verification on the worked scenario") {
    auto w = make_worked(0.8);

    const auto proj = verify_projection(w.sc.dichotomy, w.sc.direction);
    CHECK(proj.pass);

    const auto dich = verify_dichotomy(*w.op, *w.sc.scale, w.sc.dichotomy, 200, 42);
    CHECK(dich.pass);
    CHECK(dich.forward.worst_excess <= 0.0);
    CHECK(dich.backward.worst_excess <= 0.0);

    SUBCASE("zero projection trivially satisfies the forward bound") {
        DichotomyData dd = w.sc.dichotomy;
        dd.projection = Matrix::Zero(2, 2);
        const auto r = verify_dichotomy(*w.op, *w.sc.scale, dd, 100, 42);
        CHECK(r.forward.pass);
    }

    SUBCASE("an M below the true ratio fails") {
        DichotomyData dd = w.sc.dichotomy;
        dd.m_const = 0.5;
        const auto r = verify_dichotomy(*w.op, *w.sc.scale, dd, 200, 42);
        CHECK_FALSE(r.pass);
        CHECK_FALSE(r.backward.pass);
    }
}

TEST_CASE("oscillatory dominant mode") {
    // a_2 = 0.7i rotates the dominant mode on the unit circle; the weighted
    // norm and the dichotomy bounds see only |etilde| = 1.
    const Grid grid = Grid::uniform(0.0, 1.0, 16);
    auto a = CoefficientEvaluator::diagonal(
        {ScalarExpr::constant(-1.0), ScalarExpr::constant(Complex(0.0, 0.7))});
    auto b = CoefficientEvaluator::diagonal(
        {ScalarExpr::constant(0.0), ScalarExpr::constant(0.0)});
    auto op = std::make_shared<CauchyOperator>(grid, a, b);

    EigenDirection ed;
    ed.e_hat = Vector::Zero(2);
    ed.e_hat(1) = Complex(1.0);
    ed.lambda = ScalarExpr::constant(Complex(0.0, 0.7));
    ed.lambda_d = ScalarExpr::constant(0.0);

    DichotomyData dd;
    dd.projection = Matrix::Zero(2, 2);
    dd.projection(0, 0) = Complex(1.0);
    dd.m_const = 1.0;
    dd.h_sup = 1.0 + 1e-9;
    dd.h = DichotomyWeight::separable([](double t) { return std::exp(-t); });

    Perturbation pert;
    pert.f = [](double t, const Vector& v) { return Vector(0.6 * std::exp(-t) * v); };
    pert.eta = [](double t) { return 0.6 * std::exp(-t); };
    pert.g = DeviatingArgument::piecewise_constant(grid);

    auto sc = make_scenario(op, ed, dd, pert);
    CHECK(verify_eigendirection(*op, sc.direction, *sc.scale, 100, 3).pass);
    CHECK(verify_dichotomy(*op, *sc.scale, sc.dichotomy, 100, 3).pass);

    const std::size_t n0 = find_n0(sc, 0.5);
    const auto fp = fixed_point_solve(sc, n0, 1e-9, 40);
    const auto report = asymptotic_report(sc, fp);
    CHECK(report.bound_holds);
    CHECK(report.decays);

    // |y_2| stays near 1 while its phase rotates.
    const auto& trace = fp.trace;
    const std::size_t last = trace.size() - 1;
    CHECK(std::abs(trace.values[last](1)) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(std::abs(std::arg(trace.values[last](1))) > 0.1);
}

TEST_CASE("perturbation verification") {
    const Grid grid = Grid::uniform(0.0, 1.0, 6);
    Perturbation pert;
    pert.f = [](double t, const Vector& v) { return Vector(0.5 * std::exp(-t) * v); };
    pert.eta = [](double t) { return 0.5 * std::exp(-t); };
    pert.g = DeviatingArgument::piecewise_constant(grid);
    CHECK(verify_perturbation(pert, grid, 2).pass);

    Perturbation lying = pert;
    lying.eta = [](double t) { return 0.1 * std::exp(-t); };
    CHECK_FALSE(verify_perturbation(lying, grid, 2).pass);
}

TEST_CASE("green kernel branches") {
    const Grid grid = Grid::uniform(0.0, 1.0, 6);
    CauchyOperator op(grid, scalar_const(0.0), scalar_const(1.0));

    SUBCASE("full projection keeps the forward kernel and kills the backward one") {
        DichotomyData dd;
        dd.projection = Matrix::Identity(1, 1);
        CHECK(std::abs(green_kernel(op, dd, 2.0, 0.0)(0, 0) -
                       op.zhat_kernel(2.0, 0.0)(0, 0)) < 1e-14);
        CHECK(std::abs(green_kernel(op, dd, 0.0, 2.0)(0, 0)) == 0.0);
    }

    SUBCASE("diagonal projection splits the modes") {
        auto a = CoefficientEvaluator::diagonal(
            {ScalarExpr::constant(-1.0), ScalarExpr::constant(0.0)});
        auto b = CoefficientEvaluator::zero(2);
        CauchyOperator diag_op(grid, a, b);
        DichotomyData dd;
        dd.projection = Matrix::Zero(2, 2);
        dd.projection(0, 0) = Complex(1.0);
        const Matrix g = green_kernel(diag_op, dd, 3.0, 1.0);
        CHECK(std::abs(g(0, 0) - Complex(std::exp(-2.0))) < 1e-12);
        CHECK(std::abs(g(1, 1)) == 0.0);
        const Matrix gb = green_kernel(diag_op, dd, 1.0, 3.0);
        CHECK(std::abs(gb(0, 0)) == 0.0);
        CHECK(std::abs(gb(1, 1) + Complex(1.0)) < 1e-12);
    }
}

TEST_CASE("theta") {
    SUBCASE("zero perturbation gives zero") {
        auto w = make_worked(0.0);
        CHECK(theta(w.sc, 0, 0.0, w.sc.grid().horizon()) == doctest::Approx(0.0));
    }

    SUBCASE("support left of t_{n0} contributes nothing") {
        auto w = make_worked(0.8);
        LevinsonScenario sc = w.sc;
        sc.perturbation.eta = [](double t) { return t < 1.0 ? 0.5 : 0.0; };
        sc.perturbation.f = [](double t, const Vector& v) {
            return Vector((t < 1.0 ? 0.5 : 0.0) * v);
        };
        CHECK(theta(sc, 1, 2.0, sc.grid().horizon()) == doctest::Approx(0.0));
    }

    SUBCASE("closed form for the worked scenario") {
        // Theta_{n0}(t) = rho e^{-t}(1 + t - t_{n0}) - rho e^{-H}, H the horizon.
        auto w = make_worked(0.8);
        const double H = w.sc.grid().horizon();
        for (std::size_t n0 : {0u, 1u, 2u}) {
            for (double t : {double(n0), n0 + 0.5, n0 + 3.0}) {
                const double expected =
                    0.8 * std::exp(-t) * (1.0 + t - double(n0)) - 0.8 * std::exp(-H);
                CHECK(theta(w.sc, n0, t, H) == doctest::Approx(expected).epsilon(1e-8));
            }
        }
    }

    SUBCASE("Riemann-sum oracle") {
        auto w = make_worked(0.8);
        const double H = w.sc.grid().horizon();
        const std::size_t n0 = 1;
        const double t = 3.25;
        // Brute-force Riemann sum of both integrals at 4096 points.
        const int n_pts = 4096;
        double acc = 0.0;
        {
            const double h = (t - 1.0) / n_pts;
            for (int i = 0; i < n_pts; ++i) {
                const double s = 1.0 + (i + 0.5) * h;
                acc += std::exp(-(t - s)) * 0.8 * std::exp(-s) * h;
            }
        }
        {
            const double h = (H - t) / n_pts;
            for (int i = 0; i < n_pts; ++i) {
                const double s = t + (i + 0.5) * h;
                acc += 0.8 * std::exp(-s) * h;
            }
        }
        CHECK(theta(w.sc, n0, t, H) == doctest::Approx(acc).epsilon(1e-6));
    }

    SUBCASE("tail increment reports the final panel") {
        auto w = make_worked(0.8);
        const auto detail = theta_detailed(w.sc, 0, 0.0, w.sc.grid().horizon());
        const double H = w.sc.grid().horizon();
        const double expected = 0.8 * (std::exp(-(H - 1.0)) - std::exp(-H));
        CHECK(detail.tail_increment == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("find_n0") {
    SUBCASE("zero perturbation starts immediately") {
        auto w = make_worked(0.0);
        CHECK(find_n0(w.sc, 0.5) == 0);
    }

    SUBCASE("large eta needs a later start") {
        // Theta sup at n0 is rho e^{-n0}; rho = 2 crosses 0.5 at n0 = 2.
        auto w = make_worked(2.0);
        CHECK(find_n0(w.sc, 0.5) == 2);
        CHECK(find_n0(w.sc, 0.999) == 1);
    }

    SUBCASE("generous target with a tiny perturbation") {
        auto w = make_worked(1e-4);
        CHECK(find_n0(w.sc, 0.999) == 0);
    }

    SUBCASE("non-integrable eta raises NoContraction") {
        auto w = make_worked(0.8);
        LevinsonScenario sc = w.sc;
        sc.perturbation.eta = [](double) { return 1.0; };
        sc.perturbation.f = [](double, const Vector& v) { return v; };
        CHECK_THROWS_AS(find_n0(sc, 0.5), Error);
    }
}

TEST_CASE("fixed point on the worked scenario") {
    auto w = make_worked(0.8);
    const std::size_t n0 = find_n0(w.sc, 0.5);
    CHECK(n0 == 1);

    SUBCASE("zero perturbation converges in one application") {
        auto w0 = make_worked(0.0);
        const auto fp = fixed_point_solve(w0.sc, 0, 1e-9, 5);
        CHECK(fp.iterations == 1);
        // y(t) = etilde(t, t_{n0}) e_hat exactly.
        for (std::size_t i = 0; i < fp.trace.size(); ++i) {
            CHECK(std::abs(fp.trace.values[i](1) - Complex(1.0)) < 1e-12);
            CHECK(std::abs(fp.trace.values[i](0)) < 1e-12);
        }
    }

    const auto fp = fixed_point_solve(w.sc, n0, 1e-9, 40);
    CHECK(fp.theta_sup == doctest::Approx(0.8 * std::exp(-1.0)).epsilon(1e-6));
    CHECK(fp.iterations <= 25);
    CHECK(fp.history.back() <= 1e-9);

    SUBCASE("contraction history") {
        for (std::size_t m = 1; m + 1 < fp.history.size(); ++m) {
            if (fp.history[m] < 1e-13) break;
            CHECK(fp.history[m + 1] / fp.history[m] <= fp.theta_sup + 0.05);
        }
    }

    SUBCASE("fixed point satisfies the perturbed system") {
        // Residual oracle: y' = A y + B y(gamma) + R(t) y(gamma) at interior
        // samples, derivative by five-point central differences.
        const auto& trace = fp.trace;
        const Grid& grid = w.sc.grid();
        double worst = 0.0;
        for (std::size_t i = 2; i + 2 < trace.size(); ++i) {
            const double t = trace.times[i];
            const std::size_t iv = trace.intervals[i];
            const double h = trace.times[i + 1] - trace.times[i];
            if (trace.intervals[i - 2] != iv || trace.intervals[i + 2] != iv) continue;
            const Vector deriv = (-trace.values[i + 2] + 8.0 * trace.values[i + 1] -
                                  8.0 * trace.values[i - 1] + trace.values[i - 2]) /
                                 (12.0 * h);
            const Vector y = trace.values[i];
            const Vector ygamma = trace.value_at(grid.node(iv));
            Matrix a = Matrix::Zero(2, 2);
            a(0, 0) = Complex(-1.0);
            const Vector residual =
                deriv - a * y - 0.8 * std::exp(-t) * ygamma;
            worst = std::max(worst, residual.cwiseAbs().maxCoeff());
        }
        CHECK(worst < 1e-5);
    }

    SUBCASE("operator well-definedness and contraction on random iterates") {
        FixedPointSolver solver(w.sc, n0);
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> coord(-1.0, 1.0);
        auto random_iterate = [&]() {
            std::vector<Vector> y(solver.times().size());
            for (std::size_t i = 0; i < y.size(); ++i) {
                Vector v(2);
                v << Complex(coord(rng), coord(rng)), Complex(coord(rng), coord(rng));
                y[i] = v / std::max(1.0, solver.weights()[i]);
            }
            return y;
        };
        const double theta_inf = fp.theta_sup;
        for (int rep = 0; rep < 5; ++rep) {
            const auto y1 = random_iterate();
            const auto y2 = random_iterate();
            const auto ny1 = solver.apply(y1);
            const auto ny2 = solver.apply(y2);
            CHECK(solver.weighted_norm(ny1) <=
                  1.0 + theta_inf * solver.weighted_norm(y1) + 1e-9);
            CHECK(solver.weighted_distance(ny1, ny2) <=
                  theta_inf * solver.weighted_distance(y1, y2) * 1.05 + 1e-12);
        }
    }

    SUBCASE("asymptotic report") {
        const auto report = asymptotic_report(w.sc, fp);
        CHECK(report.bound_holds);
        CHECK(report.decays);
        CHECK(report.decay_ratio < 0.2);
        // w vanishes identically only for zero perturbation.
        CHECK(report.max_first_decile > 1e-4);
    }

    SUBCASE("max iterations surfaces as an error") {
        CHECK_THROWS_AS(fixed_point_solve(w.sc, n0, 1e-16, 2), Error);
    }

    SUBCASE("nonuniform grid end to end") {
        std::vector<double> nodes;
        double t = 0.0;
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> step(0.4, 1.7);
        nodes.push_back(t);
        for (int i = 0; i < 18; ++i) {
            t += step(rng);
            nodes.push_back(t);
        }
        const Grid grid = Grid::from_nodes(nodes);
        auto a = CoefficientEvaluator::diagonal(
            {ScalarExpr::constant(-1.0), ScalarExpr::constant(0.0)});
        auto b = CoefficientEvaluator::diagonal(
            {ScalarExpr::constant(0.0), ScalarExpr::constant(0.0)});
        auto op = std::make_shared<CauchyOperator>(grid, a, b);
        LevinsonScenario sc = w.sc;
        sc.op = op;
        sc.scale = std::make_shared<EtildeEvaluator>(grid, sc.direction.lambda,
                                                     sc.direction.lambda_d);
        sc.perturbation.g = DeviatingArgument::piecewise_constant(grid);

        const std::size_t n0_nu = find_n0(sc, 0.5);
        const auto fp_nu = fixed_point_solve(sc, n0_nu, 1e-9, 40);
        CHECK(fp_nu.history.back() <= 1e-9);
        const auto report = asymptotic_report(sc, fp_nu);
        CHECK(report.bound_holds);
        CHECK(report.decays);

        // Direct integration cross-check on the irregular grid.
        auto merged = CoefficientEvaluator::general(
            [](double t2) {
                return Matrix(0.8 * std::exp(-t2) * Matrix::Identity(2, 2));
            },
            2);
        const auto direct = integrate_direct(grid, a, merged, fp_nu.trace.values[0],
                                             grid.node(n0_nu), grid.horizon());
        for (std::size_t i = 0; i < fp_nu.trace.size(); i += 97) {
            const Vector expected = direct.value_at(fp_nu.trace.times[i]);
            CHECK((fp_nu.trace.values[i] - expected).cwiseAbs().maxCoeff() < 1e-5);
        }
    }

    SUBCASE("operator application matches direct Green-kernel quadrature") {
        FixedPointSolver solver(w.sc, n0);
        const auto y0 = solver.initial();
        const auto applied = solver.apply(y0);
        const Grid& grid = w.sc.grid();
        const double base = grid.node(n0);
        for (std::size_t idx : {std::size_t(5), std::size_t(200), std::size_t(777)}) {
            const double t = solver.times()[idx];
            Vector direct = w.sc.scale->eval(t, base) * w.sc.direction.e_hat;
            for (std::size_t j = n0; j < grid.interval_count(); ++j) {
                auto integrand = [&](double s) -> Vector {
                    const double gs = w.sc.perturbation.g.g(s);
                    const std::size_t k = grid.locate_closure(gs);
                    const std::size_t local =
                        (k - n0) * std::size_t(w.sc.options.samples_per_interval);
                    return green_kernel(*w.op, w.sc.dichotomy, t, s) *
                           w.sc.perturbation.f(s, y0[local]);
                };
                const double lo = grid.node(j);
                const double hi = grid.node(j + 1);
                if (t > lo && t < hi) {
                    direct += quad(integrand, lo, t, QuadOptions{}) +
                              quad(integrand, t, hi, QuadOptions{});
                } else {
                    direct += quad(integrand, lo, hi, QuadOptions{});
                }
            }
            CHECK((applied[idx] - direct).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}
