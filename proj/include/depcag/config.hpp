#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "depcag/diagonal.hpp"

namespace depcag {

/// Parsed scenario file: grid, system, eigendirection, dichotomy,
/// perturbation, numeric settings and output location. Unknown keys and
/// malformed values are collected and reported together.
struct ScenarioConfig {
    // [grid]
    std::string grid_kind = "uniform";  // uniform | nodes
    double grid_start = 0.0;
    double grid_step = 1.0;
    std::size_t grid_count = 11;
    std::vector<double> grid_nodes;
    std::string xi_kind = "delayed";  // delayed | nodes | list
    std::vector<double> xi_list;

    // [system]
    std::string system_kind = "scalar";  // scalar | diagonal | constant
    int dim = 1;
    std::vector<std::string> a_exprs;
    std::vector<std::string> b_exprs;
    std::vector<std::vector<Complex>> a_rows;
    std::vector<std::vector<Complex>> b_rows;

    // [eigendirection]
    int mode_k = 1;
    bool explicit_direction = false;
    std::vector<Complex> e_hat;
    std::string lambda_expr;
    std::string lambda_d_expr;

    // [dichotomy]
    std::string projection_kind = "modes-below-k";  // modes-below-k | zero | indices
    std::vector<int> projection_indices;            // 1-based coordinates
    double m_const = 1.0;
    std::string h_kind = "mode-ratio";  // mode-ratio | expdecay | one
    double h_rate = 1.0;
    double h_sup = 0.0;  // 0 = measure from the conditions check

    // [perturbation]
    std::string perturbation_kind = "none";  // none | identity-exp-decay | constant-identity
    double rho = 0.0;
    double rate = 1.0;
    std::string g_kind = "gamma";  // gamma | identity

    // [numerics]
    double quad_tol = 1e-10;
    int samples_per_interval = 64;
    int direct_steps_per_interval = 256;
    double fixed_point_tol = 1e-9;
    int max_iterations = 100;
    double contraction_target = 0.5;
    int theta_samples_per_interval = 8;
    std::uint64_t seed = 42;
    std::size_t sample_pairs = 200;

    // [simulate]
    std::vector<Complex> z0;
    std::optional<double> t_end;

    // [output]
    std::string output_dir = "out";
};

/// Parses a scenario file. ParseError carries line context; ValidationError
/// aggregates every issue found.
ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

/// Applies a named preset (scalar-growth, two-mode, corollary-w1) before the
/// file's own keys; called internally when [system] preset is present.
void apply_preset(ScenarioConfig& cfg, const std::string& name);

/// Scenario objects assembled from a validated config.
struct BuiltScenario {
    Grid grid;
    CoefficientEvaluator a;
    CoefficientEvaluator b;
    std::optional<DiagonalSystem> diag;          // scalar/diagonal systems
    std::optional<PerturbationMatrix> r;         // matrix perturbations
    CauchySettings cauchy;
    LevinsonOptions levinson;
    DirectOptions direct;
    Vector z0;
    double t_end;
};

BuiltScenario build_scenario(const ScenarioConfig& cfg);

/// Levinson scenario (eigendirection, dichotomy data, perturbation) from the
/// config; requires a perturbation or `none` for the trivial one.
LevinsonScenario build_levinson(const ScenarioConfig& cfg, const BuiltScenario& built,
                                std::shared_ptr<const CauchyOperator> op);

ScalarExpr parse_scalar_expr(const std::string& text);
Complex parse_complex(const std::string& text);

} // namespace depcag
