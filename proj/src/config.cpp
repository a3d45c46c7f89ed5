#include "depcag/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace depcag {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

struct Issues {
    std::vector<std::string> messages;
    void add(const std::string& m) { messages.push_back(m); }
    void check() const {
        if (messages.empty()) return;
        std::string joined;
        for (const auto& m : messages) {
            if (!joined.empty()) joined += "; ";
            joined += m;
        }
        raise(ErrorCode::ValidationError, joined);
    }
};

double to_double(const std::string& v, const std::string& key, Issues& issues) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        issues.add(key + ": expected a number, got '" + v + "'");
        return 0.0;
    }
}

long to_long(const std::string& v, const std::string& key, Issues& issues) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        issues.add(key + ": expected an integer, got '" + v + "'");
        return 0;
    }
}

} // namespace

Complex parse_complex(const std::string& raw) {
    const std::string text = trim(raw);
    if (text.empty()) raise(ErrorCode::ParseError, "empty complex literal");
    // Forms: "a", "bi", "a+bi", "a-bi".
    if (text.back() == 'i') {
        std::string body = text.substr(0, text.size() - 1);
        // Split at the last +/- that is not an exponent sign or leading sign.
        for (std::size_t p = body.size(); p-- > 1;) {
            const char c = body[p];
            if ((c == '+' || c == '-') && body[p - 1] != 'e' && body[p - 1] != 'E') {
                const std::string re = body.substr(0, p);
                std::string im = body.substr(p);
                if (im == "+") im = "1";
                if (im == "-") im = "-1";
                return Complex(std::stod(re), std::stod(im));
            }
        }
        if (body.empty() || body == "+") return Complex(0.0, 1.0);
        if (body == "-") return Complex(0.0, -1.0);
        return Complex(0.0, std::stod(body));
    }
    std::size_t used = 0;
    const double re = std::stod(text, &used);
    if (used != text.size()) {
        raise(ErrorCode::ParseError, "bad complex literal '" + raw + "'");
    }
    return Complex(re, 0.0);
}

ScalarExpr parse_scalar_expr(const std::string& raw) {
    const std::string text = trim(raw);
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos) {
        // Bare literal is shorthand for a constant.
        return ScalarExpr::constant(parse_complex(text));
    }
    const std::string head = text.substr(0, colon);
    const auto args = split(text.substr(colon + 1), ',');
    if (head == "const") {
        if (args.size() == 1) return ScalarExpr::constant(parse_complex(args[0]));
        if (args.size() == 2) {
            return ScalarExpr::constant(Complex(std::stod(args[0]), std::stod(args[1])));
        }
    } else if (head == "linear") {
        if (args.size() == 2) {
            return ScalarExpr::linear(parse_complex(args[0]), parse_complex(args[1]));
        }
    } else if (head == "expdec") {
        if (args.size() == 2) {
            return ScalarExpr::exp_decay(parse_complex(args[0]), std::stod(args[1]));
        }
    }
    raise(ErrorCode::ParseError,
          "bad coefficient expression '" + raw +
              "' (use const:c | linear:c0,c1 | expdec:c,rate)");
}

void apply_preset(ScenarioConfig& cfg, const std::string& name) {
    if (name == "scalar-growth") {
        cfg.grid_kind = "uniform";
        cfg.grid_start = 0.0;
        cfg.grid_step = 1.0;
        cfg.grid_count = 21;
        cfg.system_kind = "scalar";
        cfg.dim = 1;
        cfg.a_exprs = {"const:0"};
        cfg.b_exprs = {"const:1"};
        cfg.mode_k = 1;
        cfg.projection_kind = "zero";
        cfg.h_kind = "one";
        // The kernel-to-mode ratio swings by the one-interval bracket D(t_{n+1}).
        cfg.m_const = 2.0;
        cfg.perturbation_kind = "none";
    } else if (name == "two-mode") {
        cfg.grid_kind = "uniform";
        cfg.grid_start = 0.0;
        cfg.grid_step = 1.0;
        cfg.grid_count = 21;
        cfg.system_kind = "diagonal";
        cfg.dim = 2;
        cfg.a_exprs = {"const:-1", "const:0"};
        cfg.b_exprs = {"const:-0.25", "const:0"};
        cfg.mode_k = 2;
        cfg.projection_kind = "modes-below-k";
        cfg.h_kind = "mode-ratio";
        // Within an interval the decaying bracket shrinks to 0.57; its
        // reciprocal bounds the kernel-to-h ratio.
        cfg.m_const = 2.0;
        cfg.perturbation_kind = "none";
    } else if (name == "corollary-w1") {
        cfg.grid_kind = "uniform";
        cfg.grid_start = 0.0;
        cfg.grid_step = 1.0;
        cfg.grid_count = 31;
        cfg.system_kind = "diagonal";
        cfg.dim = 2;
        cfg.a_exprs = {"const:-1", "const:0"};
        cfg.b_exprs = {"const:0", "const:0"};
        cfg.mode_k = 2;
        cfg.projection_kind = "modes-below-k";
        cfg.h_kind = "mode-ratio";
        cfg.m_const = 1.0;
        cfg.perturbation_kind = "identity-exp-decay";
        cfg.rho = 0.8;
        cfg.rate = 1.0;
        cfg.g_kind = "gamma";
    } else {
        raise(ErrorCode::ValidationError, "unknown preset '" + name + "'");
    }
}

ScenarioConfig parse_config_text(const std::string& text) {
    ScenarioConfig cfg;
    Issues issues;
    std::map<std::string, std::map<std::string, std::string>> sections;
    {
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find_first_of("#;");
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') {
                    raise(ErrorCode::ParseError,
                          "line " + std::to_string(lineno) + ": unterminated section header");
                }
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) {
                raise(ErrorCode::ParseError,
                      "line " + std::to_string(lineno) + ": expected key = value");
            }
            if (section.empty()) {
                raise(ErrorCode::ParseError,
                      "line " + std::to_string(lineno) + ": key outside any [section]");
            }
            sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
    }

    // The preset expands first so explicit keys override it.
    bool preset_used = false;
    if (auto sys = sections.find("system"); sys != sections.end()) {
        if (auto preset = sys->second.find("preset"); preset != sys->second.end()) {
            apply_preset(cfg, preset->second);
            sys->second.erase(preset);
            preset_used = true;
        }
    }

    auto parse_complex_list = [&](const std::string& v, const std::string& key) {
        std::vector<Complex> out;
        for (const auto& item : split(v, ',')) {
            try {
                out.push_back(parse_complex(item));
            } catch (const Error&) {
                issues.add(key + ": bad complex entry '" + item + "'");
            }
        }
        return out;
    };
    auto parse_double_list = [&](const std::string& v, const std::string& key) {
        std::vector<double> out;
        for (const auto& item : split(v, ',')) out.push_back(to_double(item, key, issues));
        return out;
    };

    for (const auto& [section, keys] : sections) {
        for (const auto& [key, value] : keys) {
            const std::string where = "[" + section + "] " + key;
            if (section == "grid") {
                if (key == "kind") cfg.grid_kind = value;
                else if (key == "start") cfg.grid_start = to_double(value, where, issues);
                else if (key == "step") cfg.grid_step = to_double(value, where, issues);
                else if (key == "count") cfg.grid_count = static_cast<std::size_t>(to_long(value, where, issues));
                else if (key == "nodes") cfg.grid_nodes = parse_double_list(value, where);
                else if (key == "xi") cfg.xi_kind = value;
                else if (key == "xi_list") cfg.xi_list = parse_double_list(value, where);
                else issues.add("unknown key " + where);
            } else if (section == "system") {
                if (key == "kind") cfg.system_kind = value;
                else if (key == "n") cfg.dim = static_cast<int>(to_long(value, where, issues));
                else if (key == "a") cfg.a_exprs = {value};
                else if (key == "b") cfg.b_exprs = {value};
                else if (key.rfind("a_row_", 0) == 0) {
                    const auto idx = static_cast<std::size_t>(to_long(key.substr(6), where, issues));
                    if (cfg.a_rows.size() < idx) cfg.a_rows.resize(idx);
                    if (idx >= 1) cfg.a_rows[idx - 1] = parse_complex_list(value, where);
                } else if (key.rfind("b_row_", 0) == 0) {
                    const auto idx = static_cast<std::size_t>(to_long(key.substr(6), where, issues));
                    if (cfg.b_rows.size() < idx) cfg.b_rows.resize(idx);
                    if (idx >= 1) cfg.b_rows[idx - 1] = parse_complex_list(value, where);
                } else if (key.rfind("a_", 0) == 0) {
                    const auto idx = static_cast<std::size_t>(to_long(key.substr(2), where, issues));
                    if (cfg.a_exprs.size() < idx) cfg.a_exprs.resize(idx);
                    if (idx >= 1) cfg.a_exprs[idx - 1] = value;
                } else if (key.rfind("b_", 0) == 0) {
                    const auto idx = static_cast<std::size_t>(to_long(key.substr(2), where, issues));
                    if (cfg.b_exprs.size() < idx) cfg.b_exprs.resize(idx);
                    if (idx >= 1) cfg.b_exprs[idx - 1] = value;
                } else issues.add("unknown key " + where);
            } else if (section == "eigendirection") {
                if (key == "k") cfg.mode_k = static_cast<int>(to_long(value, where, issues));
                else if (key == "e_hat") {
                    cfg.explicit_direction = true;
                    cfg.e_hat = parse_complex_list(value, where);
                } else if (key == "lambda") cfg.lambda_expr = value;
                else if (key == "lambda_d") cfg.lambda_d_expr = value;
                else issues.add("unknown key " + where);
            } else if (section == "dichotomy") {
                if (key == "projection") {
                    if (value.rfind("indices:", 0) == 0) {
                        cfg.projection_kind = "indices";
                        for (const auto& item : split(value.substr(8), ','))
                            cfg.projection_indices.push_back(
                                static_cast<int>(to_long(item, where, issues)));
                    } else cfg.projection_kind = value;
                } else if (key == "m") cfg.m_const = to_double(value, where, issues);
                else if (key == "h") {
                    if (value.rfind("expdecay:", 0) == 0) {
                        cfg.h_kind = "expdecay";
                        cfg.h_rate = to_double(value.substr(9), where, issues);
                    } else cfg.h_kind = value;
                } else if (key == "h_sup") cfg.h_sup = to_double(value, where, issues);
                else issues.add("unknown key " + where);
            } else if (section == "perturbation") {
                if (key == "kind") cfg.perturbation_kind = value;
                else if (key == "rho") cfg.rho = to_double(value, where, issues);
                else if (key == "rate") cfg.rate = to_double(value, where, issues);
                else if (key == "g") cfg.g_kind = value;
                else issues.add("unknown key " + where);
            } else if (section == "numerics") {
                if (key == "quad_tol") cfg.quad_tol = to_double(value, where, issues);
                else if (key == "samples_per_interval")
                    cfg.samples_per_interval = static_cast<int>(to_long(value, where, issues));
                else if (key == "direct_steps_per_interval")
                    cfg.direct_steps_per_interval = static_cast<int>(to_long(value, where, issues));
                else if (key == "fixed_point_tol") cfg.fixed_point_tol = to_double(value, where, issues);
                else if (key == "max_iterations")
                    cfg.max_iterations = static_cast<int>(to_long(value, where, issues));
                else if (key == "contraction_target")
                    cfg.contraction_target = to_double(value, where, issues);
                else if (key == "theta_samples_per_interval")
                    cfg.theta_samples_per_interval = static_cast<int>(to_long(value, where, issues));
                else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_long(value, where, issues));
                else if (key == "sample_pairs")
                    cfg.sample_pairs = static_cast<std::size_t>(to_long(value, where, issues));
                else issues.add("unknown key " + where);
            } else if (section == "simulate") {
                if (key == "z0") cfg.z0 = parse_complex_list(value, where);
                else if (key == "t_end") cfg.t_end = to_double(value, where, issues);
                else issues.add("unknown key " + where);
            } else if (section == "output") {
                if (key == "directory") cfg.output_dir = value;
                else issues.add("unknown key " + where);
            } else {
                issues.add("unknown section [" + section + "]");
            }
        }
    }

    // Cross-field validation.
    if (cfg.grid_kind != "uniform" && cfg.grid_kind != "nodes") {
        issues.add("[grid] kind must be uniform or nodes");
    }
    if (cfg.grid_kind == "uniform" && !(cfg.grid_step > 0.0)) {
        issues.add("[grid] step must be positive");
    }
    if (cfg.grid_kind == "uniform" && cfg.grid_count < 2) {
        issues.add("[grid] count must be at least 2");
    }
    if (cfg.grid_kind == "nodes" && cfg.grid_nodes.size() < 2) {
        issues.add("[grid] nodes must list at least two times");
    }
    if (cfg.system_kind != "scalar" && cfg.system_kind != "diagonal" &&
        cfg.system_kind != "constant") {
        issues.add("[system] kind must be scalar, diagonal or constant");
    }
    if (cfg.system_kind == "scalar") cfg.dim = 1;
    if (cfg.dim < 1 || cfg.dim > 8) issues.add("[system] n must be in 1..8");
    if (!(cfg.quad_tol > 0.0)) issues.add("[numerics] quad_tol must be positive");
    if (!(cfg.fixed_point_tol > 0.0)) issues.add("[numerics] fixed_point_tol must be positive");
    if (cfg.samples_per_interval < 2 || cfg.samples_per_interval % 2 != 0) {
        issues.add("[numerics] samples_per_interval must be even and >= 2");
    }
    if (cfg.direct_steps_per_interval < 1) {
        issues.add("[numerics] direct_steps_per_interval must be positive");
    }
    if (cfg.max_iterations < 1) issues.add("[numerics] max_iterations must be positive");
    if (!(cfg.contraction_target > 0.0 && cfg.contraction_target < 1.0)) {
        issues.add("[numerics] contraction_target must lie in (0,1)");
    }
    if (cfg.mode_k < 1 || cfg.mode_k > cfg.dim) {
        issues.add("[eigendirection] k must name a coordinate in 1..n");
    }
    if (sections.find("grid") == sections.end() && !preset_used) {
        issues.add("missing [grid] section (or a [system] preset that defines one)");
    }
    if (sections.find("system") == sections.end() && !preset_used) {
        issues.add("missing [system] section");
    }

    issues.check();
    return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::ParseError, "cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

BuiltScenario build_scenario(const ScenarioConfig& cfg) {
    Grid grid = [&] {
        std::vector<double> nodes;
        if (cfg.grid_kind == "uniform") {
            for (std::size_t i = 0; i < cfg.grid_count; ++i) {
                nodes.push_back(cfg.grid_start + cfg.grid_step * double(i));
            }
        } else {
            nodes = cfg.grid_nodes;
        }
        if (cfg.xi_kind == "delayed" || cfg.xi_kind == "nodes") {
            return Grid::from_nodes(std::move(nodes));
        }
        if (cfg.xi_kind == "list") {
            return Grid::from_nodes(std::move(nodes), cfg.xi_list);
        }
        raise(ErrorCode::ValidationError, "[grid] xi must be delayed, nodes or list");
    }();

    BuiltScenario built{std::move(grid),
                        CoefficientEvaluator::zero(1),
                        CoefficientEvaluator::zero(1),
                        std::nullopt,
                        std::nullopt,
                        {},
                        {},
                        {},
                        Vector(),
                        0.0};

    const auto dim = static_cast<Eigen::Index>(cfg.dim);
    if (cfg.system_kind == "scalar" || cfg.system_kind == "diagonal") {
        if (static_cast<int>(cfg.a_exprs.size()) != cfg.dim ||
            static_cast<int>(cfg.b_exprs.size()) != cfg.dim) {
            raise(ErrorCode::ValidationError,
                  "[system] needs one a_i and one b_i expression per coordinate");
        }
        std::vector<ScalarExpr> a, b;
        for (const auto& e : cfg.a_exprs) a.push_back(parse_scalar_expr(e));
        for (const auto& e : cfg.b_exprs) b.push_back(parse_scalar_expr(e));
        built.a = CoefficientEvaluator::diagonal(a);
        built.b = CoefficientEvaluator::diagonal(b);
        // The closed-form mode machinery exists only on delayed grids; the
        // general operator route still covers interior xi.
        if (built.grid.delayed()) {
            QuadOptions q;
            q.tol = cfg.quad_tol;
            built.diag = DiagonalSystem(built.grid, a, b, cfg.mode_k, q);
        }
    } else {
        auto to_matrix = [&](const std::vector<std::vector<Complex>>& rows,
                             const char* what) {
            if (static_cast<int>(rows.size()) != cfg.dim) {
                raise(ErrorCode::ValidationError,
                      std::string("[system] ") + what + " needs n rows");
            }
            Matrix m(dim, dim);
            for (Eigen::Index i = 0; i < dim; ++i) {
                if (static_cast<Eigen::Index>(rows[i].size()) != dim) {
                    raise(ErrorCode::ValidationError,
                          std::string("[system] ") + what + " row " + std::to_string(i + 1) +
                              " needs n entries");
                }
                for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = rows[i][j];
            }
            return m;
        };
        built.a = CoefficientEvaluator::constant(to_matrix(cfg.a_rows, "a_row"));
        built.b = CoefficientEvaluator::constant(to_matrix(cfg.b_rows, "b_row"));
    }

    if (cfg.perturbation_kind == "identity-exp-decay") {
        built.r = PerturbationMatrix::scaled_identity_decay(dim, cfg.rho, cfg.rate);
    } else if (cfg.perturbation_kind == "constant-identity") {
        built.r = PerturbationMatrix::constant(Matrix(cfg.rho * Matrix::Identity(dim, dim)));
    } else if (cfg.perturbation_kind != "none") {
        raise(ErrorCode::ValidationError, "[perturbation] unknown kind");
    }

    built.cauchy.quad.tol = cfg.quad_tol;
    built.levinson.samples_per_interval = cfg.samples_per_interval;
    built.levinson.fixed_point_tol = cfg.fixed_point_tol;
    built.levinson.max_iterations = cfg.max_iterations;
    built.levinson.theta_samples_per_interval = cfg.theta_samples_per_interval;
    built.levinson.contraction_target = cfg.contraction_target;
    built.direct.steps_per_interval = cfg.direct_steps_per_interval;

    built.z0 = Vector::Zero(dim);
    if (cfg.z0.empty()) {
        built.z0(cfg.mode_k - 1) = Complex(1.0);
    } else {
        if (static_cast<Eigen::Index>(cfg.z0.size()) != dim) {
            raise(ErrorCode::ValidationError, "[simulate] z0 needs n entries");
        }
        for (Eigen::Index i = 0; i < dim; ++i) built.z0(i) = cfg.z0[static_cast<std::size_t>(i)];
    }
    built.t_end = cfg.t_end.value_or(built.grid.horizon());
    return built;
}

LevinsonScenario build_levinson(const ScenarioConfig& cfg, const BuiltScenario& built,
                                std::shared_ptr<const CauchyOperator> op) {
    const Eigen::Index dim = op->dim();

    EigenDirection ed;
    if (cfg.explicit_direction) {
        if (static_cast<Eigen::Index>(cfg.e_hat.size()) != dim) {
            raise(ErrorCode::ValidationError, "[eigendirection] e_hat needs n entries");
        }
        ed.e_hat = Vector::Zero(dim);
        for (Eigen::Index i = 0; i < dim; ++i) ed.e_hat(i) = cfg.e_hat[static_cast<std::size_t>(i)];
        ed.e_hat.normalize();
    } else {
        ed.e_hat = Vector::Zero(dim);
        ed.e_hat(cfg.mode_k - 1) = Complex(1.0);
    }
    if (!cfg.lambda_expr.empty()) {
        ed.lambda = parse_scalar_expr(cfg.lambda_expr);
    } else if (built.diag) {
        ed.lambda = built.diag->a()[static_cast<std::size_t>(cfg.mode_k - 1)];
    } else {
        raise(ErrorCode::ValidationError,
              "[eigendirection] lambda required for non-diagonal systems");
    }
    if (!cfg.lambda_d_expr.empty()) {
        ed.lambda_d = parse_scalar_expr(cfg.lambda_d_expr);
    } else if (built.diag) {
        ed.lambda_d = built.diag->b()[static_cast<std::size_t>(cfg.mode_k - 1)];
    } else {
        raise(ErrorCode::ValidationError,
              "[eigendirection] lambda_d required for non-diagonal systems");
    }

    DichotomyData dd;
    dd.projection = Matrix::Zero(dim, dim);
    if (cfg.projection_kind == "modes-below-k") {
        for (int l = 1; l < cfg.mode_k; ++l) dd.projection(l - 1, l - 1) = Complex(1.0);
    } else if (cfg.projection_kind == "indices") {
        for (int idx : cfg.projection_indices) {
            if (idx < 1 || idx > static_cast<int>(dim)) {
                raise(ErrorCode::ValidationError, "[dichotomy] projection index out of range");
            }
            dd.projection(idx - 1, idx - 1) = Complex(1.0);
        }
    } else if (cfg.projection_kind != "zero") {
        raise(ErrorCode::ValidationError, "[dichotomy] unknown projection");
    }
    dd.m_const = cfg.m_const;
    if (cfg.h_kind == "mode-ratio") {
        if (!built.diag) {
            raise(ErrorCode::ValidationError, "[dichotomy] h=mode-ratio needs a diagonal system");
        }
        dd.h = corollary_weight(*built.diag);
    } else if (cfg.h_kind == "expdecay") {
        const double rate = cfg.h_rate;
        dd.h = DichotomyWeight::separable([rate](double t) { return std::exp(-rate * t); });
    } else if (cfg.h_kind == "one") {
        dd.h = DichotomyWeight::general([](double, double) { return 1.0; });
    } else {
        raise(ErrorCode::ValidationError, "[dichotomy] unknown h preset");
    }
    dd.h_sup = (cfg.h_sup > 0.0) ? cfg.h_sup : 1.0 + 1e-9;

    Perturbation pert;
    if (built.r) {
        const PerturbationMatrix r = *built.r;
        pert.f = [r](double t, const Vector& v) { return Vector(r.eval(t) * v); };
        pert.eta = [r](double t) { return r.norm(t); };
    } else {
        pert.f = [dim](double, const Vector&) { return Vector(Vector::Zero(dim)); };
        pert.eta = [](double) { return 0.0; };
    }
    if (cfg.g_kind == "gamma") {
        pert.g = DeviatingArgument::piecewise_constant(op->grid());
    } else if (cfg.g_kind == "identity") {
        pert.g = DeviatingArgument::identity();
    } else {
        raise(ErrorCode::ValidationError, "[perturbation] g must be gamma or identity");
    }

    return make_scenario(std::move(op), std::move(ed), std::move(dd), std::move(pert),
                         built.levinson);
}

} // namespace depcag
