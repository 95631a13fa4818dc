// gcalc command line: envelope expectations, forward/backward/coupled
// solvers, stability experiments, and the self-check suite. Configuration is
// a flat key=value file; command-line flags override config values.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gcalc/bsde.hpp"
#include "gcalc/errors.hpp"
#include "gcalc/expectation.hpp"
#include "gcalc/fbsde.hpp"
#include "gcalc/functional.hpp"
#include "gcalc/lattice.hpp"
#include "gcalc/registry.hpp"
#include "gcalc/report.hpp"
#include "gcalc/sde.hpp"
#include "gcalc/stability.hpp"
#include "gcalc/tree.hpp"
#include "gcalc/verify.hpp"

using namespace gcalc;

namespace {

// ---------------------------------------------------------------- config --

struct ConfigFile {
    std::vector<std::string> tokens;  // "--key=value" or "--key" v1 v2 ...
    std::string problem;
};

std::string trim(std::string s) {
    const auto istrip = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && istrip(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && istrip(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    ConfigFile out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: line " + std::to_string(lineno) +
                                  " is not key=value: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError("config: line " + std::to_string(lineno) + " has an empty key");
        if (key == "problem") {
            out.problem = value;
            continue;
        }
        if (value.find_first_of(" \t") == std::string::npos) {
            out.tokens.push_back("--" + key + "=" + value);
        } else {
            // Multi-value keys (e.g. "band = 0.5 1.0") become one flag token
            // followed by its value tokens.
            out.tokens.push_back("--" + key);
            std::istringstream parts(value);
            std::string piece;
            while (parts >> piece) out.tokens.push_back(piece);
        }
    }
    return out;
}

// ---------------------------------------------------------------- shared --

// Parses tokens (natural order) into the app. Returns -1 to continue, or the
// process exit code for help and parse errors.
int parse_tokens(CLI::App& app, std::vector<std::string> tokens) {
    std::reverse(tokens.begin(), tokens.end());
    try {
        app.parse(tokens);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    return -1;
}

struct TreeOpts {
    std::vector<double> band{0.5, 1.0};
    double horizon = 1.0;
    int steps = 6;
    std::vector<double> levels;
};

void add_tree_options(CLI::App& app, TreeOpts& t) {
    app.add_option("--band", t.band, "variance band as sigma-low-sq sigma-high-sq")->expected(2);
    app.add_option("--horizon", t.horizon, "time horizon T");
    app.add_option("--steps", t.steps, "number of grid steps N");
    app.add_option("--levels", t.levels,
                   "comma-separated variance levels inside the band (default: endpoints)")
        ->delimiter(',');
}

VolatilityBand band_of(const TreeOpts& t) { return VolatilityBand(t.band[0], t.band[1]); }

ScenarioTree make_tree(const TreeOpts& t) {
    return build_tree(TimeGrid::uniform(t.horizon, t.steps), band_of(t), t.levels);
}

// Would the exact tree stay inside the default node budget?
bool tree_feasible(const TreeOpts& t) {
    std::vector<double> levels = t.levels;
    if (levels.empty()) {
        levels = t.band[0] == t.band[1] ? std::vector<double>{t.band[0]}
                                        : std::vector<double>{t.band[0], t.band[1]};
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const std::size_t branching = 2 * levels.size();
    const std::size_t budget = TreeLimits{}.max_nodes;
    std::size_t total = 1;
    std::size_t slice = 1;
    for (int k = 0; k < t.steps; ++k) {
        if (slice > budget / branching) return false;
        slice *= branching;
        total += slice;
        if (total > budget) return false;
    }
    return true;
}

struct OutputOpts {
    std::string csv;
    std::string json;
    bool deterministic = true;
};

void add_output_options(CLI::App& app, OutputOpts& o) {
    app.add_option("--out-csv", o.csv, "write the CSV report to this path");
    app.add_option("--out-json", o.json, "write the JSON report to this path");
    app.add_flag("--deterministic,!--no-deterministic", o.deterministic,
                 "echoed into reports; execution is deterministic regardless");
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("output: cannot open " + path);
    out << content;
    if (!out) throw ValidationError("output: write failed for " + path);
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_double(v[i]);
    }
    return out;
}

void echo_tree(ConfigEcho& echo, const TreeOpts& t) {
    echo.emplace_back("band", join_doubles(t.band));
    echo.emplace_back("horizon", format_double(t.horizon));
    echo.emplace_back("steps", std::to_string(t.steps));
    if (!t.levels.empty()) echo.emplace_back("levels", join_doubles(t.levels));
}

void echo_output(ConfigEcho& echo, const OutputOpts& o) {
    echo.emplace_back("deterministic", o.deterministic ? "true" : "false");
}

void write_results(const OutputOpts& out, const std::string& kind,
                   const std::vector<std::pair<std::string, double>>& rows,
                   const ConfigEcho& echo) {
    if (!out.csv.empty()) write_file(out.csv, results_csv(rows));
    if (!out.json.empty()) write_file(out.json, results_json(kind, rows, echo));
}

CylinderFunctional terminal_payoff(const ScenarioTree& tree, const NamedFunctional& named) {
    return CylinderFunctional::of_coordinate(tree.steps(), named.payoff, named.growth);
}

// Nearest grid index for each requested time on the uniform grid.
std::vector<int> snap_times(const TimeGrid& grid, std::vector<double> times) {
    if (times.empty())
        times = {0.0, grid.horizon() / 2.0, grid.horizon()};
    std::vector<int> indices;
    for (const double t : times) {
        if (!(t >= 0.0) || t > grid.horizon() * (1.0 + 1e-12))
            throw ValidationError("times: " + format_double(t) + " lies outside [0, horizon]");
        const double pos = grid.horizon() > 0.0
                               ? t / grid.horizon() * static_cast<double>(grid.steps())
                               : 0.0;
        const int k = std::clamp(static_cast<int>(std::llround(pos)), 0, grid.steps());
        indices.push_back(k);
    }
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    return indices;
}

// ---------------------------------------------------------------- expect --

int cmd_expect(std::vector<std::string> tokens) {
    CLI::App app{"Upper and lower expectation of a named terminal payoff", "gcalc expect"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    TreeOpts tree_opts;
    OutputOpts out;
    std::string functional = "bt_squared";
    std::string backend = "auto";
    add_tree_options(app, tree_opts);
    app.add_option("--functional", functional, "payoff name: bt, bt_squared, bt_call, bt_abs");
    app.add_option("--backend", backend,
                   "auto, exact-tree, oracle (recursion), or lattice; auto picks the exact "
                   "tree when it fits the node budget and the lattice otherwise")
        ->check(CLI::IsMember({"auto", "exact-tree", "oracle", "lattice"}));
    add_output_options(app, out);
    if (const int rc = parse_tokens(app, std::move(tokens)); rc >= 0) return rc;

    const NamedFunctional named = make_functional(functional);
    std::string chosen = backend;
    if (chosen == "auto") chosen = tree_feasible(tree_opts) ? "exact-tree" : "lattice";

    double upper = 0.0;
    double lower = 0.0;
    if (chosen == "lattice") {
        const LatticeSpec spec{TimeGrid::uniform(tree_opts.horizon, tree_opts.steps),
                               band_of(tree_opts), nullptr};
        upper = lattice_expect(spec, named.payoff, Envelope::upper);
        lower = lattice_expect(spec, named.payoff, Envelope::lower);
    } else {
        const ScenarioTree tree = make_tree(tree_opts);
        const auto x = terminal_payoff(tree, named);
        if (chosen == "oracle") {
            const auto negated = CylinderFunctional::of_coordinate(
                tree.steps(), [payoff = named.payoff](double v) { return -payoff(v); },
                named.growth);
            upper = brute_force_expect(tree, x);
            lower = -brute_force_expect(tree, negated);
        } else {
            upper = expect(tree, x);
            lower = lower_expect(tree, x);
        }
    }

    ConfigEcho echo;
    echo.emplace_back("problem", "expect");
    echo.emplace_back("functional", functional);
    echo.emplace_back("backend", chosen);
    echo_tree(echo, tree_opts);
    echo_output(echo, out);
    write_results(out, "expect", {{"upper", upper}, {"lower", lower}}, echo);
    std::cout << "expect " << functional << " [" << chosen << "]: upper " << format_double(upper)
              << " lower " << format_double(lower) << '\n';
    return 0;
}

// ------------------------------------------------------------------- sde --

int cmd_sde(std::vector<std::string> tokens) {
    CLI::App app{"Forward Euler transport and the terminal-value envelope", "gcalc sde"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    TreeOpts tree_opts;
    OutputOpts out;
    std::string drift = "zero";
    std::string qv_drift = "zero";
    std::string diffusion = "constant:1";
    double x0 = 0.0;
    add_tree_options(app, tree_opts);
    app.add_option("--drift", drift, "dt coefficient: zero, constant:<c>, linear:<a,b>, sin");
    app.add_option("--qv-drift", qv_drift, "d<B> coefficient, same registry names");
    app.add_option("--diffusion", diffusion, "dB coefficient, same registry names");
    app.add_option("--x0", x0, "initial state");
    add_output_options(app, out);
    if (const int rc = parse_tokens(app, std::move(tokens)); rc >= 0) return rc;

    const NamedCoefficient b = make_coefficient(drift);
    const NamedCoefficient h = make_coefficient(qv_drift);
    const NamedCoefficient s = make_coefficient(diffusion);
    Regularity reg;
    reg.lipschitz = std::max({b.lipschitz, h.lipschitz, s.lipschitz});
    const auto coeffs = ForwardCoefficients::scalar(b.fn, h.fn, s.fn, reg);

    const ScenarioTree tree = make_tree(tree_opts);
    const std::vector<double> start{x0};
    const NodeProcess x = solve_forward(tree, coeffs, start);
    const double upper = expect(tree, x);
    const double lower = lower_expect(tree, x);

    ConfigEcho echo;
    echo.emplace_back("problem", "sde");
    echo.emplace_back("drift", drift);
    echo.emplace_back("qv-drift", qv_drift);
    echo.emplace_back("diffusion", diffusion);
    echo.emplace_back("x0", format_double(x0));
    echo_tree(echo, tree_opts);
    echo_output(echo, out);
    write_results(out, "sde", {{"x_upper", upper}, {"x_lower", lower}}, echo);
    std::cout << "sde: terminal upper " << format_double(upper) << " lower "
              << format_double(lower) << '\n';
    return 0;
}

// ------------------------------------------------------------------ bsde --

int cmd_bsde(std::vector<std::string> tokens) {
    CLI::App app{"Backward sweep for the conditional value process", "gcalc bsde"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    TreeOpts tree_opts;
    OutputOpts out;
    std::string terminal = "bt";
    std::string f_spec = "zero";
    std::string g_spec = "zero";
    double step_tol = 1e-12;
    int max_inner = 64;
    add_tree_options(app, tree_opts);
    app.add_option("--terminal", terminal, "terminal payoff name");
    app.add_option("--f", f_spec, "ds driver: zero, constant:<c>, linear:<a,b>, sin");
    app.add_option("--g", g_spec, "d<B> driver, same registry names");
    app.add_option("--step-tol", step_tol, "per-node fixed point tolerance");
    app.add_option("--max-inner", max_inner, "per-node iteration cap");
    add_output_options(app, out);
    if (const int rc = parse_tokens(app, std::move(tokens)); rc >= 0) return rc;

    const NamedFunctional named = make_functional(terminal);
    const NamedCoefficient f = make_coefficient(f_spec);
    const NamedCoefficient g = make_coefficient(g_spec);
    const auto drivers = BackwardDrivers::scalar(f.fn, g.fn, f.lipschitz, g.lipschitz);

    const ScenarioTree tree = make_tree(tree_opts);
    const auto data = TerminalData::from_functional(terminal_payoff(tree, named));
    BackwardOptions opts;
    opts.step_tol = step_tol;
    opts.max_inner = max_inner;
    const NodeProcess y = solve_backward(tree, drivers, data, opts);

    ConfigEcho echo;
    echo.emplace_back("problem", "bsde");
    echo.emplace_back("terminal", terminal);
    echo.emplace_back("f", f_spec);
    echo.emplace_back("g", g_spec);
    echo.emplace_back("step-tol", format_double(step_tol));
    echo.emplace_back("max-inner", std::to_string(max_inner));
    echo_tree(echo, tree_opts);
    echo_output(echo, out);
    write_results(out, "bsde", {{"y0", y.at(0, 0)}}, echo);
    std::cout << "bsde: y0 " << format_double(y.at(0, 0)) << '\n';
    return 0;
}

// ----------------------------------------------------------------- fbsde --

int cmd_fbsde(std::vector<std::string> tokens) {
    CLI::App app{"Picard iteration for the linearly coupled pair (b = k y, f = k x)",
                 "gcalc fbsde"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    TreeOpts tree_opts;
    OutputOpts out;
    double k = 0.1;
    double x0 = 0.5;
    double tol = 1e-10;
    int max_iter = 500;
    bool force = false;
    bool gauss_seidel = false;
    add_tree_options(app, tree_opts);
    app.add_option("--k", k, "joint coupling constant");
    app.add_option("--x0", x0, "forward initial state");
    app.add_option("--tol", tol, "residual tolerance in the product norm");
    app.add_option("--max-iter", max_iter, "Picard iteration cap");
    app.add_flag("--force", force, "run even when the contraction factor is inadmissible");
    app.add_flag("--gauss-seidel", gauss_seidel,
                 "update the backward component against the fresh forward sweep");
    add_output_options(app, out);
    if (const int rc = parse_tokens(app, std::move(tokens)); rc >= 0) return rc;

    const ScenarioTree tree = make_tree(tree_opts);
    FbsdeData data;
    data.x0 = x0;
    data.xi = TerminalData::from_functional(CylinderFunctional::of_coordinate(
        tree.steps(), [](double v) { return v; }, GrowthBound{1.0, 0}));
    data.b = [k](double, double, double y) { return k * y; };
    data.h = [](double, double, double) { return 0.0; };
    data.sigma = [](double, double, double) { return 0.0; };
    data.f = [k](double, double x, double) { return k * x; };
    data.g = [](double, double, double) { return 0.0; };
    data.lipschitz_k = k;

    FbsdeOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    opts.force = force;
    opts.gauss_seidel = gauss_seidel;
    const FbsdeResult result = solve_fbsde(tree, data, opts);

    ConfigEcho echo;
    echo.emplace_back("problem", "fbsde");
    echo.emplace_back("k", format_double(k));
    echo.emplace_back("x0", format_double(x0));
    echo.emplace_back("tol", format_double(tol));
    echo.emplace_back("max-iter", std::to_string(max_iter));
    echo.emplace_back("force", force ? "true" : "false");
    echo.emplace_back("gauss-seidel", gauss_seidel ? "true" : "false");
    echo_tree(echo, tree_opts);
    echo_output(echo, out);
    const std::vector<std::pair<std::string, double>> rows{
        {"factor", result.factor},
        {"iterations", static_cast<double>(result.iterations)},
        {"residual", result.residuals.empty() ? 0.0 : result.residuals.back()},
        {"x_root", result.pair.x.at(0, 0)},
        {"y_root", result.pair.y.at(0, 0)},
        {"norm", result.norm_square_roots},
    };
    write_results(out, "fbsde", rows, echo);
    std::cout << "fbsde: factor " << format_double(result.factor) << ", "
              << (result.converged ? "converged in " : "NOT converged after ")
              << result.iterations << " iterations, x_root " << format_double(result.pair.x.at(0, 0))
              << " y_root " << format_double(result.pair.y.at(0, 0)) << '\n';
    return result.converged ? 0 : 3;
}

// ------------------------------------------------------------- stability --

const std::vector<std::string> kFamilies{"additive-drift", "lipschitz-drift", "terminal-shift",
                                         "driver-shift", "coupling-shift"};

std::vector<double> default_params(const std::string& family) {
    if (family == "lipschitz-drift") return {0.1, 0.05, 0.025};
    if (family == "driver-shift") return {0.1, 0.01, 0.0005};
    return {0.2, 0.1, 0.05};
}

int cmd_stability(std::vector<std::string> tokens) {
    CLI::App app{"Perturbation families with gap tables and comparison bounds",
                 "gcalc stability"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    TreeOpts tree_opts;
    OutputOpts out;
    std::string family = "additive-drift";
    std::vector<double> params;
    std::vector<double> times;
    add_tree_options(app, tree_opts);
    app.add_option("--family", family,
                   "additive-drift, lipschitz-drift, terminal-shift, driver-shift, or "
                   "coupling-shift")
        ->check(CLI::IsMember(kFamilies));
    app.add_option("--params", params,
                   "strictly decreasing positive perturbation sizes (default per family)")
        ->delimiter(',');
    app.add_option("--times", times, "report times, snapped to the grid (default 0, T/2, T)")
        ->delimiter(',');
    add_output_options(app, out);
    if (const int rc = parse_tokens(app, std::move(tokens)); rc >= 0) return rc;

    if (params.empty()) params = default_params(family);
    const ScenarioTree tree = make_tree(tree_opts);
    const std::vector<int> indices = snap_times(tree.grid(), times);

    StabilityReport report;
    if (family == "additive-drift" || family == "lipschitz-drift") {
        SdeFamily fam;
        fam.params = params;
        if (family == "additive-drift") {
            fam.make = [drift = make_coefficient_family("additive-eps:constant:0.3"),
                        sigma = make_coefficient("constant:0.4")](double eps) {
                Regularity reg;
                reg.lipschitz = 0.0;
                SdeProblem p;
                p.coeffs = ForwardCoefficients::scalar(
                    drift(eps).fn, [](double, double) { return 0.0; }, sigma.fn, reg);
                p.x0 = {0.1};
                return p;
            };
        } else {
            fam.make = [drift = make_coefficient_family("additive-eps:linear:1,0"),
                        sigma = make_coefficient("constant:0.3")](double eps) {
                Regularity reg;
                reg.lipschitz = 1.0;
                SdeProblem p;
                p.coeffs = ForwardCoefficients::scalar(
                    drift(eps).fn, [](double, double) { return 0.0; }, sigma.fn, reg);
                p.x0 = {0.1};
                return p;
            };
        }
        report = sde_stability_experiment(tree, fam, indices);
    } else if (family == "terminal-shift" || family == "driver-shift") {
        BsdeFamily fam;
        fam.params = params;
        if (family == "terminal-shift") {
            fam.make = [&tree](double delta) {
                BsdeProblem p;
                p.drivers = BackwardDrivers::scalar([](double, double) { return 0.0; },
                                                    [](double, double) { return 0.0; }, 0.0, 0.0);
                p.terminal = TerminalData::from_functional(CylinderFunctional::of_coordinate(
                    tree.steps(), [delta](double v) { return v + delta; }, GrowthBound{1.0, 0}));
                return p;
            };
        } else {
            fam.make = [&tree, f = make_coefficient_family("additive-eps:linear:0.2,0")](
                           double delta) {
                BsdeProblem p;
                p.drivers = BackwardDrivers::scalar(
                    f(delta).fn, [](double, double) { return 0.0; }, 0.2, 0.0);
                p.terminal = TerminalData::from_functional(CylinderFunctional::of_coordinate(
                    tree.steps(), [](double v) { return v; }, GrowthBound{1.0, 0}));
                return p;
            };
        }
        report = bsde_stability_experiment(tree, fam, indices);
    } else {
        FbsdeFamily fam;
        fam.params = params;
        fam.make = [&tree](double gamma) {
            FbsdeData d;
            d.x0 = 0.5;
            d.xi = TerminalData::from_functional(CylinderFunctional::of_coordinate(
                tree.steps(), [](double v) { return v; }, GrowthBound{1.0, 0}));
            d.b = [](double, double, double y) { return 0.1 * y; };
            d.h = [](double, double, double) { return 0.0; };
            d.sigma = [](double, double, double) { return 0.0; };
            d.f = [gamma](double, double x, double) { return 0.1 * x + gamma; };
            d.g = [](double, double, double) { return 0.0; };
            d.lipschitz_k = 0.1;
            return d;
        };
        report = fbsde_stability_experiment(tree, fam, indices);
    }

    ConfigEcho echo;
    echo.emplace_back("problem", "stability");
    echo.emplace_back("family", family);
    echo.emplace_back("params", join_doubles(params));
    {
        std::string joined;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (i) joined += ",";
            joined += format_double(tree.grid().t(indices[i]));
        }
        echo.emplace_back("times", joined);
    }
    echo_tree(echo, tree_opts);
    echo_output(echo, out);
    if (!out.csv.empty()) write_file(out.csv, stability_csv(report));
    if (!out.json.empty()) write_file(out.json, stability_json(report, echo));

    const auto& s = report.summary;
    std::cout << "stability " << family << ": monotone " << (s.monotone ? "yes" : "no")
              << ", strictly decreasing " << (s.strictly_decreasing ? "yes" : "no")
              << ", final/first " << format_double(s.final_over_first) << ", bounds "
              << (s.within_bounds ? "hold" : "violated") << ", "
              << (s.pass ? "pass" : "fail") << '\n';
    return s.pass ? 0 : 2;
}

// ---------------------------------------------------------------- verify --

int cmd_verify(std::vector<std::string> tokens) {
    CLI::App app{"Property suite over the whole engine", "gcalc verify"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    VerifyOptions vo;
    OutputOpts out;
    std::vector<double> band{vo.band.sigma_low_sq, vo.band.sigma_high_sq};
    app.add_option("--band", band, "variance band as sigma-low-sq sigma-high-sq")->expected(2);
    app.add_option("--horizon", vo.horizon, "time horizon T");
    app.add_option("--steps", vo.steps, "exact-tree depth for the DP and oracle suites");
    app.add_option("--lattice-steps", vo.lattice_steps,
                   "lattice steps per unit time for distribution checks");
    app.add_option("--pairs", vo.random_pairs, "random functional pairs in the axiom suite");
    app.add_option("--processes", vo.random_processes, "random simple processes");
    app.add_option("--functionals", vo.random_functionals, "random functionals per oracle depth");
    app.add_option("--jensen", vo.jensen_functionals, "random functionals in the Jensen suite");
    app.add_option("--seed", vo.seed, "generator seed");
    add_output_options(app, out);
    if (const int rc = parse_tokens(app, std::move(tokens)); rc >= 0) return rc;

    vo.band = VolatilityBand(band[0], band[1]);
    const VerifyReport report = run_verify(vo);

    ConfigEcho echo;
    echo.emplace_back("problem", "verify");
    echo.emplace_back("band", join_doubles(band));
    echo.emplace_back("horizon", format_double(vo.horizon));
    echo.emplace_back("steps", std::to_string(vo.steps));
    echo.emplace_back("lattice-steps", std::to_string(vo.lattice_steps));
    echo.emplace_back("pairs", std::to_string(vo.random_pairs));
    echo.emplace_back("processes", std::to_string(vo.random_processes));
    echo.emplace_back("functionals", std::to_string(vo.random_functionals));
    echo.emplace_back("jensen", std::to_string(vo.jensen_functionals));
    echo.emplace_back("seed", std::to_string(vo.seed));
    echo_output(echo, out);
    if (!out.csv.empty()) write_file(out.csv, verify_csv(report));
    if (!out.json.empty()) write_file(out.json, verify_json(report, echo));

    std::size_t passed = 0;
    for (const auto& row : report.rows)
        if (row.pass) ++passed;
    std::cout << "verify: " << passed << "/" << report.rows.size() << " checks pass\n";
    return report.pass ? 0 : 2;
}

// ----------------------------------------------------------------- check --

int cmd_check(std::vector<std::string> tokens, const std::string& config_problem) {
    CLI::App app{"Validate configuration without executing numerics", "gcalc check"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.allow_extras(false);

    TreeOpts tree_opts;
    OutputOpts out;
    std::string problem = config_problem;
    std::string functional = "bt_squared";
    std::string backend = "auto";
    std::string drift = "zero";
    std::string qv_drift = "zero";
    std::string diffusion = "constant:1";
    std::string terminal = "bt";
    std::string f_spec = "zero";
    std::string g_spec = "zero";
    std::string family = "additive-drift";
    double x0 = 0.0;
    double k = 0.1;
    double tol = 1e-10;
    double step_tol = 1e-12;
    int max_iter = 500;
    int max_inner = 64;
    bool force = false;
    bool gauss_seidel = false;
    int lattice_steps = 200;
    int pairs = 100;
    int processes = 100;
    int functionals = 20;
    int jensen = 50;
    std::uint64_t seed = 0x9cull;
    std::vector<double> params;
    std::vector<double> times;

    add_tree_options(app, tree_opts);
    add_output_options(app, out);
    app.add_option("--problem", problem, "problem section to validate");
    app.add_option("--functional", functional, "payoff name");
    app.add_option("--backend", backend, "expect backend")
        ->check(CLI::IsMember({"auto", "exact-tree", "oracle", "lattice"}));
    app.add_option("--drift", drift, "sde dt coefficient");
    app.add_option("--qv-drift", qv_drift, "sde d<B> coefficient");
    app.add_option("--diffusion", diffusion, "sde dB coefficient");
    app.add_option("--terminal", terminal, "bsde terminal payoff");
    app.add_option("--f", f_spec, "bsde ds driver");
    app.add_option("--g", g_spec, "bsde d<B> driver");
    app.add_option("--family", family, "stability family")->check(CLI::IsMember(kFamilies));
    app.add_option("--x0", x0, "initial state");
    app.add_option("--k", k, "fbsde coupling constant");
    app.add_option("--tol", tol, "fbsde residual tolerance");
    app.add_option("--step-tol", step_tol, "bsde per-node tolerance");
    app.add_option("--max-iter", max_iter, "fbsde iteration cap");
    app.add_option("--max-inner", max_inner, "bsde per-node iteration cap");
    app.add_flag("--force", force, "fbsde force flag");
    app.add_flag("--gauss-seidel", gauss_seidel, "fbsde sweep order");
    app.add_option("--lattice-steps", lattice_steps, "verify lattice steps");
    app.add_option("--pairs", pairs, "verify random pairs");
    app.add_option("--processes", processes, "verify random processes");
    app.add_option("--functionals", functionals, "verify functionals per depth");
    app.add_option("--jensen", jensen, "verify Jensen functionals");
    app.add_option("--seed", seed, "verify seed");
    app.add_option("--params", params, "stability schedule")->delimiter(',');
    app.add_option("--times", times, "stability report times")->delimiter(',');
    if (const int rc = parse_tokens(app, std::move(tokens)); rc >= 0) return rc;

    // Shared geometry: ctor and grid checks are pure validation.
    const VolatilityBand band = band_of(tree_opts);
    const TimeGrid grid = TimeGrid::uniform(tree_opts.horizon, tree_opts.steps);
    for (const double v : tree_opts.levels)
        if (v < band.sigma_low_sq || v > band.sigma_high_sq)
            throw ValidationError("levels: " + format_double(v) + " lies outside the band");

    if (!problem.empty()) {
        const std::vector<std::string> known{"expect", "sde",    "bsde",
                                             "fbsde",  "stability", "verify"};
        if (std::find(known.begin(), known.end(), problem) == known.end())
            throw ValidationError("problem: unknown section '" + problem + "'");
        if (problem == "expect") {
            (void)make_functional(functional);
        } else if (problem == "sde") {
            (void)make_coefficient(drift);
            (void)make_coefficient(qv_drift);
            (void)make_coefficient(diffusion);
        } else if (problem == "bsde") {
            (void)make_functional(terminal);
            (void)make_coefficient(f_spec);
            (void)make_coefficient(g_spec);
            if (step_tol <= 0.0) throw ValidationError("step-tol: must be positive");
            if (max_inner < 1) throw ValidationError("max-inner: must be at least 1");
        } else if (problem == "fbsde") {
            (void)contraction_check(k, tree_opts.horizon);
            if (tol <= 0.0) throw ValidationError("tol: must be positive");
            if (max_iter < 1) throw ValidationError("max-iter: must be at least 1");
        } else if (problem == "stability") {
            if (params.empty()) params = default_params(family);
            for (std::size_t i = 0; i < params.size(); ++i) {
                if (params[i] <= 0.0) throw ValidationError("params: entries must be positive");
                if (i > 0 && params[i] >= params[i - 1])
                    throw ValidationError("params: schedule must be strictly decreasing");
            }
            (void)snap_times(grid, times);
        } else if (problem == "verify") {
            if (lattice_steps < 1) throw ValidationError("lattice-steps: must be at least 1");
            if (pairs < 1 || processes < 1 || functionals < 1 || jensen < 1)
                throw ValidationError("verify: sample counts must be at least 1");
        }
        std::cout << "config ok (problem " << problem << ")\n";
    } else {
        std::cout << "config ok\n";
    }
    return 0;
}

// ------------------------------------------------------------------ main --

void print_usage(std::ostream& os) {
    os << "gcalc <subcommand> [flags]\n"
          "\n"
          "subcommands:\n"
          "  expect     envelope of a named terminal payoff\n"
          "  sde        forward Euler transport on the scenario tree\n"
          "  bsde       backward conditional-value sweep\n"
          "  fbsde      Picard iteration for the coupled pair\n"
          "  stability  perturbation families with gap tables\n"
          "  verify     property suite over the whole engine\n"
          "  check      validate configuration without running numerics\n"
          "\n"
          "common flags: --config FILE, --band LO HI, --horizon T, --steps N,\n"
          "  --out-csv PATH, --out-json PATH, --deterministic\n"
          "config files hold key=value lines; explicit flags win. problem=<name>\n"
          "selects the subcommand when none is given. Set GCALC_THREADS to cap\n"
          "worker threads. Run 'gcalc <subcommand> --help' for the full list.\n";
}

}  // namespace

int main(int argc, char** argv) {
    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        std::string config_path;
        std::vector<std::string> rest;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config") {
                if (i + 1 >= args.size())
                    throw ValidationError("config: --config needs a file path");
                config_path = args[++i];
            } else if (args[i].rfind("--config=", 0) == 0) {
                config_path = args[i].substr(9);
            } else {
                rest.push_back(args[i]);
            }
        }

        ConfigFile cfg;
        if (!config_path.empty()) cfg = load_config(config_path);

        std::string cmd;
        if (!rest.empty() && (rest[0] == "-h" || rest[0] == "--help")) {
            print_usage(std::cout);
            return 0;
        }
        if (!rest.empty() && !rest[0].empty() && rest[0][0] != '-') {
            cmd = rest[0];
            rest.erase(rest.begin());
        } else {
            cmd = cfg.problem;
        }
        if (cmd.empty()) {
            print_usage(std::cerr);
            throw ValidationError("no subcommand given and no problem set in the config");
        }

        std::vector<std::string> tokens = cfg.tokens;  // config first, explicit flags win
        tokens.insert(tokens.end(), rest.begin(), rest.end());

        if (cmd == "expect") return cmd_expect(std::move(tokens));
        if (cmd == "sde") return cmd_sde(std::move(tokens));
        if (cmd == "bsde") return cmd_bsde(std::move(tokens));
        if (cmd == "fbsde") return cmd_fbsde(std::move(tokens));
        if (cmd == "stability") return cmd_stability(std::move(tokens));
        if (cmd == "verify") return cmd_verify(std::move(tokens));
        if (cmd == "check") return cmd_check(std::move(tokens), cfg.problem);
        throw ValidationError("unknown subcommand '" + cmd +
                              "' (expected expect, sde, bsde, fbsde, stability, verify, or "
                              "check)");
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
