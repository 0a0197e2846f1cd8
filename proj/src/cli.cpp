#include "stablesde/cli.hpp"

#include "stablesde/checks.hpp"
#include "stablesde/drift_space.hpp"
#include "stablesde/errors.hpp"
#include "stablesde/io.hpp"
#include "stablesde/kolmogorov_pde.hpp"
#include "stablesde/nonuniqueness_lab.hpp"
#include "stablesde/parallel.hpp"
#include "stablesde/sde_sim.hpp"
#include "stablesde/stable_noise.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#ifndef STABLESDE_VERSION
#define STABLESDE_VERSION "unknown"
#endif

namespace stablesde::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;

constexpr std::uint64_t kDefaultSeed = 20240601;

struct Global {
    std::uint64_t seed = kDefaultSeed;
    std::string out = "out";
    unsigned threads = default_thread_count();
};

/// A path ending in .csv names the output file; anything else is a directory.
struct OutTarget {
    fs::path dir;
    fs::path file;
};

OutTarget resolve_out(const std::string& out, const std::string& default_name) {
    const fs::path p(out);
    if (p.extension() == ".csv") {
        return {p.has_parent_path() ? p.parent_path() : fs::path("."), p};
    }
    return {p, p / default_name};
}

std::string option_value(const CLI::Option* opt) {
    if (opt->count() == 0) {
        return opt->get_default_str();
    }
    std::string joined;
    for (const auto& r : opt->results()) {
        if (!joined.empty()) {
            joined += ",";
        }
        joined += r;
    }
    return joined;
}

/// Every option of the app and the chosen subcommand with its resolved value.
Json manifest(const CLI::App& app, const CLI::App& sub) {
    Json config = Json::object();
    auto collect = [&config](const CLI::App& a) {
        for (const auto* opt : a.get_options()) {
            const auto& name = opt->get_single_name();
            if (name == "help" || name == "config" || name == "version" || name.empty()) {
                continue;
            }
            config[name] = option_value(opt);
        }
    };
    collect(app);
    collect(sub);
    return {{"subcommand", sub.get_name()}, {"version", STABLESDE_VERSION}, {"config", config}};
}

void write_manifest(const fs::path& dir, const CLI::App& app, const CLI::App& sub) {
    io::write_json(dir / "manifest.json", manifest(app, sub));
}

sde::Quadrature parse_quadrature(const std::string& name) {
    if (name == "left") {
        return sde::Quadrature::Left;
    }
    if (name == "midpoint") {
        return sde::Quadrature::Midpoint;
    }
    return sde::Quadrature::ExactPower;
}

// ---------------------------------------------------------------- settings

struct SampleArgs {
    double alpha = 1.5;
    int dim = 1;
    double dt = 0.01;
    std::size_t steps = 100;
    std::size_t paths = 1;
    std::string method = "exact";
    double eps = 0.01;
};

struct HeatArgs {
    double alpha = 1.0;
    int dim = 1;
    std::vector<double> times{0.5, 1.0};
    double rmax = 10.0;
    std::size_t points = 201;
};

struct ClassifyArgs {
    double alpha = 1.5;
    double beta = 0.5;
    double p = 2.0;
    int dim = 1;
    std::string family = "lp-holder-stable";
};

struct NormsArgs {
    std::string drift = "counterexample";
    int dim = 1;
    double halfwidth = 10.0;
    std::size_t points = 201;
    std::size_t panels = 48;
    int mollify_space = 0;
    int mollify_time = 0;
};

struct SdeArgs {
    std::string drift = "sin";
    double alpha = 1.5;
    int dim = 1;
    std::vector<double> x0{0.0};
    std::size_t grid = 100;
    double horizon = 1.0;
    std::string quadrature = "midpoint";
    std::size_t path_index = 0;
    bool frozen = false;
};

struct PdeArgs {
    double alpha = 1.0;
    double lambda = 1.0;
    std::string drift = "zero";
    std::string source = "sin";
    int modes = 64;
    int dim = 1;
    double halfwidth = std::numbers::pi;
    double horizon = 1.0;
    std::size_t steps = 100;
    double tol = 1e-10;
    int max_iters = 200;
    bool backward = false;
};

struct DecayArgs {
    double alpha = 1.5;
    std::string drift = "sin";
    std::string source = "sin";
    std::vector<double> lambdas{2, 4, 8, 16, 32};
    std::string problem = "backward";
    int modes = 64;
    double horizon = 1.0;
    std::size_t steps = 100;
};

struct GapArgs {
    double alpha = 1.5;
    double beta = 0.6;
    double p = 4.0;
    double p_hat = 8.0;
    double theta0 = 1.0;
    double x0 = 0.0;
    std::vector<double> dx{1e-2, 1e-3};
    std::size_t paths = 2000;
    double horizon = 1.0;
    std::size_t steps = 100;
};

struct NonuniqArgs {
    lab::CounterexampleSpec spec;
    double c2 = 0.0;
    double horizon = 0.1;
    std::vector<double> levels{2, 8, 32, 128, 512, 2048};
    std::size_t paths = 20;
    std::string family = "sup-convolution";
    bool compare = true;
};

pde::PdeConfig pde_config(int modes, int dim, double halfwidth, double horizon, std::size_t steps, double lambda) {
    if (steps == 0) {
        throw ParameterError("steps must be positive");
    }
    pde::PdeConfig cfg;
    cfg.n_modes = modes;
    cfg.dim = dim;
    cfg.halfwidth = halfwidth;
    cfg.lambda = lambda;
    cfg.t_grid = noise::uniform_grid(horizon / static_cast<double>(steps), steps);
    return cfg;
}

// ---------------------------------------------------------------- commands

void cmd_sample(const SampleArgs& a, const Global& g) {
    const noise::StableParams params{a.alpha, a.dim};
    const fs::path dir(g.out);
    std::vector<noise::CadlagPath> paths;
    paths.reserve(a.paths);
    for (std::size_t i = 0; i < a.paths; ++i) {
        if (a.method == "levy-ito") {
            paths.push_back(noise::sample_via_levy_ito(params, a.dt, a.steps, a.eps, g.seed, i));
        } else {
            paths.push_back(noise::sample_increments(params, a.dt, a.steps, g.seed, i));
        }
    }
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const std::string stem = "path_" + std::to_string(i);
        io::write_text(dir / (stem + ".csv"), io::path_csv(paths[i]).str());
        io::write_json(dir / (stem + ".json"), io::path_sidecar(params, g.seed, i, paths[i]));
    }
}

void cmd_heat(const HeatArgs& a, const Global& g, std::ostream& out) {
    if (a.points < 2 || !(a.rmax > 0.0)) {
        throw ParameterError("heat-kernel needs points >= 2 and rmax > 0");
    }
    std::vector<double> radii;
    for (std::size_t i = 0; i < a.points; ++i) {
        radii.push_back(a.rmax * static_cast<double>(i) / static_cast<double>(a.points - 1));
    }
    const auto table = noise::build_heat_kernel_table({a.alpha, a.dim}, a.times, radii);
    const fs::path dir(g.out);
    io::write_text(dir / "heat_kernel.csv", io::heat_kernel_csv(table).str());
    Json slices = Json::array();
    for (std::size_t ti = 0; ti < table.t_grid.size(); ++ti) {
        slices.push_back({{"t", io::number(table.t_grid[ti])},
                          {"origin", io::number(table.at(ti, 0))},
                          {"discrete_mass", io::number(table.discrete_mass(ti))}});
    }
    const Json summary{{"alpha", a.alpha}, {"dim", a.dim}, {"slices", slices}};
    io::write_json(dir / "heat_kernel.json", summary);
    out << io::json_text(summary);
}

void cmd_classify(const ClassifyArgs& a, const Global& g, std::ostream& out) {
    const auto family = drift::parse_family(a.family);
    const auto report = drift::classify_criticality(a.alpha, a.beta, a.p, a.dim, family);
    const auto doc = io::criticality_json(report);
    io::write_json(fs::path(g.out) / "classify.json", doc);
    out << io::json_text(doc);
}

void cmd_norms(const NormsArgs& a, const Global& g, std::ostream& out) {
    auto b = drift::make_drift(a.drift, a.dim);
    if (a.mollify_space > 0) {
        b = drift::mollify_space(b, a.mollify_space);
    }
    if (a.mollify_time > 0) {
        b = drift::mollify_time(b, a.mollify_time);
    }
    drift::NormOptions opt;
    opt.halfwidth = a.halfwidth;
    opt.points_per_dim = a.points;
    opt.time_panels = a.panels;
    const auto doc = io::norm_json(drift::lebesgue_holder_norm(b, opt), b.meta());
    io::write_json(fs::path(g.out) / "norms.json", doc);
    out << io::json_text(doc);
}

fs::path cmd_sde(const SdeArgs& a, const Global& g) {
    const auto target = resolve_out(g.out, "trajectory.csv");
    if (a.grid == 0 || !(a.horizon > 0.0)) {
        throw ParameterError("solve-sde needs grid >= 1 and horizon > 0");
    }
    const auto b = drift::make_drift(a.drift, a.dim);
    std::vector<double> x0 = a.x0;
    if (x0.size() == 1 && a.dim > 1) {
        x0.assign(static_cast<std::size_t>(a.dim), x0[0]);
    }
    if (x0.size() != static_cast<std::size_t>(a.dim)) {
        throw ArgumentError("--x0 needs 1 or dim values");
    }
    sde::SolveConfig cfg;
    cfg.t_grid = noise::uniform_grid(a.horizon / static_cast<double>(a.grid), a.grid);
    cfg.quadrature = parse_quadrature(a.quadrature);
    const auto path = noise::sample_on_grid({a.alpha, a.dim}, cfg.t_grid, g.seed, a.path_index);
    const auto traj = a.frozen ? sde::frozen_path_solve(b, path, x0, cfg) : sde::euler_solve(b, path, x0, cfg);
    io::write_text(target.file, io::trajectory_csv(traj).str());
    io::write_text(target.dir / "noise.csv", io::path_csv(path).str());
    return target.dir;
}

fs::path cmd_pde(const PdeArgs& a, const Global& g, std::ostream& out) {
    const auto target = resolve_out(g.out, "solution.csv");
    auto cfg = pde_config(a.modes, a.dim, a.halfwidth, a.horizon, a.steps, a.lambda);
    cfg.picard_tol = a.tol;
    cfg.picard_max_iters = a.max_iters;
    const auto b = drift::make_drift(a.drift, a.dim);
    const auto u = a.backward ? pde::solve_backward_vector(b, cfg, a.alpha)
                              : pde::solve_mild(b, pde::make_source(a.source), cfg, a.alpha);
    io::write_text(target.file, io::grid_function_csv(u).str());
    const Json summary{{"picard_residual", io::number(u.picard_residual)},
                       {"picard_iterations", u.picard_iterations},
                       {"sup_abs_value", io::number(u.sup_abs_value())},
                       {"sup_abs_gradient", io::number(u.sup_abs_gradient())}};
    io::write_json(target.dir / "pde.json", summary);
    out << io::json_text(summary);
    return target.dir;
}

void cmd_decay(const DecayArgs& a, const Global& g, std::ostream& out) {
    const auto cfg = pde_config(a.modes, 1, std::numbers::pi, a.horizon, a.steps, 0.0);
    const auto b = drift::make_drift(a.drift);
    const auto curve = a.problem == "forward"
                           ? pde::gradient_decay_curve(b, pde::make_source(a.source), cfg, a.alpha, a.lambdas)
                           : pde::backward_gradient_decay_curve(b, cfg, a.alpha, a.lambdas);
    const fs::path dir(g.out);
    io::write_text(dir / "decay.csv", io::decay_csv(curve).str());
    const auto doc = io::decay_json(curve);
    io::write_json(dir / "decay.json", doc);
    out << io::json_text(doc);
}

void cmd_gap(const GapArgs& a, const Global& g, std::ostream& out) {
    if (a.steps == 0) {
        throw ParameterError("steps must be positive");
    }
    const auto b = drift::time_singular_drift(a.p_hat, a.beta, a.theta0, a.p, a.horizon);
    const auto report = drift::classify_criticality(a.alpha, a.beta, a.p, 1, drift::SpaceFamily::LpHolderStable);
    sde::SolveConfig cfg;
    cfg.t_grid = noise::uniform_grid(a.horizon / static_cast<double>(a.steps), a.steps);
    const noise::StableParams params{a.alpha, 1};
    io::CsvTable table({"dx", "mean", "standard_error", "ratio", "ratio_se", "n_paths"});
    Json rows = Json::array();
    std::vector<double> dxs = a.dx;
    dxs.push_back(0.0);
    for (double dx : dxs) {
        const double y = a.x0 + dx;
        const auto stat = sde::pathwise_gap_statistic(b, params, std::span(&a.x0, 1), std::span(&y, 1), a.paths, cfg,
                                                      g.seed, g.threads);
        const double nan = std::nan("");
        table.add_row({dx, stat.mean, stat.standard_error, stat.ratio.value_or(nan), stat.ratio_se.value_or(nan),
                       static_cast<std::int64_t>(stat.n_paths)});
        Json row = io::gap_json(stat);
        row["dx"] = dx;
        rows.push_back(row);
    }
    const fs::path dir(g.out);
    io::write_text(dir / "gap.csv", table.str());
    const Json doc{{"criticality", io::criticality_json(report)}, {"rows", rows}};
    io::write_json(dir / "gap.json", doc);
    out << io::json_text(doc);
}

void cmd_nonuniq(NonuniqArgs a, const Global& g, std::ostream& out) {
    if (a.c2 > 0.0) {
        a.spec.c2 = a.c2;
    }
    lab::LabConfig cfg;
    cfg.horizon = a.horizon;
    cfg.extremal.levels = a.levels;
    cfg.extremal.family =
        a.family == "shifted-clip" ? lab::ApproximationFamily::ShiftedClip : lab::ApproximationFamily::SupConvolution;
    cfg.compare_families = a.compare;
    const auto run = lab::run_nonuniqueness(a.spec, cfg, a.paths, g.seed, g.threads);
    const fs::path dir(g.out);
    for (const auto& v : run.paths) {
        io::write_json(dir / ("path_" + std::to_string(v.path_id) + ".json"), io::verdict_json(v));
    }
    io::write_text(dir / "summary.csv", io::lab_summary_csv(run).str());
    const Json doc{{"delta", io::number(a.spec.delta())},
                   {"C2", io::number(a.spec.c2_value(a.horizon))},
                   {"grid_points", run.t_grid.size()},
                   {"paths", a.paths},
                   {"passed_filter", run.passed_filter},
                   {"nonunique", run.nonunique},
                   {"max_family_difference", io::number(run.max_family_difference)},
                   {"max_family_difference_full", io::number(run.max_family_difference_full)}};
    io::write_json(dir / "nonuniq.json", doc);
    out << io::json_text(doc);
}

int cmd_selftest(const Global& g, std::ostream& out) {
    checks::SuiteOptions opt;
    opt.seed = g.seed;
    opt.threads = g.threads;
    const auto results = checks::run_selftest(g.out, opt, [&out](const checks::CheckResult& r, double) {
        out << (r.passed ? "PASS " : "FAIL ") << r.id << " " << r.name << ": " << r.summary << std::endl;
    });
    bool ok = true;
    for (const auto& r : results) {
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation and verification toolkit for SDEs driven by rotationally invariant alpha-stable noise",
                 "stablesde"};
    app.option_defaults()->always_capture_default();
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML config file; [subcommand] sections, flags override it");
    app.set_version_flag("--version", STABLESDE_VERSION);

    Global g;
    if (const char* env = std::getenv("STABLE_SDE_SEED")) {
        try {
            g.seed = std::stoull(env);
        } catch (const std::exception&) {
            err << "STABLE_SDE_SEED must be a non-negative integer, got '" << env << "'\n";
            return 2;
        }
    }
    app.add_option("--seed", g.seed, "Random seed (default from STABLE_SDE_SEED when set)");
    app.add_option("--out", g.out, "Output directory (a .csv path for solve-sde/solve-pde)");
    app.add_option("--threads", g.threads, "Worker threads for ensembles")->check(CLI::PositiveNumber);

    const auto positive = CLI::PositiveNumber;

    SampleArgs sample;
    auto* s_sample = app.add_subcommand("sample", "Sample alpha-stable paths (CSV + JSON sidecar per path)");
    s_sample->add_option("--alpha", sample.alpha, "Stability index in (0, 2)");
    s_sample->add_option("--dim", sample.dim, "Dimension");
    s_sample->add_option("--dt", sample.dt, "Time step")->check(positive);
    s_sample->add_option("--steps", sample.steps, "Number of steps");
    s_sample->add_option("--paths", sample.paths, "Number of paths")->check(positive);
    s_sample->add_option("--method", sample.method, "exact or levy-ito")
        ->check(CLI::IsMember({"exact", "levy-ito"}));
    s_sample->add_option("--eps", sample.eps, "Jump cutoff for levy-ito")->check(positive);

    HeatArgs heat;
    auto* s_heat = app.add_subcommand("heat-kernel", "Tabulate the transition density K(t, r)");
    s_heat->add_option("--alpha", heat.alpha, "Stability index in (0, 2)");
    s_heat->add_option("--dim", heat.dim, "Dimension");
    s_heat->add_option("--times", heat.times, "Times, comma separated")->delimiter(',');
    s_heat->add_option("--rmax", heat.rmax, "Largest radius");
    s_heat->add_option("--points", heat.points, "Radial points");

    ClassifyArgs classify;
    auto* s_classify = app.add_subcommand("classify", "Classify a drift space as sub-, critical or supercritical");
    s_classify->add_option("--alpha", classify.alpha, "Stability index");
    s_classify->add_option("--beta", classify.beta, "Holder or Besov index (q for lq-lp-brownian)");
    s_classify->add_option("--p", classify.p, "Time integrability");
    s_classify->add_option("--dim", classify.dim, "Dimension");
    s_classify->add_option("--family", classify.family,
                           "lq-lp-brownian, lp-holder-brownian, linf-besov-stable or lp-holder-stable");

    NormsArgs norms;
    auto* s_norms = app.add_subcommand("norms", "Grid estimate of the Lebesgue-Holder norm of a drift");
    s_norms->add_option("--drift", norms.drift, "Drift id");
    s_norms->add_option("--dim", norms.dim, "Dimension");
    s_norms->add_option("--halfwidth", norms.halfwidth, "Spatial window [-R, R]^d");
    s_norms->add_option("--points", norms.points, "Points per dimension");
    s_norms->add_option("--panels", norms.panels, "Time panels");
    s_norms->add_option("--mollify-space", norms.mollify_space, "Mollify in space at level n (0 = off)");
    s_norms->add_option("--mollify-time", norms.mollify_time, "Mollify in time at level n (0 = off)");

    SdeArgs sdea;
    auto* s_sde = app.add_subcommand("solve-sde", "Euler solve along a sampled path");
    s_sde->add_option("--drift", sdea.drift, "Drift id");
    s_sde->add_option("--alpha", sdea.alpha, "Stability index");
    s_sde->add_option("--dim", sdea.dim, "Dimension");
    s_sde->add_option("--x0", sdea.x0, "Initial state, comma separated")->delimiter(',');
    s_sde->add_option("--grid", sdea.grid, "Number of uniform steps");
    s_sde->add_option("--horizon", sdea.horizon, "Final time");
    s_sde->add_option("--quadrature", sdea.quadrature, "left, midpoint or exact-power")
        ->check(CLI::IsMember({"left", "midpoint", "exact-power"}));
    s_sde->add_option("--path-index", sdea.path_index, "Noise stream index");
    s_sde->add_flag("--frozen", sdea.frozen, "Solve the frozen-path equation for phi = X - L");

    PdeArgs pdea;
    auto* s_pde = app.add_subcommand("solve-pde", "Mild solution of the fractional Kolmogorov equation");
    s_pde->add_option("--alpha", pdea.alpha, "Stability index");
    s_pde->add_option("--lambda", pdea.lambda, "Damping lambda");
    s_pde->add_option("--drift", pdea.drift, "Drift id");
    s_pde->add_option("--source", pdea.source, "Source id (zero, constant:c, sin, cos, exp-sin, sin-power:b)");
    s_pde->add_option("--modes", pdea.modes, "Grid points per dimension (power of two)");
    s_pde->add_option("--dim", pdea.dim, "Dimension (1 or 2)");
    s_pde->add_option("--halfwidth", pdea.halfwidth, "Periodic cell [-R, R)^d");
    s_pde->add_option("--horizon", pdea.horizon, "Final time");
    s_pde->add_option("--steps", pdea.steps, "Time steps");
    s_pde->add_option("--tol", pdea.tol, "Picard tolerance");
    s_pde->add_option("--max-iters", pdea.max_iters, "Picard iteration cap");
    s_pde->add_flag("--backward", pdea.backward, "Solve the backward vector problem with source -b");

    DecayArgs decay;
    auto* s_decay = app.add_subcommand("grad-decay", "sup|grad u| as a function of lambda");
    s_decay->add_option("--alpha", decay.alpha, "Stability index");
    s_decay->add_option("--drift", decay.drift, "Drift id");
    s_decay->add_option("--source", decay.source, "Source id (forward problem)");
    s_decay->add_option("--lambdas", decay.lambdas, "Increasing lambdas, comma separated")->delimiter(',');
    s_decay->add_option("--problem", decay.problem, "backward or forward")
        ->check(CLI::IsMember({"backward", "forward"}));
    s_decay->add_option("--modes", decay.modes, "Grid points");
    s_decay->add_option("--horizon", decay.horizon, "Final time");
    s_decay->add_option("--steps", decay.steps, "Time steps");

    GapArgs gap;
    auto* s_gap = app.add_subcommand("gap-stat", "E sup|X(x) - X(y)|^2 on coupled paths");
    s_gap->add_option("--alpha", gap.alpha, "Stability index");
    s_gap->add_option("--beta", gap.beta, "Holder index of the drift profile");
    s_gap->add_option("--p", gap.p, "Declared time integrability");
    s_gap->add_option("--p-hat", gap.p_hat, "Time singularity t^{-1/p_hat} (must exceed p)");
    s_gap->add_option("--theta0", gap.theta0, "Profile cutoff");
    s_gap->add_option("--x0", gap.x0, "Start of the first solution");
    s_gap->add_option("--dx", gap.dx, "Offsets y - x, comma separated")->delimiter(',');
    s_gap->add_option("--paths", gap.paths, "Coupled paths")->check(positive);
    s_gap->add_option("--horizon", gap.horizon, "Final time");
    s_gap->add_option("--steps", gap.steps, "Time steps");

    NonuniqArgs nonuniq;
    auto* s_nonuniq = app.add_subcommand("nonuniq", "Extremal solutions and envelope verdicts per sampled path");
    s_nonuniq->add_option("--alpha", nonuniq.spec.alpha, "Stability index");
    s_nonuniq->add_option("--beta", nonuniq.spec.beta, "Profile exponent");
    s_nonuniq->add_option("--p", nonuniq.spec.p, "Declared time integrability");
    s_nonuniq->add_option("--p-hat", nonuniq.spec.p_hat, "Time singularity t^{-1/p_hat}");
    s_nonuniq->add_option("--theta0", nonuniq.spec.theta0, "Profile cutoff");
    s_nonuniq->add_option("--c0", nonuniq.spec.c0, "Noise bound |L_t| <= C0 t^delta");
    s_nonuniq->add_option("--c1", nonuniq.spec.c1, "Envelope C1 t^delta");
    s_nonuniq->add_option("--c2", nonuniq.c2, "Window end C2 (0 = largest admissible)");
    s_nonuniq->add_option("--horizon", nonuniq.horizon, "Final time");
    s_nonuniq->add_option("--levels", nonuniq.levels, "Increasing Lipschitz levels, comma separated")
        ->delimiter(',');
    s_nonuniq->add_option("--paths", nonuniq.paths, "Sampled paths")->check(positive);
    s_nonuniq->add_option("--family", nonuniq.family, "sup-convolution or shifted-clip")
        ->check(CLI::IsMember({"sup-convolution", "shifted-clip"}));
    s_nonuniq->add_option("--compare", nonuniq.compare, "Also run the other from-above family");

    auto* s_selftest = app.add_subcommand("selftest", "Run the property suite and write its artifacts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    try {
        fs::path manifest_dir(g.out);
        if (chosen == s_sample) {
            cmd_sample(sample, g);
        } else if (chosen == s_heat) {
            cmd_heat(heat, g, out);
        } else if (chosen == s_classify) {
            cmd_classify(classify, g, out);
        } else if (chosen == s_norms) {
            cmd_norms(norms, g, out);
        } else if (chosen == s_sde) {
            manifest_dir = cmd_sde(sdea, g);
        } else if (chosen == s_pde) {
            manifest_dir = cmd_pde(pdea, g, out);
        } else if (chosen == s_decay) {
            cmd_decay(decay, g, out);
        } else if (chosen == s_gap) {
            cmd_gap(gap, g, out);
        } else if (chosen == s_nonuniq) {
            cmd_nonuniq(nonuniq, g, out);
        } else if (chosen == s_selftest) {
            write_manifest(manifest_dir, app, *chosen);
            return cmd_selftest(g, out);
        }
        write_manifest(manifest_dir, app, *chosen);
    } catch (const ArgumentError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace stablesde::cli
