#include "stablesde/checks.hpp"

#include "stablesde/drift_space.hpp"
#include "stablesde/errors.hpp"
#include "stablesde/io.hpp"
#include "stablesde/kolmogorov_pde.hpp"
#include "stablesde/nonuniqueness_lab.hpp"
#include "stablesde/parallel.hpp"
#include "stablesde/sde_sim.hpp"
#include "stablesde/stable_noise.hpp"


#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

namespace stablesde::checks {

namespace {

using io::Json;
using io::number;

std::string fmt(double v, int precision = 3) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

CheckResult make_result(int id, std::string name) {
    CheckResult r;
    r.id = id;
    r.name = std::move(name);
    r.details = Json::object();
    return r;
}

pde::PdeConfig pde_config(double lambda, std::size_t steps, double horizon = 1.0, int modes = 64) {
    pde::PdeConfig cfg;
    cfg.n_modes = modes;
    cfg.lambda = lambda;
    cfg.t_grid = noise::uniform_grid(horizon / static_cast<double>(steps), steps);
    cfg.picard_tol = 1e-12;
    return cfg;
}

double sin_mode(double t, double lambda) { return (1.0 - std::exp(-(1.0 + lambda) * t)) / (1.0 + lambda); }

} // namespace

// ---------------------------------------------------------------- 1

CheckResult stable_law(const SuiteOptions& options) {
    auto r = make_result(1, "stable_law");
    constexpr std::size_t n_paths = 100000;
    constexpr double kappa = 4.0;
    const double xis[] = {0.5, 1.0, 2.0};
    const std::vector<double> unit_grid{0.0, 1.0};
    const std::vector<double> long_grid{0.0, kappa};
    double worst_exact = 0.0;
    double worst_scaling = 0.0;
    Json rows = Json::array();
    std::uint64_t offset = 0;
    for (double alpha : {0.5, 1.0, 1.5}) {
        const noise::StableParams params{alpha, 1};
        const auto unit = noise::sample_ensemble(params, unit_grid, n_paths, options.seed + offset, options.threads);
        const auto longer =
            noise::sample_ensemble(params, long_grid, n_paths, options.seed + offset + 1, options.threads);
        offset += 2;
        for (double xi : xis) {
            const double exact = std::exp(-std::pow(std::abs(xi), alpha));
            const auto e1 = noise::empirical_char_function(unit, 1.0, std::span(&xi, 1));
            // L_{kappa} at xi kappa^{-1/alpha} has the law of L_1 at xi.
            const double scaled_xi = xi * std::pow(kappa, -1.0 / alpha);
            const auto e4 = noise::empirical_char_function(longer, kappa, std::span(&scaled_xi, 1));
            const double z_re = std::abs(e1.value.real() - exact) / e1.se_real;
            const double z_im = std::abs(e1.value.imag()) / e1.se_imag;
            const double z_scale_re = std::abs(e4.value.real() - e1.value.real()) /
                                      std::hypot(e1.se_real, e4.se_real);
            const double z_scale_im = std::abs(e4.value.imag() - e1.value.imag()) /
                                      std::hypot(e1.se_imag, e4.se_imag);
            worst_exact = std::max({worst_exact, z_re, z_im});
            worst_scaling = std::max({worst_scaling, z_scale_re, z_scale_im});
            rows.push_back({{"alpha", alpha},
                            {"xi", xi},
                            {"exact", number(exact)},
                            {"ecf_real", number(e1.value.real())},
                            {"ecf_imag", number(e1.value.imag())},
                            {"se_real", number(e1.se_real)},
                            {"se_imag", number(e1.se_imag)},
                            {"scaled_ecf_real", number(e4.value.real())},
                            {"scaled_ecf_imag", number(e4.value.imag())},
                            {"z_exact", number(std::max(z_re, z_im))},
                            {"z_scaling", number(std::max(z_scale_re, z_scale_im))}});
        }
    }
    r.passed = worst_exact <= 3.0 && worst_scaling <= 3.0;
    r.details = {{"paths", n_paths}, {"kappa", kappa}, {"rows", rows},
                 {"max_z_exact", number(worst_exact)}, {"max_z_scaling", number(worst_scaling)}};
    r.summary = "max |z| vs exp(-|xi|^alpha) = " + fmt(worst_exact) + ", scaling (kappa = 4) max |z| = " +
                fmt(worst_scaling) + " (limit 3)";
    return r;
}

// ---------------------------------------------------------------- 2

CheckResult heat_kernel(const SuiteOptions&) {
    auto r = make_result(2, "heat_kernel");
    const double pi = std::numbers::pi;
    double cauchy_err = 0.0;
    std::size_t probes = 0;
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
        for (double x : {0.0, 0.3, 1.0, 3.0, 10.0}) {
            const double exact = t / (pi * (t * t + x * x));
            cauchy_err = std::max(cauchy_err, std::abs(noise::heat_kernel({1.0, 1}, t, std::span(&x, 1)) - exact));
            ++probes;
        }
    }
    double mass_err = 0.0;
    double similarity_err = 0.0;
    Json bounds = Json::array();
    bool bounds_ok = true;
    std::vector<double> t_coarse, t_fine, r_coarse, r_fine;
    for (int i = 0; i <= 8; ++i) {
        t_coarse.push_back(std::pow(10.0, -2.0 + 0.5 * i));
    }
    for (int i = 0; i <= 16; ++i) {
        t_fine.push_back(std::pow(10.0, -2.0 + 0.25 * i));
    }
    for (int i = 0; i <= 20; ++i) {
        r_coarse.push_back(i == 0 ? 0.0 : std::pow(10.0, -2.0 + 0.2 * i));
    }
    for (int i = 0; i <= 40; ++i) {
        r_fine.push_back(i == 0 ? 0.0 : std::pow(10.0, -2.0 + 0.1 * i));
    }
    for (double alpha : {0.5, 1.0, 1.5}) {
        const noise::StableParams params{alpha, 1};
        mass_err = std::max(mass_err, std::abs(noise::heat_kernel_mass(params, 1.0, 200.0) - 1.0));
        for (double t : {0.25, 4.0}) {
            for (double x : {0.0, 0.3, 2.0, 15.0}) {
                const double lhs = noise::heat_kernel_radial(params, t, x);
                const double rhs =
                    std::pow(t, -1.0 / alpha) * noise::heat_kernel_radial(params, 1.0, std::pow(t, -1.0 / alpha) * x);
                similarity_err = std::max(similarity_err, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
            }
        }
        const double c1 = noise::fit_heat_kernel_bound(params, t_coarse, r_coarse);
        const double c2 = noise::fit_heat_kernel_bound(params, t_fine, r_fine);
        const bool ok = std::isfinite(c1) && std::isfinite(c2) && c1 > 0.0 && c2 / c1 < 2.0 && c2 / c1 > 0.5;
        bounds_ok = bounds_ok && ok;
        bounds.push_back({{"alpha", alpha}, {"constant_coarse", number(c1)}, {"constant_fine", number(c2)}});
    }
    r.passed = cauchy_err < 1e-6 && mass_err < 1e-6 && similarity_err < 1e-6 && bounds_ok;
    r.details = {{"cauchy_probes", probes},       {"cauchy_max_error", number(cauchy_err)},
                 {"mass_max_error", number(mass_err)}, {"self_similarity_max_error", number(similarity_err)},
                 {"bound_constants", bounds}};
    r.summary = "Cauchy error " + fmt(cauchy_err) + " at " + std::to_string(probes) + " probes, mass error " +
                fmt(mass_err) + ", self-similarity error " + fmt(similarity_err) + ", bound constant " +
                (bounds_ok ? "stable" : "unstable") + " under grid doubling";
    return r;
}

// ---------------------------------------------------------------- 3

CheckResult criticality_sweep(const SuiteOptions&) {
    auto r = make_result(3, "criticality_sweep");
    // Grid values as integer numerators: alpha = A/50, beta = B/100, q = Q/10, p = P/10.
    // The oracle clears denominators so each exponent's sign is that of an integer.
    constexpr int n = 50;
    const drift::SpaceFamily families[] = {drift::SpaceFamily::LqLpBrownian, drift::SpaceFamily::LpHolderBrownian,
                                           drift::SpaceFamily::LinfBesovStable, drift::SpaceFamily::LpHolderStable};
    std::size_t mismatches = 0;
    std::size_t evaluated = 0;
    Json per_family = Json::object();
    Json examples = Json::array();
    for (auto family : families) {
        std::size_t counts[3] = {0, 0, 0};
        std::size_t rejected = 0;
        const bool time_family = family == drift::SpaceFamily::LqLpBrownian;
        for (int i = 0; i < n; ++i) {
            const std::int64_t A = 2 * i + 1;
            const double alpha = static_cast<double>(A) / 50.0;
            for (int j = 0; j < n; ++j) {
                const std::int64_t B = 2 * j + 1;
                const std::int64_t Q = 20 + j;
                const double second = time_family ? static_cast<double>(Q) / 10.0 : static_cast<double>(B) / 100.0;
                for (int k = 0; k < n; ++k) {
                    const std::int64_t P = 10 + k;
                    const double p = static_cast<double>(P) / 10.0;
                    ++evaluated;
                    bool admissible = true;
                    std::int64_t exponent = 0; // positive multiple of the scaling exponent
                    switch (family) {
                    case drift::SpaceFamily::LqLpBrownian: // 1/2 - 1/(2p) - 1/q, times 2PQ
                        admissible = P >= 20 && Q >= 20;
                        exponent = P * Q - 10 * Q - 20 * P;
                        break;
                    case drift::SpaceFamily::LpHolderBrownian: // 1/2 - 1/p + beta/2, times 200P
                        exponent = 100 * P - 2000 + B * P;
                        break;
                    case drift::SpaceFamily::LinfBesovStable: // 1 - 1/a - 1/(pa) + beta/a, times 2PA
                        admissible = P > 10 && 2 * A + B > 100;
                        exponent = 2 * P * A - 100 * P - 1000 + B * P;
                        break;
                    case drift::SpaceFamily::LpHolderStable: // 1 - 1/a - 1/p + beta/a, times 2PA
                        admissible = 2 * A + B > 100;
                        exponent = 2 * A * P - 100 * P - 20 * A + B * P;
                        break;
                    }
                    const auto expected = exponent > 0   ? drift::Regime::Subcritical
                                          : exponent < 0 ? drift::Regime::Supercritical
                                                         : drift::Regime::Critical;
                    bool ok = false;
                    std::string got;
                    try {
                        const auto report = drift::classify_criticality(
                            alpha, second, p, 1, family);
                        ok = admissible && report.regime == expected &&
                             (report.scaling_exponent > 0) == (exponent > 0) &&
                             (report.scaling_exponent < 0) == (exponent < 0);
                        got = drift::to_string(report.regime);
                        if (ok) {
                            ++counts[static_cast<int>(expected)];
                        }
                    } catch (const DomainError&) {
                        ok = !admissible;
                        got = "rejected";
                        rejected += ok ? 1 : 0;
                    }
                    if (!ok) {
                        ++mismatches;
                        if (examples.size() < 20) {
                            examples.push_back({{"family", drift::to_string(family)},
                                                {"alpha", alpha},
                                                {"beta_or_q", second},
                                                {"p", p},
                                                {"expected", admissible ? drift::to_string(expected) : "rejected"},
                                                {"got", got}});
                        }
                    }
                }
            }
        }
        per_family[drift::to_string(family)] = {{"subcritical", counts[static_cast<int>(drift::Regime::Subcritical)]},
                                               {"critical", counts[static_cast<int>(drift::Regime::Critical)]},
                                               {"supercritical",
                                                counts[static_cast<int>(drift::Regime::Supercritical)]},
                                               {"rejected", rejected}};
    }
    r.passed = mismatches == 0;
    r.details = {{"evaluated", evaluated}, {"mismatches", mismatches}, {"families", per_family},
                 {"mismatch_examples", examples}};
    r.summary = std::to_string(mismatches) + " mismatches over " + std::to_string(evaluated) +
                " (alpha, beta or q, p) points in four families";
    return r;
}

// ---------------------------------------------------------------- 4

CheckResult kolmogorov_solver(const SuiteOptions& options) {
    auto r = make_result(4, "kolmogorov_solver");
    const auto zero = drift::make_drift("zero");

    const double c = 0.7, lambda_c = 1.5;
    const auto uc = pde::solve_mild(zero, pde::make_source("constant:0.7"), pde_config(lambda_c, 20), 1.0);
    double constant_err = 0.0;
    for (std::size_t i = 0; i < uc.times.size(); ++i) {
        const double exact = c * (1.0 - std::exp(-lambda_c * uc.times[i])) / lambda_c;
        for (double v : uc.slice(i)) {
            constant_err = std::max(constant_err, std::abs(v - exact));
        }
    }

    double sin_err = 0.0;
    for (double alpha : {0.5, 1.0, 1.5}) {
        const auto u = pde::solve_mild(zero, pde::make_source("sin"), pde_config(1.0, 50), alpha);
        for (std::size_t i = 0; i < u.times.size(); ++i) {
            const double shape = sin_mode(u.times[i], 1.0);
            const auto slice = u.slice(i);
            for (std::size_t j = 0; j < slice.size(); ++j) {
                sin_err = std::max(sin_err, std::abs(slice[j] - shape * std::sin(u.x[j])));
            }
        }
    }

    const double alpha_fk = 1.5, lambda_fk = 1.0;
    const auto f = pde::make_source("exp-sin");
    const auto ufk = pde::solve_mild(zero, f, pde_config(lambda_fk, 50), alpha_fk);
    double worst_z = 0.0;
    Json probes = Json::array();
    for (std::size_t j : {0U, 13U, 29U, 40U, 57U}) {
        const double x = ufk.x[j];
        const auto est = pde::feynman_kac_oracle(f, lambda_fk, alpha_fk, 1.0, std::span(&x, 1), 4000,
                                                 options.seed + 100 + j, options.threads);
        const double solver = ufk.slice(ufk.times.size() - 1)[j];
        const double z = std::abs(est.value - solver) / est.standard_error;
        worst_z = std::max(worst_z, z);
        probes.push_back({{"x", number(x)},
                          {"solver", number(solver)},
                          {"monte_carlo", number(est.value)},
                          {"standard_error", number(est.standard_error)},
                          {"z", number(z)}});
    }

    auto cfg = pde_config(1.0, 50);
    cfg.picard_tol = 1e-10;
    const auto coupled = pde::solve_mild(drift::make_drift("sin"), pde::make_source("sin"), cfg, 1.5);

    r.passed = constant_err < 1e-8 && sin_err < 1e-6 && worst_z <= 3.0 && coupled.picard_residual < 1e-8;
    r.details = {{"constant_max_error", number(constant_err)},
                 {"sin_mode_max_error", number(sin_err)},
                 {"feynman_kac", probes},
                 {"feynman_kac_max_z", number(worst_z)},
                 {"picard_residual", number(coupled.picard_residual)},
                 {"picard_iterations", coupled.picard_iterations}};
    r.summary = "constant error " + fmt(constant_err) + ", sin-mode error " + fmt(sin_err) +
                ", Feynman-Kac max |z| = " + fmt(worst_z) + ", Picard residual " + fmt(coupled.picard_residual);
    return r;
}

// ---------------------------------------------------------------- 5

CheckResult gradient_decay(const SuiteOptions&) {
    auto r = make_result(5, "gradient_decay");
    const double lambdas[] = {2.0, 4.0, 8.0, 16.0, 32.0};
    const double alpha = 1.5;
    const auto b = drift::make_drift("sin");
    const auto cfg = pde_config(0.0, 100);
    const auto curve = pde::backward_gradient_decay_curve(b, cfg, alpha, lambdas);
    bool below_half = false;
    for (const auto& row : curve.rows) {
        below_half = below_half || (row.sup_gradient && *row.sup_gradient < 0.5);
    }
    Json threshold = nullptr;
    try {
        const auto th = pde::backward_gradient_threshold(b, cfg, alpha, 0.5, 0.0, 32.0);
        threshold = {{"lambda", number(th.lambda)},
                     {"sup_gradient", number(th.sup_gradient)},
                     {"bisection_steps", th.bisection_steps}};
    } catch (const Error& e) {
        threshold = {{"error", e.what()}};
    }
    const bool negative = curve.slope && *curve.slope < 0.0;
    r.passed = curve.strictly_decreasing && negative && below_half;
    r.details = {{"alpha", alpha}, {"curve", io::decay_json(curve)}, {"half_threshold", threshold}};
    r.summary = std::string(curve.strictly_decreasing ? "strictly decreasing" : "not strictly decreasing") +
                ", slope " + (curve.slope ? fmt(*curve.slope) : std::string("undefined")) + ", sup|grad U| < 1/2 " +
                (below_half ? "reached" : "not reached");
    return r;
}

// ---------------------------------------------------------------- 6

CheckResult pathwise_gap(const SuiteOptions& options) {
    auto r = make_result(6, "pathwise_gap");
    const double alpha = 1.5, beta = 0.6, p = 4.0, p_hat = 8.0;
    const auto b = drift::time_singular_drift(p_hat, beta, 1.0, p);
    const auto regime = drift::classify_criticality(alpha, beta, p, 1, drift::SpaceFamily::LpHolderStable);
    constexpr std::size_t n_paths = 2000;
    sde::SolveConfig cfg;
    cfg.t_grid = noise::uniform_grid(0.01, 100);
    const noise::StableParams params{alpha, 1};
    const double x = 0.0;
    Json rows = Json::array();
    std::vector<double> ratios;
    for (double dx : {1e-2, 1e-3}) {
        const double y = x + dx;
        const auto stat = sde::pathwise_gap_statistic(b, params, std::span(&x, 1), std::span(&y, 1), n_paths, cfg,
                                                      options.seed + 200, options.threads);
        ratios.push_back(stat.ratio.value_or(std::nan("")));
        Json row = io::gap_json(stat);
        row["dx"] = dx;
        rows.push_back(row);
    }
    const auto same = sde::pathwise_gap_statistic(b, params, std::span(&x, 1), std::span(&x, 1), n_paths, cfg,
                                                  options.seed + 200, options.threads);
    const double factor = std::max(ratios[0], ratios[1]) / std::min(ratios[0], ratios[1]);
    r.passed = regime.regime == drift::Regime::Subcritical && factor < 10.0 && same.mean == 0.0;
    r.details = {{"alpha", alpha},
                 {"beta", beta},
                 {"p", p},
                 {"p_hat", p_hat},
                 {"regime", drift::to_string(regime.regime)},
                 {"rows", rows},
                 {"ratio_factor", number(factor)},
                 {"same_start_mean", number(same.mean)}};
    r.summary = "ratio " + fmt(ratios[0]) + " (dx 1e-2) vs " + fmt(ratios[1]) + " (dx 1e-3), factor " + fmt(factor) +
                ", x = y gives " + fmt(same.mean);
    return r;
}

// ---------------------------------------------------------------- 7

CheckResult nonuniqueness(const SuiteOptions& options) {
    auto r = make_result(7, "nonuniqueness");
    const lab::CounterexampleSpec spec;

    // Zero noise on [0, 1].
    const auto b1 = lab::build_counterexample(spec, 1.0);
    lab::ExtremalOptions extremal;
    const auto grid1 = lab::extremal_grid(b1, 1.0, extremal.levels.back());
    sde::SolveConfig cfg1;
    cfg1.t_grid = grid1;
    cfg1.quadrature = sde::Quadrature::ExactPower;
    const auto still = noise::CadlagPath::zero(grid1);
    const auto pair = lab::extremal_solutions(b1, still, cfg1, extremal);
    double closed_err = 0.0;
    Json closed = Json::array();
    for (double t : {0.05, 0.1, 0.5}) {
        const auto k = static_cast<std::size_t>(std::lower_bound(grid1.begin(), grid1.end(), t) - grid1.begin());
        const double exact = lab::zero_noise_extremal(spec, grid1[k]);
        const double rel = std::abs(pair.x_max.scalar(k) / exact - 1.0);
        closed_err = std::max(closed_err, rel);
        closed.push_back({{"t", number(grid1[k])}, {"x_max", number(pair.x_max.scalar(k))},
                          {"closed_form", number(exact)}, {"relative_error", number(rel)}});
    }
    bool antisymmetric = true;
    for (std::size_t k = 0; k < pair.x_max.size(); ++k) {
        antisymmetric = antisymmetric && pair.x_min.scalar(k) == -pair.x_max.scalar(k);
    }
    auto alt_opt = extremal;
    alt_opt.family = lab::ApproximationFamily::ShiftedClip;
    alt_opt.compute_min = false;
    const auto alt = lab::extremal_solutions(b1, still, cfg1, alt_opt);
    double zero_noise_family = 0.0;
    for (std::size_t k = 0; k < alt.x_max.size(); ++k) {
        zero_noise_family = std::max(zero_noise_family, std::abs(alt.x_max.scalar(k) - pair.x_max.scalar(k)));
    }

    // Sampled paths on horizon 0.1.
    lab::LabConfig lab_cfg;
    lab_cfg.horizon = 0.1;
    constexpr std::size_t candidates = 120;
    const auto run = lab::run_nonuniqueness(spec, lab_cfg, candidates, options.seed + 300, options.threads);
    std::size_t errors = 0;
    std::size_t over_full = 0;
    for (const auto& v : run.paths) {
        errors += v.error.empty() ? 0 : 1;
        over_full += v.family_difference_full && *v.family_difference_full > 1e-3 ? 1 : 0;
    }
    const bool envelopes = run.passed_filter >= 100 && run.nonunique == run.passed_filter && errors == 0;
    const bool families = run.max_family_difference_full <= 1e-3 && zero_noise_family <= 1e-3;

    r.passed = closed_err < 0.01 && antisymmetric && envelopes && families;
    r.details = {{"zero_noise_closed_form", closed},
                 {"zero_noise_max_relative_error", number(closed_err)},
                 {"zero_noise_antisymmetric", antisymmetric},
                 {"zero_noise_family_difference", number(zero_noise_family)},
                 {"levels", extremal.levels},
                 {"horizon", lab_cfg.horizon},
                 {"grid_points", run.t_grid.size()},
                 {"candidates", candidates},
                 {"passed_filter", run.passed_filter},
                 {"nonunique", run.nonunique},
                 {"errors", errors},
                 {"family_difference_window_max", number(run.max_family_difference)},
                 {"family_difference_full_max", number(run.max_family_difference_full)},
                 {"paths_over_1e-3_full", over_full}};
    Json paths = Json::array();
    for (const auto& v : run.paths) {
        paths.push_back(io::verdict_json(v));
    }
    r.details["paths"] = paths;
    r.summary = "zero-noise error " + fmt(closed_err * 100.0) + "%, " + std::to_string(run.nonunique) + "/" +
                std::to_string(run.passed_filter) + " filtered paths separate (" + std::to_string(candidates) +
                " sampled), family difference " + fmt(run.max_family_difference) + " on (0, min(T0, C2)], " +
                fmt(run.max_family_difference_full) + " over [0, 0.1] (" + std::to_string(over_full) +
                " paths above 1e-3), zero noise " + fmt(zero_noise_family);
    return r;
}

// ---------------------------------------------------------------- 8

CheckResult mollifier_laws(const SuiteOptions& options) {
    auto r = make_result(8, "mollifier_laws");
    const std::vector<drift::DriftField> bank{
        drift::make_drift("sin"),
        drift::make_drift("constant:1.5"),
        drift::make_drift("linear:0.7"),
        drift::make_drift("counterexample"),
        drift::time_singular_drift(8.0, 0.6, 1.0, 4.0),
        drift::make_drift("time-singular:4,0.3,2"),
    };
    const double slack = 1.0 + 1e-12;
    std::size_t comparisons = 0;
    std::size_t violations = 0;
    Json rows = Json::array();
    std::vector<double> xs;
    for (int i = 0; i <= 2000; ++i) {
        xs.push_back(-10.0 + 0.01 * i);
    }
    for (const auto& b : bank) {
        const auto base = drift::lebesgue_holder_norm(b);
        for (int n : {4, 16, 64}) {
            // Space mollification: sup_x |b^n(t, .)| <= sup_x |b(t, .)| on every sampled time.
            const auto bs = drift::mollify_space(b, n);
            bool space_ok = true;
            for (double t : {0.001, 0.01, 0.1, 0.5, 1.0}) {
                double sup_b = 0.0, sup_n = 0.0;
                for (double x : xs) {
                    sup_b = std::max(sup_b, std::abs(b.eval1(t, x)));
                    sup_n = std::max(sup_n, std::abs(bs.eval1(t, x)));
                }
                space_ok = space_ok && sup_n <= sup_b * slack;
                ++comparisons;
            }
            const auto space_norm = drift::lebesgue_holder_norm(bs);
            space_ok = space_ok && space_norm.sup_part <= base.sup_part * slack;
            ++comparisons;
            // Time mollification: both parts of the Lebesgue-Holder norm are dominated.
            const auto time_norm = drift::lebesgue_holder_norm(drift::mollify_time(b, n));
            const bool time_ok = time_norm.sup_part <= base.sup_part * slack &&
                                 time_norm.seminorm_part <= base.seminorm_part * slack;
            comparisons += 2;
            violations += (space_ok ? 0 : 1) + (time_ok ? 0 : 1);
            rows.push_back({{"drift", b.meta().label},
                            {"n", n},
                            {"sup_part", number(base.sup_part)},
                            {"seminorm_part", number(base.seminorm_part)},
                            {"space_sup_part", number(space_norm.sup_part)},
                            {"time_sup_part", number(time_norm.sup_part)},
                            {"time_seminorm_part", number(time_norm.seminorm_part)},
                            {"space_dominated", space_ok},
                            {"time_dominated", time_ok}});
        }
    }

    // Comparison on coupled paths for monotone Lipschitz drifts.
    const std::vector<drift::DriftField> monotone{drift::make_drift("linear:0.7"),
                                                  drift::mollify_space(drift::make_drift("counterexample"), 8)};
    sde::SolveConfig cfg;
    cfg.t_grid = noise::uniform_grid(1e-3, 500);
    constexpr std::size_t n_paths = 100;
    std::vector<std::size_t> order_violations(n_paths, 0);
    parallel_for(n_paths, options.threads, [&](std::size_t i) {
        const noise::StableParams params{i % 2 == 0 ? 0.8 : 1.5, 1};
        const auto path = noise::sample_on_grid(params, cfg.t_grid, options.seed + 400, i);
        const double x = -0.1, y = 0.05;
        for (const auto& b : monotone) {
            const auto tx = sde::euler_solve(b, path, std::span(&x, 1), cfg);
            const auto ty = sde::euler_solve(b, path, std::span(&y, 1), cfg);
            for (std::size_t k = 0; k < tx.size(); ++k) {
                order_violations[i] += tx.scalar(k) <= ty.scalar(k) ? 0 : 1;
            }
        }
    });
    std::size_t order_total = 0;
    for (auto v : order_violations) {
        order_total += v;
    }

    r.passed = violations == 0 && order_total == 0;
    r.details = {{"norm_comparisons", comparisons},
                 {"norm_violations", violations},
                 {"rows", rows},
                 {"comparison_paths", n_paths},
                 {"comparison_points", n_paths * monotone.size() * cfg.t_grid.size()},
                 {"order_violations", order_total}};
    r.summary = std::to_string(violations) + " domination failures in " + std::to_string(comparisons) +
                " grid estimates (n = 4, 16, 64, " + std::to_string(bank.size()) + " drifts), " +
                std::to_string(order_total) + " order violations on " + std::to_string(n_paths) + " coupled paths";
    return r;
}

// ---------------------------------------------------------------- suite

std::vector<SuiteEntry> suite() {
    return {
        {1, "stable_law", 30.0, stable_law},
        {2, "heat_kernel", 10.0, heat_kernel},
        {3, "criticality_sweep", 5.0, criticality_sweep},
        {4, "kolmogorov_solver", 60.0, kolmogorov_solver},
        {5, "gradient_decay", 120.0, gradient_decay},
        {6, "pathwise_gap", 120.0, pathwise_gap},
        {7, "nonuniqueness", 300.0, nonuniqueness},
        {8, "mollifier_laws", 60.0, mollifier_laws},
    };
}

std::vector<CheckResult> run_selftest(const std::filesystem::path& out_dir, const SuiteOptions& options,
                                      const std::function<void(const CheckResult&, double)>& progress) {
    std::vector<CheckResult> results;
    io::CsvTable summary({"id", "name", "passed", "summary"});
    for (const auto& entry : suite()) {
        const auto start = std::chrono::steady_clock::now();
        CheckResult result;
        try {
            result = entry.run(options);
        } catch (const std::exception& e) {
            result = make_result(entry.id, entry.name);
            result.passed = false;
            result.summary = std::string("error: ") + e.what();
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        Json doc{{"id", result.id},
                 {"name", result.name},
                 {"passed", result.passed},
                 {"summary", result.summary},
                 {"seed", options.seed},
                 {"details", result.details}};
        io::write_json(out_dir / ("check_" + std::to_string(entry.id) + "_" + entry.name + ".json"), doc);
        summary.add_row({static_cast<std::int64_t>(result.id), result.name,
                         static_cast<std::int64_t>(result.passed ? 1 : 0), result.summary});
        if (progress) {
            progress(result, seconds);
        }
        results.push_back(std::move(result));
    }
    io::write_text(out_dir / "summary.csv", summary.str());
    return results;
}

} // namespace stablesde::checks
