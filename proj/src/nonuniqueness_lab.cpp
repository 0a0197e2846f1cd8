#include "stablesde/nonuniqueness_lab.hpp"

#include "stablesde/errors.hpp"
#include "stablesde/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stablesde::lab {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

/// Profile data of a one-dimensional separable power-law drift.
struct PowerLaw {
    const drift::SeparableForm* form;
    double a;
    double coeff; ///< g(t) = coeff * t^{-a}
};

PowerLaw power_law(const drift::DriftField& b) {
    const auto* form = b.separable();
    if (b.dim() != 1 || form == nullptr || !form->time_power) {
        throw ArgumentError("extremal solutions need a one-dimensional separable drift with a power-law time factor");
    }
    if (!std::isfinite(form->profile_sup)) {
        throw ArgumentError("extremal solutions need a finite bound on the profile");
    }
    const double a = *form->time_power;
    return {form, a, form->time_factor(1.0)};
}

drift::ScalarFn scalar_profile(const drift::SeparableForm& form) {
    return [profile = form.profile](double x) {
        double out = 0.0;
        profile(std::span<const double>(&x, 1), std::span<double>(&out, 1));
        return out;
    };
}

/// Approximating profile at level n from above.
drift::ScalarFn upper_profile(const drift::SeparableForm& form, double n, ApproximationFamily family) {
    const auto h = scalar_profile(form);
    if (family == ApproximationFamily::SupConvolution) {
        return drift::lipschitz_envelope(h, n, drift::EnvelopeSide::FromAbove, form.profile_sup, form.kinks);
    }
    const double shift = 1.0 / (n * n);
    std::vector<double> kinks = form.kinks;
    for (double& k : kinks) {
        k -= shift;
    }
    return drift::lipschitz_envelope([h, shift](double x) { return h(x + shift); }, n, drift::EnvelopeSide::FromAbove,
                                     form.profile_sup, std::move(kinks));
}

drift::ScalarFn lower_profile(const drift::SeparableForm& form, double n, ApproximationFamily family, bool mirror) {
    if (mirror) {
        auto up = upper_profile(form, n, family);
        return [up = std::move(up)](double x) { return -up(-x); };
    }
    const auto h = scalar_profile(form);
    if (family == ApproximationFamily::SupConvolution) {
        return drift::lipschitz_envelope(h, n, drift::EnvelopeSide::FromBelow, form.profile_sup, form.kinks);
    }
    const double shift = 1.0 / (n * n);
    std::vector<double> kinks = form.kinks;
    for (double& k : kinks) {
        k += shift;
    }
    return drift::lipschitz_envelope([h, shift](double x) { return h(x - shift); }, n, drift::EnvelopeSide::FromBelow,
                                     form.profile_sup, std::move(kinks));
}

drift::DriftField with_profile(const drift::DriftField& b, drift::ScalarFn profile, const std::string& tag) {
    const auto* form = b.separable();
    drift::SeparableForm approx;
    approx.time_factor = form->time_factor;
    approx.time_power = form->time_power;
    approx.profile_sup = form->profile_sup;
    approx.profile = [profile = std::move(profile)](std::span<const double> x, std::span<double> out) {
        out[0] = profile(x[0]);
    };
    drift::DriftMeta meta = b.meta();
    meta.label = tag + "(" + meta.label + ")";
    return drift::DriftField(std::move(meta), std::move(approx));
}

/// Solves every level, checking order(prev, next) >= 0 up to tolerance.
sde::Trajectory solve_levels(const drift::DriftField& b, const noise::CadlagPath& noise, const sde::SolveConfig& cfg,
                             const ExtremalOptions& opt, bool upper) {
    const auto& form = *b.separable();
    const double x0 = 0.0;
    sde::Trajectory prev;
    for (std::size_t li = 0; li < opt.levels.size(); ++li) {
        const double n = opt.levels[li];
        auto profile = upper ? upper_profile(form, n, opt.family) : lower_profile(form, n, opt.family, opt.mirror_odd);
        auto traj = sde::euler_solve(with_profile(b, std::move(profile), upper ? "upper" : "lower"), noise,
                                     std::span<const double>(&x0, 1), cfg);
        if (li > 0) {
            for (std::size_t k = 0; k < traj.size(); ++k) {
                const double step = upper ? prev.scalar(k) - traj.scalar(k) : traj.scalar(k) - prev.scalar(k);
                if (step < -opt.tolerance * (1.0 + std::abs(traj.scalar(k)))) {
                    throw DiscretizationError("approximations from " + std::string(upper ? "above" : "below") +
                                              " are not monotone in the level: level n = " + fmt(n) +
                                              " crosses level n = " + fmt(opt.levels[li - 1]) + " at t = " +
                                              fmt(traj.times[k]) + " by " + fmt(-step));
                }
            }
        }
        prev = std::move(traj);
    }
    return prev;
}

} // namespace

double CounterexampleSpec::delta() const { return (1.0 - 1.0 / p_hat) / (1.0 - beta); }

double CounterexampleSpec::c2_value(double horizon) const {
    if (c2) {
        return *c2;
    }
    return std::min(std::pow(theta0 / c1, 1.0 / delta()), horizon);
}

void CounterexampleSpec::validate(double horizon) const {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw ParameterError("alpha must lie in (0, 2)");
    }
    if (!(beta > std::max(0.0, 1.0 - alpha) && beta < 1.0)) {
        throw ParameterError("beta must lie in (max(0, 1 - alpha), 1)");
    }
    if (!(theta0 > 0.0)) {
        throw ParameterError("theta0 must be positive");
    }
    if (!(c0 > 0.0 && c0 < 1.0)) {
        throw ParameterError("C0 must lie in (0, 1)");
    }
    if (!(c1 > 0.0)) {
        throw ParameterError("C1 must be positive");
    }
    if (c2 && !(*c2 > 0.0)) {
        throw ParameterError("C2 must be positive");
    }
    if (!(horizon > 0.0)) {
        throw ParameterError("horizon must be positive");
    }
    if (!(p >= 1.0)) {
        throw ParameterError("p must be >= 1");
    }
    const double threshold = alpha / (alpha + beta - 1.0);
    const auto report = drift::classify_criticality(alpha, beta, p, 1, drift::SpaceFamily::LpHolderStable);
    if (report.regime != drift::Regime::Supercritical) {
        throw DomainError("the construction needs a supercritical drift: p < alpha/(alpha + beta - 1) = " +
                          fmt(threshold) + " fails for p = " + fmt(p));
    }
    if (!(p_hat > p && p_hat < threshold)) {
        throw DomainError("p_hat must satisfy p < p_hat < alpha/(alpha + beta - 1) = " + fmt(threshold));
    }
    const double d = delta();
    if (!(d < 1.0 / alpha)) {
        throw DomainError("delta = (1 - 1/p_hat)/(1 - beta) = " + fmt(d) + " must be < 1/alpha = " + fmt(1.0 / alpha));
    }
    if (!(std::pow(c1, beta) / d - c0 > c1)) {
        throw DomainError("constants violate C1^beta/delta - C0 > C1 (" + fmt(std::pow(c1, beta) / d - c0) +
                          " <= " + fmt(c1) + ")");
    }
    const double c2v = c2_value(horizon);
    if (!(std::pow(c2v, d) * c1 <= theta0 * (1.0 + 1e-15))) {
        throw DomainError("constants violate C2^delta C1 <= theta0 (" + fmt(std::pow(c2v, d) * c1) + " > " +
                          fmt(theta0) + ")");
    }
}

drift::DriftField build_counterexample(const CounterexampleSpec& spec, double horizon) {
    spec.validate(horizon);
    auto b = drift::time_singular_drift(spec.p_hat, spec.beta, spec.theta0, spec.p, horizon);
    return b;
}

double zero_noise_extremal(const CounterexampleSpec& spec, double t) {
    const double d = spec.delta();
    return std::pow(d, -1.0 / (1.0 - spec.beta)) * std::pow(t, d);
}

std::optional<double> omega0_filter(const noise::CadlagPath& noise, const CounterexampleSpec& spec, double horizon) {
    if (noise.dim() != 1) {
        throw ArgumentError("the counterexample is one-dimensional");
    }
    const double d = spec.delta();
    const auto times = noise.times();
    const double end = std::min(horizon, noise.horizon());
    std::optional<double> t0;
    for (std::size_t k = 1; k < times.size() && times[k] <= end; ++k) {
        if (std::abs(noise.scalar(k)) > spec.c0 * std::pow(times[k], d)) {
            return t0;
        }
        t0 = times[k];
    }
    return t0;
}

std::string to_string(ApproximationFamily family) {
    return family == ApproximationFamily::SupConvolution ? "sup-convolution" : "shifted-clip";
}

ExtremalPair extremal_solutions(const drift::DriftField& b, const noise::CadlagPath& noise,
                                const sde::SolveConfig& cfg, const ExtremalOptions& options) {
    const PowerLaw law = power_law(b);
    if (options.levels.empty()) {
        throw ArgumentError("at least one approximation level is required");
    }
    for (std::size_t i = 0; i < options.levels.size(); ++i) {
        if (!(options.levels[i] > 0.0) || (i > 0 && !(options.levels[i] > options.levels[i - 1]))) {
            throw ArgumentError("approximation levels must be positive and increasing");
        }
    }
    if (options.mirror_odd) {
        const auto h = scalar_profile(*law.form);
        for (double x : {1e-3, 0.1, 0.7, 1.3, 5.0}) {
            if (h(-x) != -h(x)) {
                throw ArgumentError("mirrored lower family needs an odd profile");
            }
        }
    }
    ExtremalPair pair;
    pair.levels = options.levels;
    pair.x_max = solve_levels(b, noise, cfg, options, true);
    if (options.compute_min) {
        pair.x_min = solve_levels(b, noise, cfg, options, false);
        pair.gap.resize(pair.x_max.size());
        for (std::size_t k = 0; k < pair.gap.size(); ++k) {
            pair.gap[k] = pair.x_max.scalar(k) - pair.x_min.scalar(k);
        }
    }
    const double finest = options.levels.back();
    const auto top = upper_profile(*law.form, finest, options.family);
    pair.envelope_height = top(0.0) - scalar_profile(*law.form)(0.0);
    const double horizon = cfg.t_grid.back();
    pair.truncation_estimate = pair.envelope_height * law.coeff * std::pow(horizon, 1.0 - law.a) / (1.0 - law.a);
    return pair;
}

EnvelopeReport envelope_verdict(const ExtremalPair& pair, const CounterexampleSpec& spec, std::optional<double> t0) {
    if (!t0) {
        throw PreconditionError("envelope verdict needs a path in the filtered event (T0 is missing)");
    }
    if (pair.x_min.size() != pair.x_max.size()) {
        throw ArgumentError("envelope verdict needs both extremal solutions");
    }
    const double d = spec.delta();
    EnvelopeReport r;
    r.window_end = std::min(*t0, spec.c2_value(pair.x_max.times.back()));
    r.upper_holds = true;
    r.lower_holds = true;
    r.margin_max = std::numeric_limits<double>::infinity();
    r.margin_min = std::numeric_limits<double>::infinity();
    bool gap_positive = true;
    for (std::size_t k = 1; k < pair.x_max.size() && pair.x_max.times[k] <= r.window_end; ++k) {
        const double env = spec.c1 * std::pow(pair.x_max.times[k], d);
        const double up = pair.x_max.scalar(k) - env;
        const double down = -env - pair.x_min.scalar(k);
        r.margin_max = std::min(r.margin_max, up);
        r.margin_min = std::min(r.margin_min, down);
        r.upper_holds = r.upper_holds && up >= 0.0;
        r.lower_holds = r.lower_holds && down >= 0.0;
        gap_positive = gap_positive && pair.gap[k] > 0.0;
        r.gap_at_end = pair.gap[k];
        ++r.checked_points;
    }
    if (r.checked_points == 0) {
        r.margin_max = 0.0;
        r.margin_min = 0.0;
    }
    r.nonunique = r.checked_points > 0 && r.upper_holds && r.lower_holds && gap_positive;
    return r;
}

std::vector<double> extremal_grid(const drift::DriftField& b, double horizon, double n_max,
                                  const GridOptions& options) {
    const PowerLaw law = power_law(b);
    if (!(horizon > 0.0) || !(n_max > 0.0) || !(options.t_min > 0.0) || !(options.ratio > 1.0) ||
        !(options.h_max > 0.0)) {
        throw ParameterError("grid needs positive horizon, level, t_min, h_max and ratio > 1");
    }
    const double coeff = std::abs(law.coeff);
    // First cell: n * coeff * t1^{1-a}/(1-a) <= 0.9.
    double t = std::min(options.t_min, horizon);
    if (coeff > 0.0) {
        t = std::min(t, std::pow(0.9 * (1.0 - law.a) / (coeff * n_max), 1.0 / (1.0 - law.a)));
    }
    std::vector<double> grid{0.0};
    while (t < horizon) {
        grid.push_back(t);
        double step = std::min((options.ratio - 1.0) * t, options.h_max);
        if (coeff > 0.0) {
            step = std::min(step, 0.9 * std::pow(t, law.a) / (coeff * n_max));
        }
        t += step;
        if (horizon - t < 0.5 * step) {
            t = horizon;
        }
    }
    grid.push_back(horizon);
    return grid;
}

LabRun run_nonuniqueness(const CounterexampleSpec& spec, const LabConfig& config, std::size_t n_paths,
                         std::uint64_t seed, unsigned threads) {
    if (n_paths == 0) {
        throw ArgumentError("need at least one path");
    }
    const auto b = build_counterexample(spec, config.horizon);
    const double n_max = config.extremal.levels.empty() ? 1.0 : config.extremal.levels.back();
    LabRun run;
    run.t_grid = extremal_grid(b, config.horizon, n_max, config.grid);
    sde::SolveConfig cfg;
    cfg.t_grid = run.t_grid;
    cfg.quadrature = sde::Quadrature::ExactPower;
    const noise::StableParams params{spec.alpha, 1};

    run.paths.resize(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t i) {
        PathVerdict& v = run.paths[i];
        v.path_id = i;
        const auto path = noise::sample_on_grid(params, run.t_grid, seed, i);
        v.t0 = omega0_filter(path, spec, config.horizon);
        if (!v.t0) {
            return;
        }
        try {
            const auto pair = extremal_solutions(b, path, cfg, config.extremal);
            v.report = envelope_verdict(pair, spec, v.t0);
            if (config.compare_families) {
                ExtremalOptions other = config.extremal;
                other.family = config.extremal.family == ApproximationFamily::SupConvolution
                                   ? ApproximationFamily::ShiftedClip
                                   : ApproximationFamily::SupConvolution;
                other.compute_min = false;
                const auto alt = extremal_solutions(b, path, cfg, other);
                double window = 0.0;
                double full = 0.0;
                for (std::size_t k = 0; k < alt.x_max.size(); ++k) {
                    const double d = std::abs(alt.x_max.scalar(k) - pair.x_max.scalar(k));
                    full = std::max(full, d);
                    if (alt.x_max.times[k] <= v.report->window_end) {
                        window = std::max(window, d);
                    }
                }
                v.family_difference = window;
                v.family_difference_full = full;
            }
        } catch (const Error& e) {
            v.error = e.what();
        }
    });
    for (const auto& v : run.paths) {
        if (v.t0) {
            ++run.passed_filter;
        }
        if (v.report && v.report->nonunique) {
            ++run.nonunique;
        }
        if (v.family_difference) {
            run.max_family_difference = std::max(run.max_family_difference, *v.family_difference);
            run.max_family_difference_full = std::max(run.max_family_difference_full, *v.family_difference_full);
        }
    }
    return run;
}

} // namespace stablesde::lab
