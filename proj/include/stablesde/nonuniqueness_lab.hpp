#pragma once

#include "stablesde/drift_space.hpp"
#include "stablesde/sde_sim.hpp"
#include "stablesde/stable_noise.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stablesde::lab {

/// Parameters of the supercritical counterexample b(t, x) = t^{-1/p_hat} h(x).
struct CounterexampleSpec {
    double alpha = 0.8;
    double beta = 0.5;
    double p = 1.5;
    double p_hat = 2.0;
    double theta0 = 1.0;
    double c0 = 0.1;
    double c1 = 0.25;
    /// Defaults to the largest C2 with C2^delta C1 <= theta0, capped at the horizon.
    std::optional<double> c2;

    /// delta = (1 - 1/p_hat) / (1 - beta).
    double delta() const;
    double c2_value(double horizon) const;
    /// Throws ParameterError for out-of-range parameters and DomainError naming
    /// the violated inequality (supercriticality, delta < 1/alpha,
    /// C1^beta/delta - C0 > C1, C2^delta C1 <= theta0).
    void validate(double horizon = 1.0) const;
};

/// Validated counterexample drift on [0, horizon]; declares (p, beta, 1/p_hat).
drift::DriftField build_counterexample(const CounterexampleSpec& spec, double horizon = 1.0);

/// Zero-noise maximal solution delta^{-1/(1-beta)} t^delta (valid while it stays below theta0).
double zero_noise_extremal(const CounterexampleSpec& spec, double t);

/// Largest grid time T0 <= min(T, horizon) with |L_t| <= C0 t^delta at every
/// positive grid time in (0, T0]; empty when the first positive grid time fails.
std::optional<double> omega0_filter(const noise::CadlagPath& noise, const CounterexampleSpec& spec, double horizon);

/// Decreasing Lipschitz approximations from above (and, mirrored, from below).
enum class ApproximationFamily {
    SupConvolution, ///< n-Lipschitz envelope of h
    ShiftedClip,    ///< n-Lipschitz envelope of h(. + n^{-2})
};

std::string to_string(ApproximationFamily family);

struct ExtremalOptions {
    std::vector<double> levels{2, 8, 32, 128, 512, 2048};
    ApproximationFamily family = ApproximationFamily::SupConvolution;
    /// Build the lower family as -h_n(-x); requires an odd profile and makes the
    /// zero-noise pair exactly antisymmetric.
    bool mirror_odd = true;
    bool compute_min = true;
    /// Allowed violation of level monotonicity, relative to 1 + |X|.
    double tolerance = 1e-12;
};

struct ExtremalPair {
    sde::Trajectory x_max;
    sde::Trajectory x_min; ///< empty when compute_min is false
    std::vector<double> levels;
    std::vector<double> gap;
    /// Envelope height at the finest level, h_n(0) - h(0).
    double envelope_height = 0.0;
    /// envelope_height * int_0^T g: bound on the finest level's distance to the limit without noise.
    double truncation_estimate = 0.0;
};

/// Level-wise solutions with the approximating drifts on one frozen path.
/// Requires a one-dimensional separable drift with a power-law time factor and
/// finite profile bound. Throws DiscretizationError naming (level, time) when
/// successive levels are not ordered.
ExtremalPair extremal_solutions(const drift::DriftField& b, const noise::CadlagPath& noise,
                                const sde::SolveConfig& cfg, const ExtremalOptions& options = {});

struct EnvelopeReport {
    double window_end = 0.0; ///< min(T0, C2)
    std::size_t checked_points = 0;
    bool upper_holds = false;  ///< X_max >= C1 t^delta
    bool lower_holds = false;  ///< X_min <= -C1 t^delta
    double margin_max = 0.0;   ///< min (X_max - C1 t^delta)
    double margin_min = 0.0;   ///< min (-C1 t^delta - X_min)
    double gap_at_end = 0.0;
    bool nonunique = false;
};

/// Checks both envelopes on the grid times in (0, min(T0, C2)]. Throws
/// PreconditionError when T0 is empty.
EnvelopeReport envelope_verdict(const ExtremalPair& pair, const CounterexampleSpec& spec, std::optional<double> t0);

/// Grid on [0, T] with steps min((ratio - 1) t, 0.9 t^a / (C n_max), h_max)
/// after a first step t_min, so that every step weight W_k satisfies
/// W_k n_max <= 0.9 and the finest level's Lipschitz scale is resolved.
struct GridOptions {
    double t_min = 1e-10;
    double ratio = 1.004;
    double h_max = 1e-4;
};

std::vector<double> extremal_grid(const drift::DriftField& b, double horizon, double n_max,
                                  const GridOptions& options = {});

struct LabConfig {
    double horizon = 0.1;
    GridOptions grid;
    ExtremalOptions extremal;
    bool compare_families = true;
};

struct PathVerdict {
    std::size_t path_id = 0;
    std::optional<double> t0;
    std::optional<EnvelopeReport> report;
    /// sup |X_max(sup-convolution) - X_max(shifted-clip)| over the verdict window.
    std::optional<double> family_difference;
    /// The same over the whole grid; returns to 0 after the window can branch again.
    std::optional<double> family_difference_full;
    std::string error;
};

struct LabRun {
    std::vector<double> t_grid;
    std::vector<PathVerdict> paths;
    std::size_t passed_filter = 0;
    std::size_t nonunique = 0;
    double max_family_difference = 0.0;
    double max_family_difference_full = 0.0;
};

/// Samples n_paths noise paths (seed, stream i) on the lab grid, filters them
/// and computes verdicts for those passing.
LabRun run_nonuniqueness(const CounterexampleSpec& spec, const LabConfig& config, std::size_t n_paths,
                         std::uint64_t seed, unsigned threads = 1);

} // namespace stablesde::lab
