#pragma once

#include "stablesde/drift_space.hpp"
#include "stablesde/stable_noise.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace stablesde::sde {

/// How the drift time integral over one step is evaluated with the spatial
/// argument frozen at the left endpoint.
enum class Quadrature {
    Left,       ///< h b(t_k, X_k); undefined at t = 0 for singular drifts
    Midpoint,   ///< h b(t_k + h/2, X_k); graded Gauss cells on a singular first step
    ExactPower, ///< closed-form integral of C t^{-a}; separable power-law drifts only
};

struct SolveConfig {
    std::vector<double> t_grid;
    Quadrature quadrature = Quadrature::Midpoint;
    /// Geometric cells (8 Gauss nodes each) on the first step for Midpoint on
    /// singular drifts.
    std::size_t max_substeps = 40;
};

struct Trajectory {
    int dim = 1;
    std::vector<double> times;
    std::vector<double> states;         ///< row-major, dim per time
    std::vector<double> drift_integral; ///< cumulative int_0^t b(s, X_s) ds

    std::size_t size() const noexcept { return times.size(); }
    std::span<const double> state(std::size_t k) const {
        return std::span<const double>(states).subspan(k * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));
    }
    double scalar(std::size_t k) const { return states[k * static_cast<std::size_t>(dim)]; }
};

/// X_{k+1} = X_k + int_{t_k}^{t_{k+1}} b(s, X_k) ds + (L_{t_{k+1}} - L_{t_k}).
///
/// Each state is stored as x0 + drift_integral + L so the defining identity
/// holds up to one rounding per node. Throws ArgumentError when the noise
/// grid does not contain every solver time, and DomainError (with t and x)
/// when the drift is not finite.
Trajectory euler_solve(const drift::DriftField& b, const noise::CadlagPath& noise, std::span<const double> x0,
                       const SolveConfig& cfg);

/// Solves phi(t) = x0 + int_0^t b(s, phi(s) + L_s) ds along a frozen noise
/// path with the same quadrature; states hold phi, which has no jumps.
Trajectory frozen_path_solve(const drift::DriftField& b, const noise::CadlagPath& noise, std::span<const double> x0,
                             const SolveConfig& cfg);

struct ConvergenceRow {
    int n = 0;
    int next_n = 0;
    double sup_distance = 0.0;
};

/// Solves with mollify_space(b, n) for each level on the same path and
/// reports sup_t |X^n - X^{n'}| for successive levels (n_list increasing).
std::vector<ConvergenceRow> mollified_convergence(const drift::DriftField& b, const noise::CadlagPath& noise,
                                                  std::span<const double> x0, std::span<const int> n_list,
                                                  const SolveConfig& cfg);

struct GapStatistic {
    double mean = 0.0;               ///< E sup_t |X_t(x) - X_t(y)|^2
    double standard_error = 0.0;
    std::optional<double> ratio;     ///< mean / |x - y|^2 when x != y
    std::optional<double> ratio_se;
    std::size_t n_paths = 0;
};

/// Synchronous coupling: both initial points are driven by noise path i,
/// sampled from (seed, stream i) on cfg.t_grid. Throws ArgumentError for
/// n_paths = 0.
GapStatistic pathwise_gap_statistic(const drift::DriftField& b, const noise::StableParams& params,
                                    std::span<const double> x, std::span<const double> y, std::size_t n_paths,
                                    const SolveConfig& cfg, std::uint64_t seed, unsigned threads = 1);

/// Geometric-then-uniform grid on [0, T]: steps grow by `ratio` from t_min
/// until they reach h_max.
std::vector<double> graded_grid(double horizon, double t_min, double ratio, double h_max);

} // namespace stablesde::sde
