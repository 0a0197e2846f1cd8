#pragma once

#include "stablesde/drift_space.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stablesde::pde {

/// Source term f(t, x) with `components` outputs.
struct Source {
    drift::EvalFn eval;
    int components = 1;
    std::string label;
};

/// Library sources on a periodic cell: zero, constant:c, sin, cos,
/// exp-sin (exp(sin x0)), sin-power:beta (sign(sin x0)|sin x0|^beta).
Source make_source(const std::string& id);

struct PdeConfig {
    double halfwidth = 3.141592653589793; ///< periodic cell [-R, R)^d
    int n_modes = 64;                     ///< points per dimension, power of two >= 8
    int dim = 1;                          ///< 1 or 2
    std::vector<double> t_grid;           ///< starts at 0, strictly increasing
    double lambda = 1.0;
    double picard_tol = 1e-10;
    int picard_max_iters = 200;
    /// Optional initial slice u(0, .), `components` blocks of n_modes^dim values.
    std::optional<std::vector<double>> initial;

    void validate() const;
};

/// Space-time solution on the periodic grid.
///
/// values:   [time][component][point]
/// gradient: [time][component][direction][point]
/// spectrum: [time][component][mode] (r2c layout, unnormalized)
struct GridFunction {
    int dim = 1;
    int components = 1;
    int n_modes = 0;
    double halfwidth = 0.0;
    double alpha = 0.0;
    double lambda = 0.0;
    std::vector<double> x;     ///< coordinates along one axis
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> gradient;
    std::vector<std::complex<double>> spectrum;
    double picard_residual = 0.0;
    int picard_iterations = 0;

    std::size_t points() const;
    std::size_t modes() const;
    std::span<const double> slice(std::size_t ti, int component = 0) const;
    std::span<const double> gradient_slice(std::size_t ti, int component, int direction) const;
    std::span<const std::complex<double>> spectrum_slice(std::size_t ti, int component = 0) const;
    /// Coordinates of point j (dim entries).
    std::vector<double> point(std::size_t j) const;
    double sup_abs_value() const;
    /// sup over t, x of the Euclidean norm of each component's gradient, maximised over components.
    double sup_abs_gradient() const;
};

/// Picard iteration for u(t) = P^lambda_t u(0) + int_0^t e^{-lambda(t-s)} P_{t-s}[b . grad u + f](s) ds,
/// with P_t the multiplier exp(-t|xi|^alpha) and an exponential trapezoid rule
/// in time. Throws ContractionError when the iteration does not reach
/// picard_tol, DomainError when b or f is not finite on the grid.
GridFunction solve_mild(const drift::DriftField& b, const Source& f, const PdeConfig& cfg, double alpha);

/// sup |Phi(u) - u| for the Picard map Phi of the same problem.
double picard_residual(const drift::DriftField& b, const Source& f, const PdeConfig& cfg, double alpha,
                       const GridFunction& u);

/// Backward problem dU/dt + Delta^{alpha/2} U + b . grad U - lambda U = -b, U(T) = 0,
/// solved by time reversal. Result times run forward: slice i holds U(t_i).
GridFunction solve_backward_vector(const drift::DriftField& b, const PdeConfig& cfg, double alpha);

struct McEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::size_t n_paths = 0;
};

/// E int_0^t e^{-lambda tau} f(t - tau, x + L_tau) dtau on R^d (b = 0), with
/// tau on 32 Gauss nodes and L sampled exactly at them. Path i uses stream i.
McEstimate feynman_kac_oracle(const Source& f, double lambda, double alpha, double t, std::span<const double> x,
                              std::size_t n_paths, std::uint64_t seed, unsigned threads = 1);

/// ||u||_{p, alpha+beta-theta} / ||f||_{p, beta} on the solution grid (d = 1).
/// Orders above 1 use sup|u| + sup|grad u| + [grad u]_{order-1}. Throws
/// DomainError unless theta > 0, 0 < alpha+beta-theta < 2 and, for alpha < 1,
/// theta < alpha + beta - 1. 0/0 is reported as 0.
double schauder_ratio(const GridFunction& u, const Source& f, double p, double beta, double theta);

struct DecayRow {
    double lambda = 0.0;
    std::optional<double> sup_gradient; ///< empty when the solve failed
    std::string error;
    int picard_iterations = 0;
};

struct DecayCurve {
    std::vector<DecayRow> rows;
    std::optional<double> slope; ///< least squares of log sup|grad u| against log lambda
    bool strictly_decreasing = false;
};

/// Forward problem with source f at each lambda (cfg.lambda is ignored).
DecayCurve gradient_decay_curve(const drift::DriftField& b, const Source& f, const PdeConfig& cfg, double alpha,
                                std::span<const double> lambdas);

/// Same for the backward vector problem.
DecayCurve backward_gradient_decay_curve(const drift::DriftField& b, const PdeConfig& cfg, double alpha,
                                         std::span<const double> lambdas);

struct Threshold {
    double lambda = 0.0;      ///< smallest lambda (to tolerance) with sup|grad U| <= target
    double sup_gradient = 0.0;
    int bisection_steps = 0;
};

/// Bisection on lambda in [lo, hi] for sup|grad U| = target in the backward
/// problem. Throws DomainError when the target is not bracketed.
Threshold backward_gradient_threshold(const drift::DriftField& b, const PdeConfig& cfg, double alpha, double target,
                                      double lo, double hi, double tol = 1e-3);

} // namespace stablesde::pde
