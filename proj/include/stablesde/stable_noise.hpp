#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "stablesde/random.hpp"

namespace stablesde::noise {

/// Symmetric rotationally invariant alpha-stable law with E exp(i xi.L_t) = exp(-t |xi|^alpha).
struct StableParams {
    double alpha = 1.0;
    int dim = 1;

    /// Throws ParameterError unless 0 < alpha < 2 and dim >= 1.
    void validate() const;
};

/// Sampled cadlag trajectory on a time grid.
///
/// `values` is row-major: the state at times[k] occupies
/// values[k*dim, (k+1)*dim). Jumps whose magnitude is at least `jump_cutoff`
/// are recorded with their exact times; an infinite cutoff records nothing.
class CadlagPath {
public:
    CadlagPath(std::vector<double> times, std::vector<double> values, int dim,
               std::vector<double> jump_times = {}, std::vector<double> jump_sizes = {},
               double jump_cutoff = std::numeric_limits<double>::infinity());

    /// The identically zero path on `times`.
    static CadlagPath zero(std::vector<double> times, int dim = 1);

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return times_.size(); }
    double horizon() const noexcept { return times_.back(); }
    std::span<const double> times() const noexcept { return times_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> value(std::size_t k) const noexcept {
        return std::span<const double>(values_).subspan(k * static_cast<std::size_t>(dim_),
                                                       static_cast<std::size_t>(dim_));
    }
    /// Convenience accessor for one-dimensional paths.
    double scalar(std::size_t k) const noexcept { return values_[k * static_cast<std::size_t>(dim_)]; }

    std::size_t jump_count() const noexcept { return jump_times_.size(); }
    std::span<const double> jump_times() const noexcept { return jump_times_; }
    std::span<const double> jump(std::size_t j) const noexcept {
        return std::span<const double>(jump_sizes_).subspan(j * static_cast<std::size_t>(dim_),
                                                           static_cast<std::size_t>(dim_));
    }
    double jump_cutoff() const noexcept { return jump_cutoff_; }

    /// Index of `t` in the grid (relative tolerance 1e-12), or size() if absent.
    std::size_t find_time(double t) const noexcept;

private:
    std::vector<double> times_;
    std::vector<double> values_;
    int dim_;
    std::vector<double> jump_times_;
    std::vector<double> jump_sizes_;
    double jump_cutoff_;
};

/// Uniform grid 0, dt, ..., n_steps*dt.
std::vector<double> uniform_grid(double dt, std::size_t n_steps);

/// Exact sampler on an arbitrary grid starting at 0.
///
/// dim == 1 uses the Chambers-Mallows-Stuck representation; dim >= 2 uses
/// sqrt(2A) G with A a positive (alpha/2)-stable variable (Laplace transform
/// exp(-s^{alpha/2})) and G standard Gaussian. Deterministic in (seed, stream).
CadlagPath sample_on_grid(const StableParams& params, std::span<const double> times, std::uint64_t seed,
                          std::uint64_t stream = 0);

/// sample_on_grid on the uniform grid with step dt.
CadlagPath sample_increments(const StableParams& params, double dt, std::size_t n_steps, std::uint64_t seed,
                             std::uint64_t stream = 0);

/// Levy-Ito construction: compound Poisson jumps with |z| >= eps drawn from
/// nu(dz) = c(d,alpha)|z|^{-d-alpha} dz plus a Gaussian with the covariance of
/// the small jumps. Every simulated jump of magnitude >= record_cutoff is
/// recorded (record_cutoff defaults to eps; must be >= eps).
CadlagPath sample_via_levy_ito(const StableParams& params, double dt, std::size_t n_steps, double eps,
                               std::uint64_t seed, std::uint64_t stream = 0, double record_cutoff = -1.0);

/// Levy density constant c(d, alpha) such that nu(dz) = c |z|^{-d-alpha} dz
/// generates exp(-t|xi|^alpha).
double levy_density_constant(const StableParams& params);
/// nu({|z| >= eps}).
double large_jump_intensity(const StableParams& params, double eps);
/// Per-coordinate variance rate of the jumps with |z| < eps.
double small_jump_variance(const StableParams& params, double eps);

/// Standard symmetric alpha-stable variable (E exp(i xi X) = exp(-|xi|^alpha)).
double sample_symmetric_stable(double alpha, RandomStream& rng);
/// Positive alpha-stable variable with Laplace transform exp(-s^alpha), 0 < alpha < 1.
double sample_positive_stable(double alpha, RandomStream& rng);

/// Transition density of the process at time t, evaluated at radius |x|.
///
/// Moderate radii use Fourier inversion of exp(-t|xi|^alpha) (cosine
/// transform for dim 1, Hankel transform for dim >= 2) truncated where the
/// multiplier drops below 1e-16; large radii use the convergent/asymptotic
/// series in t|x|^{-alpha} whenever its smallest term is below 1e-16 of the sum.
double heat_kernel_radial(const StableParams& params, double t, double r);
/// heat_kernel_radial at r = |x|; throws DomainError for t <= 0.
double heat_kernel(const StableParams& params, double t, std::span<const double> x);

/// Mass of K(t, .) over the ball of radius R (Gauss-Legendre panels) plus the
/// exact tail beyond R from the large-|x| series.
double heat_kernel_mass(const StableParams& params, double t, double radius);

/// Smallest C with K(t,r) <= C t (t^{1/alpha} + r)^{-dim-alpha} on the grid.
double fit_heat_kernel_bound(const StableParams& params, std::span<const double> t_grid,
                             std::span<const double> r_grid);

/// K(t, r) tabulated on t_grid x radii (t-major).
struct HeatKernelTable {
    double alpha = 1.0;
    int dim = 1;
    std::vector<double> t_grid;
    std::vector<double> radii;
    std::vector<double> values;

    double at(std::size_t ti, std::size_t ri) const { return values[ti * radii.size() + ri]; }
    /// Trapezoid mass of slice ti over the radial grid plus the analytic tail.
    double discrete_mass(std::size_t ti) const;
};

HeatKernelTable build_heat_kernel_table(const StableParams& params, std::vector<double> t_grid,
                                        std::vector<double> radii);

/// Sample mean of exp(i xi . L_t) with jackknife standard errors per component.
struct CharFnEstimate {
    std::complex<double> value;
    double se_real = 0.0;
    double se_imag = 0.0;
    std::size_t n = 0;
};

/// Throws ArgumentError for an empty ensemble or if t is not on the shared grid.
CharFnEstimate empirical_char_function(std::span<const CadlagPath> paths, double t, std::span<const double> xi);

/// Independent paths sample_on_grid(params, times, seed, i), i < n_paths.
std::vector<CadlagPath> sample_ensemble(const StableParams& params, std::span<const double> times,
                                        std::size_t n_paths, std::uint64_t seed, unsigned threads = 1);

} // namespace stablesde::noise
