#include "stablesde/stable_noise.hpp"

#include "stablesde/errors.hpp"
#include "stablesde/parallel.hpp"
#include "stablesde/quadrature.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

namespace stablesde::noise {

namespace {

constexpr double kPi = std::numbers::pi;
// exp(-40) ~ 4e-18: frequencies beyond this carry no double-precision mass.
constexpr double kMultiplierCut = 40.0;

double sphere_area(int dim) {
    // |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)
    const double half = 0.5 * dim;
    return 2.0 * std::pow(kPi, half) / std::tgamma(half);
}

/// Large-radius series
///   K(t,r) = sum_k (-1)^{k+1}/k! 2^{k a}/pi^{d/2+1} sin(pi k a/2)
///            Gamma((d+k a)/2) Gamma(k a/2 + 1) t^k r^{-d-k a}.
/// `radial_power` = 0 gives K itself; the tail mass beyond r is obtained by
/// weighting term k with |S^{d-1}| / (k a) and dropping the r^{-d} factor.
struct SeriesResult {
    double value = 0.0;
    bool accurate = false;
};

SeriesResult large_radius_series(double alpha, int dim, double t, double r, bool tail_mass) {
    SeriesResult out;
    if (r <= 0.0) {
        return out;
    }
    const double log_r = std::log(r);
    const double log_t = std::log(t);
    const double half_dim = 0.5 * dim;
    const double log_prefactor = -(half_dim + 1.0) * std::log(kPi);
    double sum = 0.0;
    double max_term = 0.0;
    double prev_magnitude = std::numeric_limits<double>::infinity();
    int growing = 0;
    double last_magnitude = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 600; ++k) {
        const double ka = k * alpha;
        const double s = std::sin(0.5 * kPi * ka);
        double log_mag = ka * std::numbers::ln2 + log_prefactor + std::lgamma(0.5 * (dim + ka)) +
                         std::lgamma(0.5 * ka + 1.0) - std::lgamma(k + 1.0) + k * log_t - ka * log_r;
        if (tail_mass) {
            log_mag += std::log(sphere_area(dim) / ka);
        } else {
            log_mag -= dim * log_r;
        }
        const double magnitude = std::exp(log_mag);
        if (std::abs(s) > 1e-15) {
            const double sign = (k % 2 == 1) ? 1.0 : -1.0;
            const double term = sign * magnitude * s;
            sum += term;
            max_term = std::max(max_term, std::abs(term));
        }
        // Asymptotic (alpha > 1) or slowly convergent: stop once terms grow.
        if (magnitude > prev_magnitude) {
            if (++growing >= 3) {
                break;
            }
        } else {
            growing = 0;
        }
        prev_magnitude = magnitude;
        last_magnitude = std::min(last_magnitude, magnitude);
        if (sum != 0.0 && magnitude < 1e-17 * std::abs(sum)) {
            break;
        }
    }
    out.value = sum;
    out.accurate = sum > 0.0 && last_magnitude < 1e-16 * std::abs(sum) && max_term < 1e2 * std::abs(sum);
    return out;
}

/// J_{d/2-1}(z). Integer orders use the libm routines, which are much faster
/// than the generic implementation at large arguments.
double bessel_j(int dim, double z) {
    if (dim % 2 == 0) {
        const int order = dim / 2 - 1;
        return order == 0 ? ::j0(z) : (order == 1 ? ::j1(z) : ::jn(order, z));
    }
    return boost::math::cyl_bessel_j(0.5 * dim - 1.0, z);
}

/// Fourier inversion of exp(-t|xi|^alpha) at radius r.
double fourier_inversion(double alpha, int dim, double t, double r) {
    const double xi_max = std::pow(kMultiplierCut / t, 1.0 / alpha);

    auto integrand = [&](double xi) -> double {
        const double damping = std::exp(-t * std::pow(xi, alpha));
        if (dim == 1) {
            return std::cos(r * xi) * damping;
        }
        if (r == 0.0) {
            return std::pow(xi, dim - 1) * damping;
        }
        return bessel_j(dim, r * xi) * std::pow(xi, 0.5 * dim) * damping;
    };

    double width = xi_max / 32.0;
    if (r > 0.0) {
        width = std::min(width, kPi / r);
    }
    const auto panels = static_cast<std::size_t>(std::ceil(xi_max / width));
    width = xi_max / static_cast<double>(panels);

    // The first panel contains the |xi|^alpha cusp at the origin.
    double total = quad::tanh_sinh(integrand, 0.0, width, 1e-13);
    for (std::size_t i = 1; i < panels; ++i) {
        const double a = width * static_cast<double>(i);
        total += quad::kronrod(integrand, a, a + width, 1e-13, 6);
    }

    if (dim == 1) {
        return total / kPi;
    }
    if (r == 0.0) {
        return total * sphere_area(dim) / std::pow(2.0 * kPi, dim);
    }
    return total * std::pow(2.0 * kPi, -0.5 * dim) * std::pow(r, 1.0 - 0.5 * dim);
}

void check_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw DomainError("heat kernel requires t > 0, got t = " + std::to_string(t));
    }
}

} // namespace

void StableParams::validate() const {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw ParameterError("stability index alpha must lie in (0, 2), got " + std::to_string(alpha));
    }
    if (dim < 1) {
        throw ParameterError("dimension must be >= 1, got " + std::to_string(dim));
    }
}

CadlagPath::CadlagPath(std::vector<double> times, std::vector<double> values, int dim, std::vector<double> jump_times,
                       std::vector<double> jump_sizes, double jump_cutoff)
    : times_(std::move(times)), values_(std::move(values)), dim_(dim), jump_times_(std::move(jump_times)),
      jump_sizes_(std::move(jump_sizes)), jump_cutoff_(jump_cutoff) {
    if (dim_ < 1) {
        throw ArgumentError("path dimension must be >= 1");
    }
    if (times_.empty() || times_.front() != 0.0) {
        throw ArgumentError("path grid must start at t = 0");
    }
    for (std::size_t k = 1; k < times_.size(); ++k) {
        if (!(times_[k] > times_[k - 1])) {
            throw ArgumentError("path grid must be strictly increasing");
        }
    }
    if (values_.size() != times_.size() * static_cast<std::size_t>(dim_)) {
        throw ArgumentError("path values do not match grid size times dimension");
    }
    if (jump_sizes_.size() != jump_times_.size() * static_cast<std::size_t>(dim_)) {
        throw ArgumentError("jump records do not match dimension");
    }
    if (jump_cutoff_ < 0.0) {
        throw ArgumentError("jump cutoff must be >= 0");
    }
}

CadlagPath CadlagPath::zero(std::vector<double> times, int dim) {
    std::vector<double> values(times.size() * static_cast<std::size_t>(dim), 0.0);
    return CadlagPath(std::move(times), std::move(values), dim);
}

std::size_t CadlagPath::find_time(double t) const noexcept {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t - 1e-12 * std::max(1.0, std::abs(t)));
    if (it != times_.end() && std::abs(*it - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
        return static_cast<std::size_t>(it - times_.begin());
    }
    return times_.size();
}

std::vector<double> uniform_grid(double dt, std::size_t n_steps) {
    std::vector<double> grid(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) {
        grid[k] = dt * static_cast<double>(k);
    }
    return grid;
}

double sample_symmetric_stable(double alpha, RandomStream& rng) {
    // Chambers-Mallows-Stuck, symmetric case.
    const double v = kPi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    if (alpha == 1.0) {
        return std::tan(v);
    }
    const double cos_v = std::cos(v);
    return std::sin(alpha * v) / std::pow(cos_v, 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

double sample_positive_stable(double alpha, RandomStream& rng) {
    // Kanter's representation.
    const double u = kPi * rng.uniform();
    const double e = rng.exponential();
    return std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha) *
           std::pow(std::sin((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
}

CadlagPath sample_on_grid(const StableParams& params, std::span<const double> times, std::uint64_t seed,
                          std::uint64_t stream) {
    params.validate();
    if (times.empty() || times.front() != 0.0) {
        throw ArgumentError("sampling grid must start at t = 0");
    }
    const auto dim = static_cast<std::size_t>(params.dim);
    std::vector<double> grid(times.begin(), times.end());
    std::vector<double> values(grid.size() * dim, 0.0);
    RandomStream rng(seed, stream);
    const double inv_alpha = 1.0 / params.alpha;
    std::vector<double> gauss(dim);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double dt = grid[k] - grid[k - 1];
        if (!(dt > 0.0)) {
            throw ArgumentError("sampling grid must be strictly increasing");
        }
        const double scale = std::pow(dt, inv_alpha);
        if (dim == 1) {
            values[k] = values[k - 1] + scale * sample_symmetric_stable(params.alpha, rng);
            continue;
        }
        const double subordinator = sample_positive_stable(0.5 * params.alpha, rng);
        const double radial = scale * std::sqrt(2.0 * subordinator);
        for (std::size_t c = 0; c < dim; ++c) {
            values[k * dim + c] = values[(k - 1) * dim + c] + radial * rng.normal();
        }
    }
    return CadlagPath(std::move(grid), std::move(values), params.dim);
}

CadlagPath sample_increments(const StableParams& params, double dt, std::size_t n_steps, std::uint64_t seed,
                             std::uint64_t stream) {
    params.validate();
    if (!(dt > 0.0)) {
        throw ParameterError("time step must be positive");
    }
    const auto grid = uniform_grid(dt, n_steps);
    return sample_on_grid(params, grid, seed, stream);
}

double levy_density_constant(const StableParams& params) {
    params.validate();
    const double a = params.alpha;
    const double d = params.dim;
    return a * std::pow(2.0, a - 1.0) * std::tgamma(0.5 * (d + a)) /
           (std::pow(kPi, 0.5 * d) * std::tgamma(1.0 - 0.5 * a));
}

double large_jump_intensity(const StableParams& params, double eps) {
    if (!(eps > 0.0)) {
        throw ParameterError("jump cutoff eps must be positive");
    }
    return levy_density_constant(params) * sphere_area(params.dim) * std::pow(eps, -params.alpha) / params.alpha;
}

double small_jump_variance(const StableParams& params, double eps) {
    if (!(eps > 0.0)) {
        throw ParameterError("jump cutoff eps must be positive");
    }
    return levy_density_constant(params) * sphere_area(params.dim) * std::pow(eps, 2.0 - params.alpha) /
           ((2.0 - params.alpha) * params.dim);
}

CadlagPath sample_via_levy_ito(const StableParams& params, double dt, std::size_t n_steps, double eps,
                               std::uint64_t seed, std::uint64_t stream, double record_cutoff) {
    params.validate();
    if (!(eps > 0.0 && eps <= 1.0)) {
        throw ParameterError("small-jump cutoff eps must lie in (0, 1], got " + std::to_string(eps));
    }
    if (!(dt > 0.0)) {
        throw ParameterError("time step must be positive");
    }
    if (record_cutoff < 0.0) {
        record_cutoff = eps;
    }
    if (record_cutoff < eps) {
        throw ParameterError("jump recording cutoff must be >= eps");
    }
    const auto dim = static_cast<std::size_t>(params.dim);
    auto grid = uniform_grid(dt, n_steps);
    std::vector<double> increments(grid.size() * dim, 0.0);
    std::vector<double> jump_times;
    std::vector<double> jump_sizes;
    RandomStream rng(seed, stream);

    const double horizon = grid.back();
    const double rate = large_jump_intensity(params, eps);
    const double sigma = std::sqrt(small_jump_variance(params, eps) * dt);
    std::vector<double> direction(dim);

    if (horizon > 0.0) {
        // Large jumps: Poisson arrivals over the whole horizon.
        double t = rng.exponential() / rate;
        while (t < horizon) {
            const double radius = eps * std::pow(rng.uniform(), -1.0 / params.alpha);
            if (dim == 1) {
                direction[0] = rng.uniform() < 0.5 ? -1.0 : 1.0;
            } else {
                double norm = 0.0;
                for (auto& c : direction) {
                    c = rng.normal();
                    norm += c * c;
                }
                norm = std::sqrt(norm);
                for (auto& c : direction) {
                    c /= norm;
                }
            }
            const auto step = std::min(n_steps - 1, static_cast<std::size_t>(t / dt));
            for (std::size_t c = 0; c < dim; ++c) {
                increments[(step + 1) * dim + c] += radius * direction[c];
            }
            if (radius >= record_cutoff) {
                jump_times.push_back(t);
                for (std::size_t c = 0; c < dim; ++c) {
                    jump_sizes.push_back(radius * direction[c]);
                }
            }
            t += rng.exponential() / rate;
        }
        // Compensated small jumps: symmetric, so the compensator vanishes and
        // only the Gaussian covariance remains.
        for (std::size_t k = 1; k < grid.size(); ++k) {
            for (std::size_t c = 0; c < dim; ++c) {
                increments[k * dim + c] += sigma * rng.normal();
            }
        }
    }

    for (std::size_t k = 1; k < grid.size(); ++k) {
        for (std::size_t c = 0; c < dim; ++c) {
            increments[k * dim + c] += increments[(k - 1) * dim + c];
        }
    }
    return CadlagPath(std::move(grid), std::move(increments), params.dim, std::move(jump_times),
                      std::move(jump_sizes), record_cutoff);
}

double heat_kernel_radial(const StableParams& params, double t, double r) {
    params.validate();
    check_time(t);
    r = std::abs(r);
    // Switch to the series once the Fourier integrand oscillates heavily.
    const double scaled = r * std::pow(t, -1.0 / params.alpha);
    if (scaled > 2.0) {
        const auto series = large_radius_series(params.alpha, params.dim, t, r, false);
        if (series.accurate) {
            return series.value;
        }
    }
    return std::max(0.0, fourier_inversion(params.alpha, params.dim, t, r));
}

double heat_kernel(const StableParams& params, double t, std::span<const double> x) {
    if (static_cast<int>(x.size()) != params.dim) {
        throw ArgumentError("point dimension does not match process dimension");
    }
    double r2 = 0.0;
    for (double c : x) {
        r2 += c * c;
    }
    return heat_kernel_radial(params, t, std::sqrt(r2));
}

double heat_kernel_mass(const StableParams& params, double t, double radius) {
    params.validate();
    check_time(t);
    if (!(radius > 0.0)) {
        throw ArgumentError("mass radius must be positive");
    }
    const auto tail = large_radius_series(params.alpha, params.dim, t, radius, true);
    if (!tail.accurate) {
        throw ArgumentError("tail series does not converge at radius " + std::to_string(radius) +
                            "; choose a larger radius");
    }
    const double area = sphere_area(params.dim);
    const double scale = std::pow(t, 1.0 / params.alpha);
    auto weighted = [&](double r) { return area * std::pow(r, params.dim - 1) * heat_kernel_radial(params, t, r); };

    // Uniform panels on the core, geometric panels outward.
    std::vector<double> edges{0.0};
    double h = 0.25 * scale;
    while (edges.back() < radius) {
        const double next = edges.back() < 4.0 * scale ? edges.back() + h : edges.back() * 1.25;
        edges.push_back(std::min(next, radius));
    }
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        mass += quad::gauss<20>(weighted, edges[i], edges[i + 1]);
    }
    return mass + tail.value;
}

double fit_heat_kernel_bound(const StableParams& params, std::span<const double> t_grid,
                             std::span<const double> r_grid) {
    params.validate();
    double best = 0.0;
    for (double t : t_grid) {
        check_time(t);
        const double scale = std::pow(t, 1.0 / params.alpha);
        for (double r : r_grid) {
            const double envelope = t * std::pow(scale + std::abs(r), -params.dim - params.alpha);
            best = std::max(best, heat_kernel_radial(params, t, r) / envelope);
        }
    }
    return best;
}

double HeatKernelTable::discrete_mass(std::size_t ti) const {
    const StableParams params{alpha, dim};
    const double area = sphere_area(dim);
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
        const double f0 = area * std::pow(radii[i], dim - 1) * at(ti, i);
        const double f1 = area * std::pow(radii[i + 1], dim - 1) * at(ti, i + 1);
        mass += 0.5 * (f0 + f1) * (radii[i + 1] - radii[i]);
    }
    const auto tail = large_radius_series(params.alpha, params.dim, t_grid[ti], radii.back(), true);
    if (tail.accurate) {
        mass += tail.value;
    }
    return mass;
}

HeatKernelTable build_heat_kernel_table(const StableParams& params, std::vector<double> t_grid,
                                        std::vector<double> radii) {
    params.validate();
    if (radii.empty() || t_grid.empty()) {
        throw ArgumentError("heat kernel table needs non-empty grids");
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < 0.0 || (i > 0 && !(radii[i] > radii[i - 1]))) {
            throw ArgumentError("radial grid must be nonnegative and strictly increasing");
        }
    }
    HeatKernelTable table{params.alpha, params.dim, std::move(t_grid), std::move(radii), {}};
    table.values.reserve(table.t_grid.size() * table.radii.size());
    for (double t : table.t_grid) {
        for (double r : table.radii) {
            table.values.push_back(heat_kernel_radial(params, t, r));
        }
    }
    return table;
}

CharFnEstimate empirical_char_function(std::span<const CadlagPath> paths, double t, std::span<const double> xi) {
    if (paths.empty()) {
        throw ArgumentError("empirical characteristic function needs a non-empty ensemble");
    }
    const auto& first = paths.front();
    if (xi.size() != static_cast<std::size_t>(first.dim())) {
        throw ArgumentError("frequency dimension does not match path dimension");
    }
    const std::size_t k = first.find_time(t);
    if (k == first.size()) {
        throw ArgumentError("time " + std::to_string(t) + " is not on the path grid");
    }
    const std::size_t n = paths.size();
    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& path = paths[i];
        if (path.size() != first.size() || path.dim() != first.dim() || path.times()[k] != first.times()[k]) {
            throw ArgumentError("ensemble paths must share the time grid");
        }
        const auto value = path.value(k);
        double phase = 0.0;
        for (std::size_t c = 0; c < xi.size(); ++c) {
            phase += xi[c] * value[c];
        }
        re[i] = std::cos(phase);
        im[i] = std::sin(phase);
    }
    // Delete-one jackknife for the mean: se^2 = (n-1)/n sum (m_{-i} - m)^2.
    auto mean_and_se = [n](const std::vector<double>& v) {
        double sum = 0.0;
        for (double x : v) {
            sum += x;
        }
        const double mean = sum / static_cast<double>(n);
        if (n < 2) {
            return std::pair{mean, 0.0};
        }
        double ss = 0.0;
        for (double x : v) {
            const double loo = (sum - x) / static_cast<double>(n - 1);
            ss += (loo - mean) * (loo - mean);
        }
        return std::pair{mean, std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n))};
    };
    const auto [mr, sr] = mean_and_se(re);
    const auto [mi, si] = mean_and_se(im);
    return CharFnEstimate{{mr, mi}, sr, si, n};
}

std::vector<CadlagPath> sample_ensemble(const StableParams& params, std::span<const double> times,
                                        std::size_t n_paths, std::uint64_t seed, unsigned threads) {
    params.validate();
    std::vector<std::optional<CadlagPath>> slots(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t i) { slots[i].emplace(sample_on_grid(params, times, seed, i)); });
    std::vector<CadlagPath> out;
    out.reserve(n_paths);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

} // namespace stablesde::noise
