#include "stablesde/drift_space.hpp"

#include "stablesde/errors.hpp"
#include "stablesde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace stablesde::drift {

namespace {

double pair_ratio(std::span<const double> points, int dim, std::span<const double> values, int width, double beta,
                  std::size_t i, std::size_t j) {
    double dx2 = 0.0;
    for (int c = 0; c < dim; ++c) {
        const double diff = points[i * dim + c] - points[j * dim + c];
        dx2 += diff * diff;
    }
    if (dx2 == 0.0) {
        return 0.0;
    }
    double dv2 = 0.0;
    for (int c = 0; c < width; ++c) {
        const double diff = values[i * width + c] - values[j * width + c];
        dv2 += diff * diff;
    }
    if (dv2 == 0.0) {
        return 0.0;
    }
    return std::sqrt(dv2) / std::pow(dx2, 0.5 * beta);
}

/// Lags used when the full pair set exceeds the budget: every small lag, then
/// geometrically spaced large ones.
std::vector<std::size_t> stratified_lags(std::size_t n, std::size_t max_pairs) {
    const std::size_t n_lags = std::max<std::size_t>(2, max_pairs / n);
    const std::size_t dense = n_lags / 2;
    std::set<std::size_t> lags;
    for (std::size_t l = 1; l <= dense && l < n; ++l) {
        lags.insert(l);
    }
    const double lo = static_cast<double>(dense + 1);
    const double hi = static_cast<double>(n - 1);
    const std::size_t sparse = n_lags - dense;
    for (std::size_t k = 0; k < sparse && lo <= hi; ++k) {
        const double frac = sparse == 1 ? 1.0 : static_cast<double>(k) / static_cast<double>(sparse - 1);
        lags.insert(static_cast<std::size_t>(std::llround(lo * std::pow(hi / lo, frac))));
    }
    return {lags.begin(), lags.end()};
}

struct SpatialSummary {
    double sup = 0.0;
    double seminorm = 0.0;
};

std::vector<double> uniform_points(double halfwidth, std::size_t per_dim, int dim) {
    std::vector<double> axis(per_dim);
    for (std::size_t i = 0; i < per_dim; ++i) {
        axis[i] = per_dim == 1 ? 0.0
                               : -halfwidth + 2.0 * halfwidth * static_cast<double>(i) /
                                                  static_cast<double>(per_dim - 1);
    }
    std::size_t total = 1;
    for (int c = 0; c < dim; ++c) {
        total *= per_dim;
    }
    std::vector<double> points(total * static_cast<std::size_t>(dim));
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rest = idx;
        for (int c = 0; c < dim; ++c) {
            points[idx * dim + c] = axis[rest % per_dim];
            rest /= per_dim;
        }
    }
    return points;
}

SpatialSummary summarize(const std::vector<double>& points, int dim, const std::vector<double>& values, double beta,
                         std::size_t max_pairs) {
    SpatialSummary s;
    const std::size_t n = points.size() / static_cast<std::size_t>(dim);
    for (std::size_t i = 0; i < n; ++i) {
        double v2 = 0.0;
        for (int c = 0; c < dim; ++c) {
            v2 += values[i * dim + c] * values[i * dim + c];
        }
        s.sup = std::max(s.sup, std::sqrt(v2));
    }
    s.seminorm = holder_seminorm_points(points, dim, values, dim, beta, max_pairs);
    return s;
}

/// Time nodes/weights on [0, T]: dyadic panels T 2^{-k-1}..T 2^{-k} with
/// 10-point Gauss rules, plus the first cell [0, T 2^{-K}] handled separately.
struct TimeRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double first_cell = 0.0;
};

TimeRule dyadic_rule(double horizon, std::size_t levels) {
    TimeRule rule;
    double right = horizon;
    for (std::size_t k = 0; k < levels; ++k) {
        const double left = 0.5 * right;
        // Two subpanels per level resolve features at the panel scale.
        for (int half = 0; half < 2; ++half) {
            const double a = left + 0.5 * (right - left) * half;
            const double b = a + 0.5 * (right - left);
            const auto gl = quad::gauss_legendre<10>(a, b);
            rule.nodes.insert(rule.nodes.end(), gl.nodes.begin(), gl.nodes.end());
            rule.weights.insert(rule.weights.end(), gl.weights.begin(), gl.weights.end());
        }
        right = left;
    }
    rule.first_cell = right;
    return rule;
}

} // namespace

double holder_seminorm_points(std::span<const double> points, int dim, std::span<const double> values, int width,
                              double beta, std::size_t max_pairs) {
    if (dim < 1 || width < 1) {
        throw ArgumentError("dimensions must be >= 1");
    }
    const std::size_t n = points.size() / static_cast<std::size_t>(dim);
    if (n < 2) {
        throw ArgumentError("Holder seminorm needs at least two grid points");
    }
    if (values.size() != n * static_cast<std::size_t>(width)) {
        throw ArgumentError("values do not match the grid");
    }
    double best = 0.0;
    if (n * (n - 1) / 2 <= max_pairs) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                best = std::max(best, pair_ratio(points, dim, values, width, beta, i, j));
            }
        }
        return best;
    }
    for (std::size_t lag : stratified_lags(n, max_pairs)) {
        for (std::size_t i = 0; i + lag < n; ++i) {
            best = std::max(best, pair_ratio(points, dim, values, width, beta, i, i + lag));
        }
    }
    return best;
}

double holder_seminorm_grid(const ScalarFn& h, double beta, std::span<const double> grid, std::size_t max_pairs) {
    if (grid.size() < 2) {
        throw ArgumentError("Holder seminorm needs at least two grid points");
    }
    std::vector<double> values(grid.size());
    std::transform(grid.begin(), grid.end(), values.begin(), h);
    return holder_seminorm_points(grid, 1, values, 1, beta, max_pairs);
}

PoissonEstimate holder_seminorm_poisson(const ScalarFn& h, double beta, std::span<const double> xi_grid,
                                        std::span<const double> x_grid, std::vector<double> kinks) {
    constexpr double half_pi = 0.5 * std::numbers::pi;
    PoissonEstimate out;
    for (double xi : xi_grid) {
        if (!(xi > 0.0)) {
            throw DomainError("Poisson parameter xi must be positive, got " + std::to_string(xi));
        }
    }
    for (double xi : xi_grid) {
        double sup = 0.0;
        for (double x : x_grid) {
            // d/dxi P_xi h(x) = -1/(pi xi) int_{-pi/2}^{pi/2} h(x - xi tan th) cos(2 th) d th
            auto integrand = [&](double th) { return h(x - xi * std::tan(th)) * std::cos(2.0 * th); };
            std::vector<double> cuts{-half_pi, half_pi};
            for (double k : kinks) {
                cuts.push_back(std::atan((x - k) / xi));
            }
            std::sort(cuts.begin(), cuts.end());
            double integral = 0.0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                if (cuts[i + 1] > cuts[i]) {
                    integral += quad::tanh_sinh(integrand, cuts[i], cuts[i + 1], 1e-10);
                }
            }
            sup = std::max(sup, std::abs(integral) / (std::numbers::pi * xi));
        }
        out.per_xi.push_back(std::pow(xi, 1.0 - beta) * sup);
        out.value = std::max(out.value, out.per_xi.back());
    }
    return out;
}

NormEstimate lebesgue_holder_norm(const DriftField& b, const NormOptions& options) {
    const auto& meta = b.meta();
    const int dim = meta.dim;
    const double p = meta.p;
    const double a = meta.sing_exponent;
    const double horizon = options.horizon.value_or(meta.horizon);
    if (!(horizon > 0.0)) {
        throw ArgumentError("norm horizon must be positive");
    }
    NormEstimate est;
    if (a > 0.0 && (std::isinf(p) || p * a >= 1.0)) {
        est.sup_part = est.seminorm_part = est.norm = kInf;
        est.divergent = true;
        return est;
    }

    const auto points = uniform_points(options.halfwidth, options.points_per_dim, dim);
    const std::size_t n_points = points.size() / static_cast<std::size_t>(dim);
    std::vector<double> values(points.size());
    auto spatial_at = [&](auto&& fill) {
        for (std::size_t i = 0; i < n_points; ++i) {
            fill(std::span<const double>(points).subspan(i * dim, dim), std::span<double>(values).subspan(i * dim, dim));
        }
        return summarize(points, dim, values, meta.beta, options.max_pairs);
    };

    const auto* form = b.separable();
    SpatialSummary profile;
    if (form != nullptr) {
        profile = spatial_at([&](auto x, auto out) { form->profile(x, out); });
    }
    auto at_time = [&](double t) -> SpatialSummary {
        if (form != nullptr) {
            const double g = std::abs(form->time_factor(t));
            return {g * profile.sup, g * profile.seminorm};
        }
        return spatial_at([&](auto x, auto out) { b.eval(t, x, out); });
    };

    const auto rule = dyadic_rule(horizon, options.time_panels);
    if (std::isinf(p)) {
        for (double t : rule.nodes) {
            const auto s = at_time(t);
            est.sup_part = std::max(est.sup_part, s.sup);
            est.seminorm_part = std::max(est.seminorm_part, s.seminorm);
        }
        est.norm = est.sup_part + est.seminorm_part;
        return est;
    }

    double sup_p = 0.0;
    double semi_p = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const auto s = at_time(rule.nodes[i]);
        sup_p += rule.weights[i] * std::pow(s.sup, p);
        semi_p += rule.weights[i] * std::pow(s.seminorm, p);
    }
    // First cell: F(t) = F(c) (t/c)^{-a}, integrated exactly against t^{-pa}.
    const double cell = rule.first_cell;
    const double mid = 0.5 * cell;
    const auto s = at_time(mid);
    const double power_integral = std::pow(mid, p * a) * std::pow(cell, 1.0 - p * a) / (1.0 - p * a);
    sup_p += std::pow(s.sup, p) * power_integral;
    semi_p += std::pow(s.seminorm, p) * power_integral;

    est.sup_part = std::pow(sup_p, 1.0 / p);
    est.seminorm_part = std::pow(semi_p, 1.0 / p);
    est.norm = std::pow(sup_p + semi_p, 1.0 / p);
    return est;
}

DriftField rescale_drift(const DriftField& b, double theta, double alpha) {
    if (!(theta > 0.0 && theta <= 1.0)) {
        throw ParameterError("rescaling factor theta must lie in (0, 1], got " + std::to_string(theta));
    }
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw ParameterError("stability index alpha must lie in (0, 2)");
    }
    const double amplitude = std::pow(theta, 1.0 - 1.0 / alpha);
    const double space = std::pow(theta, 1.0 / alpha);
    DriftMeta meta = b.meta();
    meta.label = "rescaled(" + meta.label + ")";
    const int dim = meta.dim;

    if (const auto* form = b.separable()) {
        SeparableForm scaled;
        scaled.time_factor = [g = form->time_factor, amplitude, theta](double t) { return amplitude * g(theta * t); };
        scaled.time_power = form->time_power;
        scaled.profile = [h = form->profile, space, dim](std::span<const double> x, std::span<double> out) {
            std::vector<double> y(x.begin(), x.end());
            for (int c = 0; c < dim; ++c) {
                y[c] *= space;
            }
            h(y, out);
        };
        scaled.profile_sup = form->profile_sup;
        for (double k : form->kinks) {
            scaled.kinks.push_back(k / space);
        }
        return DriftField(std::move(meta), std::move(scaled));
    }
    EvalFn eval = [b, amplitude, space, theta, dim](double t, std::span<const double> x, std::span<double> out) {
        std::vector<double> y(x.begin(), x.end());
        for (int c = 0; c < dim; ++c) {
            y[c] *= space;
        }
        b.eval(theta * t, y, out);
        for (double& v : out) {
            v *= amplitude;
        }
    };
    return DriftField(std::move(meta), std::move(eval), amplitude * b.sup_bound());
}

} // namespace stablesde::drift
