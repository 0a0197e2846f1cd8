#include "stablesde/drift_space.hpp"

#include "stablesde/errors.hpp"
#include "stablesde/quadrature.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stablesde::drift {

namespace {

double bump(double u2) { return u2 < 1.0 ? std::exp(-1.0 / (1.0 - u2)) : 0.0; }

/// Normalized weights of the spatial mollifier on the lattice z_j = j / (n M).
template <class Visit>
void lattice_average(std::span<const double> x, int n, int dim, Visit&& visit) {
    const int m = dim == 1 ? 32 : 16;
    const double spacing = 1.0 / (static_cast<double>(n) * m);
    std::vector<long long> center(static_cast<std::size_t>(dim));
    for (int c = 0; c < dim; ++c) {
        center[c] = std::llround(x[c] / spacing);
    }
    const long long reach = m + 1;
    if (dim == 1) {
        visit.begin();
        for (long long k = 1; k <= reach; ++k) {
            for (long long sgn : {1LL, -1LL}) {
                const long long j = center[0] + sgn * k;
                const double z = static_cast<double>(j) * spacing;
                const double u = n * (x[0] - z);
                const double w = bump(u * u);
                if (w > 0.0) {
                    visit.add(sgn > 0 ? 0 : 1, std::span<const double>(&z, 1), w);
                }
            }
        }
        const double z0 = static_cast<double>(center[0]) * spacing;
        const double u0 = n * (x[0] - z0);
        const double w0 = bump(u0 * u0);
        if (w0 > 0.0) {
            visit.add(2, std::span<const double>(&z0, 1), w0);
        }
        return;
    }
    visit.begin();
    std::vector<long long> offset(static_cast<std::size_t>(dim), -reach);
    std::vector<double> z(static_cast<std::size_t>(dim));
    while (true) {
        double u2 = 0.0;
        for (int c = 0; c < dim; ++c) {
            z[c] = static_cast<double>(center[c] + offset[c]) * spacing;
            const double u = n * (x[c] - z[c]);
            u2 += u * u;
        }
        const double w = bump(u2);
        if (w > 0.0) {
            visit.add(2, z, w);
        }
        int c = 0;
        while (c < dim && ++offset[c] > reach) {
            offset[c] = -reach;
            ++c;
        }
        if (c == dim) {
            break;
        }
    }
}

/// Accumulates w * f(z) separately to the right of, left of, and at the
/// lattice centre so that odd functions average to exactly 0 at x = 0.
template <class Fn>
struct Averager {
    Fn fn;
    int width;
    std::vector<double> sums;
    std::vector<double> tmp;
    double weight = 0.0;

    void begin() {
        sums.assign(3 * static_cast<std::size_t>(width), 0.0);
        tmp.assign(static_cast<std::size_t>(width), 0.0);
        weight = 0.0;
    }
    void add(int slot, std::span<const double> z, double w) {
        fn(z, std::span<double>(tmp));
        for (int c = 0; c < width; ++c) {
            sums[slot * width + c] += w * tmp[c];
        }
        weight += w;
    }
    void finish(std::span<double> out) const {
        for (int c = 0; c < width; ++c) {
            out[c] = (sums[2 * width + c] + (sums[c] + sums[width + c])) / weight;
        }
    }
};

double time_bump_mass() {
    static const double mass =
        quad::tanh_sinh([](double s) { return bump((2.0 * s - 1.0) * (2.0 * s - 1.0)); }, 0.0, 1.0, 1e-14);
    return mass;
}

/// rho_n(s) = n rho(n s) on [0, 1/n], unit mass.
double time_kernel(double s, int n) {
    const double u = 2.0 * n * s - 1.0;
    return n * bump(u * u) / time_bump_mass();
}

} // namespace

DriftField mollify_space(const DriftField& b, int n) {
    if (n < 1) {
        throw ParameterError("mollification level n must be >= 1");
    }
    DriftMeta meta = b.meta();
    meta.label = "mollify_space(" + meta.label + "," + std::to_string(n) + ")";
    const int dim = meta.dim;

    if (const auto* form = b.separable()) {
        SeparableForm smooth = *form;
        smooth.kinks.clear();
        smooth.profile = [h = form->profile, n, dim](std::span<const double> x, std::span<double> out) {
            Averager<decltype(h)> avg{h, dim, {}, {}, 0.0};
            lattice_average(x, n, dim, avg);
            avg.finish(out);
        };
        return DriftField(std::move(meta), std::move(smooth));
    }
    EvalFn eval = [b, n, dim](double t, std::span<const double> x, std::span<double> out) {
        auto at_t = [&b, t](std::span<const double> z, std::span<double> v) { b.eval(t, z, v); };
        Averager<decltype(at_t)> avg{at_t, dim, {}, {}, 0.0};
        lattice_average(x, n, dim, avg);
        avg.finish(out);
    };
    return DriftField(std::move(meta), std::move(eval), b.sup_bound());
}

DriftField mollify_time(const DriftField& b, int n) {
    if (n < 1) {
        throw ParameterError("mollification level n must be >= 1");
    }
    DriftMeta meta = b.meta();
    const bool singular = meta.sing_exponent > 0.0;
    meta.sing_exponent = 0.0;
    meta.label = "mollify_time(" + meta.label + "," + std::to_string(n) + ")";
    const double width = 1.0 / n;

    if (const auto* form = b.separable()) {
        if (form->time_power && *form->time_power == 0.0) {
            return b;
        }
        const auto g = form->time_factor;
        const double extension = singular ? 0.0 : g(0.0);
        SeparableForm smooth = *form;
        smooth.time_power.reset();
        smooth.time_factor = [g, n, width, extension](double t) {
            const double reach = std::min(t, width);
            double value = 0.0;
            if (reach > 0.0) {
                // u = t - s runs over [t - reach, t]; the singular end u = 0 is
                // an endpoint, which tanh-sinh never evaluates.
                value = quad::tanh_sinh([&](double u) { return time_kernel(t - u, n) * g(u); }, t - reach, t, 1e-12);
            }
            if (t < width && extension != 0.0) {
                value += extension * quad::tanh_sinh([&](double s) { return time_kernel(s, n); }, std::max(t, 0.0),
                                                     width, 1e-12);
            }
            return value;
        };
        return DriftField(std::move(meta), std::move(smooth));
    }

    const auto rule = quad::gauss_legendre<30>(0.0, width);
    std::vector<double> weights(rule.weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i] = rule.weights[i] * time_kernel(rule.nodes[i], n);
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) {
        w /= total;
    }
    EvalFn eval = [b, nodes = rule.nodes, weights, singular](double t, std::span<const double> x,
                                                              std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        std::vector<double> tmp(out.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double tau = t - nodes[i];
            if (tau <= 0.0 && singular) {
                continue;
            }
            b.eval(std::max(tau, 0.0), x, tmp);
            for (std::size_t c = 0; c < out.size(); ++c) {
                out[c] += weights[i] * tmp[c];
            }
        }
    };
    return DriftField(std::move(meta), std::move(eval), b.sup_bound());
}

ScalarFn lipschitz_envelope(ScalarFn h, double n, EnvelopeSide side, double sup_h, std::vector<double> kinks) {
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw ParameterError("Lipschitz constant n must be positive, got " + std::to_string(n));
    }
    if (!(sup_h >= 0.0) || !std::isfinite(sup_h)) {
        throw ParameterError("envelope needs a finite bound sup|h|");
    }
    std::sort(kinks.begin(), kinks.end());
    const double sign = side == EnvelopeSide::FromAbove ? 1.0 : -1.0;
    const double window = 2.0 * sup_h / n;

    return [h = std::move(h), n, sign, window, kinks = std::move(kinks)](double x) {
        // Maximize phi(y) = sign*h(y) - n|y - x|; the envelope is sign * max.
        auto phi = [&](double y) { return sign * h(y) - n * std::abs(y - x); };
        double best = phi(x);
        if (window == 0.0) {
            return sign * best;
        }
        std::vector<double> cuts{x - window, x, x + window};
        for (double k : kinks) {
            if (k > x - window && k < x + window && k != x) {
                cuts.push_back(k);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        constexpr int kScan = 24;
        for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
            const double a = cuts[piece];
            const double b = cuts[piece + 1];
            double values[kScan + 1];
            int arg = 0;
            for (int i = 0; i <= kScan; ++i) {
                const double y = a + (b - a) * i / kScan;
                values[i] = phi(y);
                if (values[i] > values[arg]) {
                    arg = i;
                }
            }
            best = std::max(best, values[arg]);
            const double lo = a + (b - a) * std::max(arg - 1, 0) / kScan;
            const double hi = a + (b - a) * std::min(arg + 1, kScan) / kScan;
            // Brent on the unit interval: its absolute tolerance would otherwise
            // swamp maximizers much closer to the piece boundary than 1e-8.
            const auto res = boost::math::tools::brent_find_minima(
                [&](double u) { return -phi(lo + (hi - lo) * u); }, 0.0, 1.0, std::numeric_limits<double>::digits);
            best = std::max(best, -res.second);
        }
        return sign * best;
    };
}

} // namespace stablesde::drift
