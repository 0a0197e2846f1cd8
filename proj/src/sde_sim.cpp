#include "stablesde/sde_sim.hpp"

#include "stablesde/errors.hpp"
#include "stablesde/parallel.hpp"
#include "stablesde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stablesde::sde {

namespace {

using drift::DriftField;
using noise::CadlagPath;

std::string describe_point(double t, std::span<const double> x) {
    std::ostringstream os;
    os.precision(17);
    os << "t = " << t << ", x = (";
    for (std::size_t i = 0; i < x.size(); ++i) {
        os << (i ? ", " : "") << x[i];
    }
    os << ")";
    return os.str();
}

/// int_{t0}^{t1} b(s, x) ds with x frozen.
class StepIntegral {
public:
    StepIntegral(const DriftField& b, const SolveConfig& cfg)
        : b_(b), quadrature_(cfg.quadrature), max_substeps_(cfg.max_substeps),
          singular_(b.meta().sing_exponent > 0.0), tmp_(static_cast<std::size_t>(b.dim())) {
        if (quadrature_ == Quadrature::ExactPower) {
            form_ = b.separable();
            if (form_ == nullptr || !form_->time_power) {
                throw ArgumentError("exact_power quadrature needs a separable drift with a declared power-law time factor");
            }
            power_ = *form_->time_power;
            if (!(power_ < 1.0)) {
                throw DomainError("exact_power quadrature needs a time exponent a < 1 (integrable singularity)");
            }
        }
    }

    void operator()(double t0, double t1, std::span<const double> x, std::span<double> out) {
        const double h = t1 - t0;
        std::fill(out.begin(), out.end(), 0.0);
        switch (quadrature_) {
        case Quadrature::Left:
            if (t0 == 0.0 && singular_) {
                throw DomainError("left-point rule evaluates the drift at t = 0, where it is singular; use "
                                  "midpoint or exact_power");
            }
            accumulate(t0, x, h, out);
            break;
        case Quadrature::Midpoint:
            if (t0 == 0.0 && singular_ && max_substeps_ > 0) {
                // Geometric cells [h 2^{-j-1}, h 2^{-j}] with 8 Gauss nodes each;
                // the remainder near 0 is dropped.
                double right = t1;
                for (std::size_t j = 0; j < max_substeps_; ++j) {
                    for (std::size_t i = 0; i < cell_.nodes.size(); ++i) {
                        accumulate(right * cell_.nodes[i], x, right * cell_.weights[i], out);
                    }
                    right *= 0.5;
                }
            } else {
                accumulate(t0 + 0.5 * h, x, h, out);
            }
            break;
        case Quadrature::ExactPower: {
            const double a = power_;
            const double coeff = form_->time_factor(t1) * std::pow(t1, a);
            const double weight = coeff * (std::pow(t1, 1.0 - a) - std::pow(t0, 1.0 - a)) / (1.0 - a);
            form_->profile(x, tmp_);
            for (std::size_t c = 0; c < out.size(); ++c) {
                out[c] = weight * tmp_[c];
            }
            check(t0, x, out);
            break;
        }
        }
    }

private:
    void accumulate(double t, std::span<const double> x, double w, std::span<double> out) {
        try {
            b_.eval(t, x, tmp_);
        } catch (const Error& e) {
            throw DomainError(std::string("drift evaluation failed at ") + describe_point(t, x) + ": " + e.what());
        }
        check(t, x, tmp_);
        for (std::size_t c = 0; c < out.size(); ++c) {
            out[c] += w * tmp_[c];
        }
    }

    static void check(double t, std::span<const double> x, std::span<const double> v) {
        for (double c : v) {
            if (!std::isfinite(c)) {
                throw DomainError("drift is not finite at " + describe_point(t, x));
            }
        }
    }

    const DriftField& b_;
    Quadrature quadrature_;
    std::size_t max_substeps_;
    bool singular_;
    quad::Rule cell_ = quad::gauss_legendre<8>(0.5, 1.0);
    const drift::SeparableForm* form_ = nullptr;
    double power_ = 0.0;
    std::vector<double> tmp_;
};

std::vector<std::size_t> noise_indices(const CadlagPath& noise, const SolveConfig& cfg) {
    if (cfg.t_grid.empty() || cfg.t_grid.front() != 0.0) {
        throw ArgumentError("solver grid must start at t = 0");
    }
    std::vector<std::size_t> idx(cfg.t_grid.size());
    for (std::size_t k = 0; k < cfg.t_grid.size(); ++k) {
        if (k > 0 && !(cfg.t_grid[k] > cfg.t_grid[k - 1])) {
            throw ArgumentError("solver grid must be strictly increasing");
        }
        idx[k] = noise.find_time(cfg.t_grid[k]);
        if (idx[k] == noise.size()) {
            throw ArgumentError("noise grid does not contain solver time " + std::to_string(cfg.t_grid[k]) +
                                "; the noise grid must refine the solver grid");
        }
    }
    return idx;
}

void check_dims(const DriftField& b, const CadlagPath& noise, std::span<const double> x0) {
    if (b.dim() != noise.dim() || static_cast<int>(x0.size()) != b.dim()) {
        throw ArgumentError("drift, noise and initial point dimensions differ");
    }
}

/// Shared loop: `frozen` selects whether states hold X or phi = X - L.
Trajectory solve(const DriftField& b, const CadlagPath& noise, std::span<const double> x0, const SolveConfig& cfg,
                 bool frozen) {
    check_dims(b, noise, x0);
    const auto idx = noise_indices(noise, cfg);
    const auto dim = static_cast<std::size_t>(b.dim());
    const std::size_t n = cfg.t_grid.size();
    StepIntegral integral(b, cfg);

    Trajectory traj;
    traj.dim = b.dim();
    traj.times = cfg.t_grid;
    traj.states.assign(n * dim, 0.0);
    traj.drift_integral.assign(n * dim, 0.0);

    std::vector<double> x(dim), inc(dim);
    for (std::size_t c = 0; c < dim; ++c) {
        const double l0 = noise.value(idx[0])[c];
        traj.states[c] = frozen ? x0[c] : x0[c] + l0;
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto l = noise.value(idx[k]);
        for (std::size_t c = 0; c < dim; ++c) {
            x[c] = x0[c] + traj.drift_integral[k * dim + c] + l[c];
        }
        integral(cfg.t_grid[k], cfg.t_grid[k + 1], x, inc);
        const auto l_next = noise.value(idx[k + 1]);
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = traj.drift_integral[k * dim + c] + inc[c];
            traj.drift_integral[(k + 1) * dim + c] = d;
            traj.states[(k + 1) * dim + c] = frozen ? x0[c] + d : x0[c] + d + l_next[c];
        }
    }
    return traj;
}

} // namespace

Trajectory euler_solve(const DriftField& b, const CadlagPath& noise, std::span<const double> x0,
                       const SolveConfig& cfg) {
    return solve(b, noise, x0, cfg, false);
}

Trajectory frozen_path_solve(const DriftField& b, const CadlagPath& noise, std::span<const double> x0,
                             const SolveConfig& cfg) {
    return solve(b, noise, x0, cfg, true);
}

std::vector<ConvergenceRow> mollified_convergence(const DriftField& b, const CadlagPath& noise,
                                                  std::span<const double> x0, std::span<const int> n_list,
                                                  const SolveConfig& cfg) {
    for (std::size_t i = 1; i < n_list.size(); ++i) {
        if (n_list[i] <= n_list[i - 1]) {
            throw ArgumentError("mollification levels must be increasing");
        }
    }
    std::vector<Trajectory> solutions;
    solutions.reserve(n_list.size());
    for (int n : n_list) {
        solutions.push_back(euler_solve(drift::mollify_space(b, n), noise, x0, cfg));
    }
    std::vector<ConvergenceRow> rows;
    for (std::size_t i = 0; i + 1 < solutions.size(); ++i) {
        double sup = 0.0;
        const auto& a = solutions[i];
        const auto& c = solutions[i + 1];
        for (std::size_t k = 0; k < a.size(); ++k) {
            double d2 = 0.0;
            for (int j = 0; j < a.dim; ++j) {
                const double diff = a.state(k)[j] - c.state(k)[j];
                d2 += diff * diff;
            }
            sup = std::max(sup, std::sqrt(d2));
        }
        rows.push_back({n_list[i], n_list[i + 1], sup});
    }
    return rows;
}

GapStatistic pathwise_gap_statistic(const DriftField& b, const noise::StableParams& params,
                                    std::span<const double> x, std::span<const double> y, std::size_t n_paths,
                                    const SolveConfig& cfg, std::uint64_t seed, unsigned threads) {
    if (n_paths == 0) {
        throw ArgumentError("gap statistic needs at least one path");
    }
    params.validate();
    if (static_cast<int>(x.size()) != params.dim || static_cast<int>(y.size()) != params.dim) {
        throw ArgumentError("initial points must match the noise dimension");
    }
    const auto dim = static_cast<std::size_t>(params.dim);
    std::vector<double> sup_sq(n_paths, 0.0);
    parallel_for(n_paths, threads, [&](std::size_t i) {
        const auto path = noise::sample_on_grid(params, cfg.t_grid, seed, i);
        const auto tx = euler_solve(b, path, x, cfg);
        const auto ty = euler_solve(b, path, y, cfg);
        double best = 0.0;
        for (std::size_t k = 0; k < tx.size(); ++k) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                // The shared noise cancels exactly in the difference.
                const double diff =
                    (x[c] - y[c]) + (tx.drift_integral[k * dim + c] - ty.drift_integral[k * dim + c]);
                d2 += diff * diff;
            }
            best = std::max(best, d2);
        }
        sup_sq[i] = best;
    });

    GapStatistic out;
    out.n_paths = n_paths;
    double sum = 0.0;
    for (double v : sup_sq) {
        sum += v;
    }
    out.mean = sum / static_cast<double>(n_paths);
    if (n_paths > 1) {
        double ss = 0.0;
        for (double v : sup_sq) {
            ss += (v - out.mean) * (v - out.mean);
        }
        out.standard_error = std::sqrt(ss / static_cast<double>(n_paths - 1) / static_cast<double>(n_paths));
    }
    double dist2 = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
        dist2 += (x[c] - y[c]) * (x[c] - y[c]);
    }
    if (dist2 > 0.0) {
        out.ratio = out.mean / dist2;
        out.ratio_se = out.standard_error / dist2;
    }
    return out;
}

std::vector<double> graded_grid(double horizon, double t_min, double ratio, double h_max) {
    if (!(horizon > 0.0) || !(t_min > 0.0) || !(ratio > 1.0) || !(h_max > 0.0)) {
        throw ParameterError("graded grid needs T > 0, t_min > 0, ratio > 1 and h_max > 0");
    }
    std::vector<double> grid{0.0};
    double t = std::min(t_min, horizon);
    while (t < horizon) {
        grid.push_back(t);
        const double step = std::min((ratio - 1.0) * t, h_max);
        t += step;
        if (horizon - t < 0.5 * step) {
            t = horizon;
        }
    }
    grid.push_back(horizon);
    return grid;
}

} // namespace stablesde::sde
