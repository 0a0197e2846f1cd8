#include "stablesde/kolmogorov_pde.hpp"

#include "stablesde/errors.hpp"
#include "stablesde/parallel.hpp"
#include "stablesde/quadrature.hpp"
#include "stablesde/stable_noise.hpp"

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>

namespace stablesde::pde {

namespace {

using cplx = std::complex<double>;

// ------------------------------------------------------------------ FFT

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

/// Real-to-complex transform pair on an n^dim periodic grid.
class Fft {
public:
    Fft(int dim, int n) : points_(1), modes_(1) {
        for (int d = 0; d < dim; ++d) {
            points_ *= static_cast<std::size_t>(n);
        }
        modes_ = points_ / static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);
        real_ = fftw_alloc_real(points_);
        spec_ = fftw_alloc_complex(modes_);
        std::lock_guard lock(planner_mutex());
        if (dim == 1) {
            forward_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
            inverse_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
        } else {
            forward_ = fftw_plan_dft_r2c_2d(n, n, real_, spec_, FFTW_ESTIMATE);
            inverse_ = fftw_plan_dft_c2r_2d(n, n, spec_, real_, FFTW_ESTIMATE);
        }
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    ~Fft() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    std::size_t points() const { return points_; }
    std::size_t modes() const { return modes_; }

    void forward(std::span<const double> in, std::span<cplx> out) {
        std::copy(in.begin(), in.end(), real_);
        fftw_execute(forward_);
        for (std::size_t m = 0; m < modes_; ++m) {
            out[m] = cplx(spec_[m][0], spec_[m][1]);
        }
    }

    /// Normalized inverse of `forward`.
    void inverse(std::span<const cplx> in, std::span<double> out) {
        for (std::size_t m = 0; m < modes_; ++m) {
            spec_[m][0] = in[m].real();
            spec_[m][1] = in[m].imag();
        }
        fftw_execute(inverse_);
        const double scale = 1.0 / static_cast<double>(points_);
        for (std::size_t j = 0; j < points_; ++j) {
            out[j] = real_[j] * scale;
        }
    }

private:
    std::size_t points_;
    std::size_t modes_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

// ------------------------------------------------------------------ phi functions

/// phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2 without cancellation.
void phi_functions(double z, double& phi1, double& phi2) {
    if (std::abs(z) < 1.0) {
        // phi_j(z) = sum_k z^k / (k + j)!
        double term1 = 1.0;
        double term2 = 0.5;
        phi1 = 0.0;
        phi2 = 0.0;
        for (int k = 0; k < 25; ++k) {
            phi1 += term1;
            phi2 += term2;
            term1 *= z / (k + 2);
            term2 *= z / (k + 3);
        }
        return;
    }
    const double em1 = std::expm1(z);
    phi1 = em1 / z;
    phi2 = (em1 - z) / (z * z);
}

// ------------------------------------------------------------------ problem

/// Wave numbers of the r2c layout.
struct Spectral {
    int dim;
    int n;
    std::vector<double> mu_base;               ///< |xi|^alpha per mode
    std::vector<std::vector<double>> deriv_xi; ///< xi_d per mode, 0 on Nyquist
};

Spectral make_spectral(int dim, int n, double halfwidth, double alpha) {
    const double scale = 3.141592653589793238 / halfwidth;
    const int half = n / 2 + 1;
    auto signed_k = [n](int i) { return i <= n / 2 ? i : i - n; };
    Spectral s{dim, n, {}, {}};
    s.deriv_xi.assign(static_cast<std::size_t>(dim), {});
    if (dim == 1) {
        for (int i = 0; i < half; ++i) {
            const double xi = scale * i;
            s.mu_base.push_back(std::pow(std::abs(xi), alpha));
            s.deriv_xi[0].push_back(i == n / 2 ? 0.0 : xi);
        }
        return s;
    }
    for (int i0 = 0; i0 < n; ++i0) {
        for (int i1 = 0; i1 < half; ++i1) {
            const double xi0 = scale * signed_k(i0);
            const double xi1 = scale * i1;
            s.mu_base.push_back(std::pow(std::hypot(xi0, xi1), alpha));
            s.deriv_xi[0].push_back(i0 == n / 2 ? 0.0 : xi0);
            s.deriv_xi[1].push_back(i1 == n / 2 ? 0.0 : xi1);
        }
    }
    return s;
}

std::vector<double> axis(int n, double halfwidth) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        x[j] = -halfwidth + 2.0 * halfwidth * j / n;
    }
    return x;
}

void grid_point(const std::vector<double>& ax, int dim, std::size_t j, std::span<double> out) {
    const std::size_t n = ax.size();
    if (dim == 1) {
        out[0] = ax[j];
    } else {
        out[0] = ax[j / n];
        out[1] = ax[j % n];
    }
}

std::string describe(double t, std::span<const double> x) {
    std::ostringstream os;
    os.precision(17);
    os << "t = " << t << ", x = (";
    for (std::size_t i = 0; i < x.size(); ++i) {
        os << (i ? ", " : "") << x[i];
    }
    os << ")";
    return os.str();
}

/// Everything the Picard map needs, with b and f tabulated on the grid.
struct Problem {
    int dim = 1;
    int n = 0;
    int comps = 1;
    double halfwidth = 0.0;
    double alpha = 0.0;
    double lambda = 0.0;
    std::vector<double> times;
    std::vector<double> drift;  ///< [t][dir][pt]
    std::vector<double> source; ///< [t][comp][pt]
    std::vector<cplx> initial;  ///< [comp][mode], empty for zero
    bool zero_drift = true;
};

void tabulate(const drift::EvalFn& fn, int width, const std::vector<double>& times, const std::vector<double>& eval_t,
              const std::vector<double>& ax, int dim, std::vector<double>& out, const char* what) {
    const std::size_t pts = dim == 1 ? ax.size() : ax.size() * ax.size();
    out.assign(times.size() * static_cast<std::size_t>(width) * pts, 0.0);
    std::vector<double> x(static_cast<std::size_t>(dim)), v(static_cast<std::size_t>(width));
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (std::size_t j = 0; j < pts; ++j) {
            grid_point(ax, dim, j, x);
            try {
                fn(eval_t[i], x, v);
            } catch (const Error& e) {
                throw DomainError(std::string(what) + " evaluation failed at " + describe(eval_t[i], x) + ": " +
                                  e.what());
            }
            for (int c = 0; c < width; ++c) {
                if (!std::isfinite(v[c])) {
                    throw DomainError(std::string(what) + " is not finite at " + describe(eval_t[i], x));
                }
                out[(i * width + c) * pts + j] = v[c];
            }
        }
    }
}

/// `eval_t` maps solver time slices to the times at which b and f are evaluated.
Problem build_problem(const drift::DriftField& b, const Source& f, const PdeConfig& cfg, double alpha,
                      const std::vector<double>& times, const std::vector<double>& eval_t) {
    cfg.validate();
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw ParameterError("alpha must lie in (0, 2)");
    }
    if (b.dim() != cfg.dim) {
        throw ArgumentError("drift dimension differs from the PDE dimension");
    }
    if (f.components < 1 || !f.eval) {
        throw ArgumentError("source must have at least one component");
    }
    Problem pr;
    pr.dim = cfg.dim;
    pr.n = cfg.n_modes;
    pr.comps = f.components;
    pr.halfwidth = cfg.halfwidth;
    pr.alpha = alpha;
    pr.lambda = cfg.lambda;
    pr.times = times;
    const auto ax = axis(cfg.n_modes, cfg.halfwidth);
    tabulate([&b](double t, std::span<const double> x, std::span<double> out) { b.eval(t, x, out); }, cfg.dim, times,
             eval_t, ax, cfg.dim, pr.drift, "drift");
    tabulate(f.eval, f.components, times, eval_t, ax, cfg.dim, pr.source, "source");
    pr.zero_drift = std::all_of(pr.drift.begin(), pr.drift.end(), [](double v) { return v == 0.0; });
    if (cfg.initial) {
        Fft fft(cfg.dim, cfg.n_modes);
        const std::size_t pts = fft.points();
        if (cfg.initial->size() != pts * static_cast<std::size_t>(pr.comps)) {
            throw ArgumentError("initial slice must hold components * n_modes^dim values");
        }
        pr.initial.resize(fft.modes() * static_cast<std::size_t>(pr.comps));
        for (int c = 0; c < pr.comps; ++c) {
            fft.forward(std::span<const double>(*cfg.initial).subspan(c * pts, pts),
                        std::span<cplx>(pr.initial).subspan(c * fft.modes(), fft.modes()));
        }
    }
    return pr;
}

/// One application of the Picard map with exponential trapezoid stepping.
class PicardMap {
public:
    explicit PicardMap(const Problem& pr)
        : pr_(pr), fft_(pr.dim, pr.n), spectral_(make_spectral(pr.dim, pr.n, pr.halfwidth, pr.alpha)) {
        const std::size_t modes = fft_.modes();
        const std::size_t steps = pr.times.size() - 1;
        decay_.resize(steps * modes);
        w_left_.resize(steps * modes);
        w_right_.resize(steps * modes);
        for (std::size_t i = 0; i < steps; ++i) {
            const double h = pr.times[i + 1] - pr.times[i];
            for (std::size_t m = 0; m < modes; ++m) {
                const double mu = pr.lambda + spectral_.mu_base[m];
                const double z = -mu * h;
                double phi1 = 0.0, phi2 = 0.0;
                phi_functions(z, phi1, phi2);
                decay_[i * modes + m] = std::exp(z);
                w_left_[i * modes + m] = h * (phi1 - phi2);
                w_right_[i * modes + m] = h * phi2;
            }
        }
    }

    std::size_t points() const { return fft_.points(); }
    std::size_t modes() const { return fft_.modes(); }

    /// Fills values, gradient and spectrum of Phi(u) given grad u.
    void apply(std::span<const double> grad_in, GridFunction& out) {
        const std::size_t pts = fft_.points();
        const std::size_t modes = fft_.modes();
        const std::size_t nt = pr_.times.size();
        const auto comps = static_cast<std::size_t>(pr_.comps);
        const auto dim = static_cast<std::size_t>(pr_.dim);

        std::vector<double> g(pts);
        std::vector<cplx> g_prev(modes), g_next(modes), u_hat(modes), tmp(modes);
        std::vector<double> real(pts);
        for (std::size_t c = 0; c < comps; ++c) {
            auto source_hat = [&](std::size_t i, std::vector<cplx>& dst) {
                const double* f = &pr_.source[(i * comps + c) * pts];
                std::copy(f, f + pts, g.begin());
                if (!pr_.zero_drift) {
                    for (std::size_t d = 0; d < dim; ++d) {
                        const double* b = &pr_.drift[(i * dim + d) * pts];
                        const double* du = &grad_in[((i * comps + c) * dim + d) * pts];
                        for (std::size_t j = 0; j < pts; ++j) {
                            g[j] += b[j] * du[j];
                        }
                    }
                }
                fft_.forward(g, dst);
            };
            if (pr_.initial.empty()) {
                std::fill(u_hat.begin(), u_hat.end(), cplx(0.0, 0.0));
            } else {
                std::copy_n(pr_.initial.begin() + static_cast<std::ptrdiff_t>(c * modes), modes, u_hat.begin());
            }
            source_hat(0, g_prev);
            store(0, c, u_hat, out, tmp, real);
            for (std::size_t i = 0; i + 1 < nt; ++i) {
                source_hat(i + 1, g_next);
                const std::size_t off = i * modes;
                for (std::size_t m = 0; m < modes; ++m) {
                    u_hat[m] = decay_[off + m] * u_hat[m] + w_left_[off + m] * g_prev[m] + w_right_[off + m] * g_next[m];
                }
                store(i + 1, c, u_hat, out, tmp, real);
                std::swap(g_prev, g_next);
            }
        }
    }

private:
    void store(std::size_t i, std::size_t c, const std::vector<cplx>& u_hat, GridFunction& out, std::vector<cplx>& tmp,
               std::vector<double>& real) {
        const std::size_t pts = fft_.points();
        const std::size_t modes = fft_.modes();
        const auto comps = static_cast<std::size_t>(pr_.comps);
        const auto dim = static_cast<std::size_t>(pr_.dim);
        std::copy(u_hat.begin(), u_hat.end(), out.spectrum.begin() + static_cast<std::ptrdiff_t>((i * comps + c) * modes));
        fft_.inverse(u_hat, std::span<double>(out.values).subspan((i * comps + c) * pts, pts));
        for (std::size_t d = 0; d < dim; ++d) {
            for (std::size_t m = 0; m < modes; ++m) {
                tmp[m] = cplx(0.0, spectral_.deriv_xi[d][m]) * u_hat[m];
            }
            fft_.inverse(tmp, real);
            std::copy(real.begin(), real.end(),
                      out.gradient.begin() + static_cast<std::ptrdiff_t>(((i * comps + c) * dim + d) * pts));
        }
    }

    const Problem& pr_;
    Fft fft_;
    Spectral spectral_;
    std::vector<double> decay_, w_left_, w_right_;
};

GridFunction empty_solution(const Problem& pr, const PicardMap& map) {
    GridFunction u;
    u.dim = pr.dim;
    u.components = pr.comps;
    u.n_modes = pr.n;
    u.halfwidth = pr.halfwidth;
    u.alpha = pr.alpha;
    u.lambda = pr.lambda;
    u.x = axis(pr.n, pr.halfwidth);
    u.times = pr.times;
    const std::size_t nt = pr.times.size();
    const auto comps = static_cast<std::size_t>(pr.comps);
    u.values.assign(nt * comps * map.points(), 0.0);
    u.gradient.assign(nt * comps * static_cast<std::size_t>(pr.dim) * map.points(), 0.0);
    u.spectrum.assign(nt * comps * map.modes(), cplx(0.0, 0.0));
    return u;
}

double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i] - b[i]);
        if (!(d <= r)) {
            r = d; // also propagates NaN
        }
    }
    return r;
}

GridFunction picard_solve(const Problem& pr, const PdeConfig& cfg) {
    PicardMap map(pr);
    GridFunction current = empty_solution(pr, map);
    GridFunction next = empty_solution(pr, map);
    double residual = std::numeric_limits<double>::infinity();
    int iter = 0;
    while (true) {
        map.apply(current.gradient, next);
        residual = sup_distance(next.values, current.values);
        ++iter;
        std::swap(current, next);
        if (!std::isfinite(residual) || residual > 1e100) {
            throw ContractionError("Picard iteration diverged at lambda = " + std::to_string(pr.lambda) +
                                   "; increase lambda or refine the grid");
        }
        if (residual < cfg.picard_tol) {
            break;
        }
        if (iter >= cfg.picard_max_iters) {
            std::ostringstream os;
            os << "Picard iteration did not contract to " << cfg.picard_tol << " within " << iter
               << " iterations (last residual " << residual << ", lambda = " << pr.lambda
               << "); increase lambda or refine the grid";
            throw ContractionError(os.str());
        }
    }
    // Report the residual of the returned iterate itself.
    map.apply(current.gradient, next);
    current.picard_residual = sup_distance(next.values, current.values);
    current.picard_iterations = iter;
    return current;
}

double parse_number(const std::string& text, const std::string& id) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ParameterError("malformed number '" + text + "' in source id '" + id + "'");
    }
    return v;
}

/// L^p over the time grid of per-slice values (trapezoid on v^p; sup for p = inf).
double time_norm(const std::vector<double>& times, const std::vector<double>& per_slice, double p) {
    if (std::isinf(p)) {
        return *std::max_element(per_slice.begin(), per_slice.end());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        acc += 0.5 * (times[i + 1] - times[i]) * (std::pow(per_slice[i], p) + std::pow(per_slice[i + 1], p));
    }
    return std::pow(acc, 1.0 / p);
}

double sup_abs(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s = std::max(s, std::abs(x));
    }
    return s;
}

} // namespace

// ------------------------------------------------------------------ public API

Source make_source(const std::string& id) {
    const auto colon = id.find(':');
    const std::string name = id.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : id.substr(colon + 1);
    auto no_args = [&] {
        if (!args.empty()) {
            throw ParameterError("source '" + name + "' takes no parameters");
        }
    };
    Source s;
    s.label = id;
    if (name == "zero") {
        no_args();
        s.eval = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    } else if (name == "constant") {
        const double c = parse_number(args, id);
        s.eval = [c](double, std::span<const double>, std::span<double> out) { out[0] = c; };
    } else if (name == "sin") {
        no_args();
        s.eval = [](double, std::span<const double> x, std::span<double> out) { out[0] = std::sin(x[0]); };
    } else if (name == "cos") {
        no_args();
        s.eval = [](double, std::span<const double> x, std::span<double> out) { out[0] = std::cos(x[0]); };
    } else if (name == "exp-sin") {
        no_args();
        s.eval = [](double, std::span<const double> x, std::span<double> out) { out[0] = std::exp(std::sin(x[0])); };
    } else if (name == "sin-power") {
        const double beta = parse_number(args, id);
        if (!(beta > 0.0 && beta <= 1.0)) {
            throw ParameterError("sin-power exponent must lie in (0, 1]");
        }
        s.eval = [beta](double, std::span<const double> x, std::span<double> out) {
            const double v = std::sin(x[0]);
            out[0] = std::copysign(std::pow(std::abs(v), beta), v);
        };
    } else {
        throw ArgumentError("unknown source id '" + id +
                            "' (expected zero, constant:c, sin, cos, exp-sin, sin-power:beta)");
    }
    return s;
}

void PdeConfig::validate() const {
    if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) {
        throw ParameterError("domain half-width R must be positive");
    }
    if (n_modes < 8 || (n_modes & (n_modes - 1)) != 0) {
        throw ParameterError("n_modes must be a power of two >= 8");
    }
    if (dim != 1 && dim != 2) {
        throw ParameterError("the PDE solver supports dim 1 and 2");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ParameterError("lambda must be >= 0");
    }
    if (!(picard_tol > 0.0)) {
        throw ParameterError("picard_tol must be positive");
    }
    if (picard_max_iters < 1) {
        throw ParameterError("picard_max_iters must be >= 1");
    }
    if (t_grid.size() < 2 || t_grid.front() != 0.0) {
        throw ArgumentError("time grid must start at 0 and have at least two points");
    }
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > t_grid[i - 1])) {
            throw ArgumentError("time grid must be strictly increasing");
        }
    }
}

std::size_t GridFunction::points() const {
    return dim == 1 ? static_cast<std::size_t>(n_modes) : static_cast<std::size_t>(n_modes) * n_modes;
}

std::size_t GridFunction::modes() const {
    const auto half = static_cast<std::size_t>(n_modes / 2 + 1);
    return dim == 1 ? half : static_cast<std::size_t>(n_modes) * half;
}

std::span<const double> GridFunction::slice(std::size_t ti, int component) const {
    const std::size_t pts = points();
    return std::span<const double>(values).subspan((ti * components + component) * pts, pts);
}

std::span<const double> GridFunction::gradient_slice(std::size_t ti, int component, int direction) const {
    const std::size_t pts = points();
    return std::span<const double>(gradient).subspan(((ti * components + component) * dim + direction) * pts, pts);
}

std::span<const std::complex<double>> GridFunction::spectrum_slice(std::size_t ti, int component) const {
    const std::size_t m = modes();
    return std::span<const std::complex<double>>(spectrum).subspan((ti * components + component) * m, m);
}

std::vector<double> GridFunction::point(std::size_t j) const {
    std::vector<double> p(static_cast<std::size_t>(dim));
    grid_point(x, dim, j, p);
    return p;
}

double GridFunction::sup_abs_value() const { return sup_abs(values); }

double GridFunction::sup_abs_gradient() const {
    const std::size_t pts = points();
    double best = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (int c = 0; c < components; ++c) {
            for (std::size_t j = 0; j < pts; ++j) {
                double s = 0.0;
                for (int d = 0; d < dim; ++d) {
                    const double g = gradient_slice(i, c, d)[j];
                    s += g * g;
                }
                best = std::max(best, std::sqrt(s));
            }
        }
    }
    return best;
}

GridFunction solve_mild(const drift::DriftField& b, const Source& f, const PdeConfig& cfg, double alpha) {
    const Problem pr = build_problem(b, f, cfg, alpha, cfg.t_grid, cfg.t_grid);
    return picard_solve(pr, cfg);
}

double picard_residual(const drift::DriftField& b, const Source& f, const PdeConfig& cfg, double alpha,
                       const GridFunction& u) {
    const Problem pr = build_problem(b, f, cfg, alpha, cfg.t_grid, cfg.t_grid);
    PicardMap map(pr);
    GridFunction image = empty_solution(pr, map);
    if (u.values.size() != image.values.size() || u.gradient.size() != image.gradient.size()) {
        throw ArgumentError("grid function does not match the configuration");
    }
    map.apply(u.gradient, image);
    return sup_distance(image.values, u.values);
}

GridFunction solve_backward_vector(const drift::DriftField& b, const PdeConfig& cfg, double alpha) {
    cfg.validate();
    if (cfg.initial) {
        throw ArgumentError("the backward problem has a zero terminal condition; do not pass an initial slice");
    }
    const std::size_t nt = cfg.t_grid.size();
    const double horizon = cfg.t_grid.back();
    // Reversed time s = T - t; b and the source are evaluated at T - s.
    std::vector<double> s_grid(nt), eval_t(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        eval_t[i] = cfg.t_grid[nt - 1 - i];
        s_grid[i] = horizon - eval_t[i];
    }
    s_grid[0] = 0.0;
    Source src;
    src.components = b.dim();
    src.label = "backward(" + b.meta().label + ")";
    src.eval = [&b](double t, std::span<const double> x, std::span<double> out) { b.eval(t, x, out); };
    const Problem pr = build_problem(b, src, cfg, alpha, s_grid, eval_t);
    GridFunction v = picard_solve(pr, cfg);

    GridFunction u = v;
    u.times = cfg.t_grid;
    const std::size_t vb = v.values.size() / nt;
    const std::size_t gb = v.gradient.size() / nt;
    const std::size_t sb = v.spectrum.size() / nt;
    for (std::size_t i = 0; i < nt; ++i) {
        const std::size_t r = nt - 1 - i;
        std::copy_n(v.values.begin() + static_cast<std::ptrdiff_t>(r * vb), vb,
                    u.values.begin() + static_cast<std::ptrdiff_t>(i * vb));
        std::copy_n(v.gradient.begin() + static_cast<std::ptrdiff_t>(r * gb), gb,
                    u.gradient.begin() + static_cast<std::ptrdiff_t>(i * gb));
        std::copy_n(v.spectrum.begin() + static_cast<std::ptrdiff_t>(r * sb), sb,
                    u.spectrum.begin() + static_cast<std::ptrdiff_t>(i * sb));
    }
    return u;
}

McEstimate feynman_kac_oracle(const Source& f, double lambda, double alpha, double t, std::span<const double> x,
                              std::size_t n_paths, std::uint64_t seed, unsigned threads) {
    const noise::StableParams params{alpha, static_cast<int>(x.size())};
    params.validate();
    if (!(t > 0.0)) {
        throw DomainError("Feynman-Kac oracle needs t > 0");
    }
    if (!(lambda >= 0.0)) {
        throw ParameterError("lambda must be >= 0");
    }
    if (n_paths < 2) {
        throw ArgumentError("Feynman-Kac oracle needs at least two paths");
    }
    const auto rule = quad::gauss_legendre<32>(0.0, t);
    std::vector<double> grid{0.0};
    grid.insert(grid.end(), rule.nodes.begin(), rule.nodes.end());
    std::vector<double> weights(rule.weights.size());
    for (std::size_t j = 0; j < weights.size(); ++j) {
        weights[j] = rule.weights[j] * std::exp(-lambda * rule.nodes[j]);
    }

    std::vector<double> samples(n_paths);
    const std::size_t dim = x.size();
    parallel_for(n_paths, threads, [&](std::size_t i) {
        const auto path = noise::sample_on_grid(params, grid, seed, i);
        std::vector<double> z(dim), v(static_cast<std::size_t>(f.components));
        double acc = 0.0;
        for (std::size_t j = 0; j < weights.size(); ++j) {
            const auto l = path.value(j + 1);
            for (std::size_t c = 0; c < dim; ++c) {
                z[c] = x[c] + l[c];
            }
            f.eval(t - rule.nodes[j], z, v);
            acc += weights[j] * v[0];
        }
        samples[i] = acc;
    });

    // Delete-one jackknife of the sample mean.
    const double n = static_cast<double>(n_paths);
    const double total = std::accumulate(samples.begin(), samples.end(), 0.0);
    McEstimate out;
    out.n_paths = n_paths;
    out.value = total / n;
    double ss = 0.0;
    for (double s : samples) {
        const double loo = (total - s) / (n - 1.0);
        ss += (loo - out.value) * (loo - out.value);
    }
    out.standard_error = std::sqrt((n - 1.0) / n * ss);
    return out;
}

double schauder_ratio(const GridFunction& u, const Source& f, double p, double beta, double theta) {
    if (u.dim != 1) {
        throw ArgumentError("schauder_ratio supports one-dimensional solutions");
    }
    if (!(p >= 1.0)) {
        throw ParameterError("p must be >= 1");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw ParameterError("beta must lie in (0, 1)");
    }
    const double alpha = u.alpha;
    const double order = alpha + beta - theta;
    if (!(theta > 0.0) || !(order > 0.0) || !(order < 2.0) || (alpha < 1.0 && !(theta < alpha + beta - 1.0))) {
        std::ostringstream os;
        os << "theta = " << theta << " is outside the admissible range (theta > 0, 0 < alpha + beta - theta < 2"
           << (alpha < 1.0 ? ", theta < alpha + beta - 1" : "") << ")";
        throw DomainError(os.str());
    }
    const std::size_t nt = u.times.size();
    const std::size_t pts = u.points();
    std::vector<double> f_norm(nt), u_norm(nt), fv(pts), v(1);
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < pts; ++j) {
            const double xj = u.x[j];
            f.eval(u.times[i], std::span<const double>(&xj, 1), v);
            fv[j] = v[0];
        }
        f_norm[i] = sup_abs(fv) + drift::holder_seminorm_points(u.x, 1, fv, 1, beta);
        const auto val = u.slice(i, 0);
        if (order < 1.0) {
            u_norm[i] = sup_abs(val) + drift::holder_seminorm_points(u.x, 1, val, 1, order);
        } else {
            const auto grad = u.gradient_slice(i, 0, 0);
            u_norm[i] = sup_abs(val) + sup_abs(grad);
            if (order > 1.0) {
                u_norm[i] += drift::holder_seminorm_points(u.x, 1, grad, 1, order - 1.0);
            }
        }
    }
    const double num = time_norm(u.times, u_norm, p);
    const double den = time_norm(u.times, f_norm, p);
    if (den == 0.0) {
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return num / den;
}

namespace {

template <class Solve>
DecayCurve decay_curve(std::span<const double> lambdas, Solve&& solve) {
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > lambdas[i - 1])) {
            throw ArgumentError("lambda values must be increasing");
        }
    }
    DecayCurve curve;
    std::vector<double> lx, ly;
    for (double lambda : lambdas) {
        DecayRow row;
        row.lambda = lambda;
        try {
            const GridFunction u = solve(lambda);
            row.sup_gradient = u.sup_abs_gradient();
            row.picard_iterations = u.picard_iterations;
            if (lambda > 0.0 && *row.sup_gradient > 0.0) {
                lx.push_back(std::log(lambda));
                ly.push_back(std::log(*row.sup_gradient));
            }
        } catch (const ContractionError& e) {
            row.error = e.what();
        }
        curve.rows.push_back(std::move(row));
    }
    curve.strictly_decreasing = !curve.rows.empty();
    for (std::size_t i = 0; i < curve.rows.size(); ++i) {
        if (!curve.rows[i].sup_gradient ||
            (i > 0 && !(*curve.rows[i].sup_gradient < *curve.rows[i - 1].sup_gradient))) {
            curve.strictly_decreasing = false;
        }
    }
    if (lx.size() >= 2) {
        const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
        const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        curve.slope = sxy / sxx;
    }
    return curve;
}

} // namespace

DecayCurve gradient_decay_curve(const drift::DriftField& b, const Source& f, const PdeConfig& cfg, double alpha,
                                std::span<const double> lambdas) {
    return decay_curve(lambdas, [&](double lambda) {
        PdeConfig c = cfg;
        c.lambda = lambda;
        return solve_mild(b, f, c, alpha);
    });
}

DecayCurve backward_gradient_decay_curve(const drift::DriftField& b, const PdeConfig& cfg, double alpha,
                                         std::span<const double> lambdas) {
    return decay_curve(lambdas, [&](double lambda) {
        PdeConfig c = cfg;
        c.lambda = lambda;
        return solve_backward_vector(b, c, alpha);
    });
}

Threshold backward_gradient_threshold(const drift::DriftField& b, const PdeConfig& cfg, double alpha, double target,
                                      double lo, double hi, double tol) {
    if (!(lo >= 0.0) || !(hi > lo) || !(tol > 0.0)) {
        throw ParameterError("bisection needs 0 <= lo < hi and tol > 0");
    }
    auto sup_grad = [&](double lambda) {
        PdeConfig c = cfg;
        c.lambda = lambda;
        return solve_backward_vector(b, c, alpha).sup_abs_gradient();
    };
    const double g_lo = sup_grad(lo);
    double g_hi = sup_grad(hi);
    if (!(g_lo > target) || !(g_hi <= target)) {
        std::ostringstream os;
        os << "target " << target << " is not bracketed: sup|grad U| = " << g_lo << " at lambda = " << lo << ", "
           << g_hi << " at lambda = " << hi;
        throw DomainError(os.str());
    }
    Threshold th;
    while (hi - lo > tol * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        const double g = sup_grad(mid);
        if (g <= target) {
            hi = mid;
            g_hi = g;
        } else {
            lo = mid;
        }
        ++th.bisection_steps;
    }
    th.lambda = hi;
    th.sup_gradient = g_hi;
    return th;
}

} // namespace stablesde::pde
