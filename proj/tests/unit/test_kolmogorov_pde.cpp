#include "stablesde/errors.hpp"
#include "stablesde/kolmogorov_pde.hpp"
#include "stablesde/stable_noise.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

using namespace stablesde;
using drift::make_drift;
using pde::make_source;
using pde::PdeConfig;

namespace {

constexpr double kPi = std::numbers::pi;

PdeConfig config(double lambda, std::size_t steps = 100, double horizon = 1.0, int modes = 64) {
    PdeConfig cfg;
    cfg.n_modes = modes;
    cfg.lambda = lambda;
    cfg.t_grid = noise::uniform_grid(horizon / static_cast<double>(steps), steps);
    cfg.picard_tol = 1e-12;
    return cfg;
}

double sin_mode(double t, double lambda) { return (1.0 - std::exp(-(1.0 + lambda) * t)) / (1.0 + lambda); }

/// sup_{0 < h} 2 sin(h/2) / h^beta restricted to h <= pi, the beta-seminorm of sin and cos.
double sin_seminorm(double beta) {
    double best = 0.0;
    for (int i = 1; i <= 200000; ++i) {
        const double h = kPi * i / 200000.0;
        best = std::max(best, 2.0 * std::sin(0.5 * h) / std::pow(h, beta));
    }
    return best;
}

} // namespace

TEST(SolveMild, ConstantSourceIsExact) {
    for (double lambda : {0.5, 2.0, 10.0}) {
        const auto u = pde::solve_mild(make_drift("zero"), make_source("constant:1.5"), config(lambda), 1.2);
        for (std::size_t i = 0; i < u.times.size(); ++i) {
            const double expected = 1.5 * (1.0 - std::exp(-lambda * u.times[i])) / lambda;
            for (double v : u.slice(i)) {
                ASSERT_NEAR(v, expected, 1e-12);
            }
        }
    }
}

TEST(SolveMild, SinModeMatchesClosedForm) {
    for (double alpha : {0.5, 1.0, 1.5}) {
        const double lambda = 0.7;
        const auto u = pde::solve_mild(make_drift("zero"), make_source("sin"), config(lambda, 40), alpha);
        double err = 0.0;
        for (std::size_t i = 0; i < u.times.size(); ++i) {
            for (std::size_t j = 0; j < u.points(); ++j) {
                err = std::max(err, std::abs(u.slice(i)[j] - std::sin(u.x[j]) * sin_mode(u.times[i], lambda)));
            }
        }
        EXPECT_LT(err, 1e-12) << "alpha = " << alpha;
    }
}

TEST(SolveMild, TwoDimensionalModes) {
    auto cfg = config(1.0, 20, 1.0, 16);
    cfg.dim = 2;
    const auto u = pde::solve_mild(make_drift("zero", 2), make_source("sin"), cfg, 1.3);
    const std::size_t last = u.times.size() - 1;
    for (std::size_t j = 0; j < u.points(); ++j) {
        const auto x = u.point(j);
        EXPECT_NEAR(u.slice(last)[j], std::sin(x[0]) * sin_mode(1.0, 1.0), 1e-12);
        EXPECT_NEAR(u.gradient_slice(last, 0, 0)[j], std::cos(x[0]) * sin_mode(1.0, 1.0), 1e-12);
        EXPECT_NEAR(u.gradient_slice(last, 0, 1)[j], 0.0, 1e-12);
    }
}

TEST(SolveMild, InitialSliceFollowsTheSemigroup) {
    // With f = 0 and u(0) = cos(2x): u(t) = e^{-(lambda + 2^alpha) t} cos(2x).
    auto cfg = config(0.5, 10);
    std::vector<double> init(64);
    for (int j = 0; j < 64; ++j) {
        init[j] = std::cos(2.0 * (-kPi + 2.0 * kPi * j / 64));
    }
    cfg.initial = init;
    const double alpha = 0.8;
    const auto u = pde::solve_mild(make_drift("zero"), make_source("zero"), cfg, alpha);
    const double decay = std::exp(-(0.5 + std::pow(2.0, alpha)));
    for (std::size_t j = 0; j < 64; ++j) {
        EXPECT_NEAR(u.slice(10)[j], decay * init[j], 1e-14);
    }
}

TEST(SolveMild, RestartEqualsDirectSolve) {
    pde::Source f;
    f.eval = [](double t, std::span<const double> x, std::span<double> out) {
        out[0] = std::cos(3.0 * t) * std::exp(std::sin(x[0]));
    };
    const double alpha = 1.4;
    const auto full = pde::solve_mild(make_drift("zero"), f, config(0.3, 200), alpha);

    auto first = config(0.3, 100, 0.5);
    const auto head = pde::solve_mild(make_drift("zero"), f, first, alpha);
    auto second = config(0.3, 100, 0.5);
    const auto last = head.slice(head.times.size() - 1);
    second.initial = std::vector<double>(last.begin(), last.end());
    pde::Source shifted;
    shifted.eval = [&f](double t, std::span<const double> x, std::span<double> out) { f.eval(t + 0.5, x, out); };
    const auto tail = pde::solve_mild(make_drift("zero"), shifted, second, alpha);
    for (std::size_t j = 0; j < full.points(); ++j) {
        EXPECT_NEAR(tail.slice(100)[j], full.slice(200)[j], 1e-10);
    }
}

TEST(SolveMild, TimeStepConvergesAtSecondOrder) {
    pde::Source f;
    f.eval = [](double t, std::span<const double> x, std::span<double> out) {
        out[0] = std::cos(3.0 * t) * std::exp(std::sin(x[0]));
    };
    auto final_value = [&](std::size_t steps) {
        const auto u = pde::solve_mild(make_drift("sin"), f, config(1.0, steps), 1.5);
        return u.slice(steps)[20];
    };
    const double ref = final_value(1600);
    const double e1 = std::abs(final_value(50) - ref);
    const double e2 = std::abs(final_value(100) - ref);
    EXPECT_GT(std::log2(e1 / e2), 1.8);
}

TEST(SolveMild, PicardResidualAndGradientConsistency) {
    const auto b = make_drift("sin");
    const auto f = make_source("exp-sin");
    const auto cfg = config(2.0);
    const auto u = pde::solve_mild(b, f, cfg, 1.5);
    EXPECT_LT(u.picard_residual, cfg.picard_tol);
    EXPECT_LT(pde::picard_residual(b, f, cfg, 1.5, u), cfg.picard_tol);
    EXPECT_GT(u.picard_iterations, 2);

    // Independent O(N^2) DFT derivative of a value slice.
    const std::size_t n = u.points();
    for (std::size_t i : {std::size_t{1}, std::size_t{50}, std::size_t{100}}) {
        const auto v = u.slice(i);
        for (std::size_t j = 0; j < n; j += 7) {
            std::complex<double> acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const long long ks = k < n / 2 ? static_cast<long long>(k) : static_cast<long long>(k) - static_cast<long long>(n);
                if (k == n / 2) {
                    continue;
                }
                std::complex<double> coef = 0.0;
                for (std::size_t m = 0; m < n; ++m) {
                    coef += v[m] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * m) / static_cast<double>(n));
                }
                acc += std::complex<double>(0.0, static_cast<double>(ks)) * coef *
                       std::polar(1.0, 2.0 * kPi * static_cast<double>(ks) * static_cast<double>(j) / static_cast<double>(n));
            }
            EXPECT_NEAR(u.gradient_slice(i, 0, 0)[j], acc.real() / static_cast<double>(n), 1e-12);
        }
    }
}

TEST(SolveMild, LinearInTheSource) {
    const auto b = make_drift("sin");
    const auto cfg = config(2.0, 50);
    const auto u1 = pde::solve_mild(b, make_source("exp-sin"), cfg, 1.2);
    const auto u2 = pde::solve_mild(b, make_source("cos"), cfg, 1.2);
    pde::Source sum;
    sum.eval = [](double, std::span<const double> x, std::span<double> out) {
        out[0] = 2.0 * std::exp(std::sin(x[0])) - 3.0 * std::cos(x[0]);
    };
    const auto u3 = pde::solve_mild(b, sum, cfg, 1.2);
    for (std::size_t k = 0; k < u3.values.size(); ++k) {
        ASSERT_NEAR(u3.values[k], 2.0 * u1.values[k] - 3.0 * u2.values[k], 1e-10);
    }
}

TEST(SolveMild, Errors) {
    auto cfg = config(0.1, 50);
    cfg.picard_max_iters = 2;
    EXPECT_THROW(pde::solve_mild(make_drift("linear:3"), make_source("exp-sin"), cfg, 1.5), ContractionError);
    try {
        pde::solve_mild(make_drift("linear:3"), make_source("exp-sin"), cfg, 1.5);
    } catch (const ContractionError& e) {
        EXPECT_NE(std::string(e.what()).find("increase lambda"), std::string::npos);
    }

    drift::DriftMeta meta;
    const drift::DriftField bad(meta, [](double t, std::span<const double>, std::span<double> out) {
        out[0] = t > 0.5 ? std::numeric_limits<double>::infinity() : 0.0;
    });
    EXPECT_THROW(pde::solve_mild(bad, make_source("sin"), config(1.0), 1.5), DomainError);

    auto odd = config(1.0);
    odd.n_modes = 48;
    EXPECT_THROW(pde::solve_mild(make_drift("zero"), make_source("sin"), odd, 1.5), ParameterError);
    EXPECT_THROW(pde::solve_mild(make_drift("zero"), make_source("sin"), config(1.0), 2.0), ParameterError);
    EXPECT_THROW(make_source("square"), ArgumentError);
    EXPECT_THROW(make_source("constant:x"), ParameterError);
}

TEST(FeynmanKac, ConstantSourceHasNoVariance) {
    const double x = 0.3;
    const auto est = pde::feynman_kac_oracle(make_source("constant:2"), 1.5, 1.0, 0.8, std::span(&x, 1), 50, 1);
    EXPECT_NEAR(est.value, 2.0 * (1.0 - std::exp(-1.5 * 0.8)) / 1.5, 1e-13);
    EXPECT_NEAR(est.standard_error, 0.0, 1e-14);
}

TEST(FeynmanKac, SinModeOracles) {
    const double zero = 0.0;
    const auto odd = pde::feynman_kac_oracle(make_source("sin"), 1.0, 1.0, 1.0, std::span(&zero, 1), 4000, 2);
    EXPECT_LT(std::abs(odd.value), 3.0 * odd.standard_error);

    const double peak = kPi / 2;
    const auto est = pde::feynman_kac_oracle(make_source("sin"), 1.0, 1.0, 1.0, std::span(&peak, 1), 4000, 3);
    EXPECT_LT(std::abs(est.value - sin_mode(1.0, 1.0)), 3.0 * est.standard_error);
    EXPECT_GT(est.standard_error, 0.0);
}

TEST(FeynmanKac, AgreesWithTheSpectralSolver) {
    const double alpha = 1.5, lambda = 1.0;
    const auto f = make_source("exp-sin");
    const auto u = pde::solve_mild(make_drift("zero"), f, config(lambda, 50), alpha);
    for (std::size_t j : {0u, 13u, 29u, 40u, 57u}) {
        const double x = u.x[j];
        const auto est = pde::feynman_kac_oracle(f, lambda, alpha, 1.0, std::span(&x, 1), 4000, 10 + j);
        EXPECT_LT(std::abs(est.value - u.slice(50)[j]), 3.0 * est.standard_error) << "x = " << x;
    }
}

TEST(BackwardVector, ZeroAndConstantDrifts) {
    const auto cfg = config(1.5, 40);
    const auto zero = pde::solve_backward_vector(make_drift("zero"), cfg, 1.2);
    EXPECT_EQ(zero.sup_abs_value(), 0.0);

    auto cfg2 = config(1.5, 40, 2.0, 16);
    cfg2.dim = 2;
    const auto u = pde::solve_backward_vector(make_drift("constant:0.5,-2", 2), cfg2, 1.2);
    ASSERT_EQ(u.components, 2);
    for (std::size_t i = 0; i < u.times.size(); ++i) {
        const double shape = (1.0 - std::exp(-1.5 * (2.0 - u.times[i]))) / 1.5;
        EXPECT_NEAR(u.slice(i, 0)[5], 0.5 * shape, 1e-12);
        EXPECT_NEAR(u.slice(i, 1)[77], -2.0 * shape, 1e-12);
    }
    EXPECT_EQ(u.slice(40, 0)[0], 0.0);
}

TEST(BackwardVector, SinDriftGradientIsSmallForLargeLambda) {
    const auto u = pde::solve_backward_vector(make_drift("sin"), config(2.0), 1.5);
    EXPECT_LT(u.picard_residual, 1e-12);
    EXPECT_LT(u.sup_abs_gradient(), 0.5);
    for (double v : u.slice(u.times.size() - 1)) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(BackwardVector, ThresholdBisection) {
    const auto b = make_drift("sin");
    const auto cfg = config(0.0, 50);
    const auto th = pde::backward_gradient_threshold(b, cfg, 1.5, 0.5, 0.0, 8.0, 1e-4);
    EXPECT_LE(th.sup_gradient, 0.5);
    EXPECT_GT(th.lambda, 0.0);
    auto below = cfg;
    below.lambda = th.lambda * (1.0 - 1e-3);
    EXPECT_GT(pde::solve_backward_vector(b, below, 1.5).sup_abs_gradient(), 0.5);
    EXPECT_THROW(pde::backward_gradient_threshold(b, cfg, 1.5, 0.5, 4.0, 8.0), DomainError);
}

TEST(DecayCurve, SinModeSlopeApproachesMinusOne) {
    const double lambdas[] = {8.0, 16.0, 32.0, 64.0, 128.0};
    const auto curve =
        pde::gradient_decay_curve(make_drift("zero"), make_source("sin"), config(0.0, 50), 1.1, lambdas);
    ASSERT_TRUE(curve.slope.has_value());
    EXPECT_TRUE(curve.strictly_decreasing);
    for (const auto& row : curve.rows) {
        EXPECT_NEAR(*row.sup_gradient, sin_mode(1.0, row.lambda), 1e-12);
    }
    EXPECT_LT(*curve.slope, -0.9);
    EXPECT_GT(*curve.slope, -1.05);
}

TEST(DecayCurve, BackwardSinDriftDecreases) {
    const double lambdas[] = {2.0, 4.0, 8.0, 16.0, 32.0};
    const auto curve = pde::backward_gradient_decay_curve(make_drift("sin"), config(0.0, 100), 1.5, lambdas);
    EXPECT_TRUE(curve.strictly_decreasing);
    EXPECT_LT(*curve.slope, 0.0);
    EXPECT_LT(*curve.rows.back().sup_gradient, 0.5);
    const double bad[] = {4.0, 2.0};
    EXPECT_THROW(pde::backward_gradient_decay_curve(make_drift("sin"), config(0.0), 1.5, bad), ArgumentError);
}

TEST(SchauderRatio, TrivialAndLinear) {
    const auto zero = pde::solve_mild(make_drift("zero"), make_source("zero"), config(1.0, 20), 1.5);
    EXPECT_EQ(pde::schauder_ratio(zero, make_source("zero"), 2.0, 0.5, 0.3), 0.0);

    const auto b = make_drift("sin");
    const auto u1 = pde::solve_mild(b, make_source("sin-power:0.5"), config(1.0, 40), 1.5);
    pde::Source twice;
    twice.eval = [](double, std::span<const double> x, std::span<double> out) {
        const double v = std::sin(x[0]);
        out[0] = 2.0 * std::copysign(std::sqrt(std::abs(v)), v);
    };
    const auto ud = pde::solve_mild(b, twice, config(1.0, 40), 1.5);
    const double r1 = pde::schauder_ratio(u1, make_source("sin-power:0.5"), 2.0, 0.5, 0.3);
    const double r2 = pde::schauder_ratio(ud, twice, 2.0, 0.5, 0.3);
    EXPECT_NEAR(r2 / r1, 1.0, 1e-10);
    EXPECT_TRUE(std::isfinite(r1));
    EXPECT_GT(r1, 0.0);
}

TEST(SchauderRatio, SinModeClosedForm) {
    const double alpha = 1.5, beta = 0.5, theta = 0.3, p = 2.0, lambda = 1.0;
    const auto u = pde::solve_mild(make_drift("zero"), make_source("sin"), config(lambda, 200, 1.0, 128), alpha);
    const double got = pde::schauder_ratio(u, make_source("sin"), p, beta, theta);
    // order 1.7 > 1: ||u(t)|| = a(t)(1 + 1 + [cos]_{0.7}); ||f|| = 1 + [sin]_{0.5}.
    double a_p = 0.0;
    const int m = 20000;
    for (int i = 0; i < m; ++i) {
        a_p += std::pow(sin_mode((i + 0.5) / m, lambda), p) / m;
    }
    const double expected = std::pow(a_p, 1.0 / p) * (2.0 + sin_seminorm(0.7)) / (1.0 + sin_seminorm(0.5));
    EXPECT_NEAR(got / expected, 1.0, 0.05);
}

TEST(SchauderRatio, StableUnderRefinementAndRangeChecked) {
    const auto b = make_drift("sin");
    const auto f = make_source("sin-power:0.6");
    const auto coarse = pde::solve_mild(b, f, config(2.0, 50, 1.0, 64), 1.2);
    const auto fine = pde::solve_mild(b, f, config(2.0, 100, 1.0, 128), 1.2);
    const double rc = pde::schauder_ratio(coarse, f, 4.0, 0.6, 0.4);
    const double rf = pde::schauder_ratio(fine, f, 4.0, 0.6, 0.4);
    EXPECT_LT(std::max(rc, rf) / std::min(rc, rf), 2.0);

    EXPECT_THROW(pde::schauder_ratio(coarse, f, 4.0, 0.6, 0.0), DomainError);
    EXPECT_THROW(pde::schauder_ratio(coarse, f, 4.0, 0.6, -0.1), DomainError);
    const auto slow = pde::solve_mild(b, f, config(2.0, 20), 0.8);
    // alpha < 1 requires theta < alpha + beta - 1 = 0.4.
    EXPECT_THROW(pde::schauder_ratio(slow, f, 4.0, 0.6, 0.5), DomainError);
    EXPECT_NO_THROW(pde::schauder_ratio(slow, f, 4.0, 0.6, 0.2));
}
