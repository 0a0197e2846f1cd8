#include "stablesde/errors.hpp"
#include "stablesde/sde_sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace stablesde;
using drift::make_drift;
using noise::CadlagPath;
using noise::StableParams;
using sde::Quadrature;
using sde::SolveConfig;

namespace {

SolveConfig uniform(double dt, std::size_t n, Quadrature q = Quadrature::Midpoint) {
    SolveConfig cfg;
    cfg.t_grid = noise::uniform_grid(dt, n);
    cfg.quadrature = q;
    return cfg;
}

double final_linear(std::size_t steps) {
    const auto cfg = uniform(1.0 / static_cast<double>(steps), steps, Quadrature::Left);
    const auto path = CadlagPath::zero(cfg.t_grid);
    const double x0 = 1.0;
    const auto traj = sde::euler_solve(make_drift("linear:-1"), path, std::span(&x0, 1), cfg);
    return traj.scalar(traj.size() - 1);
}

} // namespace

TEST(EulerSolve, ZeroDriftReproducesNoise) {
    const auto path = noise::sample_increments({1.2, 1}, 0.01, 100, 5);
    const double x0 = 0.3;
    const auto traj = sde::euler_solve(make_drift("zero"), path, std::span(&x0, 1), uniform(0.01, 100));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        EXPECT_EQ(traj.scalar(k), x0 + path.scalar(k));
    }
}

TEST(EulerSolve, ConstantDriftIsExactForEveryQuadrature) {
    const auto cfg0 = uniform(0.05, 20);
    const auto path = CadlagPath::zero(cfg0.t_grid);
    const double x0 = -1.0;
    for (auto q : {Quadrature::Left, Quadrature::Midpoint, Quadrature::ExactPower}) {
        auto cfg = cfg0;
        cfg.quadrature = q;
        const auto traj = sde::euler_solve(make_drift("constant:2.5"), path, std::span(&x0, 1), cfg);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            EXPECT_NEAR(traj.scalar(k), x0 + 2.5 * traj.times[k], 1e-14);
        }
    }
}

TEST(EulerSolve, LinearDecayConvergesAtFirstOrder) {
    const double exact = std::exp(-1.0);
    const double e1 = std::abs(final_linear(100) - exact);
    const double e2 = std::abs(final_linear(200) - exact);
    const double e3 = std::abs(final_linear(400) - exact);
    EXPECT_LT(e3, 2e-3);
    EXPECT_GT(std::log2(e1 / e2), 0.95);
    EXPECT_GT(std::log2(e2 / e3), 0.95);
}

TEST(EulerSolve, DefiningIdentityHoldsOnJumpyPaths) {
    const auto path = noise::sample_via_levy_ito({0.8, 1}, 1e-3, 1000, 0.05, 11, 0, 0.5);
    const double x0 = 0.0;
    const auto drift = make_drift("time-singular:2,0.5,1");
    const auto traj = sde::euler_solve(drift, path, std::span(&x0, 1), uniform(1e-3, 1000));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double residual = traj.scalar(k) - x0 - traj.drift_integral[k] - path.scalar(k);
        EXPECT_LE(std::abs(residual), 1e-10 * static_cast<double>(k + 1));
    }
}

TEST(EulerSolve, VectorStatesKeepTheIdentity) {
    const auto path = noise::sample_increments({1.5, 2}, 0.01, 50, 3);
    const double x0[2] = {0.5, -0.5};
    const auto traj = sde::euler_solve(make_drift("sin", 2), path, std::span(x0), uniform(0.01, 50));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        for (int c = 0; c < 2; ++c) {
            EXPECT_NEAR(traj.state(k)[c] - x0[c] - traj.drift_integral[k * 2 + c], path.value(k)[c], 1e-13);
        }
    }
    EXPECT_TRUE(std::isfinite(traj.drift_integral.back()));
}

TEST(EulerSolve, ExactPowerIntegratesTheSingularFactor) {
    // With zero noise and x0 far from the profile's kinks the profile is flat
    // at 2 theta0^beta, so X(t) = x0 + 2 * 2 t^{1/2} for p_hat = 2.
    const auto cfg = uniform(0.1, 10, Quadrature::ExactPower);
    const auto path = CadlagPath::zero(cfg.t_grid);
    const double x0 = 50.0;
    const auto traj = sde::euler_solve(make_drift("time-singular:2,0.5,1"), path, std::span(&x0, 1), cfg);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        EXPECT_NEAR(traj.scalar(k), x0 + 4.0 * std::sqrt(traj.times[k]), 1e-12);
    }
}

TEST(EulerSolve, MidpointSubstepsApproachTheExactFirstCell) {
    auto cfg = uniform(0.1, 10, Quadrature::Midpoint);
    cfg.max_substeps = 60;
    const auto path = CadlagPath::zero(cfg.t_grid);
    const double x0 = 50.0;
    const auto traj = sde::euler_solve(make_drift("time-singular:2,0.5,1"), path, std::span(&x0, 1), cfg);
    EXPECT_NEAR(traj.scalar(1), x0 + 4.0 * std::sqrt(0.1), 1e-8);
}

TEST(EulerSolve, ErrorsCarryContext) {
    const auto cfg = uniform(0.1, 10);
    const double x0 = 0.0;
    const auto coarse = noise::sample_increments({1.0, 1}, 0.3, 3, 1);
    EXPECT_THROW(sde::euler_solve(make_drift("zero"), coarse, std::span(&x0, 1), cfg), ArgumentError);

    auto left = cfg;
    left.quadrature = Quadrature::Left;
    const auto path = CadlagPath::zero(cfg.t_grid);
    EXPECT_THROW(sde::euler_solve(make_drift("time-singular:2,0.5,1"), path, std::span(&x0, 1), left), DomainError);

    drift::DriftMeta meta;
    const drift::DriftField bad(meta, [](double t, std::span<const double>, std::span<double> out) {
        out[0] = t > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    });
    auto exact = cfg;
    exact.quadrature = Quadrature::ExactPower;
    EXPECT_THROW(sde::euler_solve(bad, path, std::span(&x0, 1), exact), ArgumentError);
    try {
        sde::euler_solve(bad, path, std::span(&x0, 1), cfg);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("t = "), std::string::npos);
    }
}

TEST(FrozenPath, ReducesToTheOdeWithoutNoise) {
    const auto cfg = uniform(1e-3, 1000);
    const auto path = CadlagPath::zero(cfg.t_grid);
    const double x0 = 1.0;
    const auto phi = sde::frozen_path_solve(make_drift("linear:-1"), path, std::span(&x0, 1), cfg);
    EXPECT_NEAR(phi.scalar(phi.size() - 1), std::exp(-1.0), 1e-3);
}

TEST(FrozenPath, HasNoJumpsAndMatchesEuler) {
    const auto cfg = uniform(1e-3, 1000);
    const auto path = noise::sample_via_levy_ito({1.2, 1}, 1e-3, 1000, 0.1, 21, 0, 0.3);
    ASSERT_GT(path.jump_count(), 0u);
    const double x0 = 0.2;
    const auto b = make_drift("sin");
    const auto phi = sde::frozen_path_solve(b, path, std::span(&x0, 1), cfg);
    const auto x = sde::euler_solve(b, path, std::span(&x0, 1), cfg);
    const double sup_b = 1.0;
    for (double tj : path.jump_times()) {
        const std::size_t k = std::min(static_cast<std::size_t>(tj / 1e-3), cfg.t_grid.size() - 2);
        // Across the cell containing the jump phi moves by at most h sup|b|.
        EXPECT_LE(std::abs(phi.scalar(k + 1) - phi.scalar(k)), 1e-3 * sup_b * (1 + 1e-12));
        EXPECT_GT(std::abs(x.scalar(k + 1) - x.scalar(k)), 0.3 - 2e-3);
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        EXPECT_NEAR(phi.scalar(k) + path.scalar(k), x.scalar(k), 1e-12);
    }
}

TEST(Comparison, MonotoneDriftPreservesOrder) {
    const auto cfg = uniform(1e-3, 500);
    const auto b = make_drift("linear:0.7");
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto path = noise::sample_on_grid({0.9, 1}, cfg.t_grid, 8, s);
        const double x = -0.1, y = 0.05;
        const auto tx = sde::euler_solve(b, path, std::span(&x, 1), cfg);
        const auto ty = sde::euler_solve(b, path, std::span(&y, 1), cfg);
        for (std::size_t k = 0; k < tx.size(); ++k) {
            ASSERT_LE(tx.scalar(k), ty.scalar(k));
        }
    }
}

TEST(MollifiedConvergence, LipschitzDriftBarelyMoves) {
    const auto cfg = uniform(1e-2, 100);
    const auto path = noise::sample_on_grid({1.5, 1}, cfg.t_grid, 2);
    const double x0 = 0.0;
    const int levels[] = {8, 32, 128};
    const auto rows = sde::mollified_convergence(make_drift("sin"), path, std::span(&x0, 1), levels, cfg);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_LT(rows[0].sup_distance, 1e-2);
    EXPECT_LT(rows[1].sup_distance, 1e-3);
}

TEST(MollifiedConvergence, SubcriticalCounterexampleDecreases) {
    const auto cfg = uniform(2e-3, 500);
    const auto path = noise::sample_on_grid({1.5, 1}, cfg.t_grid, 4);
    const double x0 = 1.0;
    const int levels[] = {4, 16, 64, 256};
    const auto rows =
        sde::mollified_convergence(make_drift("time-singular:8,0.6,1"), path, std::span(&x0, 1), levels, cfg);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_GT(rows[0].sup_distance, rows[1].sup_distance);
    EXPECT_GT(rows[1].sup_distance, rows[2].sup_distance);
}

TEST(MollifiedConvergence, RejectsUnorderedLevels) {
    const auto cfg = uniform(0.1, 10);
    const auto path = CadlagPath::zero(cfg.t_grid);
    const double x0 = 0.0;
    const int levels[] = {8, 4};
    EXPECT_THROW(sde::mollified_convergence(make_drift("sin"), path, std::span(&x0, 1), levels, cfg), ArgumentError);
}

TEST(MollifiedConvergence, FixedLevelSelfConverges) {
    // Mean sup error against a fine reference over several paths; a single
    // heavy-tailed path gives a noisy order estimate. Exact time integration
    // keeps the t^{-a} factor from capping the order below 1.
    constexpr std::size_t kRef = 3200;
    const auto b = drift::mollify_space(make_drift("time-singular:8,0.6,1"), 8);
    const double x0 = 1.0;
    const std::size_t steps[] = {50, 100, 200};
    double err[3] = {0.0, 0.0, 0.0};
    constexpr int kPaths = 20;
    for (int s = 0; s < kPaths; ++s) {
        const auto path = noise::sample_on_grid({1.5, 1}, noise::uniform_grid(1.0 / kRef, kRef), 9, s);
        auto solve = [&](std::size_t n) {
            return sde::euler_solve(b, path, std::span(&x0, 1), uniform(1.0 / static_cast<double>(n), n, Quadrature::ExactPower));
        };
        const auto ref = solve(kRef);
        for (int i = 0; i < 3; ++i) {
            const auto t = solve(steps[i]);
            double e = 0.0;
            for (std::size_t k = 0; k < t.size(); ++k) {
                e = std::max(e, std::abs(t.scalar(k) - ref.scalar(k * (kRef / steps[i]))));
            }
            err[i] += e / kPaths;
        }
    }
    EXPECT_LT(err[1], err[0]);
    EXPECT_LT(err[2], err[1]);
    EXPECT_GT(std::log2(err[0] / err[2]) / 2.0, 0.9) << err[0] << " " << err[2];
}

TEST(GapStatistic, TrivialCases) {
    auto cfg = uniform(0.01, 100);
    const double x = 0.25, y = 0.75;
    const auto same = sde::pathwise_gap_statistic(make_drift("sin"), {1.5, 1}, std::span(&x, 1), std::span(&x, 1),
                                                  50, cfg, 1);
    EXPECT_EQ(same.mean, 0.0);
    EXPECT_FALSE(same.ratio.has_value());

    const auto flat = sde::pathwise_gap_statistic(make_drift("zero"), {1.5, 1}, std::span(&x, 1), std::span(&y, 1),
                                                  50, cfg, 1);
    EXPECT_EQ(flat.mean, 0.25);
    EXPECT_EQ(flat.standard_error, 0.0);
    EXPECT_EQ(*flat.ratio, 1.0);

    EXPECT_THROW(sde::pathwise_gap_statistic(make_drift("zero"), {1.5, 1}, std::span(&x, 1), std::span(&y, 1), 0,
                                             cfg, 1),
                 ArgumentError);
}

TEST(GapStatistic, ThreadCountDoesNotChangeTheResult) {
    auto cfg = uniform(0.01, 100);
    const double x = 0.0, y = 0.01;
    const auto b = make_drift("time-singular:8,0.6,1");
    const auto one = sde::pathwise_gap_statistic(b, {1.5, 1}, std::span(&x, 1), std::span(&y, 1), 40, cfg, 3, 1);
    const auto four = sde::pathwise_gap_statistic(b, {1.5, 1}, std::span(&x, 1), std::span(&y, 1), 40, cfg, 3, 4);
    EXPECT_EQ(one.mean, four.mean);
    EXPECT_EQ(one.standard_error, four.standard_error);
}

TEST(GradedGrid, StartsGeometricAndEndsUniform) {
    const auto g = sde::graded_grid(1.0, 1e-8, 1.1, 1e-2);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_EQ(g.back(), 1.0);
    EXPECT_EQ(g[1], 1e-8);
    for (std::size_t k = 1; k < g.size(); ++k) {
        ASSERT_GT(g[k], g[k - 1]);
        ASSERT_LE(g[k] - g[k - 1], 1.5e-2);
    }
    EXPECT_NEAR(g[2] / g[1], 1.1, 1e-12);
    EXPECT_THROW(sde::graded_grid(1.0, 0.0, 1.1, 1e-2), ParameterError);
}
