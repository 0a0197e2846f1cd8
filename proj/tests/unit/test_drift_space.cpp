#include "stablesde/drift_space.hpp"
#include "stablesde/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace stablesde;
using namespace stablesde::drift;

namespace {

double signed_power(double x, double beta) { return (x < 0 ? -1.0 : 1.0) * std::pow(std::abs(x), beta); }

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

} // namespace

TEST(DriftLibrary, IdsEvaluate) {
    EXPECT_EQ(make_drift("zero").eval1(0.3, 2.0), 0.0);
    EXPECT_EQ(make_drift("constant:2.5").eval1(0.3, -7.0), 2.5);
    EXPECT_DOUBLE_EQ(make_drift("sin").eval1(0.1, 0.7), std::sin(0.7));
    EXPECT_DOUBLE_EQ(make_drift("linear:-1").eval1(0.1, 0.7), -0.7);
    const auto ts = make_drift("time-singular:4,0.3,2");
    EXPECT_NEAR(ts.eval1(0.0625, 1.0), 2.0, 1e-14);
    EXPECT_DOUBLE_EQ(ts.meta().sing_exponent, 0.25);
    EXPECT_THROW(make_drift("bogus"), ArgumentError);
    EXPECT_THROW(make_drift("constant:abc"), ParameterError);
    EXPECT_THROW(make_drift("time-singular:2,0.5"), ParameterError);
}

TEST(DriftLibrary, VectorConstantAndSin) {
    const auto c = make_drift("constant:1,2", 2);
    std::vector<double> x{0.0, 0.0}, out(2);
    c.eval(0.5, x, out);
    EXPECT_EQ(out[1], 2.0);
    const auto s = make_drift("sin", 2);
    x = {0.5, 3.0};
    s.eval(0.5, x, out);
    EXPECT_DOUBLE_EQ(out[0], std::sin(0.5));
    EXPECT_EQ(out[1], 0.0);
}

TEST(Counterexample, ProfileValuesAndMonotone) {
    const double beta = 0.5, theta0 = 1.0;
    EXPECT_EQ(counterexample_profile(0.0, beta, theta0), 0.0);
    EXPECT_DOUBLE_EQ(counterexample_profile(theta0, beta, theta0), std::pow(theta0, beta));
    EXPECT_DOUBLE_EQ(counterexample_profile(-theta0, beta, theta0), -std::pow(theta0, beta));
    EXPECT_DOUBLE_EQ(counterexample_profile(5.0, beta, theta0), 2.0);
    double prev = counterexample_profile(-3.0, beta, theta0);
    for (double x = -3.0; x <= 3.0; x += 1e-3) {
        const double v = counterexample_profile(x, beta, theta0);
        EXPECT_GE(v, prev);
        EXPECT_EQ(v, -counterexample_profile(-x, beta, theta0));
        prev = v;
    }
    // C^1 at theta0 and 2 theta0.
    const double e = 1e-7;
    const double left = (counterexample_profile(1.0, beta, 1.0) - counterexample_profile(1.0 - e, beta, 1.0)) / e;
    const double right = (counterexample_profile(1.0 + e, beta, 1.0) - counterexample_profile(1.0, beta, 1.0)) / e;
    EXPECT_NEAR(left, right, 1e-5);
    EXPECT_NEAR((counterexample_profile(2.0, beta, 1.0) - counterexample_profile(2.0 - e, beta, 1.0)) / e, 0.0, 1e-5);
}

TEST(Criticality, PrintedExamples) {
    const auto sub = classify_criticality(1.5, 0.5, 2.0, 1, SpaceFamily::LpHolderStable);
    EXPECT_EQ(sub.regime, Regime::Subcritical);
    EXPECT_DOUBLE_EQ(sub.threshold, 1.5);
    const auto crit = classify_criticality(1.0, 0.5, 2.0, 1, SpaceFamily::LpHolderStable);
    EXPECT_EQ(crit.regime, Regime::Critical);
    EXPECT_EQ(crit.scaling_exponent, 0.0);
    EXPECT_DOUBLE_EQ(crit.threshold, 2.0);
    const auto super = classify_criticality(2.0, 0.2, 1.5, 1, SpaceFamily::LpHolderBrownian);
    EXPECT_EQ(super.regime, Regime::Supercritical);
    EXPECT_NEAR(super.threshold, 5.0 / 3.0, 1e-15);
    const auto ce = classify_criticality(0.8, 0.5, 1.5, 1, SpaceFamily::LpHolderStable);
    EXPECT_EQ(ce.regime, Regime::Supercritical);
    EXPECT_NEAR(ce.threshold, 0.8 / 0.3, 1e-14);
}

TEST(Criticality, DecimalInputsHitEqualityExactly) {
    // 0.8/(0.8+0.7-1) = 1.6 exactly in decimal arithmetic.
    EXPECT_EQ(classify_criticality(0.8, 0.7, 1.6, 1, SpaceFamily::LpHolderStable).regime, Regime::Critical);
    // d/p + 2/q = 1 with d = 3, p = 6, q = 4.
    EXPECT_EQ(classify_criticality(2.0, 4.0, 6.0, 3, SpaceFamily::LqLpBrownian).regime, Regime::Critical);
    EXPECT_EQ(classify_criticality(1.2, 0.3, 2.0, 1, SpaceFamily::LinfBesovStable).regime, Regime::Critical);
    const auto q2 = classify_criticality(2.0, 2.0, kInf, 1, SpaceFamily::LqLpBrownian);
    EXPECT_EQ(q2.regime, Regime::Critical);
    EXPECT_TRUE(std::isinf(q2.threshold));
}

TEST(Criticality, DomainErrors) {
    EXPECT_THROW(classify_criticality(0.5, 0.4, 2.0, 1, SpaceFamily::LpHolderStable), DomainError);
    EXPECT_THROW(classify_criticality(0.5, 0.5, 2.0, 1, SpaceFamily::LinfBesovStable), DomainError);
    EXPECT_THROW(classify_criticality(2.5, 0.5, 2.0, 1, SpaceFamily::LpHolderStable), DomainError);
    EXPECT_THROW(classify_criticality(1.5, 0.5, 1.0, 1, SpaceFamily::LqLpBrownian), DomainError);
    EXPECT_THROW(parse_family("nope"), ArgumentError);
    EXPECT_EQ(parse_family("lp-holder-stable"), SpaceFamily::LpHolderStable);
}

TEST(Criticality, RegimeMonotoneInP) {
    for (double p = 1.0; p < 10.0; p += 0.01) {
        const auto r = classify_criticality(1.3, 0.4, p, 1, SpaceFamily::LpHolderStable);
        if (p > r.threshold) {
            EXPECT_NE(r.regime, Regime::Supercritical);
        }
        EXPECT_EQ(r.regime == Regime::Subcritical, r.scaling_exponent > 0.0);
    }
}

TEST(Rescale, IdentityAndPointwise) {
    const auto b = make_drift("time-singular:2,0.5,1");
    const auto same = rescale_drift(b, 1.0, 1.3);
    const auto half = rescale_drift(b, 0.3, 1.3);
    for (double t : {0.01, 0.4, 0.9}) {
        for (double x : {-2.0, -0.3, 0.0, 0.7, 1.5}) {
            EXPECT_EQ(same.eval1(t, x), b.eval1(t, x));
            const double expected = std::pow(0.3, 1.0 - 1.0 / 1.3) * b.eval1(0.3 * t, std::pow(0.3, 1.0 / 1.3) * x);
            EXPECT_NEAR(half.eval1(t, x), expected, 1e-15 * std::max(1.0, std::abs(expected)));
        }
    }
    EXPECT_THROW(rescale_drift(b, 0.0, 1.0), ParameterError);
    EXPECT_THROW(rescale_drift(b, 1.5, 1.0), ParameterError);
}

TEST(Rescale, SeminormScalesWithNaturalHorizon) {
    // theta0 beyond the window: the profile is a pure signed power on the
    // grid, whose seminorm is not truncated by the window after rescaling.
    const double alpha = 1.5, p_hat = 4.0, beta = 0.6, p = 2.0;
    const auto b = time_singular_drift(p_hat, beta, 100.0, p);
    NormOptions opts;
    const double base = lebesgue_holder_norm(b, opts).seminorm_part;
    for (double theta : {0.5, 0.1, 0.02}) {
        const auto scaled = rescale_drift(b, theta, alpha);
        NormOptions natural = opts;
        natural.horizon = 1.0 / theta;
        const double ratio = lebesgue_holder_norm(scaled, natural).seminorm_part / base;
        const double predicted = std::pow(theta, 1.0 - 1.0 / alpha - 1.0 / p + beta / alpha);
        EXPECT_NEAR(ratio / predicted, 1.0, 0.02) << theta;
        // Restricted to [0, T] the time integral contributes theta^{-1/p_hat}.
        const double restricted = lebesgue_holder_norm(scaled, opts).seminorm_part / base;
        EXPECT_NEAR(restricted / std::pow(theta, 1.0 - 1.0 / alpha - 1.0 / p_hat + beta / alpha), 1.0, 0.02);
    }
}

TEST(Rescale, SubcriticalSeminormVanishes) {
    const auto b = time_singular_drift(8.0, 0.6, 1.0, 4.0);
    double prev = kInf;
    for (double theta : {1.0, 0.1, 0.01, 0.001}) {
        NormOptions natural;
        natural.horizon = 1.0 / theta;
        const double s = lebesgue_holder_norm(rescale_drift(b, theta, 1.5), natural).seminorm_part;
        EXPECT_LT(s, prev);
        prev = s;
    }
    EXPECT_LT(prev, 0.5);
}

TEST(Holder, GridEstimator) {
    const auto grid = linspace(-1.0, 1.0, 201);
    EXPECT_EQ(holder_seminorm_grid([](double) { return 3.0; }, 0.5, grid), 0.0);
    EXPECT_NEAR(holder_seminorm_grid([](double x) { return std::pow(std::abs(x), 0.4); }, 0.4, grid), 1.0, 1e-12);
    const auto unit = linspace(0.0, 1.0, 101);
    EXPECT_NEAR(holder_seminorm_grid([](double x) { return x; }, 0.5, unit), 1.0, 1e-12);
    const double one[] = {0.0};
    EXPECT_THROW(holder_seminorm_grid([](double x) { return x; }, 0.5, one), ArgumentError);
}

TEST(Holder, StratifiedPairsStayLowerBound) {
    const auto grid = linspace(-2.0, 2.0, 3001);
    auto h = [](double x) { return std::sin(3.0 * x); };
    const double full = holder_seminorm_grid(h, 0.5, grid, 10'000'000);
    const double capped = holder_seminorm_grid(h, 0.5, grid, 100'000);
    EXPECT_LE(capped, full);
    EXPECT_GT(capped, 0.95 * full);
}

TEST(Holder, PoissonEstimator) {
    const std::vector<double> xi{0.01, 0.1, 1.0};
    const auto xs = linspace(-3.0, 3.0, 61);
    const auto c = holder_seminorm_poisson([](double) { return 2.0; }, 0.5, xi, xs);
    EXPECT_NEAR(c.value, 0.0, 1e-9);
    auto s = [](double x) { return std::sin(x); };
    const auto ps = holder_seminorm_poisson(s, 0.5, xi, xs);
    const double grid = holder_seminorm_grid(s, 0.5, linspace(-6.0, 6.0, 601));
    EXPECT_GT(ps.value / grid, 0.1);
    EXPECT_LT(ps.value / grid, 10.0);
    const double bad[] = {0.0};
    EXPECT_THROW(holder_seminorm_poisson(s, 0.5, bad, xs), DomainError);
}

TEST(Holder, PoissonStabilizesForSignedPower) {
    std::vector<double> xi, xs{0.0};
    for (int k = 0; k <= 12; ++k) {
        xi.push_back(std::pow(10.0, -3.0 + 0.25 * k));
    }
    for (int k = 0; k <= 60; ++k) {
        const double v = std::pow(10.0, -5.0 + 0.1 * k);
        xs.push_back(v);
        xs.push_back(-v);
    }
    const auto est = holder_seminorm_poisson([](double x) { return signed_power(x, 0.3); }, 0.3, xi, xs);
    // Last decade: xi in [1e-3, 1e-2] are entries 0..4.
    double lo = kInf, hi = 0.0;
    for (int k = 0; k <= 4; ++k) {
        lo = std::min(lo, est.per_xi[k]);
        hi = std::max(hi, est.per_xi[k]);
    }
    EXPECT_LT(hi / lo, 1.2);
}

TEST(Norm, TrivialCases) {
    EXPECT_EQ(lebesgue_holder_norm(make_drift("zero")).norm, 0.0);
    const auto s = lebesgue_holder_norm(make_drift("sin"));
    const auto grid = linspace(-10.0, 10.0, 201);
    const double semi = holder_seminorm_grid([](double x) { return std::sin(x); }, 0.5, grid);
    double sup = 0.0;
    for (double x : grid) {
        sup = std::max(sup, std::abs(std::sin(x)));
    }
    EXPECT_DOUBLE_EQ(s.norm, sup + semi);
}

TEST(Norm, SingularDivergence) {
    const auto finite = lebesgue_holder_norm(time_singular_drift(2.0, 0.5, 1.0, 1.5));
    EXPECT_FALSE(finite.divergent);
    // ||b||_{p,0} = sup|h| (int_0^1 t^{-p/2})^{1/p} with sup|h| on [-10,10] = 2.
    EXPECT_NEAR(finite.sup_part, 2.0 * std::pow(1.0 / (1.0 - 0.75), 1.0 / 1.5), 1e-10);
    EXPECT_TRUE(lebesgue_holder_norm(time_singular_drift(2.0, 0.5, 1.0, 2.0)).divergent);
    EXPECT_TRUE(lebesgue_holder_norm(time_singular_drift(2.0, 0.5, 1.0, 3.0)).divergent);
}

TEST(Norm, NonSeparableMatchesSeparable) {
    const auto b = time_singular_drift(3.0, 0.5, 1.0, 2.0);
    const DriftField generic(b.meta(), [b](double t, std::span<const double> x, std::span<double> out) {
        b.eval(t, x, out);
    });
    NormOptions opts;
    opts.points_per_dim = 81;
    opts.time_panels = 30;
    const auto a1 = lebesgue_holder_norm(b, opts);
    const auto a2 = lebesgue_holder_norm(generic, opts);
    EXPECT_NEAR(a1.norm / a2.norm, 1.0, 1e-8);
}

TEST(MollifySpace, ConstantOddAndDomination) {
    const auto c = make_drift("constant:1.7");
    const auto cn = mollify_space(c, 4);
    for (double x : {-1.3, 0.0, 0.77}) {
        EXPECT_NEAR(cn.eval1(0.5, x), 1.7, 1e-15);
    }
    const auto b = time_singular_drift(2.0, 0.5, 1.0, 1.5);
    for (int n : {1, 4, 16, 64}) {
        const auto bn = mollify_space(b, n);
        EXPECT_EQ(bn.eval1(0.3, 0.0), 0.0);
        for (double t : {0.01, 0.5}) {
            double sup_b = 0.0, sup_bn = 0.0;
            for (double x = -4.0; x <= 4.0; x += 0.01) {
                sup_b = std::max(sup_b, std::abs(b.eval1(t, x)));
                sup_bn = std::max(sup_bn, std::abs(bn.eval1(t, x)));
            }
            EXPECT_LE(sup_bn, sup_b * (1.0 + 1e-14));
        }
    }
}

TEST(MollifySpace, ConvergesAndIsLipschitz) {
    const auto b = time_singular_drift(2.0, 0.5, 1.0, 1.5);
    double prev = kInf;
    for (int n : {4, 16, 64}) {
        const auto bn = mollify_space(b, n);
        double err = 0.0;
        double lip = 0.0;
        double last = bn.eval1(1.0, -2.0);
        for (double x = -2.0 + 1e-3; x <= 2.0; x += 1e-3) {
            const double v = bn.eval1(1.0, x);
            err = std::max(err, std::abs(v - b.eval1(1.0, x)));
            lip = std::max(lip, std::abs(v - last) / 1e-3);
            last = v;
        }
        EXPECT_LT(err, prev);
        EXPECT_LT(lip, 10.0 * std::sqrt(n));
        prev = err;
    }
}

TEST(MollifySpace, TwoDimensionalConstant) {
    const auto c = mollify_space(make_drift("constant:0.5,-1", 2), 3);
    std::vector<double> x{0.3, -0.1}, out(2);
    c.eval(0.1, x, out);
    EXPECT_NEAR(out[0], 0.5, 1e-15);
    EXPECT_NEAR(out[1], -1.0, 1e-15);
}

TEST(MollifyTime, TimeConstantUnchangedAndSingularBounded) {
    const auto s = make_drift("sin");
    const auto sn = mollify_time(s, 8);
    EXPECT_EQ(sn.eval1(0.0, 0.4), s.eval1(0.0, 0.4));
    const auto b = time_singular_drift(2.0, 0.5, 1.0, 1.5);
    for (int n : {4, 16, 64}) {
        const auto bn = mollify_time(b, n);
        EXPECT_EQ(bn.eval1(0.0, 1.0), 0.0);
        // Explicit convolution with the zero extension: sup_t g_n(t) <= ||rho_n||_inf int_0^t (t-s)^{-1/2}.
        double sup = 0.0;
        for (double t = 1e-4; t <= 1.0; t += 1e-3) {
            const double v = bn.eval1(t, 1.0);
            EXPECT_TRUE(std::isfinite(v));
            sup = std::max(sup, v);
        }
        EXPECT_LT(sup, 10.0 * std::sqrt(n));
        // Far from 0 the kernel average of t^{-1/2} over [t-1/n, t] lies between the endpoints.
        const double t = 0.5;
        const double v = bn.eval1(t, 1.0);
        EXPECT_GE(v, std::pow(t, -0.5));
        EXPECT_LE(v, std::pow(t - 1.0 / n, -0.5));
    }
}

TEST(MollifyTime, NormDomination) {
    const auto b = time_singular_drift(2.0, 0.5, 1.0, 1.5);
    const auto nb = lebesgue_holder_norm(b);
    for (int n : {4, 16, 64}) {
        const auto nn = lebesgue_holder_norm(mollify_time(b, n));
        EXPECT_LE(nn.sup_part, nb.sup_part);
        EXPECT_LE(nn.seminorm_part, nb.seminorm_part);
    }
}

TEST(MollifyTime, GenericDriftUsesExtension) {
    const DriftField ramp({kInf, 0.5, 0.0, 1.0, 1, "ramp"},
                          [](double t, std::span<const double>, std::span<double> out) { out[0] = 1.0 + t; });
    const auto rn = mollify_time(ramp, 10);
    EXPECT_NEAR(rn.eval1(0.0, 0.0), 1.0, 1e-14);
    // Symmetric bump on [0, 0.1] has mean 0.05.
    EXPECT_NEAR(rn.eval1(0.5, 0.0), 1.45, 1e-12);
}

TEST(Envelope, ClosedFormAtOrigin) {
    const double beta = 0.5;
    auto h = [beta](double x) { return counterexample_profile(x, beta, 1.0); };
    for (double n : {2.0, 8.0, 32.0, 128.0, 2048.0}) {
        const auto hn = lipschitz_envelope(h, n, EnvelopeSide::FromAbove, 2.0, {-2.0, -1.0, 0.0, 1.0, 2.0});
        const double expected = (1.0 - beta) * std::pow(beta, beta / (1.0 - beta)) * std::pow(n, -beta / (1.0 - beta));
        EXPECT_NEAR(hn(0.0) / expected, 1.0, 1e-9) << n;
        const auto ln = lipschitz_envelope(h, n, EnvelopeSide::FromBelow, 2.0, {-2.0, -1.0, 0.0, 1.0, 2.0});
        EXPECT_NEAR(ln(0.0), -hn(0.0), 1e-12 * expected);
    }
}

TEST(Envelope, FixedPointBracketMonotoneLipschitz) {
    auto smooth = [](double x) { return 0.5 * std::sin(x); };
    const auto fixed = lipschitz_envelope(smooth, 1.0, EnvelopeSide::FromAbove, 0.5);
    for (double x = -3.0; x <= 3.0; x += 0.37) {
        EXPECT_NEAR(fixed(x), smooth(x), 1e-12);
    }
    auto h = [](double x) { return signed_power(x, 0.3); };
    const auto grid = linspace(-1.0, 1.0, 401);
    std::vector<double> prev_above(grid.size(), kInf), prev_below(grid.size(), -kInf);
    for (double n : {2.0, 8.0, 32.0}) {
        const auto above = lipschitz_envelope(h, n, EnvelopeSide::FromAbove, 1.0, {0.0});
        const auto below = lipschitz_envelope(h, n, EnvelopeSide::FromBelow, 1.0, {0.0});
        std::vector<double> va(grid.size()), vb(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            va[i] = above(grid[i]);
            vb[i] = below(grid[i]);
            EXPECT_GE(va[i], h(grid[i]));
            EXPECT_LE(vb[i], h(grid[i]));
            EXPECT_LE(va[i], prev_above[i] + 1e-12);
            EXPECT_GE(vb[i], prev_below[i] - 1e-12);
            if (i > 0) {
                EXPECT_GE(va[i], va[i - 1] - 1e-12);
                EXPECT_LE(std::abs(va[i] - va[i - 1]), n * (grid[i] - grid[i - 1]) * (1 + 1e-9));
                EXPECT_LE(std::abs(vb[i] - vb[i - 1]), n * (grid[i] - grid[i - 1]) * (1 + 1e-9));
            }
        }
        prev_above = va;
        prev_below = vb;
    }
    EXPECT_THROW(lipschitz_envelope(h, 0.0, EnvelopeSide::FromAbove, 1.0), ParameterError);
}
