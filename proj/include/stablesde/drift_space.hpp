#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stablesde::drift {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Real function of one spatial variable.
using ScalarFn = std::function<double(double)>;
/// b(t, x) written into out (size dim).
using EvalFn = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
/// Spatial profile h(x) written into out (size dim).
using ProfileFn = std::function<void(std::span<const double> x, std::span<double> out)>;

/// Declared regularity of a drift.
struct DriftMeta {
    double p = kInf;            ///< time integrability, in [1, inf]
    double beta = 0.5;          ///< spatial Holder index, in (0, 1)
    double sing_exponent = 0.0; ///< a >= 0 with |b(t, .)| ~ t^{-a} near t = 0
    double horizon = 1.0;       ///< T > 0
    int dim = 1;
    std::string label;

    /// Throws ParameterError when an invariant fails.
    void validate() const;
};

/// Optional product structure b(t, x) = g(t) h(x).
struct SeparableForm {
    ScalarFn time_factor;
    /// a when g(t) = C t^{-a} for a constant C, otherwise empty.
    std::optional<double> time_power;
    ProfileFn profile;
    /// Upper bound for sup_x |h(x)| (Euclidean norm in the vector case).
    double profile_sup = kInf;
    /// Points where h is not smooth; used as search hints (one dimension).
    std::vector<double> kinks;
};

/// Immutable, cheaply copyable drift b : [0, T] x R^d -> R^d.
class DriftField {
public:
    DriftField(DriftMeta meta, EvalFn eval, double sup_bound = kInf);
    DriftField(DriftMeta meta, SeparableForm form);

    const DriftMeta& meta() const noexcept;
    int dim() const noexcept;

    void eval(double t, std::span<const double> x, std::span<double> out) const;
    /// First component at a one-dimensional point.
    double eval1(double t, double x) const;

    /// Null unless the drift was built from a SeparableForm.
    const SeparableForm* separable() const noexcept;
    /// Upper bound for sup_{t,x} |b| (infinite when unknown or singular).
    double sup_bound() const noexcept;

    /// Copy carrying a cached norm estimate.
    DriftField with_norm(double norm) const;
    std::optional<double> cached_norm() const noexcept;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    std::optional<double> norm_;
};

/// Profile of the counterexample drift: sign(x)|x|^beta for |x| <= theta0, a
/// monotone C^1 cubic Hermite blend to +-2 theta0^beta on [theta0, 2 theta0],
/// constant beyond.
double counterexample_profile(double x, double beta, double theta0);

/// b(t, x) = t^{-1/p_hat} h(x) with h = counterexample_profile (dimension 1).
DriftField time_singular_drift(double p_hat, double beta, double theta0, double p, double horizon = 1.0);

struct LibraryOptions {
    double horizon = 1.0;
};

/// Drift by id: "zero", "constant:c", "sin", "linear:k",
/// "time-singular:p_hat,beta,theta0", "counterexample". Throws ArgumentError
/// for an unknown id and ParameterError for malformed parameters.
DriftField make_drift(const std::string& id, int dim = 1, const LibraryOptions& options = {});

// ---------------------------------------------------------------- criticality

enum class SpaceFamily { LqLpBrownian, LpHolderBrownian, LinfBesovStable, LpHolderStable };
enum class Regime { Subcritical, Critical, Supercritical };

std::string to_string(SpaceFamily family);
std::string to_string(Regime regime);
/// Accepts the names produced by to_string and lower-case variants
/// ("lp-holder-stable"). Throws ArgumentError otherwise.
SpaceFamily parse_family(const std::string& name);

struct CriticalityReport {
    SpaceFamily family = SpaceFamily::LpHolderStable;
    Regime regime = Regime::Critical;
    double scaling_exponent = 0.0;
    /// Boundary value of p (infinite when no finite p is subcritical).
    double threshold = 0.0;
};

/// Classifies by the sign of the scaling exponent, evaluated exactly on the
/// shortest decimal representation of each input.
///
/// beta_or_q is the time exponent q for LqLpBrownian and the spatial index
/// beta otherwise. Throws DomainError for inadmissible parameters (for
/// example alpha + beta <= 1 in the stable families).
CriticalityReport classify_criticality(double alpha, double beta_or_q, double p, int dim, SpaceFamily family);

// ---------------------------------------------------------------- rescaling

/// b^theta(t, x) = theta^{1-1/alpha} b(theta t, theta^{1/alpha} x) on the
/// original horizon.
DriftField rescale_drift(const DriftField& b, double theta, double alpha);

// ---------------------------------------------------------------- norms

/// max over pairs of |v_i - v_j| / |x_i - x_j|^beta.
///
/// points holds n points of dimension dim (row-major), values n vectors of
/// dimension width. All pairs are compared when there are at most max_pairs;
/// otherwise pairs are taken along a deterministic set of index lags.
double holder_seminorm_points(std::span<const double> points, int dim, std::span<const double> values, int width,
                              double beta, std::size_t max_pairs = 1'000'000);

/// Grid estimate for a scalar function of one variable. Throws ArgumentError
/// for a grid with fewer than two points.
double holder_seminorm_grid(const ScalarFn& h, double beta, std::span<const double> grid,
                            std::size_t max_pairs = 1'000'000);

struct PoissonEstimate {
    double value = 0.0;             ///< sup over the xi grid
    std::vector<double> per_xi;     ///< xi^{1-beta} sup_x |d/dxi P_xi h(x)|
};

/// Poisson-semigroup characterization of the Holder seminorm (dimension 1),
/// using the analytic xi-derivative of the Cauchy kernel. Throws DomainError
/// for a nonpositive xi.
/// The inner quadrature is split where x - xi tan(theta) crosses a kink of h.
PoissonEstimate holder_seminorm_poisson(const ScalarFn& h, double beta, std::span<const double> xi_grid,
                                        std::span<const double> x_grid, std::vector<double> kinks = {0.0});

struct NormOptions {
    double halfwidth = 10.0;
    std::size_t points_per_dim = 201;
    std::size_t time_panels = 48;
    std::size_t max_pairs = 1'000'000;
    /// Integrate over [0, horizon] instead of the declared horizon.
    std::optional<double> horizon;
};

struct NormEstimate {
    double sup_part = 0.0;       ///< ||b||_{p,0}
    double seminorm_part = 0.0;  ///< [b]_{p,beta}
    double norm = 0.0;           ///< (sup^p + semi^p)^{1/p}; sum when p = inf
    bool divergent = false;
};

/// Grid estimate of the Lebesgue-Holder norm with the declared p and beta.
/// Declared singular drifts with p a >= 1 are reported divergent.
NormEstimate lebesgue_holder_norm(const DriftField& b, const NormOptions& options = {});

// ---------------------------------------------------------------- approximation

/// Spatial mollification by a normalized bump supported in the ball of radius
/// 1/n, discretized as a convex combination over a lattice of spacing
/// 1/(n*32) (1/(n*16) for dim >= 2).
DriftField mollify_space(const DriftField& b, int n);

/// Causal time mollification by a bump supported in [0, 1/n]; b is extended
/// to t < 0 by b(0, .), or by 0 when the drift declares a time singularity.
DriftField mollify_time(const DriftField& b, int n);

enum class EnvelopeSide { FromAbove, FromBelow };

/// n-Lipschitz envelope: sup_y [h(y) - n|x-y|] (from above) or
/// inf_y [h(y) + n|x-y|] (from below).
///
/// h must be bounded by `sup_h`; the search window is |y - x| <= 2 sup_h / n.
/// `kinks` are points where h may fail to be smooth. Throws ParameterError
/// for n <= 0.
ScalarFn lipschitz_envelope(ScalarFn h, double n, EnvelopeSide side, double sup_h, std::vector<double> kinks = {});

} // namespace stablesde::drift
