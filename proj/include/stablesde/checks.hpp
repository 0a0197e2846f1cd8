#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace stablesde::checks {

/// Outcome of one property check. `details` holds only deterministic values,
/// so two runs with the same seed serialize identically.
struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string summary;
    nlohmann::json details;
};

struct SuiteOptions {
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
};

/// Empirical characteristic function against exp(-t|xi|^alpha) for
/// alpha in {0.5, 1, 1.5} and the scaling law L_{kappa t} = kappa^{1/alpha} L_t.
CheckResult stable_law(const SuiteOptions& options);
/// Cauchy closed form, unit mass, self-similarity and the fitted two-sided bound constant.
CheckResult heat_kernel(const SuiteOptions& options);
/// Regime against the sign of an independently computed exact exponent on a 50^3 grid per family.
CheckResult criticality_sweep(const SuiteOptions& options);
/// Closed forms, Feynman-Kac agreement and Picard residual of the mild solver.
CheckResult kolmogorov_solver(const SuiteOptions& options);
/// Backward vector problem with drift sin over lambda in {2, 4, 8, 16, 32}.
CheckResult gradient_decay(const SuiteOptions& options);
/// Coupled-path gap ratio for |x - y| in {1e-2, 1e-3} and x = y.
CheckResult pathwise_gap(const SuiteOptions& options);
/// Zero-noise closed form, envelope verdicts on sampled paths and family agreement.
CheckResult nonuniqueness(const SuiteOptions& options);
/// Mollifier norm dominations and comparison monotonicity on coupled paths.
CheckResult mollifier_laws(const SuiteOptions& options);

struct SuiteEntry {
    int id;
    std::string name;
    double time_limit_seconds;
    std::function<CheckResult(const SuiteOptions&)> run;
};

/// The property suite in order.
std::vector<SuiteEntry> suite();

/// Runs the suite, writes check_<id>_<name>.json per check and summary.csv
/// into out_dir, and calls `progress` after each check with its wall time.
/// Returns the results in suite order.
std::vector<CheckResult> run_selftest(const std::filesystem::path& out_dir, const SuiteOptions& options,
                                      const std::function<void(const CheckResult&, double)>& progress = {});

} // namespace stablesde::checks
