#pragma once

#include "stablesde/drift_space.hpp"
#include "stablesde/kolmogorov_pde.hpp"
#include "stablesde/nonuniqueness_lab.hpp"
#include "stablesde/sde_sim.hpp"
#include "stablesde/stable_noise.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace stablesde::io {

using Json = nlohmann::json;

/// Shortest decimal that round-trips to v; "nan", "inf", "-inf" otherwise.
std::string format_number(double v);

/// CSV with a header row; cells are numbers (round-trip), integers or text.
class CsvTable {
public:
    using Cell = std::variant<double, std::int64_t, std::string>;

    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<Cell> row);
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Writes `content` to path, creating parent directories. Throws ArgumentError
/// when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& content);
/// Two-space indented JSON with sorted keys and a trailing newline.
std::string json_text(const Json& value);
void write_json(const std::filesystem::path& path, const Json& value);

/// Finite numbers as numbers, non-finite values as strings.
Json number(double v);

// ---------------------------------------------------------------- serializers

/// time, value_1..value_d
CsvTable path_csv(const noise::CadlagPath& path);
/// params, seed, stream and recorded jumps.
Json path_sidecar(const noise::StableParams& params, std::uint64_t seed, std::uint64_t stream,
                  const noise::CadlagPath& path);
/// t, r, K
CsvTable heat_kernel_csv(const noise::HeatKernelTable& table);
/// {family, regime, exponent, threshold}
Json criticality_json(const drift::CriticalityReport& report);
Json norm_json(const drift::NormEstimate& estimate, const drift::DriftMeta& meta);
/// time, x_1..x_d, drift_integral_1..drift_integral_d
CsvTable trajectory_csv(const sde::Trajectory& traj);
/// t, x (or x_1, x_2), u (or U_1..U_c), grad components.
CsvTable grid_function_csv(const pde::GridFunction& u);
/// lambda, sup_grad, picard_iterations, error
CsvTable decay_csv(const pde::DecayCurve& curve);
Json decay_json(const pde::DecayCurve& curve);
Json gap_json(const sde::GapStatistic& stat);
Json verdict_json(const lab::PathVerdict& verdict);
/// path_id, T0, margin_max, margin_min, gap_at_C2, nonunique, family_difference, family_difference_full, error
CsvTable lab_summary_csv(const lab::LabRun& run);

} // namespace stablesde::io
