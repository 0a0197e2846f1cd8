#include "stablesde/io.hpp"

#include "stablesde/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

namespace stablesde::io {

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<Cell> row) {
    if (row.size() != header_.size()) {
        throw ArgumentError("CSV row has " + std::to_string(row.size()) + " cells, header has " +
                            std::to_string(header_.size()));
    }
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (auto& cell : row) {
        if (const auto* d = std::get_if<double>(&cell)) {
            cells.push_back(format_number(*d));
        } else if (const auto* i = std::get_if<std::int64_t>(&cell)) {
            cells.push_back(std::to_string(*i));
        } else {
            std::string text = std::get<std::string>(cell);
            if (text.find_first_of(",\"\n") != std::string::npos) {
                std::string quoted = "\"";
                for (char c : text) {
                    quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
                }
                text = quoted + "\"";
            }
            cells.push_back(std::move(text));
        }
    }
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& row : rows_) {
        line(row);
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ArgumentError("cannot open '" + path.string() + "' for writing");
    }
    out << content;
    if (!out) {
        throw ArgumentError("failed to write '" + path.string() + "'");
    }
}

std::string json_text(const Json& value) { return value.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const Json& value) { write_text(path, json_text(value)); }

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(format_number(v)); }

namespace {

Json optional_number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

} // namespace

CsvTable path_csv(const noise::CadlagPath& path) {
    std::vector<std::string> header{"time"};
    for (int i = 1; i <= path.dim(); ++i) {
        header.push_back("value_" + std::to_string(i));
    }
    CsvTable table(std::move(header));
    const auto times = path.times();
    for (std::size_t k = 0; k < path.size(); ++k) {
        std::vector<CsvTable::Cell> row{times[k]};
        for (double v : path.value(k)) {
            row.emplace_back(v);
        }
        table.add_row(std::move(row));
    }
    return table;
}

Json path_sidecar(const noise::StableParams& params, std::uint64_t seed, std::uint64_t stream,
                  const noise::CadlagPath& path) {
    Json jumps = Json::array();
    for (std::size_t j = 0; j < path.jump_count(); ++j) {
        Json size = Json::array();
        for (double v : path.jump(j)) {
            size.push_back(number(v));
        }
        jumps.push_back({{"time", number(path.jump_times()[j])}, {"size", size}});
    }
    return {{"params", {{"alpha", number(params.alpha)}, {"dim", params.dim}}},
            {"seed", seed},
            {"stream", stream},
            {"points", path.size()},
            {"jump_cutoff", number(path.jump_cutoff())},
            {"jumps", jumps}};
}

CsvTable heat_kernel_csv(const noise::HeatKernelTable& table) {
    CsvTable csv({"t", "r", "K"});
    for (std::size_t ti = 0; ti < table.t_grid.size(); ++ti) {
        for (std::size_t ri = 0; ri < table.radii.size(); ++ri) {
            csv.add_row({table.t_grid[ti], table.radii[ri], table.at(ti, ri)});
        }
    }
    return csv;
}

Json criticality_json(const drift::CriticalityReport& report) {
    return {{"family", drift::to_string(report.family)},
            {"regime", drift::to_string(report.regime)},
            {"exponent", number(report.scaling_exponent)},
            {"threshold", number(report.threshold)}};
}

Json norm_json(const drift::NormEstimate& estimate, const drift::DriftMeta& meta) {
    return {{"drift", meta.label},
            {"p", number(meta.p)},
            {"beta", number(meta.beta)},
            {"horizon", number(meta.horizon)},
            {"sup_part", number(estimate.sup_part)},
            {"seminorm_part", number(estimate.seminorm_part)},
            {"norm", number(estimate.norm)},
            {"divergent", estimate.divergent}};
}

CsvTable trajectory_csv(const sde::Trajectory& traj) {
    std::vector<std::string> header{"time"};
    for (int i = 1; i <= traj.dim; ++i) {
        header.push_back("x_" + std::to_string(i));
    }
    for (int i = 1; i <= traj.dim; ++i) {
        header.push_back("drift_integral_" + std::to_string(i));
    }
    CsvTable table(std::move(header));
    const auto d = static_cast<std::size_t>(traj.dim);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::vector<CsvTable::Cell> row{traj.times[k]};
        for (std::size_t i = 0; i < d; ++i) {
            row.emplace_back(traj.states[k * d + i]);
        }
        for (std::size_t i = 0; i < d; ++i) {
            row.emplace_back(traj.drift_integral[k * d + i]);
        }
        table.add_row(std::move(row));
    }
    return table;
}

CsvTable grid_function_csv(const pde::GridFunction& u) {
    std::vector<std::string> header{"t"};
    if (u.dim == 1) {
        header.emplace_back("x");
    } else {
        for (int i = 1; i <= u.dim; ++i) {
            header.push_back("x_" + std::to_string(i));
        }
    }
    for (int c = 0; c < u.components; ++c) {
        header.push_back(u.components == 1 ? std::string("u") : "U_" + std::to_string(c + 1));
    }
    for (int c = 0; c < u.components; ++c) {
        for (int j = 0; j < u.dim; ++j) {
            std::string name = "grad";
            if (u.components > 1) {
                name += "_" + std::to_string(c + 1);
            }
            if (u.dim > 1 || u.components > 1) {
                name += "_" + std::to_string(j + 1);
            }
            header.push_back(std::move(name));
        }
    }
    CsvTable table(std::move(header));
    for (std::size_t ti = 0; ti < u.times.size(); ++ti) {
        for (std::size_t j = 0; j < u.points(); ++j) {
            std::vector<CsvTable::Cell> row{u.times[ti]};
            for (double coord : u.point(j)) {
                row.emplace_back(coord);
            }
            for (int c = 0; c < u.components; ++c) {
                row.emplace_back(u.slice(ti, c)[j]);
            }
            for (int c = 0; c < u.components; ++c) {
                for (int dir = 0; dir < u.dim; ++dir) {
                    row.emplace_back(u.gradient_slice(ti, c, dir)[j]);
                }
            }
            table.add_row(std::move(row));
        }
    }
    return table;
}

CsvTable decay_csv(const pde::DecayCurve& curve) {
    CsvTable table({"lambda", "sup_grad", "picard_iterations", "error"});
    for (const auto& row : curve.rows) {
        table.add_row({row.lambda, row.sup_gradient ? *row.sup_gradient : std::nan(""),
                       static_cast<std::int64_t>(row.picard_iterations), row.error});
    }
    return table;
}

Json decay_json(const pde::DecayCurve& curve) {
    Json rows = Json::array();
    for (const auto& row : curve.rows) {
        rows.push_back({{"lambda", number(row.lambda)},
                        {"sup_grad", optional_number(row.sup_gradient)},
                        {"picard_iterations", row.picard_iterations},
                        {"error", row.error}});
    }
    return {{"rows", rows}, {"slope", optional_number(curve.slope)}, {"strictly_decreasing", curve.strictly_decreasing}};
}

Json gap_json(const sde::GapStatistic& stat) {
    return {{"mean", number(stat.mean)},
            {"standard_error", number(stat.standard_error)},
            {"ratio", optional_number(stat.ratio)},
            {"ratio_se", optional_number(stat.ratio_se)},
            {"n_paths", stat.n_paths}};
}

Json verdict_json(const lab::PathVerdict& v) {
    Json out{{"path_id", v.path_id},
             {"T0", optional_number(v.t0)},
             {"passed_filter", v.t0.has_value()},
             {"family_difference", optional_number(v.family_difference)},
             {"family_difference_full", optional_number(v.family_difference_full)},
             {"error", v.error}};
    if (v.report) {
        const auto& r = *v.report;
        out["report"] = {{"window_end", number(r.window_end)},  {"checked_points", r.checked_points},
                         {"upper_holds", r.upper_holds},        {"lower_holds", r.lower_holds},
                         {"margin_max", number(r.margin_max)},  {"margin_min", number(r.margin_min)},
                         {"gap_at_end", number(r.gap_at_end)},  {"nonunique", r.nonunique}};
    } else {
        out["report"] = nullptr;
    }
    return out;
}

CsvTable lab_summary_csv(const lab::LabRun& run) {
    CsvTable table({"path_id", "T0", "margin_max", "margin_min", "gap_at_C2", "nonunique", "family_difference",
                    "family_difference_full", "error"});
    const double nan = std::nan("");
    for (const auto& v : run.paths) {
        const auto* r = v.report ? &*v.report : nullptr;
        table.add_row({static_cast<std::int64_t>(v.path_id), v.t0 ? *v.t0 : nan, r ? r->margin_max : nan,
                       r ? r->margin_min : nan, r ? r->gap_at_end : nan,
                       static_cast<std::int64_t>(r && r->nonunique ? 1 : 0),
                       v.family_difference ? *v.family_difference : nan,
                       v.family_difference_full ? *v.family_difference_full : nan, v.error});
    }
    return table;
}

} // namespace stablesde::io
