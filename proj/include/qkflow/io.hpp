#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "qkflow/grid.hpp"
#include "qkflow/report.hpp"
#include "qkflow/translator.hpp"

namespace qkf::io {

/// Full round-trip decimal formatting (17 significant digits), so written
/// values parse back bit-exactly.
std::string format_full(double v);

/// Snapshot CSV: header "x,u" or "x,y,u", rows in row-major grid order.
void write_grid_csv(const flow::GraphPatch& p, const std::string& path);

/// Values of a snapshot CSV in row-major order (geometry comes from the run
/// summary, not the file).
std::vector<double> read_grid_values(const std::string& path, std::int64_t expected);

/// Profile CSV: r, u, up, kappa_rad, kappa_ang, residual.
void write_profile_csv(const translator::TranslatorProfile& p,
                       const translator::ProfilePointData& d, const std::string& path);

nlohmann::json report_to_json(const monitors::MonitorReport& rep);

/// report.json plus one "series_<name>.csv" per series (t,value rows).
void write_report(const monitors::MonitorReport& rep, const std::string& dir);

void write_json(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json(const std::string& path);

} // namespace qkf::io
