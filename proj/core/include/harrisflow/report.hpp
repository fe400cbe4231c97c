#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "harrisflow/coupling.hpp"
#include "harrisflow/montecarlo.hpp"
#include "harrisflow/transport.hpp"

namespace hflow {

inline constexpr int report_schema_version = 1;

std::string version_string();

// Shortest round-trip text is not needed; every real is written with 17
// significant digits so that equal runs give equal bytes.
std::string format_real(double v);

// One CSV row per (series, parameter):
// experiment,series,parameter_name,parameter,estimate,se,ci_low,ci_high,count,bound,verdict,asserted
std::string report_csv(const ExperimentReport& report);
// Full provenance: schema_version, version, config, config_hash, master_seed,
// series (with log-log fits), checks, info, overall verdict.
nlohmann::json report_json(const ExperimentReport& report);
std::string report_json_text(const ExperimentReport& report);

// Estimates of several series merged into one table keyed by parameter value.
struct SummaryRow {
  double parameter = 0.0;
  std::vector<std::optional<RateRow>> cells;  // one per column
};

struct SummaryTable {
  std::string parameter_name;
  std::vector<std::string> columns;
  std::vector<SummaryRow> rows;  // ascending parameter
};

SummaryTable summarize(std::span<const RateFit> fits);
std::string summary_csv(const SummaryTable& table);

// {"sigma": [...], "partition_sizes": [...], "cost": c}; infinite gluing
// times are written as the string "inf". Cost uses uniform weights.
nlohmann::json coupling_summary_json(const CouplingTrace& trace);

nlohmann::json measure_json(const DiscreteMeasure& m);

}  // namespace hflow
