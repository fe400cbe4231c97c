#include "harrisflow/report.hpp"

#include <fmt/format.h>

#include <map>
#include <set>

namespace hflow {

using nlohmann::json;

std::string version_string() { return fmt::format("harrisflow {}", HARRISFLOW_VERSION); }

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

std::string report_csv(const ExperimentReport& report) {
  std::string out =
      "experiment,series,parameter_name,parameter,estimate,se,ci_low,ci_high,count,bound,verdict,asserted\n";
  for (const auto& fit : report.fits) {
    for (const auto& row : fit.rows) {
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", report.config.experiment, fit.name,
                         fit.parameter_name, format_real(row.parameter), format_real(row.estimate.mean),
                         format_real(row.estimate.se), format_real(row.estimate.ci_low()),
                         format_real(row.estimate.ci_high()), row.estimate.count, format_real(row.bound),
                         to_string(row.verdict), fit.asserted ? "yes" : "no");
    }
  }
  return out;
}

json report_json(const ExperimentReport& report) {
  json series = json::array();
  for (const auto& fit : report.fits) {
    json rows = json::array();
    for (const auto& row : fit.rows) {
      rows.push_back({{"parameter", row.parameter},
                      {"estimate", row.estimate.mean},
                      {"se", row.estimate.se},
                      {"ci_low", row.estimate.ci_low()},
                      {"ci_high", row.estimate.ci_high()},
                      {"count", row.estimate.count},
                      {"bound", row.bound},
                      {"verdict", to_string(row.verdict)}});
    }
    json s{{"name", fit.name}, {"parameter_name", fit.parameter_name}, {"asserted", fit.asserted}, {"rows", rows}};
    if (fit.has_fit) s["loglog"] = {{"slope", fit.loglog.slope}, {"intercept", fit.loglog.intercept}};
    series.push_back(std::move(s));
  }
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name}, {"detail", c.detail}, {"verdict", to_string(c.verdict)}});
  }
  json info = json::object();
  for (const auto& [k, v] : report.info) info[k] = v;
  return json{{"schema_version", report_schema_version},
              {"version", version_string()},
              {"experiment", report.config.experiment},
              {"config_hash", config_hash(report.config)},
              {"master_seed", report.config.seed},
              {"config", to_json(report.config)},
              {"series", series},
              {"checks", checks},
              {"info", info},
              {"overall", to_string(report.overall())}};
}

std::string report_json_text(const ExperimentReport& report) { return report_json(report).dump(2) + "\n"; }

SummaryTable summarize(std::span<const RateFit> fits) {
  SummaryTable table;
  if (fits.empty()) return table;
  table.parameter_name = fits.front().parameter_name;
  std::set<std::string> used;
  for (const auto& fit : fits) {
    if (fit.parameter_name != table.parameter_name) table.parameter_name = "parameter";
    std::string name = fit.name;
    for (int k = 2; used.count(name) != 0; ++k) name = fmt::format("{}#{}", fit.name, k);
    used.insert(name);
    table.columns.push_back(name);
  }
  std::map<double, std::vector<std::optional<RateRow>>> merged;
  for (std::size_t c = 0; c < fits.size(); ++c) {
    for (const auto& row : fits[c].rows) {
      auto& cells = merged[row.parameter];
      cells.resize(fits.size());
      cells[c] = row;
    }
  }
  for (auto& [p, cells] : merged) table.rows.push_back({p, std::move(cells)});
  return table;
}

std::string summary_csv(const SummaryTable& table) {
  std::string out = table.parameter_name.empty() ? "parameter" : table.parameter_name;
  for (const auto& c : table.columns) out += fmt::format(",{0}_estimate,{0}_se,{0}_bound,{0}_verdict", c);
  out += "\n";
  for (const auto& row : table.rows) {
    out += format_real(row.parameter);
    for (const auto& cell : row.cells) {
      if (cell) {
        out += fmt::format(",{},{},{},{}", format_real(cell->estimate.mean), format_real(cell->estimate.se),
                           format_real(cell->bound), to_string(cell->verdict));
      } else {
        out += ",,,,";
      }
    }
    out += "\n";
  }
  return out;
}

json coupling_summary_json(const CouplingTrace& trace) {
  json sigma = json::array();
  for (std::size_t i = 1; i <= trace.sigma.size(); ++i) {
    if (trace.sigma[i - 1]) {
      sigma.push_back(trace.sigma_time(i));
    } else {
      sigma.push_back("inf");
    }
  }
  json sizes = json::array();
  for (const auto& leader : trace.partitions) {
    json element_sizes = json::array();
    for (std::size_t k = 0; k < leader.size();) {
      std::size_t j = k;
      while (j < leader.size() && leader[j] == leader[k]) ++j;
      element_sizes.push_back(j - k);
      k = j;
    }
    sizes.push_back(std::move(element_sizes));
  }
  const std::size_t n = trace.particles();
  const std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  return json{{"epsilon", trace.epsilon},
              {"sigma", sigma},
              {"partition_sizes", sizes},
              {"cost", coupling_cost(trace, weights)}};
}

json measure_json(const DiscreteMeasure& m) {
  return json{{"atoms", std::vector<double>(m.atoms().begin(), m.atoms().end())},
              {"weights", std::vector<double>(m.weights().begin(), m.weights().end())}};
}

}  // namespace hflow
