#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace drp {

inline constexpr const char* kReportSchema = "drp-report/1";

struct ReportDocument {
  nlohmann::ordered_json config;
  // One object per trial, ordered by trial index. Failed trials carry an
  // "error" field instead of measurements.
  std::vector<nlohmann::ordered_json> records;
  nlohmann::ordered_json aggregates;
  // Experiment-level quantities that are not per trial (analytic bounds etc).
  nlohmann::ordered_json summary;
  double total_seconds = 0.0;
  std::vector<double> trial_seconds;
  int failed_trials = 0;

  bool all_failed() const { return !records.empty() && failed_trials == static_cast<int>(records.size()); }
};

// Runs every trial of the configured experiment. Trial t uses seed + t for
// the dataset (when generated) and for the sketch.
ReportDocument run_experiment(const ExperimentConfig& config);

// mean / min / max / median of every numeric field and the fraction of true
// values of every boolean field, over records without an "error". Means are
// summed in trial order.
nlohmann::ordered_json aggregate_records(const std::vector<nlohmann::ordered_json>& records);

std::string report_json(const ReportDocument& doc, bool include_timings = true);
// One row per trial; the first column holds the schema version.
std::string report_csv(const ReportDocument& doc);

// Worker threads for trials, from DRP_WORKERS (default 1).
int worker_count();

}  // namespace drp
