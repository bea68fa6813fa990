#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "config.hpp"
#include "experiment.hpp"

using namespace drp;
using json = nlohmann::ordered_json;

namespace {

ReportDocument run(const std::string& text) { return run_experiment(validate_config(text)); }

}  // namespace

TEST(Experiment, IdentitySketchRecoversExactly) {
  const auto doc = run(
      "experiment = recover\nd = 40\nn = 30\nrank = 4\nsketch = identity\nloss = logistic\n"
      "trials = 3\n");
  ASSERT_EQ(doc.records.size(), 3u);
  EXPECT_EQ(doc.failed_trials, 0);
  EXPECT_EQ(doc.aggregates["success_fraction"], 1.0);
  EXPECT_LE(doc.aggregates["rel_error"]["max"].get<double>(), 1e-8);
}

TEST(Experiment, AggregatesMatchRecords) {
  const auto doc = run("experiment = recover\nd = 80\nn = 30\nrank = 3\nsketch_dim = 20\ntrials = 5\n");
  double sum = 0.0;
  double lo = INFINITY;
  double hi = -INFINITY;
  int within = 0;
  for (const auto& r : doc.records) {
    const double e = r["rel_error"];
    sum += e;
    lo = std::min(lo, e);
    hi = std::max(hi, e);
    within += r["within_bound"].get<bool>();
    EXPECT_EQ(r["seed"], r["trial"]);
  }
  EXPECT_EQ(doc.aggregates["rel_error"]["mean"].get<double>(), sum / 5);
  EXPECT_EQ(doc.aggregates["rel_error"]["min"].get<double>(), lo);
  EXPECT_EQ(doc.aggregates["rel_error"]["max"].get<double>(), hi);
  EXPECT_EQ(doc.aggregates["within_bound"]["count_true"].get<int>(), within);
  EXPECT_EQ(doc.aggregates["trials_ok"], 5);
}

TEST(Experiment, RerunIsBitIdentical) {
  const std::string text =
      "experiment = iterate\nd = 100\nn = 40\nrank = 3\nsketch_dim = 30\nloss = logistic\n"
      "trials = 3\nseed = 11\n";
  EXPECT_EQ(report_json(run(text), false), report_json(run(text), false));
}

TEST(Experiment, BoundsReport) {
  const auto doc = run("experiment = bounds\nrank = 5\neps = 0.5\ndelta = 0.1\n");
  ASSERT_EQ(doc.records.size(), 1u);
  EXPECT_EQ(doc.records[0]["m"], 443);
  const auto parsed = json::parse(report_json(doc));
  EXPECT_EQ(parsed["schema"], kReportSchema);
  EXPECT_TRUE(parsed["summary"].is_object());
}

TEST(Experiment, FailedTrialsAreRecorded) {
  const auto doc = run(
      "experiment = recover\nd = 60\nn = 20\nrank = 3\nsketch_dim = 10\nloss = logistic\n"
      "max_iters = 1\ntol = 1e-14\ntrials = 2\n");
  EXPECT_TRUE(doc.all_failed());
  for (const auto& r : doc.records) {
    EXPECT_TRUE(r.contains("error"));
    EXPECT_TRUE(r.contains("error_code"));
  }
  EXPECT_EQ(doc.aggregates["trials_failed"], 2);
}

TEST(Experiment, CsvHasSchemaColumn) {
  const auto doc = run("experiment = iterate\nd = 50\nn = 20\nrank = 2\nsketch_dim = 20\niters = 3\ntrials = 2\n");
  std::istringstream in(report_csv(doc));
  std::string header;
  std::string row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header.rfind("schema,", 0), 0u) << header;
  EXPECT_NE(header.find("trace_3"), std::string::npos) << header;
  EXPECT_EQ(row.rfind(std::string(kReportSchema) + ",", 0), 0u) << row;
}

TEST(Experiment, ConcentrationSummary) {
  const auto doc = run("experiment = concentration\nrank = 5\neps = 0.5\ndelta = 0.1\ntrials = 10\n");
  EXPECT_EQ(doc.summary["analytic_m"], 443);
  EXPECT_LE(doc.summary["empirical_m"].get<long>(), 443);
  EXPECT_EQ(doc.aggregates["within_bound"]["count"], 10);
}
