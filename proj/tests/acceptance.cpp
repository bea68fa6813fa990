// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdlib>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "experiment.hpp"
#include "loss.hpp"
#include "model.hpp"
#include "recover.hpp"
#include "rng.hpp"
#include "sketch.hpp"
#include "solve.hpp"

using namespace drp;
using json = nlohmann::ordered_json;

namespace {

// Tolerances and thresholds.
constexpr double kPathTolerance = 1e-8;
constexpr double kPathSeconds = 30.0;
constexpr int kBoundTrials = 20;
constexpr int kBoundRequired = 18;
constexpr double kBoundSeconds = 120.0;
constexpr double kNaiveMinimum = 1.0;
constexpr double kDrpMaximum = 0.5;
constexpr double kRatioMinimum = 10.0;
constexpr double kContractionLow = 0.2;
constexpr double kContractionHigh = 0.4;
constexpr double kRatioSlack = 1.2;
constexpr int kDecaySteps = 8;
constexpr double kDecayTarget = 1e-4;
constexpr double kDecaySeconds = 180.0;
constexpr int kConcentrationTrials = 100;
constexpr int kConcentrationRequired = 95;
constexpr double kConcentrationSeconds = 60.0;
constexpr int kFullRankRequired = 16;
constexpr double kFullRankSeconds = 180.0;
constexpr int kDualityInstances = 100;
constexpr double kGapTolerance = 1e-6;
constexpr double kSolverTolerance = 1e-10;
constexpr double kFenchelYoungTolerance = 1e-9;
constexpr double kDualitySeconds = 60.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// Every run goes through here so that criterion 10 can replay them.
std::vector<std::pair<std::string, std::string>> g_runs;

ReportDocument run(const std::string& text) {
  auto doc = run_experiment(validate_config(text));
  g_runs.emplace_back(text, report_json(doc, false));
  return doc;
}

int count_true(const ReportDocument& doc, const char* key) {
  int n = 0;
  for (const auto& r : doc.records) n += r.contains(key) && r[key].is_boolean() && r[key].get<bool>();
  return n;
}

std::vector<double> column(const ReportDocument& doc, const char* key) {
  std::vector<double> v;
  for (const auto& r : doc.records) {
    if (r.contains(key) && r[key].is_number()) v.push_back(r[key].get<double>());
  }
  return v;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? NAN : s / static_cast<double>(v.size());
}

std::string bound_setup(const std::string& experiment, const std::string& loss, long d, long m) {
  std::ostringstream s;
  s << "experiment = " << experiment << "\nd = " << d << "\nn = 300\nrank = 5\nloss = " << loss
    << "\nlambda = 1\neps = 0.5\ndelta = 0.1\ntrials = " << kBoundTrials << "\n";
  if (m > 0) {
    s << "sketch_dim = " << m << "\n";
  } else {
    s << "sketch = bound\n";
  }
  return s.str();
}

Outcome ridge_path_equivalence() {
  const auto t0 = Clock::now();
  const double lambdas[] = {0.1, 1.0, 10.0};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto data = make_low_rank(200, 100, 10, LabelRule::kSignOfPlant, 1000 + i);
    const auto sk = make_sketch(data, 60, 1000 + i);
    const double lambda = lambdas[i % 3];
    const auto closed = ridge_drp_closed_form(data, lambda, sk);
    const auto drp = recover_drp(data, LossSpec::square(), lambda, sk).recovered;
    worst = std::max(worst, relative_error(drp, closed));
  }
  const double secs = seconds_since(t0);
  return {worst <= kPathTolerance && secs < kPathSeconds,
          fmt("max relative gap %.3e (<= %.0e) over 50 instances, %.1fs (< %.0fs)", worst,
              kPathTolerance, secs, kPathSeconds)};
}

Outcome low_rank_bound() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string detail;
  for (const char* loss : {"square", "logistic"}) {
    const auto doc = run(bound_setup("recover", loss, 2000, 0));
    const int ok = count_true(doc, "within_bound");
    const long m = doc.records[0].value("m", 0L);
    const double med = median(column(doc, "rel_error"));
    pass = pass && m == 443 && ok >= kBoundRequired;
    detail += fmt("%s: m=%ld, %d/%d within 1.0, median rel_error %.4f; ", loss, m, ok,
                  kBoundTrials, med);
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < kBoundSeconds;
  return {pass, detail + fmt("%.1fs (< %.0fs)", secs, kBoundSeconds)};
}

// Criteria 3 and 4 share their runs.
struct NaiveRuns {
  std::vector<ReportDocument> compare;
  std::vector<ReportDocument> span;
  double compare_seconds = 0.0;
};

NaiveRuns naive_runs() {
  NaiveRuns runs;
  const auto t0 = Clock::now();
  for (const char* loss : {"square", "logistic"}) {
    runs.compare.push_back(run(bound_setup("naive_vs_drp", loss, 5000, 500)));
  }
  runs.compare_seconds = seconds_since(t0);
  for (const char* loss : {"square", "logistic"}) {
    runs.span.push_back(run(bound_setup("span_error", loss, 5000, 500)));
  }
  return runs;
}

Outcome naive_failure(const NaiveRuns& runs) {
  bool pass = runs.compare_seconds < kBoundSeconds;
  std::string detail;
  const char* names[] = {"square", "logistic"};
  for (std::size_t i = 0; i < runs.compare.size(); ++i) {
    const auto& doc = runs.compare[i];
    const double naive = mean(column(doc, "naive_rel_error"));
    const double drp = mean(column(doc, "drp_rel_error"));
    const double eps = mean(column(doc, "eps_proxy"));
    const double lower = doc.summary["naive_lower_bound_at_mean_eps"].get<double>();
    const double ratio = naive / drp;
    pass = pass && naive >= lower && naive >= kNaiveMinimum && drp <= kDrpMaximum &&
           ratio >= kRatioMinimum;
    detail += fmt("%s: naive %.3f (>= max(%.3f, %.1f) at eps-proxy %.3f), drp %.4f (<= %.1f), "
                  "ratio %.1f (>= %.0f); ",
                  names[i], naive, lower, kNaiveMinimum, eps, drp, kDrpMaximum, ratio,
                  kRatioMinimum);
  }
  return {pass, detail + fmt("%.1fs (< %.0fs)", runs.compare_seconds, kBoundSeconds)};
}

Outcome span_dichotomy(const NaiveRuns& runs) {
  bool pass = true;
  std::string detail;
  const char* names[] = {"square", "logistic"};
  for (std::size_t i = 0; i < runs.span.size(); ++i) {
    const auto& doc = runs.span[i];
    int both = 0;
    for (const auto& r : doc.records) {
      if (r.contains("error")) continue;
      both += r["within_bound"].get<bool>() && r["naive_rel_error"].get<double>() >= kNaiveMinimum;
    }
    const auto span = column(doc, "naive_span_error");
    const double worst = span.empty() ? NAN : *std::max_element(span.begin(), span.end());
    pass = pass && both >= kBoundRequired;
    detail += fmt("%s: %d/%d with span error <= 1.5 and naive error >= 1.0 (max span %.2e); ",
                  names[i], both, kBoundTrials, worst);
  }
  return {pass, detail};
}

Outcome geometric_decay() {
  const auto t0 = Clock::now();
  // Sketch sizes tried in order; the first whose median single-shot error
  // falls in [0.2, 0.4] is used.
  const long candidates[] = {100, 80, 70, 60, 120, 150};
  for (long m : candidates) {
    std::ostringstream s;
    s << "experiment = iterate\nd = 1000\nn = 300\nrank = 5\nloss = logistic\nlambda = 1\n"
      << "sketch_dim = " << m << "\niters = " << kDecaySteps << "\ntrials = " << kBoundTrials
      << "\n";
    const auto doc = run(s.str());
    const double rho = median(column(doc, "first_error"));
    if (rho < kContractionLow || rho > kContractionHigh) continue;

    int ratio_ok = 0;
    int final_ok = 0;
    double worst_ratio = 0.0;
    for (const auto& r : doc.records) {
      if (r.contains("error")) continue;
      const auto trace = r["trace"].get<std::vector<double>>();
      bool ok = true;
      for (std::size_t t = 0; t + 1 < trace.size(); ++t) {
        if (trace[t] == 0.0) break;
        const double ratio = trace[t + 1] / trace[t];
        worst_ratio = std::max(worst_ratio, ratio);
        ok = ok && ratio <= kRatioSlack * rho;
      }
      ratio_ok += ok;
      final_ok += r["rel_error"].get<double>() <= kDecayTarget;
    }
    const double secs = seconds_since(t0);
    const bool pass = ratio_ok >= kBoundRequired && final_ok >= kBoundRequired && secs < kDecaySeconds;
    return {pass, fmt("m=%ld, rho=%.3f; %d/%d trials with every ratio <= %.3f (worst ratio %.3f); "
                      "%d/%d reach %.0e after %d steps; %.1fs (< %.0fs)",
                      m, rho, ratio_ok, kBoundTrials, kRatioSlack * rho, worst_ratio, final_ok,
                      kBoundTrials, kDecayTarget, kDecaySteps, secs, kDecaySeconds)};
  }
  return {false, "no candidate sketch size gives a median single-shot error in [0.2, 0.4]"};
}

Outcome measurement() {
  bool pass = true;
  std::string detail;
  for (const char* loss : {"square", "logistic"}) {
    const auto doc = run(bound_setup("measurement", loss, 2000, 0));
    const int ok = count_true(doc, "within_bound");
    const auto errs = column(doc, "measurement_error");
    pass = pass && ok >= kBoundRequired;
    detail += fmt("%s: %d/%d within 1.0 (median %.4f); ", loss, ok, kBoundTrials, median(errs));
  }
  return {pass, detail};
}

Outcome concentration() {
  const auto t0 = Clock::now();
  std::ostringstream s;
  s << "experiment = concentration\nrank = 50\neps = 0.5\ndelta = 0.1\ntrials = "
    << kConcentrationTrials << "\n";
  const auto doc = run(s.str());
  const int ok = count_true(doc, "within_bound");
  const long m = doc.summary["analytic_m"].get<long>();
  const auto dev = column(doc, "deviation");
  const double worst = *std::max_element(dev.begin(), dev.end());
  const double secs = seconds_since(t0);
  return {ok >= kConcentrationRequired && secs < kConcentrationSeconds,
          fmt("m=%ld, %d/%d with deviation <= 0.5 (max %.4f), %.1fs (< %.0fs)", m, ok,
              kConcentrationTrials, worst, secs, kConcentrationSeconds)};
}

Outcome full_rank() {
  const auto t0 = Clock::now();
  const auto doc = run(
      "experiment = full_rank\ndataset = decaying\nd = 500\nn = 500\ndecay = 1\nleading = 9\n"
      "loss = logistic\nlambda = 1\neps = 0.5\ndelta = 0.1\ntrials = 20\n");
  const int ok = count_true(doc, "within_bound");
  const auto& r0 = doc.records[0];
  const double secs = seconds_since(t0);
  const auto leak = column(doc, "leakage");
  return {ok >= kFullRankRequired && secs < kFullRankSeconds,
          fmt("m=%ld, k=%ld, bound %.4f; %d/20 within (>= %d), median rel_error %.4f, "
              "median leakage %.3f; %.1fs (< %.0fs)",
              r0.value("m", 0L), r0.value("k", 0L), r0["bound"]["value"].get<double>(), ok,
              kFullRankRequired, median(column(doc, "rel_error")), median(leak), secs,
              kFullRankSeconds)};
}

Outcome duality() {
  const auto t0 = Clock::now();
  const std::vector<LossSpec> losses = {LossSpec::square(), LossSpec::logistic(),
                                        LossSpec::smoothed_hinge(1.0)};
  SolverConfig cfg;
  cfg.tolerance = kSolverTolerance;
  double worst_gap = 0.0;
  double worst_trip = 0.0;
  bool trips_ok = true;
  for (int i = 0; i < kDualityInstances; ++i) {
    NormalSampler rng(5000 + i, Stream::kPlant);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.uniform() * 48);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform() * 48);
    const double lambda = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
    Eigen::MatrixXd x = rng.matrix(d, n);
    Eigen::VectorXd y(n);
    for (Eigen::Index j = 0; j < n; ++j) y[j] = rng.sign();
    const Dataset data(std::move(x), std::move(y));
    const auto& loss = losses[i % 3];

    const auto sol = solve_primal(data.features(), data.labels(), loss, lambda, cfg);
    const auto dual = dual_from_primal(data.features(), data.labels(), loss, sol.weights);
    const double gap = std::abs(sol.objective - dual_objective(gram(data), loss, lambda, dual));
    const double trip = (primal_from_dual(data.features(), data.labels(), lambda, dual) - sol.weights).norm();
    worst_gap = std::max(worst_gap, gap);
    worst_trip = std::max(worst_trip, trip);
    trips_ok = trips_ok && trip <= 10.0 * kSolverTolerance / lambda;
  }

  double worst_fy = 0.0;
  for (const auto& loss : losses) {
    for (int k = -400; k <= 400; ++k) {
      const double z = 0.05 * k;
      const double a = loss.grad(z);
      worst_fy = std::max(worst_fy, std::abs(a * z - loss.conjugate(a) - loss.value(z)));
    }
  }
  const double secs = seconds_since(t0);
  return {worst_gap <= kGapTolerance && trips_ok && worst_fy <= kFenchelYoungTolerance &&
              secs < kDualitySeconds,
          fmt("max gap %.2e (<= %.0e), max round trip %.2e (<= 10 tol/lambda), "
              "Fenchel-Young %.2e (<= %.0e), %.1fs (< %.0fs)",
              worst_gap, kGapTolerance, worst_trip, worst_fy, kFenchelYoungTolerance, secs,
              kDualitySeconds)};
}

Outcome determinism() {
  const auto t0 = Clock::now();
  int mismatched = 0;
  for (const auto& [text, first] : g_runs) {
    if (report_json(run_experiment(validate_config(text)), false) != first) ++mismatched;
  }
  return {mismatched == 0 && !g_runs.empty(),
          fmt("%zu acceptance runs repeated, %d differ in any per-trial value, %.1fs",
              g_runs.size(), mismatched, seconds_since(t0))};
}

}  // namespace

int main() {
  setenv("DRP_WORKERS", "1", 1);
  const std::map<int, const char*> titles = {
      {1, "ridge path equivalence"},     {2, "low-rank recovery bound"},
      {3, "naive back-projection fails"}, {4, "span-restricted naive error"},
      {5, "geometric decay of iterative recovery"},
      {6, "measurement approximation"},  {7, "Gaussian concentration"},
      {8, "full-rank recovery bound"},   {9, "duality and conversions"},
      {10, "determinism"}};

  int failures = 0;
  auto report = [&](int id, const Outcome& o) {
    std::printf("criterion %2d %s: %s | %s\n", id, o.pass ? "PASS" : "FAIL", titles.at(id),
                o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };

  report(1, ridge_path_equivalence());
  report(2, low_rank_bound());
  const auto runs = naive_runs();
  report(3, naive_failure(runs));
  report(4, span_dichotomy(runs));
  report(5, geometric_decay());
  report(6, measurement());
  report(7, concentration());
  report(8, full_rank());
  report(9, duality());
  report(10, determinism());
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
