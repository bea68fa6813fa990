#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <thread>

#include "concentration.hpp"
#include "dataset_io.hpp"
#include "error.hpp"
#include "model.hpp"
#include "recover.hpp"
#include "sketch.hpp"
#include "solve.hpp"

namespace drp {
namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Reference solutions are computed tighter than the default tolerance.
constexpr double kReferenceTolerance = 1e-12;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Everything a trial needs that does not depend on the trial seed.
struct Context {
  const ExperimentConfig& cfg;
  LossSpec loss;
  std::optional<Dataset> fixed_data;
  std::optional<SketchFile> sketch_file;

  explicit Context(const ExperimentConfig& c) : cfg(c), loss(LossSpec::parse(c.loss)) {
    if (cfg.dataset == DatasetSource::kCsv && cfg.experiment != ExperimentKind::kConcentration &&
        cfg.experiment != ExperimentKind::kBounds) {
      fixed_data = read_dataset_csv(std::filesystem::path(cfg.data_path));
    }
    if (cfg.sketch == SketchSource::kFile) sketch_file = load_sketch_matrix(cfg.sketch_file);
  }

  double low_rank_c() const { return cfg.c.value_or(kLowRankConstant); }
  double full_rank_c() const { return cfg.c.value_or(kFullRankConstant); }
  double gamma() const { return loss.gamma(); }

  Eigen::Index plant_rank_for_full_rank() const {
    if (cfg.plant_rank > 0) return cfg.plant_rank;
    const auto sigma = decaying_singular_values(std::min(cfg.d, cfg.n), cfg.decay, cfg.leading);
    return std::max<Eigen::Index>(1, numerical_rank(as_span(sigma), std::sqrt(cfg.lambda / gamma())));
  }

  Dataset dataset(std::uint64_t seed) const {
    if (fixed_data) return *fixed_data;
    if (cfg.dataset == DatasetSource::kLowRank) {
      return make_low_rank(cfg.d, cfg.n, cfg.rank, cfg.label_rule, seed);
    }
    const Eigen::Index plant = cfg.experiment == ExperimentKind::kFullRank
                                   ? plant_rank_for_full_rank()
                                   : static_cast<Eigen::Index>(cfg.plant_rank);
    return make_decaying_spectrum(cfg.d, cfg.n, cfg.decay, seed, cfg.leading, cfg.label_rule, plant);
  }

  long bound_dimension(const Dataset& data) const {
    if (cfg.dataset == DatasetSource::kDecaying) {
      const auto sigma = decaying_singular_values(std::min(data.dim(), data.size()), cfg.decay,
                                                  cfg.leading);
      return full_rank_sample_bound(as_span(sigma), cfg.lambda, gamma(), cfg.eps, cfg.delta,
                                    data.dim(), full_rank_c());
    }
    const long r = cfg.dataset == DatasetSource::kLowRank ? cfg.rank : spectrum(data).rank;
    return sample_size_bound(r, cfg.eps, cfg.delta, low_rank_c());
  }

  ProjectionSketch sketch(const Dataset& data, std::uint64_t seed) const {
    switch (cfg.sketch) {
      case SketchSource::kFixed: return make_sketch(data, cfg.sketch_dim, seed);
      case SketchSource::kBound: return make_sketch(data, bound_dimension(data), seed);
      case SketchSource::kIdentity: {
        const Eigen::Index d = data.dim();
        return project(data, std::sqrt(double(d)) * Eigen::MatrixXd::Identity(d, d), d,
                       kInjectedSeed);
      }
      case SketchSource::kFile:
        return project(data, sketch_file->matrix_r, sketch_file->matrix_r.cols(),
                       sketch_file->seed_low);
    }
    throw InvalidArgument("unknown sketch source");
  }

  SolverConfig solver() const { return {cfg.tol, cfg.max_iters}; }

  std::optional<Eigen::VectorXd> reference(const Dataset& data) const {
    if (!cfg.reference) return std::nullopt;
    SolverConfig tight{std::min(cfg.tol, kReferenceTolerance), cfg.max_iters};
    return solve_primal(data.features(), data.labels(), loss, cfg.lambda, tight).weights;
  }
};

json bound_object(double epsilon, double value) {
  json b;
  b["epsilon"] = epsilon;
  b["value"] = value;
  return b;
}

void put_optional(json& rec, const char* key, const std::optional<double>& v) {
  if (v) {
    rec[key] = *v;
  } else {
    rec[key] = nullptr;
  }
}

void require_reference(const std::optional<Eigen::VectorXd>& w, const char* experiment) {
  if (!w) throw InvalidArgument(std::string(experiment) + " needs the reference solution");
}

json run_recover(const Context& ctx, const Dataset& data, const ProjectionSketch& sk) {
  const auto& cfg = ctx.cfg;
  const auto w_star = ctx.reference(data);
  json rec;
  rec["method"] = method_name(cfg.method);
  rec["m"] = sk.m;
  Eigen::VectorXd recovered;
  long iterations = 0;
  switch (cfg.method) {
    case RecoveryMethod::kNaive: {
      const auto z = solve_primal(sk.sketched_features, data.labels(), ctx.loss, cfg.lambda,
                                  ctx.solver());
      recovered = recover_naive(sk.matrix_r, z.weights, sk.m);
      iterations = z.iterations;
      break;
    }
    case RecoveryMethod::kRidgeClosed:
      recovered = ridge_drp_closed_form(data, cfg.lambda, sk);
      break;
    default: {
      const auto res = recover_drp(data, ctx.loss, cfg.lambda, sk, ctx.solver());
      recovered = res.recovered;
      iterations = res.solver_iterations;
      break;
    }
  }
  std::optional<double> err;
  if (w_star) err = relative_error(recovered, *w_star);
  put_optional(rec, "rel_error", err);
  const double bound = cfg.eps / (1.0 - cfg.eps);
  rec["bound"] = bound_object(cfg.eps, bound);
  if (err) rec["within_bound"] = *err <= bound;
  rec["solver_iterations"] = iterations;
  return rec;
}

json run_iterate(const Context& ctx, const Dataset& data, const ProjectionSketch& sk) {
  const auto& cfg = ctx.cfg;
  const auto w_star = ctx.reference(data);
  auto [res, trace] =
      recover_iterative(data, ctx.loss, cfg.lambda, sk, cfg.iters, ctx.solver(), w_star);
  json rec;
  rec["method"] = method_name(RecoveryMethod::kDrpIterative);
  rec["m"] = sk.m;
  rec["iters"] = cfg.iters;
  rec["iterations_run"] = trace.iterations_run;
  rec["stopped_early"] = trace.stopped_early;
  put_optional(rec, "rel_error", res.rel_error);
  const auto& e = trace.per_iteration_errors;
  if (e.size() >= 2) {
    rec["first_error"] = e[1];
    double worst = 0.0;
    for (std::size_t t = 1; t < e.size(); ++t) worst = std::max(worst, e[t] / e[t - 1]);
    rec["max_ratio"] = worst;
  }
  rec["bound"] = bound_object(cfg.eps, std::pow(cfg.eps / (1.0 - cfg.eps), trace.iterations_run));
  rec["trace"] = e;
  return rec;
}

// Solves the sketched problem once and derives both recoveries from it.
struct SketchedPair {
  Eigen::VectorXd z;
  Eigen::VectorXd naive;
  Eigen::VectorXd drp;
};

SketchedPair sketched_pair(const Context& ctx, const Dataset& data, const ProjectionSketch& sk) {
  const auto res = recover_drp(data, ctx.loss, ctx.cfg.lambda, sk, ctx.solver());
  return {res.sketched_solution, recover_naive(sk.matrix_r, res.sketched_solution, sk.m),
          res.recovered};
}

json run_naive_vs_drp(const Context& ctx, const Dataset& data, const ProjectionSketch& sk) {
  const auto w_star = ctx.reference(data);
  require_reference(w_star, "naive_vs_drp");
  const auto pair = sketched_pair(ctx, data, sk);
  const auto info = spectrum(data);
  const double naive = relative_error(pair.naive, *w_star);
  const double drp = relative_error(pair.drp, *w_star);
  // Deviation of the sketch restricted to the data span: the measured epsilon.
  const double eps_proxy =
      spectral_deviation(Eigen::MatrixXd(info.range_basis().transpose() * sk.matrix_r));
  const double d = static_cast<double>(data.dim());
  const double r = static_cast<double>(info.rank);
  const double lower = 0.5 * std::sqrt((d - r) / static_cast<double>(sk.m)) *
                       (1.0 - eps_proxy * std::sqrt(2.0 * (1.0 + eps_proxy)) / (1.0 - eps_proxy));
  json rec;
  rec["m"] = sk.m;
  rec["rank"] = info.rank;
  rec["naive_rel_error"] = naive;
  rec["drp_rel_error"] = drp;
  rec["error_ratio"] = naive / drp;
  rec["eps_proxy"] = eps_proxy;
  rec["naive_lower_bound"] = lower;
  rec["naive_span_error"] = span_restricted_error(info, pair.naive, *w_star) / w_star->norm();
  return rec;
}

json run_span_error(const Context& ctx, const Dataset& data, const ProjectionSketch& sk) {
  const auto& cfg = ctx.cfg;
  const auto w_star = ctx.reference(data);
  require_reference(w_star, "span_error");
  const auto pair = sketched_pair(ctx, data, sk);
  const auto info = spectrum(data);
  const double span = span_restricted_error(info, pair.naive, *w_star) / w_star->norm();
  const double naive = relative_error(pair.naive, *w_star);
  const double bound = cfg.eps * (1.0 + 1.0 / (1.0 - cfg.eps));
  json rec;
  rec["m"] = sk.m;
  rec["naive_span_error"] = span;
  rec["naive_rel_error"] = naive;
  rec["bound"] = bound_object(cfg.eps, bound);
  rec["within_bound"] = span <= bound;
  rec["dichotomy"] = span <= bound && naive >= 1.0;
  return rec;
}

json run_measurement(const Context& ctx, const Dataset& data, const ProjectionSketch& sk) {
  const auto& cfg = ctx.cfg;
  const auto w_star = ctx.reference(data);
  require_reference(w_star, "measurement");
  const auto z = solve_primal(sk.sketched_features, data.labels(), ctx.loss, cfg.lambda,
                              ctx.solver());
  const double err = measurement_error(z.weights, sk.matrix_r, sk.m, *w_star);
  const double bound = std::sqrt(2.0) * cfg.eps / std::sqrt(1.0 - cfg.eps);
  json rec;
  rec["m"] = sk.m;
  rec["measurement_error"] = err;
  rec["bound"] = bound_object(cfg.eps, bound);
  rec["within_bound"] = err <= bound;
  return rec;
}

json run_full_rank(const Context& ctx, const Dataset& data, const ProjectionSketch& sk) {
  const auto& cfg = ctx.cfg;
  const auto w_star = ctx.reference(data);
  require_reference(w_star, "full_rank");
  const auto sigma = decaying_singular_values(std::min(data.dim(), data.size()), cfg.decay,
                                              cfg.leading);
  const double ratio = cfg.lambda / ctx.gamma();
  const Eigen::Index k = numerical_rank(as_span(sigma), std::sqrt(ratio));
  const auto res = recover_drp(data, ctx.loss, cfg.lambda, sk, ctx.solver());
  const double err = relative_error(res.recovered, *w_star);

  json rec;
  rec["m"] = sk.m;
  rec["k"] = k;
  rec["effective_rank"] = effective_rank(as_span(sigma), cfg.lambda, ctx.gamma());
  rec["rel_error"] = err;
  if (k > 0) {
    const double sigma_k = sigma[k - 1];
    const double bound = cfg.eps / (1.0 - cfg.eps) * (1.0 + std::sqrt(ratio) / sigma_k);
    const auto info = spectrum(data);
    const Eigen::MatrixXd uk = info.left_vectors.leftCols(k);
    const Eigen::VectorXd outside = *w_star - uk * (uk.transpose() * *w_star);
    rec["sigma_k"] = sigma_k;
    rec["bound"] = bound_object(cfg.eps, bound);
    rec["within_bound"] = err <= bound;
    rec["leakage"] = outside.norm() / w_star->norm();
  } else {
    rec["bound"] = nullptr;
    rec["within_bound"] = false;
  }
  return rec;
}

json run_concentration_trial(const Context& ctx, long m, std::uint64_t seed) {
  const double dev = spectral_deviation(ctx.cfg.rank, m, seed);
  json rec;
  rec["m"] = m;
  rec["deviation"] = dev;
  rec["within_bound"] = dev <= ctx.cfg.eps;
  return rec;
}

json run_trial(const Context& ctx, int t) {
  const auto& cfg = ctx.cfg;
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(t);
  json rec;
  rec["trial"] = t;
  rec["seed"] = seed;
  try {
    json body;
    if (cfg.experiment == ExperimentKind::kConcentration) {
      const long m = cfg.sketch == SketchSource::kFixed
                         ? cfg.sketch_dim
                         : sample_size_bound(cfg.rank, cfg.eps, cfg.delta, ctx.low_rank_c());
      body = run_concentration_trial(ctx, m, seed);
    } else {
      const Dataset data = ctx.dataset(seed);
      const ProjectionSketch sk = ctx.sketch(data, seed);
      switch (cfg.experiment) {
        case ExperimentKind::kRecover: body = run_recover(ctx, data, sk); break;
        case ExperimentKind::kIterate: body = run_iterate(ctx, data, sk); break;
        case ExperimentKind::kNaiveVsDrp: body = run_naive_vs_drp(ctx, data, sk); break;
        case ExperimentKind::kMeasurement: body = run_measurement(ctx, data, sk); break;
        case ExperimentKind::kSpanError: body = run_span_error(ctx, data, sk); break;
        case ExperimentKind::kFullRank: body = run_full_rank(ctx, data, sk); break;
        default: throw InvalidArgument("experiment has no trials");
      }
    }
    for (auto& [key, value] : body.items()) rec[key] = value;
  } catch (const Error& e) {
    rec["error"] = e.what();
    rec["error_code"] = static_cast<int>(e.code());
  }
  return rec;
}

json bounds_record(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  json rec;
  if (cfg.full_rank) {
    const Eigen::VectorXd sv = read_vector_file(cfg.spectrum_path);
    std::vector<double> sorted(sv.data(), sv.data() + sv.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const long d = cfg.d > 0 ? cfg.d : static_cast<long>(sorted.size());
    rec["bound"] = "full_rank";
    rec["d"] = d;
    rec["lambda"] = cfg.lambda;
    rec["gamma"] = ctx.gamma();
    rec["effective_rank"] = effective_rank(sorted, cfg.lambda, ctx.gamma());
    rec["sigma_1"] = sorted.empty() ? 0.0 : sorted.front();
    rec["eps"] = cfg.eps;
    rec["delta"] = cfg.delta;
    rec["c"] = ctx.full_rank_c();
    rec["m"] = full_rank_sample_bound(sorted, cfg.lambda, ctx.gamma(), cfg.eps, cfg.delta, d,
                                      ctx.full_rank_c());
  } else {
    rec["bound"] = "low_rank";
    rec["rank"] = cfg.rank;
    rec["eps"] = cfg.eps;
    rec["delta"] = cfg.delta;
    rec["c"] = ctx.low_rank_c();
    rec["m"] = sample_size_bound(cfg.rank, cfg.eps, cfg.delta, ctx.low_rank_c());
  }
  return rec;
}

json summarize(const Context& ctx, const std::vector<json>& records, const json& aggregates) {
  const auto& cfg = ctx.cfg;
  json s;
  if (cfg.experiment == ExperimentKind::kConcentration) {
    s["analytic_m"] = sample_size_bound(cfg.rank, cfg.eps, cfg.delta, ctx.low_rank_c());
    s["empirical_m"] = empirical_sample_size(cfg.rank, cfg.eps, cfg.trials, cfg.seed, 0.95);
    const double slack = 3.0 * std::sqrt(cfg.delta * (1.0 - cfg.delta) / cfg.trials);
    s["allowed_failure_rate"] = cfg.delta + slack;
    if (aggregates.contains("within_bound")) {
      s["failure_rate"] = 1.0 - aggregates["within_bound"]["fraction_true"].get<double>();
      s["passed"] = s["failure_rate"].get<double>() <= cfg.delta + slack;
    }
  } else if (cfg.experiment == ExperimentKind::kNaiveVsDrp &&
             aggregates.contains("naive_rel_error") && aggregates.contains("drp_rel_error")) {
    const double naive = aggregates["naive_rel_error"]["mean"].get<double>();
    const double drp = aggregates["drp_rel_error"]["mean"].get<double>();
    const double eps = aggregates["eps_proxy"]["mean"].get<double>();
    s["mean_ratio"] = naive / drp;
    s["mean_eps_proxy"] = eps;
    // Lower bound evaluated at the mean measured epsilon, with d and r of the first trial.
    for (const auto& r : records) {
      if (r.contains("error")) continue;
      const double d = cfg.dataset == DatasetSource::kCsv ? 0.0 : static_cast<double>(cfg.d);
      const double rank = r["rank"].get<double>();
      const double m = r["m"].get<double>();
      if (d > 0.0) {
        s["naive_lower_bound_at_mean_eps"] =
            0.5 * std::sqrt((d - rank) / m) * (1.0 - eps * std::sqrt(2.0 * (1.0 + eps)) / (1.0 - eps));
      }
      break;
    }
  } else if (cfg.experiment == ExperimentKind::kIterate) {
    std::vector<double> first;
    for (const auto& r : records) {
      if (r.contains("first_error")) first.push_back(r["first_error"].get<double>());
    }
    if (!first.empty()) {
      std::sort(first.begin(), first.end());
      const std::size_t h = first.size() / 2;
      s["median_first_error"] = first.size() % 2 ? first[h] : 0.5 * (first[h - 1] + first[h]);
    }
  }
  return s;
}

// Flattens nested objects (a.b) and arrays (a_0, a_1, ...) to scalar columns.
void flatten(const std::string& prefix, const json& value, std::vector<std::pair<std::string, json>>& out) {
  if (value.is_object()) {
    for (const auto& [k, v] : value.items()) flatten(prefix.empty() ? k : prefix + "_" + k, v, out);
  } else if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) flatten(prefix + "_" + std::to_string(i), value[i], out);
  } else {
    out.emplace_back(prefix, value);
  }
}

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v.get<double>());
    return std::string(buf, res.ptr);
  }
  if (v.is_number()) return v.dump();
  std::string s = v.get<std::string>();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + "\"";
}

}  // namespace

int worker_count() {
  const char* env = std::getenv("DRP_WORKERS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

json aggregate_records(const std::vector<json>& records) {
  json agg;
  std::vector<std::string> keys;
  for (const auto& r : records) {
    if (r.contains("error")) continue;
    for (const auto& [k, v] : r.items()) {
      if (k == "trial" || k == "seed") continue;
      if (!(v.is_number() || v.is_boolean())) continue;
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
  }
  int ok = 0;
  for (const auto& r : records) ok += !r.contains("error");
  for (const auto& key : keys) {
    std::vector<double> values;
    bool boolean = false;
    for (const auto& r : records) {
      if (r.contains("error") || !r.contains(key)) continue;
      const auto& v = r[key];
      if (v.is_boolean()) {
        boolean = true;
        values.push_back(v.get<bool>() ? 1.0 : 0.0);
      } else if (v.is_number()) {
        values.push_back(v.get<double>());
      }
    }
    if (values.empty()) continue;
    json entry;
    double sum = 0.0;
    for (double v : values) sum += v;
    if (boolean) {
      entry["count_true"] = static_cast<long>(sum);
      entry["fraction_true"] = sum / static_cast<double>(values.size());
    } else {
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t h = sorted.size() / 2;
      entry["mean"] = sum / static_cast<double>(values.size());
      entry["min"] = sorted.front();
      entry["max"] = sorted.back();
      entry["median"] = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
    }
    entry["count"] = values.size();
    agg[key] = entry;
  }
  agg["trials_ok"] = ok;
  agg["trials_failed"] = static_cast<int>(records.size()) - ok;
  if (agg.contains("within_bound")) {
    agg["success_fraction"] = agg["within_bound"]["fraction_true"];
  }
  return agg;
}

ReportDocument run_experiment(const ExperimentConfig& config) {
  const auto start = Clock::now();
  const Context ctx(config);
  ReportDocument doc;
  doc.config = config.echo();

  if (config.experiment == ExperimentKind::kBounds) {
    const auto t0 = Clock::now();
    json rec;
    rec["trial"] = 0;
    rec["seed"] = config.seed;
    const json bounds = bounds_record(ctx);
    for (auto& [k, v] : bounds.items()) rec[k] = v;
    doc.records.push_back(std::move(rec));
    doc.trial_seconds.push_back(seconds_since(t0));
  } else {
    const int trials = config.trials;
    doc.records.resize(trials);
    doc.trial_seconds.resize(trials);
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int t = next++; t < trials; t = next++) {
        const auto t0 = Clock::now();
        doc.records[t] = run_trial(ctx, t);
        doc.trial_seconds[t] = seconds_since(t0);
      }
    };
    const int workers = std::min(worker_count(), trials);
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
  }
  for (const auto& r : doc.records) doc.failed_trials += r.contains("error");
  doc.aggregates = aggregate_records(doc.records);
  doc.summary = summarize(ctx, doc.records, doc.aggregates);
  doc.total_seconds = seconds_since(start);
  return doc;
}

std::string report_json(const ReportDocument& doc, bool include_timings) {
  json j;
  j["schema"] = kReportSchema;
  j["config"] = doc.config;
  j["records"] = doc.records;
  j["aggregates"] = doc.aggregates;
  j["summary"] = doc.summary.is_null() ? json::object() : doc.summary;
  if (include_timings) {
    j["timings"]["total_seconds"] = doc.total_seconds;
    j["timings"]["trial_seconds"] = doc.trial_seconds;
  }
  return j.dump(2) + "\n";
}

std::string report_csv(const ReportDocument& doc) {
  std::vector<std::vector<std::pair<std::string, json>>> rows;
  std::vector<std::string> columns;
  for (const auto& r : doc.records) {
    std::vector<std::pair<std::string, json>> row;
    flatten("", r, row);
    for (const auto& [k, v] : row) {
      if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
    }
    rows.push_back(std::move(row));
  }
  std::ostringstream out;
  out << "schema";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (const auto& row : rows) {
    out << kReportSchema;
    for (const auto& c : columns) {
      out << ',';
      for (const auto& [k, v] : row) {
        if (k == c) {
          out << csv_cell(v);
          break;
        }
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace drp
