#include "drp/drp.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include <json.hpp>

#include "concentration.hpp"
#include "config.hpp"
#include "dataset_io.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "model.hpp"
#include "recover.hpp"
#include "sketch.hpp"
#include "solve.hpp"

struct drp_dataset {
  drp::Dataset data;
};

struct drp_sketch {
  drp::ProjectionSketch sketch;
};

namespace {

using json = nlohmann::ordered_json;

thread_local std::string g_last_error;

drp_status set_error(drp_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

drp_status status_of(const drp::Error& e) {
  return static_cast<drp_status>(static_cast<int>(e.code()));
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
drp_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const drp::Error& e) {
    return set_error(status_of(e), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(DRP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(DRP_ERR_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw drp::InvalidArgument(what);
}

drp::SolverConfig solver_config(const drp_solver_options* options) {
  drp::SolverConfig cfg;
  if (options) {
    cfg.tolerance = options->tolerance;
    cfg.max_iterations = options->max_iterations;
  }
  return cfg;
}

drp::LabelRule label_rule(drp_label_rule rule) {
  return rule == DRP_LABELS_RANDOM ? drp::LabelRule::kRandom : drp::LabelRule::kSignOfPlant;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json solution_json(const drp::PrimalSolution& sol, bool converged) {
  json j;
  j["weights"] = to_vector(sol.weights);
  j["objective"] = sol.objective;
  j["grad_norm"] = sol.grad_norm;
  j["iterations"] = sol.iterations;
  j["converged"] = converged;
  return j;
}

std::optional<Eigen::VectorXd> reference_solution(const drp::Dataset& data, const drp::LossSpec& loss,
                                                  double lambda, const drp::SolverConfig& cfg,
                                                  int with_reference) {
  if (!with_reference) return std::nullopt;
  drp::SolverConfig tight = cfg;
  tight.tolerance = std::min(cfg.tolerance, 1e-12);
  return drp::solve_primal(data.features(), data.labels(), loss, lambda, tight).weights;
}

json bound_json(double eps, double value) {
  json b;
  b["epsilon"] = eps;
  b["value"] = value;
  return b;
}

}  // namespace

extern "C" {

const char* drp_version(void) { return "1.0.0"; }

const char* drp_last_error(void) { return g_last_error.c_str(); }

const char* drp_status_name(drp_status status) {
  switch (status) {
    case DRP_OK: return "ok";
    case DRP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DRP_ERR_DIMENSION: return "dimension mismatch";
    case DRP_ERR_DOMAIN: return "domain error";
    case DRP_ERR_NO_CONVERGENCE: return "no convergence";
    case DRP_ERR_DECOMPOSITION: return "decomposition failure";
    case DRP_ERR_IO: return "I/O error";
    case DRP_ERR_CONFIG: return "configuration error";
    case DRP_ERR_ALL_TRIALS_FAILED: return "all trials failed";
    case DRP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void drp_string_free(char* s) { std::free(s); }

drp_solver_options drp_solver_defaults(void) {
  const drp::SolverConfig cfg;
  return {cfg.tolerance, cfg.max_iterations};
}

drp_status drp_dataset_low_rank(long d, long n, long r, drp_label_rule rule, uint64_t seed,
                                drp_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = new drp_dataset{drp::make_low_rank(d, n, r, label_rule(rule), seed)};
    return DRP_OK;
  });
}

drp_status drp_dataset_decaying(long d, long n, double decay, double leading, drp_label_rule rule,
                                long plant_rank, uint64_t seed, drp_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = new drp_dataset{
        drp::make_decaying_spectrum(d, n, decay, seed, leading, label_rule(rule), plant_rank)};
    return DRP_OK;
  });
}

drp_status drp_dataset_from_arrays(const double* features, const double* labels, long d, long n,
                                   drp_dataset** out) {
  return guarded([&] {
    require(out != nullptr && features != nullptr && labels != nullptr, "null pointer argument");
    require(d >= 1 && n >= 1, "dimensions must be positive");
    Eigen::MatrixXd x = Eigen::Map<const Eigen::MatrixXd>(features, d, n);
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(labels, n);
    *out = new drp_dataset{drp::Dataset(std::move(x), std::move(y))};
    return DRP_OK;
  });
}

drp_status drp_dataset_load_csv(const char* path, drp_dataset** out) {
  return guarded([&] {
    require(out != nullptr && path != nullptr, "null pointer argument");
    *out = new drp_dataset{drp::read_dataset_csv(std::filesystem::path(path))};
    return DRP_OK;
  });
}

drp_status drp_dataset_save_csv(const drp_dataset* data, const char* path) {
  return guarded([&] {
    require(data != nullptr && path != nullptr, "null pointer argument");
    drp::write_dataset_csv(data->data, std::filesystem::path(path));
    return DRP_OK;
  });
}

drp_status drp_dataset_shape(const drp_dataset* data, long* d, long* n) {
  return guarded([&] {
    require(data != nullptr, "dataset is null");
    if (d) *d = data->data.dim();
    if (n) *n = data->data.size();
    return DRP_OK;
  });
}

drp_status drp_dataset_copy(const drp_dataset* data, double* features, double* labels) {
  return guarded([&] {
    require(data != nullptr, "dataset is null");
    const auto& x = data->data.features();
    if (features) Eigen::Map<Eigen::MatrixXd>(features, x.rows(), x.cols()) = x;
    if (labels) Eigen::Map<Eigen::VectorXd>(labels, x.cols()) = data->data.labels();
    return DRP_OK;
  });
}

void drp_dataset_free(drp_dataset* data) { delete data; }

drp_status drp_sketch_create(const drp_dataset* data, long m, uint64_t seed, drp_sketch** out) {
  return guarded([&] {
    require(data != nullptr && out != nullptr, "null pointer argument");
    *out = new drp_sketch{drp::make_sketch(data->data, m, seed)};
    return DRP_OK;
  });
}

drp_status drp_sketch_from_matrix(const drp_dataset* data, const double* r, long m,
                                  drp_sketch** out) {
  return guarded([&] {
    require(data != nullptr && r != nullptr && out != nullptr, "null pointer argument");
    require(m >= 1, "sketch dimension must be positive");
    Eigen::MatrixXd matrix = Eigen::Map<const Eigen::MatrixXd>(r, data->data.dim(), m);
    *out = new drp_sketch{drp::project(data->data, std::move(matrix), m, drp::kInjectedSeed)};
    return DRP_OK;
  });
}

drp_status drp_sketch_save(const drp_sketch* sketch, const char* path) {
  return guarded([&] {
    require(sketch != nullptr && path != nullptr, "null pointer argument");
    drp::save_sketch_matrix(sketch->sketch, path);
    return DRP_OK;
  });
}

drp_status drp_sketch_load(const drp_dataset* data, const char* path, drp_sketch** out) {
  return guarded([&] {
    require(data != nullptr && path != nullptr && out != nullptr, "null pointer argument");
    auto file = drp::load_sketch_matrix(path);
    const auto m = file.matrix_r.cols();
    *out = new drp_sketch{drp::project(data->data, std::move(file.matrix_r), m, file.seed_low)};
    return DRP_OK;
  });
}

drp_status drp_sketch_dim(const drp_sketch* sketch, long* m) {
  return guarded([&] {
    require(sketch != nullptr && m != nullptr, "null pointer argument");
    *m = sketch->sketch.m;
    return DRP_OK;
  });
}

void drp_sketch_free(drp_sketch* sketch) { delete sketch; }

drp_status drp_solve(const drp_dataset* data, const char* loss, double lambda,
                     const drp_solver_options* options, char** json_out) {
  return guarded([&] {
    require(data != nullptr && loss != nullptr && json_out != nullptr, "null pointer argument");
    const auto spec = drp::LossSpec::parse(loss);
    const auto& ds = data->data;
    try {
      const auto sol =
          drp::solve_primal(ds.features(), ds.labels(), spec, lambda, solver_config(options));
      *json_out = copy_string(solution_json(sol, true).dump() + "\n");
      return DRP_OK;
    } catch (const drp::ConvergenceError& e) {
      *json_out = copy_string(solution_json(e.best(), false).dump() + "\n");
      return set_error(DRP_ERR_NO_CONVERGENCE, e.what());
    }
  });
}

drp_status drp_recover(const drp_dataset* data, const drp_sketch* sketch, const char* loss,
                       const char* method, double lambda, const drp_solver_options* options,
                       int with_reference, double eps, char** json_out) {
  return guarded([&] {
    require(data && sketch && loss && method && json_out, "null pointer argument");
    require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    const auto spec = drp::LossSpec::parse(loss);
    const auto kind = drp::parse_method(method);
    const auto cfg = solver_config(options);
    const auto& ds = data->data;
    const auto& sk = sketch->sketch;
    Eigen::VectorXd recovered;
    switch (kind) {
      case drp::RecoveryMethod::kNaive: {
        const auto z = drp::solve_primal(sk.sketched_features, ds.labels(), spec, lambda, cfg);
        recovered = drp::recover_naive(sk.matrix_r, z.weights, sk.m);
        break;
      }
      case drp::RecoveryMethod::kRidgeClosed:
        if (spec.kind() != drp::LossKind::kSquare) {
          throw drp::InvalidArgument("ridge-closed recovery requires the square loss");
        }
        recovered = drp::ridge_drp_closed_form(ds, lambda, sk);
        break;
      case drp::RecoveryMethod::kDrp:
        recovered = drp::recover_drp(ds, spec, lambda, sk, cfg).recovered;
        break;
      case drp::RecoveryMethod::kDrpIterative:
        throw drp::InvalidArgument("use drp_iterate for the iterative method");
    }
    json j;
    j["method"] = drp::method_name(kind);
    j["m"] = sk.m;
    const auto w_star = reference_solution(ds, spec, lambda, cfg, with_reference);
    if (w_star) {
      j["rel_error"] = drp::relative_error(recovered, *w_star);
    } else {
      j["rel_error"] = nullptr;
    }
    j["bound"] = bound_json(eps, eps / (1.0 - eps));
    j["trace"] = json::array();
    j["weights"] = to_vector(recovered);
    *json_out = copy_string(j.dump() + "\n");
    return DRP_OK;
  });
}

drp_status drp_iterate(const drp_dataset* data, const drp_sketch* sketch, const char* loss,
                       double lambda, int iterations, const drp_solver_options* options,
                       int with_reference, double eps, char** json_out) {
  return guarded([&] {
    require(data && sketch && loss && json_out, "null pointer argument");
    require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    const auto spec = drp::LossSpec::parse(loss);
    const auto cfg = solver_config(options);
    const auto w_star = reference_solution(data->data, spec, lambda, cfg, with_reference);
    auto [res, trace] =
        drp::recover_iterative(data->data, spec, lambda, sketch->sketch, iterations, cfg, w_star);
    json j;
    j["method"] = drp::method_name(res.method);
    j["m"] = sketch->sketch.m;
    if (res.rel_error) {
      j["rel_error"] = *res.rel_error;
    } else {
      j["rel_error"] = nullptr;
    }
    j["bound"] = bound_json(eps, std::pow(eps / (1.0 - eps), trace.iterations_run));
    j["trace"] = trace.per_iteration_errors;
    j["iterations_run"] = trace.iterations_run;
    j["stopped_early"] = trace.stopped_early;
    j["weights"] = to_vector(res.recovered);
    *json_out = copy_string(j.dump() + "\n");
    return DRP_OK;
  });
}

drp_status drp_sample_size_bound(long r, double eps, double delta, double c, long* out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = drp::sample_size_bound(r, eps, delta, c);
    return DRP_OK;
  });
}

drp_status drp_full_rank_sample_bound(const double* singular_values, long count, double lambda,
                                      double gamma, double eps, double delta, long d, double c,
                                      long* out) {
  return guarded([&] {
    require(out != nullptr && (singular_values != nullptr || count == 0), "null pointer argument");
    require(count >= 0, "count must be non-negative");
    *out = drp::full_rank_sample_bound({singular_values, static_cast<std::size_t>(count)}, lambda,
                                       gamma, eps, delta, d, c);
    return DRP_OK;
  });
}

drp_status drp_spectral_deviation(long r, long m, uint64_t seed, double* out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = drp::spectral_deviation(r, m, seed);
    return DRP_OK;
  });
}

drp_status drp_run_experiment(const char* config_text, const char* format, char** report_out) {
  return guarded([&] {
    require(config_text != nullptr && report_out != nullptr, "null pointer argument");
    auto cfg = drp::validate_config(config_text);
    if (format) cfg.format = drp::parse_format(format);
    const auto doc = drp::run_experiment(cfg);
    const std::string text =
        cfg.format == drp::OutputFormat::kJson ? drp::report_json(doc) : drp::report_csv(doc);
    if (!cfg.output.empty()) {
      std::ofstream out(cfg.output, std::ios::binary);
      if (!out) throw drp::IoError("cannot open '" + cfg.output + "' for writing");
      out << text;
      if (!out) throw drp::IoError("failed writing '" + cfg.output + "'");
    }
    *report_out = copy_string(text);
    if (doc.all_failed()) {
      std::string first;
      for (const auto& r : doc.records) {
        if (r.contains("error")) {
          first = r["error"].get<std::string>();
          break;
        }
      }
      return set_error(DRP_ERR_ALL_TRIALS_FAILED, "all trials failed; first error: " + first);
    }
    return DRP_OK;
  });
}

}  // extern "C"
