// Command-line front end. Everything goes through the C API in drp/drp.h.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drp/drp.h"

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitTrials = 4;

int exit_code(drp_status status) {
  switch (status) {
    case DRP_OK: return 0;
    case DRP_ERR_CONFIG:
    case DRP_ERR_INVALID_ARGUMENT: return kExitConfig;
    case DRP_ERR_IO: return kExitIo;
    case DRP_ERR_ALL_TRIALS_FAILED:
    case DRP_ERR_NO_CONVERGENCE: return kExitTrials;
    default: return kExitError;
  }
}

int report_failure(drp_status status) {
  std::cerr << "error (" << drp_status_name(status) << "): " << drp_last_error() << "\n";
  return exit_code(status);
}

// Owns a string returned by the library.
struct LibString {
  char* ptr = nullptr;
  ~LibString() { drp_string_free(ptr); }
};

bool emit(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::cout << text;
    return true;
  }
  std::ofstream out(output, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

// Options shared by the experiment subcommands, kept as config key/value
// pairs so that unset flags fall through to the library defaults.
class ExperimentFlags {
 public:
  ExperimentFlags(CLI::App* app, std::string experiment) : experiment_(std::move(experiment)) {
    app->add_option("--config", config_path_, "Config file; flags override its keys")
        ->check(CLI::ExistingFile);
    add(app, "--dataset", "dataset", "low_rank | decaying | csv");
    add(app, "--data", "path", "Dataset CSV (label first, then features)");
    add(app, "--d", "d", "Feature dimension");
    add(app, "--n", "n", "Number of examples");
    add(app, "--rank", "rank", "Rank of the low-rank generator / bound");
    add(app, "--decay", "decay", "Power-law decay of the spectrum");
    add(app, "--leading", "leading", "Largest singular value of the decaying generator");
    add(app, "--label-rule", "label_rule", "sign_of_plant | random");
    add(app, "--plant-rank", "plant_rank", "Rank of the planted label direction");
    add(app, "--loss", "loss", "square | logistic | smoothed_hinge[:mu]");
    add(app, "--lambda", "lambda", "Regularization weight");
    add(app, "--sketch-dim", "sketch_dim", "Sketch dimension m");
    add(app, "--sketch", "sketch", "fixed | bound | identity | file");
    add(app, "--sketch-file", "sketch_file", "Saved sketch matrix");
    add(app, "--eps", "eps", "Epsilon of the bounds");
    add(app, "--delta", "delta", "Failure probability of the bounds");
    add(app, "--c", "c", "Constant of the sample-size bound");
    add(app, "--trials", "trials", "Number of seeded trials");
    add(app, "--seed", "seed", "Base seed; trial t uses seed + t");
    add(app, "--tol", "tol", "Solver gradient-norm tolerance");
    add(app, "--max-iters", "max_iters", "Solver iteration limit");
    add(app, "--output", "output", "Write the report to this file");
    add(app, "--format", "format", "json | csv");
    app->add_flag("--no-reference", no_reference_, "Skip the exact solution (errors unreported)");
  }

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option(flag, values_[key], help);
  }

  std::string config_text() const {
    std::map<std::string, std::string> overrides;
    for (const auto& [key, value] : values_) {
      if (value) overrides[key] = *value;
    }
    overrides["experiment"] = experiment_;
    if (no_reference_) overrides["reference"] = "false";
    for (const auto& [key, value] : extra_) overrides[key] = value;

    std::ostringstream text;
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      std::string line;
      while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
          std::string key = line.substr(0, eq);
          key.erase(0, key.find_first_not_of(" \t"));
          key.erase(key.find_last_not_of(" \t") + 1);
          if (overrides.count(key)) continue;
        }
        text << line << "\n";
      }
    }
    for (const auto& [key, value] : overrides) text << key << " = " << value << "\n";
    return text.str();
  }

  void set(const std::string& key, const std::string& value) { extra_[key] = value; }
  std::map<std::string, std::optional<std::string>>& values() { return values_; }

 private:
  std::string experiment_;
  std::string config_path_;
  bool no_reference_ = false;
  std::map<std::string, std::optional<std::string>> values_;
  std::map<std::string, std::string> extra_;
};

int run_config(const std::string& text) {
  LibString report;
  const drp_status status = drp_run_experiment(text.c_str(), nullptr, &report.ptr);
  if (report.ptr) std::cout << report.ptr;
  if (status != DRP_OK) return report_failure(status);
  return 0;
}

int run_config_to(const std::string& text, const std::string& format, const std::string& output) {
  LibString report;
  const drp_status status =
      drp_run_experiment(text.c_str(), format.empty() ? nullptr : format.c_str(), &report.ptr);
  if (report.ptr && !emit(report.ptr, output)) {
    std::cerr << "error: cannot write '" << output << "'\n";
    return kExitIo;
  }
  if (status != DRP_OK) return report_failure(status);
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual random projection: recover high-dimensional solutions from sketches"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(drp_version()));

  std::vector<std::pair<CLI::App*, std::unique_ptr<ExperimentFlags>>> experiments;
  auto experiment = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    experiments.emplace_back(sub, std::make_unique<ExperimentFlags>(sub, name));
    return std::pair{sub, experiments.back().second.get()};
  };

  auto [recover, recover_flags] = experiment("recover", "Recover w from a sketch (naive, drp, ridge-closed)");
  std::optional<std::string> method;
  recover->add_option("--method", method, "naive | drp | ridge-closed");

  auto [iterate, iterate_flags] = experiment("iterate", "Iterative dual random projection");
  std::optional<std::string> iters;
  iterate->add_option("--iters", iters, "Number of iterations T");

  experiment("naive_vs_drp", "Compare naive back-projection with dual recovery");
  experiment("measurement", "Measurement error |sqrt(m) z - R^T w| / |R^T w|");
  experiment("span_error", "Error of the naive solution restricted to the data span");
  auto [concentration, concentration_flags] =
      experiment("concentration", "Spectral deviation of Gaussian matrices against eps");
  auto [bounds, bounds_flags] = experiment("bounds", "Sample-size bounds");
  bool full_rank_flag = false;
  std::optional<std::string> spectrum_file;
  bounds->add_flag("--full-rank", full_rank_flag, "Use the effective-rank bound");
  bounds->add_option("--spectrum", spectrum_file, "Singular values, one per line")
      ->check(CLI::ExistingFile);
  experiment("full_rank", "Recovery on a decaying spectrum against the effective-rank bound");
  (void)concentration;
  (void)concentration_flags;

  CLI::App* run = app.add_subcommand("run", "Run an experiment described by a config file");
  std::string run_config_path;
  std::string run_output;
  std::string run_format;
  run->add_option("--config", run_config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--output", run_output, "Write the report here instead of stdout");
  run->add_option("--format", run_format, "json | csv (overrides the config)");

  CLI::App* solve = app.add_subcommand("solve", "Solve the regularized problem on a CSV dataset");
  std::string solve_data;
  std::string solve_loss = "square";
  double solve_lambda = 1.0;
  drp_solver_options solve_opts = drp_solver_defaults();
  std::string solve_output;
  solve->add_option("--data", solve_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  solve->add_option("--loss", solve_loss, "square | logistic | smoothed_hinge[:mu]");
  solve->add_option("--lambda", solve_lambda, "Regularization weight");
  solve->add_option("--tol", solve_opts.tolerance, "Gradient-norm tolerance");
  solve->add_option("--max-iters", solve_opts.max_iterations, "Iteration limit");
  solve->add_option("--output", solve_output, "Write the solution JSON here");

  CLI::App* sketch = app.add_subcommand("sketch", "Draw a Gaussian sketch for a dataset and save it");
  std::string sketch_data;
  long sketch_m = 0;
  uint64_t sketch_seed = 0;
  std::string sketch_output;
  sketch->add_option("--data", sketch_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  sketch->add_option("--sketch-dim", sketch_m, "Sketch dimension m")->required();
  sketch->add_option("--seed", sketch_seed, "Seed");
  sketch->add_option("--output", sketch_output, "Sketch file")->required();

  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  std::string gen_kind = "low_rank";
  long gen_d = 0;
  long gen_n = 0;
  long gen_rank = 1;
  double gen_decay = 1.0;
  double gen_leading = 1.0;
  std::string gen_labels = "sign_of_plant";
  long gen_plant = 0;
  uint64_t gen_seed = 0;
  std::string gen_output;
  generate->add_option("--kind", gen_kind, "low_rank | decaying")
      ->check(CLI::IsMember({"low_rank", "decaying"}));
  generate->add_option("--d", gen_d, "Feature dimension")->required();
  generate->add_option("--n", gen_n, "Number of examples")->required();
  generate->add_option("--rank", gen_rank, "Rank (low_rank)");
  generate->add_option("--decay", gen_decay, "Decay (decaying)");
  generate->add_option("--leading", gen_leading, "Largest singular value (decaying)");
  generate->add_option("--label-rule", gen_labels, "sign_of_plant | random")
      ->check(CLI::IsMember({"sign_of_plant", "random"}));
  generate->add_option("--plant-rank", gen_plant, "Rank of the planted direction (decaying)");
  generate->add_option("--seed", gen_seed, "Seed");
  generate->add_option("--output", gen_output, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  for (auto& [sub, flags] : experiments) {
    if (!sub->parsed()) continue;
    if (sub == recover && method) flags->set("method", *method);
    if (sub == iterate && iters) flags->set("iters", *iters);
    if (sub == bounds) {
      if (full_rank_flag) flags->set("full_rank", "true");
      if (spectrum_file) flags->set("spectrum", *spectrum_file);
    }
    return run_config(flags->config_text());
  }
  (void)recover_flags;
  (void)iterate_flags;
  (void)bounds_flags;

  if (run->parsed()) {
    return run_config_to(read_file(run_config_path), run_format, run_output);
  }

  if (solve->parsed()) {
    drp_dataset* data = nullptr;
    drp_status st = drp_dataset_load_csv(solve_data.c_str(), &data);
    if (st != DRP_OK) return report_failure(st);
    LibString out;
    st = drp_solve(data, solve_loss.c_str(), solve_lambda, &solve_opts, &out.ptr);
    drp_dataset_free(data);
    if (out.ptr && !emit(out.ptr, solve_output)) return kExitIo;
    return st == DRP_OK ? 0 : report_failure(st);
  }

  if (sketch->parsed()) {
    drp_dataset* data = nullptr;
    drp_status st = drp_dataset_load_csv(sketch_data.c_str(), &data);
    if (st != DRP_OK) return report_failure(st);
    drp_sketch* sk = nullptr;
    st = drp_sketch_create(data, sketch_m, sketch_seed, &sk);
    if (st == DRP_OK) st = drp_sketch_save(sk, sketch_output.c_str());
    drp_sketch_free(sk);
    drp_dataset_free(data);
    return st == DRP_OK ? 0 : report_failure(st);
  }

  if (generate->parsed()) {
    const drp_label_rule rule =
        gen_labels == "random" ? DRP_LABELS_RANDOM : DRP_LABELS_SIGN_OF_PLANT;
    drp_dataset* data = nullptr;
    drp_status st = gen_kind == "low_rank"
                        ? drp_dataset_low_rank(gen_d, gen_n, gen_rank, rule, gen_seed, &data)
                        : drp_dataset_decaying(gen_d, gen_n, gen_decay, gen_leading, rule,
                                               gen_plant, gen_seed, &data);
    if (st == DRP_OK) st = drp_dataset_save_csv(data, gen_output.c_str());
    drp_dataset_free(data);
    return st == DRP_OK ? 0 : report_failure(st);
  }
  return kExitError;
}
