#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "model.hpp"
#include "recover.hpp"

namespace drp {

enum class ExperimentKind {
  kRecover,
  kIterate,
  kNaiveVsDrp,
  kMeasurement,
  kSpanError,
  kConcentration,
  kBounds,
  kFullRank,
};

enum class DatasetSource { kLowRank, kDecaying, kCsv };

// Where the sketch dimension (and matrix) comes from.
//   fixed    : sketch_dim given explicitly
//   bound    : sample-size calculator for the dataset (low-rank or full-rank form)
//   identity : R = sqrt(d) I with m = d
//   file     : matrix read from sketch_file
enum class SketchSource { kFixed, kBound, kIdentity, kFile };

enum class OutputFormat { kJson, kCsv };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kRecover;

  DatasetSource dataset = DatasetSource::kLowRank;
  long d = 0;
  long n = 0;
  long rank = 0;
  double decay = 1.0;
  double leading = 1.0;
  LabelRule label_rule = LabelRule::kSignOfPlant;
  long plant_rank = 0;
  std::string data_path;

  std::string loss = "square";
  double lambda = 1.0;

  SketchSource sketch = SketchSource::kFixed;
  long sketch_dim = 0;
  std::string sketch_file;

  RecoveryMethod method = RecoveryMethod::kDrp;
  int iters = 1;
  bool reference = true;

  double eps = 0.5;
  double delta = 0.1;
  std::optional<double> c;  // falls back to the constant of the bound in use

  bool full_rank = false;
  std::string spectrum_path;

  int trials = 1;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  long max_iters = 100000;

  std::string output;
  OutputFormat format = OutputFormat::kJson;

  // Keys that were not given and took their default value.
  std::vector<std::string> defaulted;

  nlohmann::ordered_json echo() const;
};

std::string experiment_name(ExperimentKind kind);
ExperimentKind parse_experiment(std::string_view text);
OutputFormat parse_format(std::string_view text);

// Parses `key = value` lines ('#' starts a comment, values may be quoted).
// Unknown keys, malformed values and out-of-range values raise ConfigError
// naming the key. Files referenced by the config must exist.
ExperimentConfig validate_config(std::string_view raw);

}  // namespace drp
