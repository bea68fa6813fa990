#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "error.hpp"
#include "loss.hpp"

namespace drp {
namespace {

const std::set<std::string, std::less<>> kKnownKeys = {
    "experiment", "dataset",   "d",       "n",          "rank",      "decay",  "leading",
    "label_rule", "plant_rank", "path",   "loss",       "lambda",    "sketch", "sketch_dim",
    "sketch_file", "method",   "iters",   "reference",  "eps",       "delta",  "c",
    "full_rank",  "spectrum",  "trials",  "seed",       "tol",       "max_iters", "output",
    "format",
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if ((ch == '"' || ch == '\'') && (quote == 0 || quote == ch)) quote = quote ? 0 : ch;
    if (ch == '#' && quote == 0) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

class RawConfig {
 public:
  explicit RawConfig(std::string_view raw) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= raw.size()) {
      const auto end = std::min(raw.find('\n', start), raw.size());
      ++line_no;
      const std::string line = strip_comment(raw.substr(start, end - start));
      start = end + 1;
      const auto body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      const std::string key(trim(body.substr(0, eq)));
      auto value = trim(body.substr(eq + 1));
      if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
          value.back() == value.front()) {
        value = value.substr(1, value.size() - 2);
      }
      if (!kKnownKeys.contains(key)) throw ConfigError("unknown key '" + key + "'");
      if (values_.contains(key)) throw ConfigError("key '" + key + "' given more than once");
      values_.emplace(key, std::string(value));
    }
  }

  bool has(const std::string& key) const { return values_.contains(key); }
  bool empty() const { return values_.empty(); }

  const std::string& text(const std::string& key) const { return values_.at(key); }

  long integer(const std::string& key) const {
    const auto& v = text(key);
    long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    return out;
  }

  std::uint64_t unsigned_integer(const std::string& key) const {
    const auto& v = text(key);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
  }

  double real(const std::string& key) const {
    const auto& v = text(key);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
      throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    return out;
  }

  bool boolean(const std::string& key) const {
    const auto& v = text(key);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
  }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

void require_range(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

void require_file(const std::string& key, const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError(key + ": file '" + path + "' does not exist");
  }
}

std::string dataset_name(DatasetSource s) {
  switch (s) {
    case DatasetSource::kLowRank: return "low_rank";
    case DatasetSource::kDecaying: return "decaying";
    case DatasetSource::kCsv: return "csv";
  }
  return {};
}

std::string sketch_name(SketchSource s) {
  switch (s) {
    case SketchSource::kFixed: return "fixed";
    case SketchSource::kBound: return "bound";
    case SketchSource::kIdentity: return "identity";
    case SketchSource::kFile: return "file";
  }
  return {};
}

bool uses_dataset(ExperimentKind kind) {
  return kind != ExperimentKind::kConcentration && kind != ExperimentKind::kBounds;
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kRecover: return "recover";
    case ExperimentKind::kIterate: return "iterate";
    case ExperimentKind::kNaiveVsDrp: return "naive_vs_drp";
    case ExperimentKind::kMeasurement: return "measurement";
    case ExperimentKind::kSpanError: return "span_error";
    case ExperimentKind::kConcentration: return "concentration";
    case ExperimentKind::kBounds: return "bounds";
    case ExperimentKind::kFullRank: return "full_rank";
  }
  return {};
}

ExperimentKind parse_experiment(std::string_view text) {
  for (auto kind : {ExperimentKind::kRecover, ExperimentKind::kIterate, ExperimentKind::kNaiveVsDrp,
                    ExperimentKind::kMeasurement, ExperimentKind::kSpanError,
                    ExperimentKind::kConcentration, ExperimentKind::kBounds,
                    ExperimentKind::kFullRank}) {
    if (experiment_name(kind) == text) return kind;
  }
  throw ConfigError("experiment: unknown experiment '" + std::string(text) + "'");
}

OutputFormat parse_format(std::string_view text) {
  if (text == "json") return OutputFormat::kJson;
  if (text == "csv") return OutputFormat::kCsv;
  throw ConfigError("format: expected json or csv, got '" + std::string(text) + "'");
}

ExperimentConfig validate_config(std::string_view raw) {
  const RawConfig in(raw);
  if (in.empty()) {
    throw ConfigError(
        "empty configuration; required keys: experiment, plus the dataset keys (d, n, rank | "
        "decay | path) and sketch keys (sketch_dim | sketch) of the chosen experiment");
  }
  if (!in.has("experiment")) throw ConfigError("missing required key: experiment");

  ExperimentConfig cfg;
  cfg.experiment = parse_experiment(in.text("experiment"));
  const auto kind = cfg.experiment;

  std::vector<std::string> missing;
  auto need = [&](const std::string& key) {
    if (!in.has(key)) missing.push_back(key);
    return in.has(key);
  };
  // Reads `key` when present, otherwise records that the default was used.
  auto take = [&](const std::string& key, auto read) {
    if (in.has(key)) {
      read();
    } else {
      cfg.defaulted.push_back(key);
    }
  };

  take("loss", [&] { cfg.loss = in.text("loss"); });
  try {
    cfg.loss = LossSpec::parse(cfg.loss).name();
  } catch (const Error& e) {
    throw ConfigError(std::string("loss: ") + e.what());
  }
  take("lambda", [&] { cfg.lambda = in.real("lambda"); });
  require_range(cfg.lambda > 0.0, "lambda", "must be positive");
  take("trials", [&] { cfg.trials = static_cast<int>(in.integer("trials")); });
  require_range(cfg.trials >= 1, "trials", "must be at least 1");
  take("seed", [&] { cfg.seed = in.unsigned_integer("seed"); });
  take("tol", [&] { cfg.tol = in.real("tol"); });
  require_range(cfg.tol > 0.0, "tol", "must be positive");
  take("max_iters", [&] { cfg.max_iters = in.integer("max_iters"); });
  require_range(cfg.max_iters >= 1, "max_iters", "must be at least 1");
  take("eps", [&] { cfg.eps = in.real("eps"); });
  require_range(cfg.eps > 0.0 && cfg.eps < 1.0, "eps", "must lie in (0, 1)");
  take("delta", [&] { cfg.delta = in.real("delta"); });
  require_range(cfg.delta > 0.0 && cfg.delta < 1.0, "delta", "must lie in (0, 1)");
  if (in.has("c")) {
    cfg.c = in.real("c");
    require_range(*cfg.c > 0.0, "c", "must be positive");
  } else {
    cfg.defaulted.push_back("c");
  }
  take("reference", [&] { cfg.reference = in.boolean("reference"); });
  take("iters", [&] { cfg.iters = static_cast<int>(in.integer("iters")); });
  if (kind == ExperimentKind::kIterate && !in.has("iters")) cfg.iters = 5;
  require_range(cfg.iters >= 1, "iters", "must be at least 1");
  take("method", [&] {
    try {
      cfg.method = parse_method(in.text("method"));
    } catch (const Error& e) {
      throw ConfigError(std::string("method: ") + e.what());
    }
  });
  take("output", [&] { cfg.output = in.text("output"); });
  take("format", [&] { cfg.format = parse_format(in.text("format")); });
  take("full_rank", [&] { cfg.full_rank = in.boolean("full_rank"); });

  if (kind == ExperimentKind::kRecover) {
    require_range(cfg.method != RecoveryMethod::kDrpIterative, "method",
                  "use the iterate experiment for the iterative method");
    if (cfg.method == RecoveryMethod::kRidgeClosed && cfg.loss != "square") {
      throw ConfigError("method: ridge-closed requires loss = square");
    }
  }

  // Dataset.
  if (uses_dataset(kind)) {
    if (kind == ExperimentKind::kFullRank) {
      cfg.dataset = DatasetSource::kDecaying;
      if (in.has("dataset") && in.text("dataset") != "decaying") {
        throw ConfigError("dataset: the full_rank experiment uses the decaying generator");
      }
    } else {
      take("dataset", [&] {
        const auto& v = in.text("dataset");
        if (v == "low_rank") {
          cfg.dataset = DatasetSource::kLowRank;
        } else if (v == "decaying") {
          cfg.dataset = DatasetSource::kDecaying;
        } else if (v == "csv") {
          cfg.dataset = DatasetSource::kCsv;
        } else {
          throw ConfigError("dataset: expected low_rank, decaying or csv, got '" + v + "'");
        }
      });
      if (!in.has("dataset") && in.has("path")) cfg.dataset = DatasetSource::kCsv;
    }
    if (cfg.dataset == DatasetSource::kCsv) {
      if (need("path")) {
        cfg.data_path = in.text("path");
        require_file("path", cfg.data_path);
      }
    } else {
      if (need("d")) cfg.d = in.integer("d");
      if (need("n")) cfg.n = in.integer("n");
      if (in.has("d")) require_range(cfg.d >= 1, "d", "must be at least 1");
      if (in.has("n")) require_range(cfg.n >= 1, "n", "must be at least 1");
      if (cfg.dataset == DatasetSource::kLowRank) {
        if (need("rank")) {
          cfg.rank = in.integer("rank");
          require_range(cfg.rank >= 1 && (cfg.d < 1 || cfg.n < 1 || cfg.rank <= std::min(cfg.d, cfg.n)),
                        "rank", "must lie in [1, min(d, n)]");
        }
      } else {
        take("decay", [&] { cfg.decay = in.real("decay"); });
        require_range(cfg.decay > 0.0, "decay", "must be positive");
        take("leading", [&] { cfg.leading = in.real("leading"); });
        require_range(cfg.leading > 0.0, "leading", "must be positive");
      }
      take("label_rule", [&] {
        const auto& v = in.text("label_rule");
        if (v == "sign_of_plant") {
          cfg.label_rule = LabelRule::kSignOfPlant;
        } else if (v == "random") {
          cfg.label_rule = LabelRule::kRandom;
        } else {
          throw ConfigError("label_rule: expected sign_of_plant or random, got '" + v + "'");
        }
      });
      take("plant_rank", [&] { cfg.plant_rank = in.integer("plant_rank"); });
      require_range(cfg.plant_rank >= 0, "plant_rank", "must be non-negative");
    }

    // Sketch.
    if (in.has("sketch")) {
      const auto& v = in.text("sketch");
      if (v == "fixed") {
        cfg.sketch = SketchSource::kFixed;
      } else if (v == "bound") {
        cfg.sketch = SketchSource::kBound;
      } else if (v == "identity") {
        cfg.sketch = SketchSource::kIdentity;
      } else if (v == "file") {
        cfg.sketch = SketchSource::kFile;
      } else {
        throw ConfigError("sketch: expected fixed, bound, identity or file, got '" + v + "'");
      }
    } else if (in.has("sketch_file")) {
      cfg.sketch = SketchSource::kFile;
    } else if (in.has("sketch_dim")) {
      cfg.sketch = SketchSource::kFixed;
    } else if (kind == ExperimentKind::kFullRank) {
      cfg.sketch = SketchSource::kBound;
      cfg.defaulted.push_back("sketch");
    } else {
      missing.push_back("sketch_dim");
    }
    if (cfg.sketch == SketchSource::kFixed && in.has("sketch_dim")) {
      cfg.sketch_dim = in.integer("sketch_dim");
      require_range(cfg.sketch_dim >= 1, "sketch_dim", "must be at least 1");
    } else if (cfg.sketch == SketchSource::kFixed && in.has("sketch")) {
      need("sketch_dim");
    }
    if (cfg.sketch == SketchSource::kFile && need("sketch_file")) {
      cfg.sketch_file = in.text("sketch_file");
      require_file("sketch_file", cfg.sketch_file);
    }
    if (cfg.sketch == SketchSource::kBound && cfg.dataset != DatasetSource::kDecaying) {
      require_range(cfg.eps <= 0.5, "eps", "must lie in (0, 1/2] for the low-rank sample bound");
    }
  } else if (kind == ExperimentKind::kConcentration) {
    if (need("rank")) {
      cfg.rank = in.integer("rank");
      require_range(cfg.rank >= 1, "rank", "must be at least 1");
    }
    if (in.has("sketch_dim")) {
      cfg.sketch = SketchSource::kFixed;
      cfg.sketch_dim = in.integer("sketch_dim");
      require_range(cfg.sketch_dim >= 1, "sketch_dim", "must be at least 1");
    } else {
      cfg.sketch = SketchSource::kBound;
      cfg.defaulted.push_back("sketch_dim");
      require_range(cfg.eps <= 0.5, "eps", "must lie in (0, 1/2] for the low-rank sample bound");
    }
  } else {  // bounds
    if (cfg.full_rank) {
      if (need("spectrum")) {
        cfg.spectrum_path = in.text("spectrum");
        require_file("spectrum", cfg.spectrum_path);
      }
      take("d", [&] {
        cfg.d = in.integer("d");
        require_range(cfg.d >= 1, "d", "must be at least 1");
      });
    } else {
      if (need("rank")) {
        cfg.rank = in.integer("rank");
        require_range(cfg.rank >= 1, "rank", "must be at least 1");
      }
      require_range(cfg.eps <= 0.5, "eps", "must lie in (0, 1/2] for the low-rank sample bound");
    }
  }

  if (!missing.empty()) {
    std::string list;
    for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("missing required key(s) for " + experiment_name(kind) + ": " + list);
  }
  return cfg;
}

nlohmann::ordered_json ExperimentConfig::echo() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment_name(experiment);
  if (uses_dataset(experiment)) {
    j["dataset"] = dataset_name(dataset);
    if (dataset == DatasetSource::kCsv) {
      j["path"] = data_path;
    } else {
      j["d"] = d;
      j["n"] = n;
      if (dataset == DatasetSource::kLowRank) {
        j["rank"] = rank;
      } else {
        j["decay"] = decay;
        j["leading"] = leading;
      }
      j["label_rule"] = label_rule == LabelRule::kSignOfPlant ? "sign_of_plant" : "random";
      j["plant_rank"] = plant_rank;
    }
    j["sketch"] = sketch_name(sketch);
    if (sketch == SketchSource::kFixed) j["sketch_dim"] = sketch_dim;
    if (sketch == SketchSource::kFile) j["sketch_file"] = sketch_file;
    j["loss"] = loss;
    j["lambda"] = lambda;
    if (experiment == ExperimentKind::kRecover) j["method"] = method_name(method);
    if (experiment == ExperimentKind::kIterate) j["iters"] = iters;
    j["reference"] = reference;
    j["tol"] = tol;
    j["max_iters"] = max_iters;
  } else if (experiment == ExperimentKind::kConcentration) {
    j["rank"] = rank;
    j["sketch"] = sketch_name(sketch);
    if (sketch == SketchSource::kFixed) j["sketch_dim"] = sketch_dim;
  } else {
    j["full_rank"] = full_rank;
    if (full_rank) {
      j["spectrum"] = spectrum_path;
      j["d"] = d;
      j["loss"] = loss;
      j["lambda"] = lambda;
    } else {
      j["rank"] = rank;
    }
  }
  j["eps"] = eps;
  j["delta"] = delta;
  if (c) {
    j["c"] = *c;
  } else {
    j["c"] = nullptr;
  }
  j["trials"] = trials;
  j["seed"] = seed;
  j["output"] = output;
  j["format"] = format == OutputFormat::kJson ? "json" : "csv";
  j["defaulted"] = defaulted;
  return j;
}

}  // namespace drp
