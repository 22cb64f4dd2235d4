/*
 * Copyright 2026 The leaklab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "leaklab/config.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "leaklab/format.h"

namespace leaklab {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& Schema() {
  static const auto* schema = new std::map<std::string, std::set<std::string>>{
      {"experiment", {"name", "seed", "output_dir"}},
      {"dataset",
       {"source", "classes", "dims", "n", "separation", "validation_fraction",
        "path", "label_column", "train_images", "train_labels", "val_images",
        "val_labels", "train_n", "val_n"}},
      {"model", {"hidden", "conv_filters", "conv_kernel"}},
      {"federation",
       {"clients", "clients_per_round", "rounds", "local_iterations",
        "batch_size", "learning_rate", "algorithm", "noise_placement",
        "prune_percent", "dssgd_fraction", "dssgd_threshold",
        "noise_variance"}},
      {"privacy",
       {"clip", "sigma", "delta", "decay", "sigma_end", "gamma", "step_size",
        "cycles", "sigma_floor", "noise_enabled"}},
      {"stop", {"kind", "budget", "method", "target_accuracy"}},
      {"attack",
       {"surface", "seed_kind", "max_iterations", "lr", "success_rmse",
        "loss_tolerance", "victims", "checkpoint"}},
  };
  return *schema;
}

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Line numbers of every section.key, for diagnostics on values the INI
// parser accepted.
std::map<std::string, int> KeyLines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string line;
  std::string section;
  for (int n = 1; std::getline(in, line); ++n) {
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = Trim(std::string_view(t).substr(1, t.size() - 2));
      lines.emplace(section, n);
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos) {
      lines.emplace(section + "." + Trim(std::string_view(t).substr(0, eq)), n);
    }
  }
  return lines;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::map<std::string, int> lines)
      : tree_(tree), lines_(std::move(lines)) {}

  [[noreturn]] void Fail(const std::string& field, const std::string& what) const {
    std::string where = "[" + field.substr(0, field.find('.')) + "] " +
                        field.substr(field.find('.') + 1);
    const auto it = lines_.find(field);
    if (it != lines_.end()) where = "line " + std::to_string(it->second) + ": " + where;
    throw ConfigError(where + ": " + what);
  }

  const std::map<std::string, int>& lines() const { return lines_; }

  bool HasSection(const std::string& section) const {
    return tree_.find(section) != tree_.not_found();
  }

  std::optional<std::string> Raw(const std::string& field) const {
    const auto value = tree_.get_optional<std::string>(pt::ptree::path_type(field, '.'));
    if (!value) return std::nullopt;
    return Trim(*value);
  }

  void String(const std::string& field, std::string& out) const {
    if (auto v = Raw(field)) out = *v;
  }

  void Double(const std::string& field, double& out) const {
    const auto v = Raw(field);
    if (!v) return;
    if (!ParseDouble(*v, out) || !std::isfinite(out)) {
      Fail(field, "expected a finite number, got '" + *v + "'");
    }
  }

  template <typename Int>
  void Integer(const std::string& field, Int& out) const {
    const auto v = Raw(field);
    if (!v) return;
    Int parsed{};
    const char* end = v->data() + v->size();
    const auto [ptr, ec] = std::from_chars(v->data(), end, parsed);
    if (v->empty() || ec != std::errc() || ptr != end) {
      Fail(field, "expected an integer, got '" + *v + "'");
    }
    out = parsed;
  }

  void Bool(const std::string& field, bool& out) const {
    const auto v = Raw(field);
    if (!v) return;
    if (*v == "true" || *v == "1") {
      out = true;
    } else if (*v == "false" || *v == "0") {
      out = false;
    } else {
      Fail(field, "expected true or false, got '" + *v + "'");
    }
  }

  template <typename Parse, typename T>
  void Enum(const std::string& field, Parse parse, T& out) const {
    const auto v = Raw(field);
    if (!v) return;
    try {
      out = parse(*v);
    } catch (const std::invalid_argument&) {
      Fail(field, "unknown value '" + *v + "'");
    }
  }

 private:
  const pt::ptree& tree_;
  std::map<std::string, int> lines_;
};

void CheckKeys(const pt::ptree& tree, const Reader& reader) {
  const auto& schema = Schema();
  // The INI reader drops empty sections, so headers are checked from the text.
  for (const auto& [field, line] : reader.lines()) {
    if (field.find('.') == std::string::npos && !schema.contains(field)) {
      reader.Fail(field + ".", "unknown section");
    }
  }
  for (const auto& [section, body] : tree) {
    const auto it = schema.find(section);
    if (it == schema.end()) {
      if (body.empty()) reader.Fail(section + ".", "keys must sit inside a section");
      reader.Fail(section + ".", "unknown section");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) reader.Fail(section + "." + key, "unknown key");
    }
  }
}

std::string Resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

DatasetSource ParseSource(const std::string& s) {
  if (s == "synthetic_blobs") return DatasetSource::kSyntheticBlobs;
  if (s == "csv") return DatasetSource::kCsv;
  if (s == "idx_images") return DatasetSource::kIdxImages;
  throw std::invalid_argument(s);
}

DecayPolicy ParseDecay(const std::string& s) {
  if (s == "fixed") return DecayPolicy::kFixed;
  if (s == "linear") return DecayPolicy::kLinear;
  if (s == "staircase") return DecayPolicy::kStaircase;
  if (s == "exponential") return DecayPolicy::kExponential;
  if (s == "cyclic") return DecayPolicy::kCyclic;
  throw std::invalid_argument(s);
}

NoisePlacement ParsePlacement(const std::string& s) {
  if (s == "post_average") return NoisePlacement::kPostAverage;
  if (s == "per_example_then_average") return NoisePlacement::kPerExampleThenAverage;
  throw std::invalid_argument(s);
}

StopKind ParseStop(const std::string& s) {
  if (s == "rounds") return StopKind::kRounds;
  if (s == "budget") return StopKind::kBudget;
  if (s == "target_accuracy") return StopKind::kTargetAccuracy;
  throw std::invalid_argument(s);
}

SeedKind ParseSeedKind(const std::string& s) {
  if (s == "patterned") return SeedKind::kPatterned;
  if (s == "random") return SeedKind::kRandom;
  throw std::invalid_argument(s);
}

std::vector<std::size_t> ParseHidden(const Reader& reader, const std::string& text) {
  std::vector<std::size_t> widths;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    std::size_t w = 0;
    const char* end = item.data() + item.size();
    const auto [ptr, ec] = std::from_chars(item.data(), end, w);
    if (item.empty() || ec != std::errc() || ptr != end || w == 0) {
      reader.Fail("model.hidden", "expected a comma-separated list of positive widths");
    }
    widths.push_back(w);
  }
  return widths;
}

NoiseSchedule ReadSchedule(const Reader& r, int rounds) {
  double sigma0 = 6.0;
  double floor = 0.5;
  double gamma = 0.0;
  double cycles = 1.0;
  int step_size = 10;
  DecayPolicy policy = DecayPolicy::kFixed;
  r.Double("privacy.sigma", sigma0);
  r.Double("privacy.sigma_floor", floor);
  r.Double("privacy.gamma", gamma);
  r.Double("privacy.cycles", cycles);
  r.Integer("privacy.step_size", step_size);
  r.Enum("privacy.decay", ParseDecay, policy);
  std::optional<double> sigma_end;
  if (r.Raw("privacy.sigma_end")) {
    double v = 0.0;
    r.Double("privacy.sigma_end", v);
    sigma_end = v;
  }
  const bool floor_set = r.Raw("privacy.sigma_floor").has_value();
  if (!floor_set) floor = std::min(floor, sigma_end.value_or(sigma0));
  try {
    if (sigma_end && (policy == DecayPolicy::kFixed || policy == DecayPolicy::kCyclic)) {
      r.Fail("privacy.sigma_end", "only linear, staircase and exponential decay take sigma_end");
    }
    NoiseSchedule s;
    switch (policy) {
      case DecayPolicy::kFixed:
        s = NoiseSchedule::Fixed(sigma0, rounds);
        s.sigma_floor = std::min(floor, sigma0);
        if (floor_set) s.sigma_floor = floor;
        break;
      case DecayPolicy::kLinear:
        s = sigma_end ? NoiseSchedule::LinearTo(sigma0, *sigma_end, rounds, floor)
                      : NoiseSchedule{.policy = policy, .sigma0 = sigma0, .gamma = gamma,
                                      .total_rounds = rounds, .sigma_floor = floor};
        break;
      case DecayPolicy::kExponential:
        s = sigma_end ? NoiseSchedule::ExponentialTo(sigma0, *sigma_end, rounds, floor)
                      : NoiseSchedule{.policy = policy, .sigma0 = sigma0, .gamma = gamma,
                                      .total_rounds = rounds, .sigma_floor = floor};
        break;
      case DecayPolicy::kStaircase:
        s = sigma_end ? NoiseSchedule::StaircaseTo(sigma0, *sigma_end, rounds, step_size, floor)
                      : NoiseSchedule{.policy = policy, .sigma0 = sigma0, .gamma = gamma,
                                      .step_size = step_size, .total_rounds = rounds,
                                      .sigma_floor = floor};
        break;
      case DecayPolicy::kCyclic:
        s = NoiseSchedule::Cyclic(sigma0, cycles, rounds, floor);
        break;
    }
    s.Validate();
    return s;
  } catch (const std::invalid_argument& e) {
    r.Fail("privacy.decay", e.what());
  }
}

}  // namespace

ExperimentConfig ParseConfig(std::istream& in, const std::string& base_dir) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  pt::ptree tree;
  try {
    std::istringstream parse_in(text);
    pt::read_ini(parse_in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  const Reader r(tree, KeyLines(text));
  CheckKeys(tree, r);

  ExperimentConfig cfg;
  r.String("experiment.name", cfg.name);
  r.Integer("experiment.seed", cfg.master_seed);
  r.String("experiment.output_dir", cfg.output_dir);
  cfg.output_dir = Resolve(base_dir, cfg.output_dir);

  DatasetSpec& d = cfg.dataset;
  r.Enum("dataset.source", ParseSource, d.source);
  r.Integer("dataset.classes", d.classes);
  r.Integer("dataset.dims", d.dims);
  r.Integer("dataset.n", d.n);
  r.Double("dataset.separation", d.separation);
  r.Double("dataset.validation_fraction", d.validation_fraction);
  r.String("dataset.path", d.csv_path);
  r.String("dataset.label_column", d.label_column);
  r.String("dataset.train_images", d.train_images);
  r.String("dataset.train_labels", d.train_labels);
  r.String("dataset.val_images", d.val_images);
  r.String("dataset.val_labels", d.val_labels);
  r.Integer("dataset.train_n", d.train_n);
  r.Integer("dataset.val_n", d.val_n);
  for (std::string* p : {&d.csv_path, &d.train_images, &d.train_labels, &d.val_images,
                         &d.val_labels}) {
    *p = Resolve(base_dir, *p);
  }
  if (d.classes < 2) r.Fail("dataset.classes", "need at least 2 classes");
  if (d.dims < 1) r.Fail("dataset.dims", "must be >= 1");
  if (!(d.separation >= 0.0)) r.Fail("dataset.separation", "must be >= 0");
  if (!(d.validation_fraction > 0.0 && d.validation_fraction < 1.0)) {
    r.Fail("dataset.validation_fraction", "must lie in (0, 1)");
  }
  if (d.source == DatasetSource::kCsv && d.csv_path.empty()) {
    r.Fail("dataset.path", "csv source needs a path");
  }
  if (d.source == DatasetSource::kIdxImages) {
    if (d.train_images.empty() || d.train_labels.empty()) {
      r.Fail("dataset.train_images", "idx_images needs train_images and train_labels");
    }
    if (d.val_images.empty() != d.val_labels.empty()) {
      r.Fail("dataset.val_images", "val_images and val_labels go together");
    }
  }

  if (auto hidden = r.Raw("model.hidden")) {
    cfg.model.hidden = hidden->empty() ? std::vector<std::size_t>{}
                                       : ParseHidden(r, *hidden);
  }
  r.Integer("model.conv_filters", cfg.model.conv_filters);
  r.Integer("model.conv_kernel", cfg.model.conv_kernel);
  if (cfg.model.conv_filters > 0 && cfg.model.conv_kernel < 1) {
    r.Fail("model.conv_kernel", "must be >= 1");
  }

  FederationConfig& f = cfg.federation;
  r.Integer("federation.clients", f.num_clients);
  r.Integer("federation.clients_per_round", f.clients_per_round);
  r.Integer("federation.rounds", f.rounds);
  r.Integer("federation.local_iterations", f.local_iterations);
  r.Integer("federation.batch_size", f.batch_size);
  r.Double("federation.learning_rate", f.learning_rate);
  r.Enum("federation.algorithm", ParseAlgorithm, f.algorithm.kind);
  r.Enum("federation.noise_placement", ParsePlacement, f.noise_placement);
  r.Double("federation.prune_percent", f.algorithm.prune_percent);
  r.Double("federation.dssgd_fraction", f.algorithm.dssgd_fraction);
  r.Double("federation.dssgd_threshold", f.algorithm.dssgd_threshold);
  r.Double("federation.noise_variance", f.algorithm.noise_variance);
  if (f.rounds < 1) r.Fail("federation.rounds", "must be >= 1");
  f.seed = cfg.master_seed;

  r.Double("privacy.clip", f.privacy.clip_bound);
  r.Double("privacy.delta", f.privacy.delta);
  r.Bool("privacy.noise_enabled", f.noise_enabled);
  f.privacy.schedule = ReadSchedule(r, f.rounds);
  try {
    f.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[federation] ") + e.what());
  }

  r.Enum("stop.kind", ParseStop, cfg.stop.kind);
  r.Double("stop.budget", cfg.stop.budget);
  r.Enum("stop.method", ParseMethod, cfg.stop.method);
  r.Double("stop.target_accuracy", cfg.stop.target_accuracy);
  if (cfg.stop.kind == StopKind::kBudget) {
    if (!(cfg.stop.budget > 0.0)) r.Fail("stop.budget", "budget stop needs budget > 0");
    if (!f.algorithm.differentially_private()) {
      r.Fail("stop.kind", "budget stop needs a differentially private algorithm");
    }
    if (cfg.stop.method == AccountingMethod::kParallel) {
      r.Fail("stop.method", "parallel is not a ledger method");
    }
  }
  if (cfg.stop.kind == StopKind::kTargetAccuracy &&
      !(cfg.stop.target_accuracy > 0.0 && cfg.stop.target_accuracy <= 1.0)) {
    r.Fail("stop.target_accuracy", "must lie in (0, 1]");
  }

  if (r.HasSection("attack")) {
    AttackSection a;
    AttackConfig& ac = a.attack;
    if (auto surface = r.Raw("attack.surface"); surface && *surface == "all") {
      a.all_surfaces = true;
    } else {
      r.Enum("attack.surface", ParseSurface, ac.surface);
    }
    r.Enum("attack.seed_kind", ParseSeedKind, ac.seed_kind);
    r.Integer("attack.max_iterations", ac.max_iterations);
    r.Double("attack.lr", ac.attack_lr);
    r.Double("attack.success_rmse", ac.success_rmse);
    r.Double("attack.loss_tolerance", ac.loss_tolerance);
    r.Integer("attack.victims", a.victims);
    r.String("attack.checkpoint", a.checkpoint);
    a.checkpoint = Resolve(base_dir, a.checkpoint);
    ac.seed = cfg.master_seed;
    if (ac.max_iterations < 1) r.Fail("attack.max_iterations", "must be >= 1");
    if (!(ac.attack_lr > 0.0)) r.Fail("attack.lr", "must be positive");
    if (!(ac.success_rmse > 0.0)) r.Fail("attack.success_rmse", "must be positive");
    if (!(ac.loss_tolerance >= 0.0)) r.Fail("attack.loss_tolerance", "must be >= 0");
    if (a.victims < 1) r.Fail("attack.victims", "must be >= 1");
    if (!(f.learning_rate > 0.0) &&
        (a.all_surfaces || ac.surface != AttackSurface::kType2PerExampleGradient)) {
      r.Fail("attack.surface",
             "type0 and type1 recover gradients from updates and need learning_rate > 0");
    }
    cfg.attack = a;
  }
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  return ParseConfig(in, parent.empty() ? "." : parent.string());
}

std::string DefaultConfigText() {
  return R"(# leaklab experiment config. Every key is optional; the values below are
# the defaults. Relative paths resolve against this file's directory.

[experiment]
name = experiment
seed = 0
output_dir = out

[dataset]
# synthetic_blobs | csv | idx_images
source = synthetic_blobs
classes = 4
dims = 16
n = 12500
separation = 3
# held out from synthetic_blobs and csv sources
validation_fraction = 0.2
# csv: header row required, label column by name
path =
label_column = label
# idx_images: standard IDX files; val_* are optional (else split from train)
train_images =
train_labels =
val_images =
val_labels =
train_n = 6000
val_n = 1000

[model]
# comma-separated hidden widths
hidden = 64
# optional leading conv layer over image inputs (0 disables)
conv_filters = 0
conv_kernel = 5

[federation]
clients = 1000
clients_per_round = 100
rounds = 100
local_iterations = 100
batch_size = 5
learning_rate = 0.1
# non_private | fed_sdp_server | fed_sdp_client | fed_cdp | fed_alpha_cdp |
# fed_alpha_cdp_sigma | prune_threshold | prune_random_dssgd | additive_noise
algorithm = non_private
# post_average | per_example_then_average
noise_placement = post_average
prune_percent = 10
dssgd_fraction = 0.1
dssgd_threshold = 0
noise_variance = 0.01

[privacy]
clip = 4
sigma = 6
delta = 1e-05
# fixed | linear | staircase | exponential | cyclic
decay = fixed
# linear, staircase and exponential: give sigma_end (reached at round T-1)
# or gamma directly
# sigma_end = 4.85
gamma = 0
step_size = 10
cycles = 1
sigma_floor = 0.5
noise_enabled = true

[stop]
# rounds | budget | target_accuracy
kind = rounds
budget = 0
# base | advanced | zcdp | moments
method = moments
target_accuracy = 0

[attack]
# type0 | type1 | type2 | all
surface = type2
# patterned | random
seed_kind = patterned
max_iterations = 300
lr = 0.05
success_rmse = 0.1
loss_tolerance = 1e-08
victims = 20
# model checkpoint to attack; empty attacks the round-0 global model
checkpoint =
)";
}

}  // namespace leaklab
