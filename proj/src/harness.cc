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
#include "leaklab/harness.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <utility>

#include "leaklab/dataset.h"
#include "leaklab/format.h"
#include "leaklab/rng.h"

namespace leaklab {
namespace {

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

double CellDouble(const std::string& cell, std::size_t line) {
  double v = 0.0;
  if (!ParseDouble(cell, v)) throw FormatError("expected a number, got '" + cell + "'", line);
  return v;
}

template <typename Int>
Int CellInt(const std::string& cell, std::size_t line) {
  Int v{};
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw FormatError("expected an integer, got '" + cell + "'", line);
  }
  return v;
}

// Reads the header and data rows of a CSV stream, checking the header and
// every row's width.
std::vector<std::vector<std::string>> ReadTable(std::istream& in,
                                                const std::string& header) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw FormatError("unexpected header '" + line + "'", 1);
  const std::size_t width = SplitCsv(header).size();
  std::vector<std::vector<std::string>> rows;
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty() || line == "\r") continue;
    auto cells = SplitCsv(line);
    if (cells.size() != width) {
      throw FormatError("expected " + std::to_string(width) + " fields", n);
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

constexpr char kRoundHeader[] =
    "round,val_accuracy,sigma,mean_sensitivity,eps_moments,eps_zcdp,"
    "eps_advanced,eps_base";
constexpr char kSummaryHeader[] =
    "algorithm,initial_accuracy,final_accuracy,rounds_used,stop_reached,delta,"
    "eps_base,eps_advanced,eps_zcdp,eps_moments";
constexpr char kCheckpointMagic[] = "leaklab-checkpoint v1";

const char* ActivationName(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kIdentity: return "identity";
    case Activation::kSoftmaxOutput: return "softmax";
  }
  return "relu";
}

std::vector<Example> Scaled(std::vector<Example> examples, const MinMaxScaler& scaler) {
  scaler.Apply(examples);
  return examples;
}

}  // namespace

LoadedData LoadDataset(const DatasetSpec& spec, std::uint64_t master_seed) {
  LoadedData out;
  Rng split_rng = MakeRng(master_seed, "split");
  switch (spec.source) {
    case DatasetSource::kSyntheticBlobs: {
      Rng rng = MakeRng(master_seed, "dataset");
      Dataset d = SyntheticBlobs(spec.classes, spec.dims, spec.n, spec.separation, rng);
      out.num_features = d.num_features;
      out.num_classes = d.num_classes;
      SplitTrainValidation(std::move(d.examples), spec.validation_fraction, split_rng,
                           out.train, out.validation);
      break;
    }
    case DatasetSource::kCsv: {
      Dataset d = ReadCsv(spec.csv_path, spec.label_column);
      out.num_features = d.num_features;
      out.num_classes = d.num_classes;
      SplitTrainValidation(std::move(d.examples), spec.validation_fraction, split_rng,
                           out.train, out.validation);
      break;
    }
    case DatasetSource::kIdxImages: {
      const bool split = spec.val_images.empty();
      Dataset d = ReadIdx(spec.train_images, spec.train_labels,
                          split ? spec.train_n + spec.val_n : spec.train_n);
      out.num_features = d.num_features;
      out.height = d.height;
      out.width = d.width;
      if (split) {
        const double fraction = static_cast<double>(spec.val_n) /
                                static_cast<double>(spec.train_n + spec.val_n);
        SplitTrainValidation(std::move(d.examples), fraction, split_rng, out.train,
                             out.validation);
      } else {
        Dataset v = ReadIdx(spec.val_images, spec.val_labels, spec.val_n);
        if (v.num_features != d.num_features) {
          throw DatasetError("validation images differ in shape from training images");
        }
        out.train = std::move(d.examples);
        out.validation = std::move(v.examples);
        d.num_classes = std::max(d.num_classes, v.num_classes);
      }
      out.num_classes = d.num_classes;
      break;
    }
  }
  if (out.train.empty()) throw DatasetError("dataset has no training examples");
  const MinMaxScaler scaler = MinMaxScaler::Fit(out.train);
  out.train = Scaled(std::move(out.train), scaler);
  out.validation = Scaled(std::move(out.validation), scaler);
  out.hash = DatasetHash(out.train, out.validation);
  return out;
}

Architecture ArchitectureFor(const ModelSpec& spec, const LoadedData& data) {
  Architecture arch;
  arch.input_dim = data.num_features;
  arch.hidden = spec.hidden;
  arch.num_classes = static_cast<std::size_t>(data.num_classes);
  arch.conv_filters = spec.conv_filters;
  arch.conv_kernel = spec.conv_kernel;
  if (spec.conv_filters > 0) {
    if (data.height == 0) {
      throw std::invalid_argument("[model] conv_filters needs an image dataset");
    }
    arch.image_height = data.height;
    arch.image_width = data.width;
  }
  return arch;
}

ModelParams InitialModel(const ExperimentConfig& cfg, const LoadedData& data) {
  Rng rng = MakeRng(cfg.master_seed, "init");
  return InitModel(ArchitectureFor(cfg.model, data), rng);
}

TrainingReport RunTrainExperiment(const ExperimentConfig& cfg, const LoadedData& data) {
  FederationConfig fed = cfg.federation;
  fed.seed = cfg.master_seed;
  Rng partition_rng = MakeRng(cfg.master_seed, "partition");
  const auto clients = PartitionIid(data.train, fed.num_clients, partition_rng);
  return RunTraining(fed, InitialModel(cfg, data), clients, data.validation, cfg.stop);
}

ModelParams AttackTargetModel(const ExperimentConfig& cfg, const LoadedData& data) {
  if (!cfg.attack || cfg.attack->checkpoint.empty()) return InitialModel(cfg, data);
  std::ifstream in(cfg.attack->checkpoint);
  if (!in) throw DatasetError("cannot open checkpoint '" + cfg.attack->checkpoint + "'");
  ModelParams model = ReadCheckpoint(in);
  if (model.input_dim() != data.num_features ||
      model.output_dim() != static_cast<std::size_t>(data.num_classes)) {
    throw std::invalid_argument("checkpoint shape does not match the dataset");
  }
  return model;
}

AttackRun RunAttackExperiment(const ExperimentConfig& cfg, const LoadedData& data,
                              const ModelParams& model) {
  if (!cfg.attack) throw std::invalid_argument("config has no [attack] section");
  const AttackSection& a = *cfg.attack;
  if (static_cast<std::size_t>(a.victims) > data.train.size()) {
    throw std::invalid_argument("more victims than training examples");
  }
  AttackRun run;
  std::vector<std::size_t> all(data.train.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  Rng rng = MakeRng(cfg.master_seed, "victims");
  std::sample(all.begin(), all.end(), std::back_inserter(run.victim_indices),
              a.victims, rng);
  std::vector<Example> victims;
  for (std::size_t i : run.victim_indices) victims.push_back(data.train[i]);

  FederationConfig fed = cfg.federation;
  fed.seed = cfg.master_seed;
  std::vector<AttackSurface> surfaces;
  if (a.all_surfaces) {
    surfaces = {AttackSurface::kType0ServerSharedUpdate,
                AttackSurface::kType1ClientPostTraining,
                AttackSurface::kType2PerExampleGradient};
  } else {
    surfaces = {a.attack.surface};
  }
  for (AttackSurface s : surfaces) {
    AttackConfig ac = a.attack;
    ac.surface = s;
    ac.seed = cfg.master_seed;
    run.surfaces.push_back({s, AttackCampaign(model, victims, fed, data.train.size(), ac)});
  }
  return run;
}

void WriteRoundReport(const TrainingReport& report, std::ostream& out) {
  out << kRoundHeader << '\n';
  for (const RoundRecord& r : report.per_round) {
    out << r.round << ',' << FormatDouble(r.val_accuracy) << ',' << FormatDouble(r.sigma)
        << ',' << FormatDouble(r.mean_sensitivity) << ',' << FormatDouble(r.eps_moments)
        << ',' << FormatDouble(r.eps_zcdp) << ',' << FormatDouble(r.eps_advanced) << ','
        << FormatDouble(r.eps_base) << '\n';
  }
}

void WriteTrainSummary(const TrainingReport& report, std::ostream& out) {
  out << kSummaryHeader << '\n';
  out << CsvField(report.algorithm) << ',' << FormatDouble(report.initial_accuracy) << ','
      << FormatDouble(report.final_accuracy) << ',' << report.rounds_used << ','
      << (report.stop_reached ? 1 : 0) << ',';
  out << (report.spends.empty() ? "" : FormatDouble(report.spends.front().delta));
  for (AccountingMethod m : {AccountingMethod::kBase, AccountingMethod::kAdvanced,
                             AccountingMethod::kZcdp, AccountingMethod::kMoments}) {
    out << ',';
    for (const PrivacySpend& s : report.spends) {
      if (s.method == m) out << FormatDouble(s.epsilon);
    }
  }
  out << '\n';
}

TrainingReport ReadTrainReport(std::istream& rounds, std::istream& summary) {
  TrainingReport report;
  std::size_t line = 2;
  for (const auto& c : ReadTable(rounds, kRoundHeader)) {
    RoundRecord r;
    r.round = CellInt<int>(c[0], line);
    r.val_accuracy = CellDouble(c[1], line);
    r.sigma = CellDouble(c[2], line);
    r.mean_sensitivity = CellDouble(c[3], line);
    r.eps_moments = CellDouble(c[4], line);
    r.eps_zcdp = CellDouble(c[5], line);
    r.eps_advanced = CellDouble(c[6], line);
    r.eps_base = CellDouble(c[7], line);
    report.per_round.push_back(r);
    ++line;
  }
  const auto rows = ReadTable(summary, kSummaryHeader);
  if (rows.size() != 1) throw FormatError("summary needs exactly one row", 2);
  const auto& c = rows.front();
  report.algorithm = c[0];
  report.initial_accuracy = CellDouble(c[1], 2);
  report.final_accuracy = CellDouble(c[2], 2);
  report.rounds_used = CellInt<int>(c[3], 2);
  report.stop_reached = CellInt<int>(c[4], 2) != 0;
  if (!c[5].empty()) {
    const double delta = CellDouble(c[5], 2);
    const AccountingMethod methods[] = {AccountingMethod::kBase, AccountingMethod::kAdvanced,
                                        AccountingMethod::kZcdp, AccountingMethod::kMoments};
    for (int i = 0; i < 4; ++i) {
      report.spends.push_back({CellDouble(c[6 + i], 2), delta, methods[i]});
    }
  }
  if (report.rounds_used != static_cast<int>(report.per_round.size())) {
    throw FormatError("rounds_used disagrees with the per-round rows", 2);
  }
  return report;
}

void WriteCheckpoint(const ModelParams& model, std::ostream& out) {
  model.Validate();
  out << kCheckpointMagic << '\n' << "layers " << model.num_layers() << '\n';
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const LayerSpec& s = model.layers[l];
    out << "layer " << (s.kind == LayerKind::kConv2d ? "conv2d" : "dense") << ' '
        << ActivationName(s.activation) << ' ' << s.in_dim << ' ' << s.out_dim;
    if (s.kind == LayerKind::kConv2d) {
      out << ' ' << s.conv.in_channels << ' ' << s.conv.height << ' ' << s.conv.width << ' '
          << s.conv.kernel << ' ' << s.conv.out_channels;
    }
    out << '\n';
    const ParamBlock& b = model.params.blocks[l];
    out << "weights " << b.weights.rows << ' ' << b.weights.cols << '\n';
    for (std::size_t r = 0; r < b.weights.rows; ++r) {
      for (std::size_t c = 0; c < b.weights.cols; ++c) {
        out << (c ? " " : "") << FormatDouble(b.weights(r, c));
      }
      out << '\n';
    }
    out << "bias " << b.bias.size() << '\n';
    for (std::size_t i = 0; i < b.bias.size(); ++i) {
      out << (i ? " " : "") << FormatDouble(b.bias[i]);
    }
    out << '\n';
  }
}

namespace {

// Whitespace tokenizer that tracks line numbers for checkpoint diagnostics.
class Tokens {
 public:
  explicit Tokens(std::istream& in) : in_(in) {}

  std::string Line() {
    std::string line;
    if (!std::getline(in_, line)) throw FormatError("unexpected end of checkpoint", line_ + 1);
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  std::vector<std::string> Words() {
    std::istringstream s(Line());
    std::vector<std::string> words;
    for (std::string w; s >> w;) words.push_back(w);
    return words;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::size_t Count(const std::string& s, std::size_t line) {
  return CellInt<std::size_t>(s, line);
}

void Expect(const std::vector<std::string>& w, const std::string& head, std::size_t n,
            std::size_t line) {
  if (w.empty() || w[0] != head || w.size() != n) {
    throw FormatError("expected '" + head + "' with " + std::to_string(n - 1) + " fields",
                      line);
  }
}

std::vector<double> Values(Tokens& t, std::size_t n) {
  std::vector<double> v;
  for (const std::string& w : t.Words()) v.push_back(CellDouble(w, t.line()));
  if (v.size() != n) {
    throw FormatError("expected " + std::to_string(n) + " values", t.line());
  }
  return v;
}

}  // namespace

ModelParams ReadCheckpoint(std::istream& in) {
  Tokens t(in);
  if (t.Line() != kCheckpointMagic) {
    throw FormatError("not a leaklab checkpoint (or an unsupported version)", 1);
  }
  auto w = t.Words();
  Expect(w, "layers", 2, t.line());
  const std::size_t layers = Count(w[1], t.line());
  if (layers == 0) throw FormatError("checkpoint has no layers", t.line());
  ModelParams model;
  for (std::size_t l = 0; l < layers; ++l) {
    w = t.Words();
    if (w.empty() || w[0] != "layer" || (w.size() != 5 && w.size() != 10)) {
      throw FormatError("expected a layer line", t.line());
    }
    LayerSpec s;
    if (w[1] == "dense" && w.size() == 5) {
      s.kind = LayerKind::kDense;
    } else if (w[1] == "conv2d" && w.size() == 10) {
      s.kind = LayerKind::kConv2d;
    } else {
      throw FormatError("unknown layer kind '" + w[1] + "'", t.line());
    }
    if (w[2] == "relu") {
      s.activation = Activation::kRelu;
    } else if (w[2] == "identity") {
      s.activation = Activation::kIdentity;
    } else if (w[2] == "softmax") {
      s.activation = Activation::kSoftmaxOutput;
    } else {
      throw FormatError("unknown activation '" + w[2] + "'", t.line());
    }
    s.in_dim = Count(w[3], t.line());
    s.out_dim = Count(w[4], t.line());
    if (s.kind == LayerKind::kConv2d) {
      s.conv.in_channels = Count(w[5], t.line());
      s.conv.height = Count(w[6], t.line());
      s.conv.width = Count(w[7], t.line());
      s.conv.kernel = Count(w[8], t.line());
      s.conv.out_channels = Count(w[9], t.line());
    }
    w = t.Words();
    Expect(w, "weights", 3, t.line());
    ParamBlock b;
    b.weights = Matrix(Count(w[1], t.line()), Count(w[2], t.line()));
    for (std::size_t r = 0; r < b.weights.rows; ++r) {
      const auto row = Values(t, b.weights.cols);
      std::copy(row.begin(), row.end(), b.weights.data.begin() + r * b.weights.cols);
    }
    w = t.Words();
    Expect(w, "bias", 2, t.line());
    b.bias = Values(t, Count(w[1], t.line()));
    model.layers.push_back(s);
    model.params.blocks.push_back(std::move(b));
  }
  try {
    model.Validate();
  } catch (const std::exception& e) {
    throw FormatError(std::string("inconsistent checkpoint: ") + e.what(), t.line());
  }
  return model;
}

void WriteAttackReport(const AttackRun& run, std::span<const Example> train,
                       std::ostream& out) {
  out << "surface,victim,train_index,label,resilient,recon_distance,iterations_used,"
         "diverged,final_loss\n";
  for (const SurfaceResult& s : run.surfaces) {
    for (std::size_t v = 0; v < s.campaign.victims.size(); ++v) {
      const AttackReport& r = s.campaign.victims[v];
      const std::size_t index = run.victim_indices[v];
      out << SurfaceName(s.surface) << ',' << v << ',' << index << ','
          << train[index].label << ',' << (r.resilient ? 1 : 0) << ','
          << FormatDouble(r.recon_distance) << ',' << r.iterations_used << ','
          << (r.diverged ? 1 : 0) << ','
          << (r.per_iteration_loss.empty() ? "" : FormatDouble(r.per_iteration_loss.back()))
          << '\n';
    }
  }
}

void WriteAttackSummary(const AttackRun& run, std::ostream& out) {
  out << "surface,victims,attack_success_rate,mean_distance,mean_iterations\n";
  for (const SurfaceResult& s : run.surfaces) {
    out << SurfaceName(s.surface) << ',' << s.campaign.victims.size() << ','
        << FormatDouble(s.campaign.attack_success_rate) << ','
        << FormatDouble(s.campaign.mean_distance) << ','
        << FormatDouble(s.campaign.mean_iterations) << '\n';
  }
}

void WriteAttackTrace(const AttackRun& run, std::ostream& out) {
  out << "surface,victim,iteration,loss\n";
  for (const SurfaceResult& s : run.surfaces) {
    for (std::size_t v = 0; v < s.campaign.victims.size(); ++v) {
      const auto& loss = s.campaign.victims[v].per_iteration_loss;
      for (std::size_t i = 0; i < loss.size(); ++i) {
        out << SurfaceName(s.surface) << ',' << v << ',' << i << ',' << FormatDouble(loss[i])
            << '\n';
      }
    }
  }
}

void WriteAccountRows(const PrivacyLedger& ledger,
                      std::span<const AccountingMethod> methods, std::ostream& out) {
  const long steps = static_cast<long>(CompositionSteps(ledger).size());
  out << "method,epsilon,delta,steps\n";
  for (AccountingMethod m : methods) {
    const PrivacySpend s = Account(ledger, m);
    out << MethodName(m) << ',' << FormatDouble(s.epsilon) << ',' << FormatDouble(s.delta)
        << ',' << steps << '\n';
  }
}

void WriteCompare(std::span<const CompareRow> rows, std::ostream& out) {
  out << "config,name,algorithm,dataset_hash,final_accuracy,rounds_used,eps_base,"
         "eps_advanced,eps_zcdp,eps_moments";
  const AttackSurface surfaces[] = {AttackSurface::kType0ServerSharedUpdate,
                                    AttackSurface::kType1ClientPostTraining,
                                    AttackSurface::kType2PerExampleGradient};
  for (AttackSurface s : surfaces) {
    out << ",asr_" << SurfaceName(s) << ",recon_distance_" << SurfaceName(s);
  }
  out << '\n';
  for (const CompareRow& row : rows) {
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(row.dataset_hash));
    out << CsvField(row.config) << ',' << CsvField(row.name) << ',' << row.algorithm << ','
        << hash << ',' << FormatDouble(row.report.final_accuracy) << ','
        << row.report.rounds_used;
    for (AccountingMethod m : {AccountingMethod::kBase, AccountingMethod::kAdvanced,
                               AccountingMethod::kZcdp, AccountingMethod::kMoments}) {
      double eps = 0.0;
      for (const PrivacySpend& s : row.report.spends) {
        if (s.method == m) eps = s.epsilon;
      }
      out << ',' << FormatDouble(eps);
    }
    for (AttackSurface s : surfaces) {
      const auto it = std::find_if(row.attack.surfaces.begin(), row.attack.surfaces.end(),
                                   [s](const SurfaceResult& r) { return r.surface == s; });
      out << ',';
      if (it != row.attack.surfaces.end()) out << FormatDouble(it->campaign.attack_success_rate);
      out << ',';
      if (it != row.attack.surfaces.end()) out << FormatDouble(it->campaign.mean_distance);
    }
    out << '\n';
  }
}

}  // namespace leaklab
