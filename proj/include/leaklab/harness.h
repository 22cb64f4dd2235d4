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
#ifndef LEAKLAB_HARNESS_H_
#define LEAKLAB_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "leaklab/attack.h"
#include "leaklab/config.h"
#include "leaklab/federation.h"
#include "leaklab/nn.h"

namespace leaklab {

// Malformed report or checkpoint text, with the 1-based line.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct LoadedData {
  std::vector<Example> train;
  std::vector<Example> validation;
  std::size_t num_features = 0;
  int num_classes = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::uint64_t hash = 0;  // DatasetHash after scaling
};

// Loads the configured source and min-max scales every feature with bounds
// fitted on the training split. Without explicit validation files the last
// validation_fraction of a seeded shuffle is held out. Throws DatasetError
// on IO problems.
LoadedData LoadDataset(const DatasetSpec& spec, std::uint64_t master_seed);

Architecture ArchitectureFor(const ModelSpec& spec, const LoadedData& data);
ModelParams InitialModel(const ExperimentConfig& cfg, const LoadedData& data);

// Partitions, trains and returns the report. master_seed fixes every stream.
TrainingReport RunTrainExperiment(const ExperimentConfig& cfg, const LoadedData& data);

struct SurfaceResult {
  AttackSurface surface;
  CampaignResult campaign;
};

struct AttackRun {
  std::vector<std::size_t> victim_indices;  // into LoadedData::train
  std::vector<SurfaceResult> surfaces;
};

// Draws attack.victims distinct training examples and attacks `model` at the
// configured surface (or all three).
AttackRun RunAttackExperiment(const ExperimentConfig& cfg, const LoadedData& data,
                              const ModelParams& model);

// The model an attack targets: the configured checkpoint, else the round-0
// global model.
ModelParams AttackTargetModel(const ExperimentConfig& cfg, const LoadedData& data);

// Per-round CSV: round,val_accuracy,sigma,mean_sensitivity,eps_moments,
// eps_zcdp,eps_advanced,eps_base.
void WriteRoundReport(const TrainingReport& report, std::ostream& out);
// One-row CSV: algorithm,initial_accuracy,final_accuracy,rounds_used,
// stop_reached,delta,eps_base,eps_advanced,eps_zcdp,eps_moments. Epsilon
// cells are empty for non-private variants.
void WriteTrainSummary(const TrainingReport& report, std::ostream& out);
// Inverse of the two writers; ledger, model and timing are not restored.
TrainingReport ReadTrainReport(std::istream& rounds, std::istream& summary);

// Textual checkpoint:
//   leaklab-checkpoint v1
//   layers <count>
//   layer dense|conv2d relu|identity|softmax <in_dim> <out_dim>
//         [<in_channels> <height> <width> <kernel> <out_channels>]
//   weights <rows> <cols>
//   <rows * cols values, one row per line>
//   bias <count>
//   <values>
// Values use the shortest round-trip decimal form.
void WriteCheckpoint(const ModelParams& model, std::ostream& out);
ModelParams ReadCheckpoint(std::istream& in);

// Per-victim rows: surface,victim,train_index,label,resilient,
// recon_distance,iterations_used,diverged,final_loss.
void WriteAttackReport(const AttackRun& run, std::span<const Example> train,
                       std::ostream& out);
// surface,victims,attack_success_rate,mean_distance,mean_iterations
void WriteAttackSummary(const AttackRun& run, std::ostream& out);
// surface,victim,iteration,loss with iteration 0 the seed's loss.
void WriteAttackTrace(const AttackRun& run, std::ostream& out);

// method,epsilon,delta,steps
void WriteAccountRows(const PrivacyLedger& ledger,
                      std::span<const AccountingMethod> methods, std::ostream& out);

struct CompareRow {
  std::string config;
  std::string name;
  std::string algorithm;
  std::uint64_t dataset_hash = 0;
  TrainingReport report;
  AttackRun attack;
};
void WriteCompare(std::span<const CompareRow> rows, std::ostream& out);

}  // namespace leaklab

#endif  // LEAKLAB_HARNESS_H_
