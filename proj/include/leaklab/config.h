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
#ifndef LEAKLAB_CONFIG_H_
#define LEAKLAB_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "leaklab/attack.h"
#include "leaklab/federation.h"

namespace leaklab {

// A config problem, reported with the offending section.key (and line when
// the text itself does not parse).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DatasetSource { kSyntheticBlobs, kCsv, kIdxImages };

struct DatasetSpec {
  DatasetSource source = DatasetSource::kSyntheticBlobs;
  // synthetic_blobs
  int classes = 4;
  std::size_t dims = 16;
  std::size_t n = 12500;
  double separation = 3.0;
  // csv and synthetic_blobs hold out this fraction for validation
  double validation_fraction = 0.2;
  std::string csv_path;
  std::string label_column = "label";
  // idx_images
  std::string train_images;
  std::string train_labels;
  std::string val_images;
  std::string val_labels;
  std::size_t train_n = 6000;
  std::size_t val_n = 1000;
};

struct ModelSpec {
  std::vector<std::size_t> hidden = {64};
  std::size_t conv_filters = 0;
  std::size_t conv_kernel = 5;
};

struct AttackSection {
  AttackConfig attack;
  bool all_surfaces = false;  // surface = all
  int victims = 20;
  std::string checkpoint;  // empty: attack the round-0 global model
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  DatasetSpec dataset;
  ModelSpec model;
  FederationConfig federation;
  StopCondition stop;
  std::optional<AttackSection> attack;
};

// INI-style text: [section] headers, key = value lines, '#' or ';'
// comments. Unknown sections or keys are errors. Relative paths resolve
// against base_dir.
ExperimentConfig ParseConfig(std::istream& in, const std::string& base_dir = ".");
ExperimentConfig LoadConfig(const std::string& path);

// The full schema with every default filled in, as a commented config file.
std::string DefaultConfigText();

}  // namespace leaklab

#endif  // LEAKLAB_CONFIG_H_
