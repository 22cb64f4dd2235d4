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
#ifndef LEAKLAB_DATASET_H_
#define LEAKLAB_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "leaklab/nn.h"
#include "leaklab/rng.h"

namespace leaklab {

// Raised for unreadable or malformed dataset files.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  std::vector<Example> examples;
  std::size_t num_features = 0;
  int num_classes = 0;
  // Image geometry when known (IDX sources), else 0.
  std::size_t height = 0;
  std::size_t width = 0;
};

// Standard IDX layout: big-endian magic 0x00000803 (images, n x rows x cols
// unsigned bytes) or 0x00000801 (labels). Reads the first `limit` records
// (all when limit == 0). Pixel values are left in [0, 255].
Dataset ReadIdx(const std::string& image_path, const std::string& label_path,
                std::size_t limit = 0);

// Header row required; `label_column` names the class column. Distinct label
// strings are mapped to 0..K-1 in sorted order; every other column must be
// numeric.
Dataset ReadCsv(const std::string& path, const std::string& label_column);

// Gaussian blobs: class centers drawn N(0, separation^2) per feature, points
// N(center, 1).
Dataset SyntheticBlobs(int classes, std::size_t dims, std::size_t n,
                       double separation, Rng& rng);

// Per-feature min-max scaling fitted on one set and applied to others;
// constant features map to 0 and applied values are clamped to [0, 1].
class MinMaxScaler {
 public:
  static MinMaxScaler Fit(std::span<const Example> examples);
  void Apply(std::vector<Example>& examples) const;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

// Splits off the last `fraction` of a seeded shuffle.
void SplitTrainValidation(std::vector<Example> all, double fraction, Rng& rng,
                          std::vector<Example>& train,
                          std::vector<Example>& validation);

// FNV-1a over labels and the bit patterns of all features.
std::uint64_t DatasetHash(std::span<const Example> train,
                          std::span<const Example> validation);

}  // namespace leaklab

#endif  // LEAKLAB_DATASET_H_
