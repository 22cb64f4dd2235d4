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
#include "leaklab/dataset.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/random/normal_distribution.hpp>

namespace leaklab {
namespace {

std::uint32_t ReadBigEndian32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw DatasetError(path + ": truncated IDX header");
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::ifstream OpenBinary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open '" + path + "'");
  return in;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(field);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? "" : f.substr(b, e - b + 1);
  }
  return out;
}

void Mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

Dataset ReadIdx(const std::string& image_path, const std::string& label_path,
                std::size_t limit) {
  std::ifstream images = OpenBinary(image_path);
  std::ifstream labels = OpenBinary(label_path);
  if (ReadBigEndian32(images, image_path) != 0x00000803) {
    throw DatasetError(image_path + ": bad IDX image magic");
  }
  if (ReadBigEndian32(labels, label_path) != 0x00000801) {
    throw DatasetError(label_path + ": bad IDX label magic");
  }
  const std::size_t n_images = ReadBigEndian32(images, image_path);
  const std::size_t rows = ReadBigEndian32(images, image_path);
  const std::size_t cols = ReadBigEndian32(images, image_path);
  const std::size_t n_labels = ReadBigEndian32(labels, label_path);
  if (n_images != n_labels) {
    throw DatasetError("IDX image/label counts differ: " + std::to_string(n_images) +
                       " vs " + std::to_string(n_labels));
  }
  const std::size_t n = limit == 0 ? n_images : std::min(limit, n_images);
  Dataset ds;
  ds.num_features = rows * cols;
  ds.height = rows;
  ds.width = cols;
  std::vector<unsigned char> pixels(ds.num_features);
  int max_label = -1;
  for (std::size_t i = 0; i < n; ++i) {
    char label = 0;
    if (!images.read(reinterpret_cast<char*>(pixels.data()),
                     static_cast<std::streamsize>(pixels.size())) ||
        !labels.get(label)) {
      throw DatasetError("IDX files truncated at record " + std::to_string(i));
    }
    Example e;
    e.features.assign(pixels.begin(), pixels.end());
    e.label = static_cast<unsigned char>(label);
    max_label = std::max(max_label, e.label);
    ds.examples.push_back(std::move(e));
  }
  ds.num_classes = max_label + 1;
  return ds;
}

Dataset ReadCsv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DatasetError(path + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = SplitCsvLine(line);
  const auto it = std::find(header.begin(), header.end(), label_column);
  if (it == header.end()) {
    throw DatasetError(path + ": no column named '" + label_column + "'");
  }
  const std::size_t label_idx = static_cast<std::size_t>(it - header.begin());

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = SplitCsvLine(line);
    if (fields.size() != header.size()) {
      throw DatasetError(path + ":" + std::to_string(line_no) + ": expected " +
                         std::to_string(header.size()) + " fields");
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == label_idx) continue;
      double v = 0.0;
      const auto* first = fields[c].data();
      const auto* last = first + fields[c].size();
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last || fields[c].empty()) {
        throw DatasetError(path + ":" + std::to_string(line_no) + ": column '" +
                           header[c] + "' is not numeric");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
    raw_labels.push_back(fields[label_idx]);
  }
  std::map<std::string, int> classes;
  for (const auto& l : raw_labels) classes.emplace(l, 0);
  int next = 0;
  for (auto& [name, id] : classes) id = next++;

  Dataset ds;
  ds.num_features = header.size() - 1;
  ds.num_classes = static_cast<int>(classes.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.examples.push_back({std::move(rows[i]), classes.at(raw_labels[i])});
  }
  if (ds.examples.empty()) throw DatasetError(path + ": no data rows");
  return ds;
}

Dataset SyntheticBlobs(int classes, std::size_t dims, std::size_t n,
                       double separation, Rng& rng) {
  if (classes < 2 || dims < 1 || n < static_cast<std::size_t>(classes)) {
    throw std::invalid_argument("synthetic blobs need >= 2 classes, >= 1 dim, n >= classes");
  }
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> centers(static_cast<std::size_t>(classes),
                                           std::vector<double>(dims));
  for (auto& c : centers) {
    for (double& v : c) v = separation * normal(rng);
  }
  Dataset ds;
  ds.num_features = dims;
  ds.num_classes = classes;
  for (std::size_t i = 0; i < n; ++i) {
    Example e;
    e.label = static_cast<int>(i % static_cast<std::size_t>(classes));
    e.features.resize(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      e.features[d] = centers[static_cast<std::size_t>(e.label)][d] + normal(rng);
    }
    ds.examples.push_back(std::move(e));
  }
  return ds;
}

MinMaxScaler MinMaxScaler::Fit(std::span<const Example> examples) {
  if (examples.empty()) throw std::invalid_argument("MinMaxScaler: no examples");
  MinMaxScaler s;
  s.lo_ = examples.front().features;
  s.hi_ = examples.front().features;
  for (const auto& e : examples) {
    if (e.features.size() != s.lo_.size()) {
      throw std::invalid_argument("MinMaxScaler: ragged feature vectors");
    }
    for (std::size_t d = 0; d < e.features.size(); ++d) {
      s.lo_[d] = std::min(s.lo_[d], e.features[d]);
      s.hi_[d] = std::max(s.hi_[d], e.features[d]);
    }
  }
  return s;
}

void MinMaxScaler::Apply(std::vector<Example>& examples) const {
  for (auto& e : examples) {
    if (e.features.size() != lo_.size()) {
      throw std::invalid_argument("MinMaxScaler: feature count mismatch");
    }
    for (std::size_t d = 0; d < e.features.size(); ++d) {
      const double range = hi_[d] - lo_[d];
      e.features[d] =
          range > 0.0 ? std::clamp((e.features[d] - lo_[d]) / range, 0.0, 1.0) : 0.0;
    }
  }
}

void SplitTrainValidation(std::vector<Example> all, double fraction, Rng& rng,
                          std::vector<Example>& train,
                          std::vector<Example>& validation) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in [0, 1)");
  }
  std::shuffle(all.begin(), all.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::floor(fraction * all.size()));
  train.assign(all.begin(), all.end() - static_cast<std::ptrdiff_t>(n_val));
  validation.assign(all.end() - static_cast<std::ptrdiff_t>(n_val), all.end());
}

std::uint64_t DatasetHash(std::span<const Example> train,
                          std::span<const Example> validation) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto part : {train, validation}) {
    Mix(h, part.size());
    for (const auto& e : part) {
      Mix(h, static_cast<std::uint64_t>(e.label));
      for (double v : e.features) Mix(h, std::bit_cast<std::uint64_t>(v));
    }
  }
  return h;
}

}  // namespace leaklab
