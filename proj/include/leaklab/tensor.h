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
#ifndef LEAKLAB_TENSOR_H_
#define LEAKLAB_TENSOR_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace leaklab {

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// The parameters (or a gradient, or an update) of one layer.
struct ParamBlock {
  Matrix weights;
  std::vector<double> bias;

  std::size_t size() const { return weights.data.size() + bias.size(); }
  double SquaredNorm() const;
  double Norm() const;

  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

// A model-shaped collection of per-layer blocks. Coordinates are enumerated
// block by block, weights row-major first and then the bias.
struct LayeredTensor {
  std::vector<ParamBlock> blocks;

  std::size_t size() const { return blocks.size(); }
  std::size_t NumCoordinates() const;
  double SquaredNorm() const;
  double Norm() const;
  bool AllFinite() const;

  // Visits every coordinate in the canonical order.
  void ForEach(const std::function<void(double&)>& fn);
  void ForEach(const std::function<void(double)>& fn) const;

  std::vector<double> Flatten() const;
  void Assign(std::span<const double> flat);

  friend bool operator==(const LayeredTensor&, const LayeredTensor&) = default;
};

LayeredTensor ZerosLike(const LayeredTensor& t);
bool SameShape(const LayeredTensor& a, const LayeredTensor& b);
// Throws ShapeError naming `context` when the shapes differ.
void RequireSameShape(const LayeredTensor& a, const LayeredTensor& b,
                      const char* context);

// y += alpha * x
void Axpy(double alpha, const LayeredTensor& x, LayeredTensor& y);
void Scale(double alpha, LayeredTensor& t);
LayeredTensor Subtract(const LayeredTensor& a, const LayeredTensor& b);

}  // namespace leaklab

#endif  // LEAKLAB_TENSOR_H_
