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
#include "leaklab/tensor.h"

#include <cmath>
#include <string>

#include "leaklab/errors.h"

namespace leaklab {

double ParamBlock::SquaredNorm() const {
  double s = 0.0;
  for (double w : weights.data) s += w * w;
  for (double b : bias) s += b * b;
  return s;
}

double ParamBlock::Norm() const { return std::sqrt(SquaredNorm()); }

std::size_t LayeredTensor::NumCoordinates() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size();
  return n;
}

double LayeredTensor::SquaredNorm() const {
  double s = 0.0;
  for (const auto& b : blocks) s += b.SquaredNorm();
  return s;
}

double LayeredTensor::Norm() const { return std::sqrt(SquaredNorm()); }

bool LayeredTensor::AllFinite() const {
  bool ok = true;
  ForEach([&ok](double v) { ok = ok && std::isfinite(v); });
  return ok;
}

void LayeredTensor::ForEach(const std::function<void(double&)>& fn) {
  for (auto& b : blocks) {
    for (double& w : b.weights.data) fn(w);
    for (double& v : b.bias) fn(v);
  }
}

void LayeredTensor::ForEach(const std::function<void(double)>& fn) const {
  for (const auto& b : blocks) {
    for (double w : b.weights.data) fn(w);
    for (double v : b.bias) fn(v);
  }
}

std::vector<double> LayeredTensor::Flatten() const {
  std::vector<double> flat;
  flat.reserve(NumCoordinates());
  ForEach([&flat](double v) { flat.push_back(v); });
  return flat;
}

void LayeredTensor::Assign(std::span<const double> flat) {
  if (flat.size() != NumCoordinates()) {
    throw ShapeError("flat vector has " + std::to_string(flat.size()) +
                     " coordinates, tensor has " +
                     std::to_string(NumCoordinates()));
  }
  std::size_t i = 0;
  ForEach([&](double& v) { v = flat[i++]; });
}

LayeredTensor ZerosLike(const LayeredTensor& t) {
  LayeredTensor z;
  z.blocks.reserve(t.blocks.size());
  for (const auto& b : t.blocks) {
    ParamBlock zb;
    zb.weights = Matrix(b.weights.rows, b.weights.cols);
    zb.bias.assign(b.bias.size(), 0.0);
    z.blocks.push_back(std::move(zb));
  }
  return z;
}

bool SameShape(const LayeredTensor& a, const LayeredTensor& b) {
  if (a.blocks.size() != b.blocks.size()) return false;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    const auto& x = a.blocks[i];
    const auto& y = b.blocks[i];
    if (x.weights.rows != y.weights.rows || x.weights.cols != y.weights.cols ||
        x.bias.size() != y.bias.size()) {
      return false;
    }
  }
  return true;
}

void RequireSameShape(const LayeredTensor& a, const LayeredTensor& b,
                      const char* context) {
  if (!SameShape(a, b)) {
    throw ShapeError(std::string(context) + ": tensors are not shape-congruent");
  }
}

void Axpy(double alpha, const LayeredTensor& x, LayeredTensor& y) {
  RequireSameShape(x, y, "Axpy");
  for (std::size_t i = 0; i < x.blocks.size(); ++i) {
    auto& yw = y.blocks[i].weights.data;
    const auto& xw = x.blocks[i].weights.data;
    for (std::size_t k = 0; k < xw.size(); ++k) yw[k] += alpha * xw[k];
    auto& yb = y.blocks[i].bias;
    const auto& xb = x.blocks[i].bias;
    for (std::size_t k = 0; k < xb.size(); ++k) yb[k] += alpha * xb[k];
  }
}

void Scale(double alpha, LayeredTensor& t) {
  for (auto& block : t.blocks) {
    for (double& v : block.weights.data) v *= alpha;
    for (double& v : block.bias) v *= alpha;
  }
}

LayeredTensor Subtract(const LayeredTensor& a, const LayeredTensor& b) {
  LayeredTensor out = a;
  Axpy(-1.0, b, out);
  return out;
}

}  // namespace leaklab
