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
#ifndef LEAKLAB_NN_H_
#define LEAKLAB_NN_H_

#include <cstddef>
#include <span>
#include <vector>

#include "leaklab/rng.h"
#include "leaklab/tensor.h"

namespace leaklab {

enum class Activation { kRelu, kIdentity, kSoftmaxOutput };
enum class LayerKind { kDense, kConv2d };

// Valid (no padding), stride-1 convolution over a channel-major image.
struct ConvGeometry {
  std::size_t in_channels = 1;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t kernel = 3;
  std::size_t out_channels = 1;

  std::size_t out_height() const { return height - kernel + 1; }
  std::size_t out_width() const { return width - kernel + 1; }
  friend bool operator==(const ConvGeometry&, const ConvGeometry&) = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  Activation activation = Activation::kRelu;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  ConvGeometry conv;  // used when kind == kConv2d

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// A small feedforward network. A dense layer stores weights as
// [out_dim x in_dim]; a conv layer stores [out_channels x in_channels*k*k]
// with one bias per output channel. The last layer produces logits.
struct ModelParams {
  std::vector<LayerSpec> layers;
  LayeredTensor params;

  std::size_t num_layers() const { return layers.size(); }
  std::size_t input_dim() const { return layers.front().in_dim; }
  std::size_t output_dim() const { return layers.back().out_dim; }
  // Throws ShapeError on incompatible dimensions, NumericError on
  // non-finite entries.
  void Validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct Example {
  std::vector<double> features;
  int label = 0;

  friend bool operator==(const Example&, const Example&) = default;
};

struct PerExampleGradient {
  LayeredTensor per_layer;
  std::size_t example_index = 0;
};

struct Architecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden = {64};
  std::size_t num_classes = 2;
  // Optional leading ReLU conv layer; disabled when conv_filters == 0.
  std::size_t conv_filters = 0;
  std::size_t conv_kernel = 5;
  std::size_t image_channels = 1;
  std::size_t image_height = 0;
  std::size_t image_width = 0;
};

// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
ModelParams InitModel(const Architecture& arch, Rng& rng);

std::vector<double> Forward(const ModelParams& model,
                            std::span<const double> features);
int Predict(const ModelParams& model, std::span<const double> features);
double Accuracy(const ModelParams& model, std::span<const Example> examples);

// Softmax cross-entropy of one example and the mean over a batch.
double ExampleLoss(const ModelParams& model, const Example& example);
double MeanLoss(const ModelParams& model, std::span<const Example> batch);

// Gradient of one example's loss with respect to every parameter.
LayeredTensor ExampleGradient(const ModelParams& model, const Example& example);

std::vector<PerExampleGradient> PerExampleGradients(
    const ModelParams& model, std::span<const Example> batch);

// Gradient of MeanLoss, accumulated in a single batched backward pass.
LayeredTensor BatchGradient(const ModelParams& model,
                            std::span<const Example> batch);

// Arithmetic mean of per-example gradients, summed in batch order.
LayeredTensor MeanGradient(std::span<const PerExampleGradient> grads);

// Returns model - eta * grad; the input is left untouched.
ModelParams SgdStep(const ModelParams& model, const LayeredTensor& grad,
                    double eta);

// ||grad_W loss(seed) - target||^2, the gradient-matching distance.
double MatchLoss(const ModelParams& model, const LayeredTensor& target,
                 const Example& seed);

enum class InputGradientMethod { kAnalytic, kFiniteDifference };

// d/d(seed.features) of MatchLoss. The analytic path differentiates the
// weight gradient a second time: it propagates the weight-space direction
// (grad - target) forward as a tangent and back-propagates that tangent to
// the input. The finite-difference path uses central differences with step
// `fd_step` and exists to cross-check the analytic one.
std::vector<double> InputGradientOfMatchLoss(
    const ModelParams& model, const LayeredTensor& target, const Example& seed,
    InputGradientMethod method = InputGradientMethod::kAnalytic,
    double fd_step = 1e-4);

}  // namespace leaklab

#endif  // LEAKLAB_NN_H_
