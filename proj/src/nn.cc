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
#include "leaklab/nn.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "leaklab/errors.h"

namespace leaklab {
namespace {

// ---- Layer primitives. Dense and conv layers are both linear in their
// weights and in their input, which is all the double-backprop needs.

// z = W * a (no bias)
std::vector<double> ApplyWeights(const LayerSpec& spec, const Matrix& w,
                                 std::span<const double> a) {
  std::vector<double> z(spec.out_dim, 0.0);
  if (spec.kind == LayerKind::kDense) {
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double* row = w.data.data() + r * w.cols;
      double s = 0.0;
      for (std::size_t c = 0; c < w.cols; ++c) s += row[c] * a[c];
      z[r] = s;
    }
    return z;
  }
  const ConvGeometry& g = spec.conv;
  const std::size_t oh = g.out_height(), ow = g.out_width(), k = g.kernel;
  for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < g.in_channels; ++c) {
          for (std::size_t ki = 0; ki < k; ++ki) {
            const double* arow = a.data() + c * g.height * g.width +
                                 (i + ki) * g.width + j;
            const double* wrow = w.data.data() + oc * w.cols + c * k * k + ki * k;
            for (std::size_t kj = 0; kj < k; ++kj) s += wrow[kj] * arow[kj];
          }
        }
        z[oc * oh * ow + i * ow + j] = s;
      }
    }
  }
  return z;
}

void AddBias(const LayerSpec& spec, const std::vector<double>& b,
             std::vector<double>& z) {
  if (spec.kind == LayerKind::kDense) {
    for (std::size_t r = 0; r < z.size(); ++r) z[r] += b[r];
    return;
  }
  const std::size_t plane = spec.conv.out_height() * spec.conv.out_width();
  for (std::size_t oc = 0; oc < spec.conv.out_channels; ++oc) {
    for (std::size_t p = 0; p < plane; ++p) z[oc * plane + p] += b[oc];
  }
}

// a_bar += W^T * z_bar
void AccumulateTranspose(const LayerSpec& spec, const Matrix& w,
                         std::span<const double> zbar,
                         std::vector<double>& abar) {
  if (spec.kind == LayerKind::kDense) {
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double zr = zbar[r];
      if (zr == 0.0) continue;
      const double* row = w.data.data() + r * w.cols;
      for (std::size_t c = 0; c < w.cols; ++c) abar[c] += row[c] * zr;
    }
    return;
  }
  const ConvGeometry& g = spec.conv;
  const std::size_t oh = g.out_height(), ow = g.out_width(), k = g.kernel;
  for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const double zv = zbar[oc * oh * ow + i * ow + j];
        if (zv == 0.0) continue;
        for (std::size_t c = 0; c < g.in_channels; ++c) {
          for (std::size_t ki = 0; ki < k; ++ki) {
            double* arow = abar.data() + c * g.height * g.width +
                           (i + ki) * g.width + j;
            const double* wrow = w.data.data() + oc * w.cols + c * k * k + ki * k;
            for (std::size_t kj = 0; kj < k; ++kj) arow[kj] += wrow[kj] * zv;
          }
        }
      }
    }
  }
}

// dW += scale * z_bar (x) a ; db += scale * z_bar
void AccumulateWeightGrad(const LayerSpec& spec, std::span<const double> zbar,
                          std::span<const double> a, double scale,
                          ParamBlock& grad) {
  Matrix& dw = grad.weights;
  if (spec.kind == LayerKind::kDense) {
    for (std::size_t r = 0; r < dw.rows; ++r) {
      const double zr = scale * zbar[r];
      grad.bias[r] += zr;
      if (zr == 0.0) continue;
      double* row = dw.data.data() + r * dw.cols;
      for (std::size_t c = 0; c < dw.cols; ++c) row[c] += zr * a[c];
    }
    return;
  }
  const ConvGeometry& g = spec.conv;
  const std::size_t oh = g.out_height(), ow = g.out_width(), k = g.kernel;
  for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const double zv = scale * zbar[oc * oh * ow + i * ow + j];
        grad.bias[oc] += zv;
        if (zv == 0.0) continue;
        for (std::size_t c = 0; c < g.in_channels; ++c) {
          for (std::size_t ki = 0; ki < k; ++ki) {
            const double* arow = a.data() + c * g.height * g.width +
                                 (i + ki) * g.width + j;
            double* wrow = dw.data.data() + oc * dw.cols + c * k * k + ki * k;
            for (std::size_t kj = 0; kj < k; ++kj) wrow[kj] += zv * arow[kj];
          }
        }
      }
    }
  }
}

double ActDeriv(Activation act, double z) {
  if (act == Activation::kRelu) return z > 0.0 ? 1.0 : 0.0;
  return 1.0;
}

double Activate(Activation act, double z) {
  if (act == Activation::kRelu) return z > 0.0 ? z : 0.0;
  return z;
}

struct Trace {
  // inputs[m] feeds layer m; inputs[0] is the example. pre[m] is layer m's
  // pre-activation; pre.back() are the logits.
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> pre;
};

Trace RunForward(const ModelParams& model, std::span<const double> x) {
  if (x.size() != model.input_dim()) {
    throw ShapeError("feature length " + std::to_string(x.size()) +
                     " does not match model input dim " +
                     std::to_string(model.input_dim()));
  }
  const std::size_t n = model.num_layers();
  Trace t;
  t.inputs.reserve(n);
  t.pre.reserve(n);
  t.inputs.emplace_back(x.begin(), x.end());
  for (std::size_t m = 0; m < n; ++m) {
    const LayerSpec& spec = model.layers[m];
    const ParamBlock& p = model.params.blocks[m];
    std::vector<double> z = ApplyWeights(spec, p.weights, t.inputs[m]);
    AddBias(spec, p.bias, z);
    if (m + 1 < n) {
      std::vector<double> a(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) a[i] = Activate(spec.activation, z[i]);
      t.inputs.push_back(std::move(a));
    }
    t.pre.push_back(std::move(z));
  }
  return t;
}

std::vector<double> Softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return p;
}

double CrossEntropy(std::span<const double> logits, int label) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double z : logits) s += std::exp(z - mx);
  return std::log(s) + mx - logits[static_cast<std::size_t>(label)];
}

void CheckLabel(const ModelParams& model, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= model.output_dim()) {
    throw std::invalid_argument("label " + std::to_string(label) +
                                " outside [0, " +
                                std::to_string(model.output_dim()) + ")");
  }
}

// dL/dlogits for softmax cross-entropy.
std::vector<double> OutputDelta(const std::vector<double>& logits, int label) {
  std::vector<double> d = Softmax(logits);
  d[static_cast<std::size_t>(label)] -= 1.0;
  return d;
}

// Back-propagates `delta` (dL/dlogits) and accumulates scale * grad into
// `grad`.
void Backward(const ModelParams& model, const Trace& t,
              std::vector<double> delta, double scale, LayeredTensor& grad) {
  for (std::size_t m = model.num_layers(); m-- > 0;) {
    const LayerSpec& spec = model.layers[m];
    AccumulateWeightGrad(spec, delta, t.inputs[m], scale, grad.blocks[m]);
    if (m == 0) break;
    std::vector<double> prev(spec.in_dim, 0.0);
    AccumulateTranspose(spec, model.params.blocks[m].weights, delta, prev);
    const LayerSpec& below = model.layers[m - 1];
    for (std::size_t i = 0; i < prev.size(); ++i) {
      prev[i] *= ActDeriv(below.activation, t.pre[m - 1][i]);
    }
    delta = std::move(prev);
  }
}

void RequireFinite(std::span<const double> v, std::size_t layer,
                   const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(what, layer);
  }
}

}  // namespace

void ModelParams::Validate() const {
  if (layers.empty()) throw ShapeError("model has no layers");
  if (params.blocks.size() != layers.size()) {
    throw ShapeError("parameter block count does not match layer count");
  }
  for (std::size_t m = 0; m < layers.size(); ++m) {
    const LayerSpec& s = layers[m];
    const ParamBlock& p = params.blocks[m];
    const std::string where = "layer " + std::to_string(m);
    if (m > 0 && layers[m - 1].out_dim != s.in_dim) {
      throw ShapeError(where + ": in_dim does not match previous out_dim");
    }
    if (s.kind == LayerKind::kDense) {
      if (p.weights.rows != s.out_dim || p.weights.cols != s.in_dim ||
          p.bias.size() != s.out_dim) {
        throw ShapeError(where + ": dense parameter shape mismatch");
      }
    } else {
      const ConvGeometry& g = s.conv;
      if (g.kernel == 0 || g.kernel > g.height || g.kernel > g.width ||
          s.in_dim != g.in_channels * g.height * g.width ||
          s.out_dim != g.out_channels * g.out_height() * g.out_width() ||
          p.weights.rows != g.out_channels ||
          p.weights.cols != g.in_channels * g.kernel * g.kernel ||
          p.bias.size() != g.out_channels) {
        throw ShapeError(where + ": conv geometry mismatch");
      }
    }
    for (double v : p.weights.data) {
      if (!std::isfinite(v)) throw NumericError("non-finite weight", m);
    }
    for (double v : p.bias) {
      if (!std::isfinite(v)) throw NumericError("non-finite bias", m);
    }
  }
}

ModelParams InitModel(const Architecture& arch, Rng& rng) {
  if (arch.input_dim == 0 || arch.num_classes == 0) {
    throw std::invalid_argument("architecture needs input_dim and num_classes");
  }
  ModelParams model;
  std::size_t in = arch.input_dim;
  auto add_block = [&](const LayerSpec& spec, std::size_t rows,
                       std::size_t cols, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    ParamBlock b;
    b.weights = Matrix(rows, cols);
    for (double& w : b.weights.data) w = u(rng);
    b.bias.resize(rows);
    for (double& v : b.bias) v = u(rng);
    model.layers.push_back(spec);
    model.params.blocks.push_back(std::move(b));
  };
  if (arch.conv_filters > 0) {
    LayerSpec s;
    s.kind = LayerKind::kConv2d;
    s.activation = Activation::kRelu;
    s.conv = {arch.image_channels, arch.image_height, arch.image_width,
              arch.conv_kernel, arch.conv_filters};
    if (s.conv.in_channels * s.conv.height * s.conv.width != in) {
      throw ShapeError("image geometry does not match input_dim");
    }
    if (s.conv.kernel == 0 || s.conv.kernel > s.conv.height ||
        s.conv.kernel > s.conv.width) {
      throw ShapeError("conv kernel does not fit the image");
    }
    s.in_dim = in;
    s.out_dim = s.conv.out_channels * s.conv.out_height() * s.conv.out_width();
    const std::size_t k2 = s.conv.in_channels * s.conv.kernel * s.conv.kernel;
    add_block(s, s.conv.out_channels, k2, k2);
    in = s.out_dim;
  }
  for (std::size_t h : arch.hidden) {
    LayerSpec s{LayerKind::kDense, Activation::kRelu, in, h, {}};
    add_block(s, h, in, in);
    in = h;
  }
  LayerSpec out{LayerKind::kDense, Activation::kSoftmaxOutput, in,
                arch.num_classes, {}};
  add_block(out, arch.num_classes, in, in);
  model.Validate();
  return model;
}

std::vector<double> Forward(const ModelParams& model,
                            std::span<const double> features) {
  Trace t = RunForward(model, features);
  return std::move(t.pre.back());
}

int Predict(const ModelParams& model, std::span<const double> features) {
  const std::vector<double> z = Forward(model, features);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double Accuracy(const ModelParams& model, std::span<const Example> examples) {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& e : examples) correct += Predict(model, e.features) == e.label;
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

double ExampleLoss(const ModelParams& model, const Example& example) {
  CheckLabel(model, example.label);
  return CrossEntropy(Forward(model, example.features), example.label);
}

double MeanLoss(const ModelParams& model, std::span<const Example> batch) {
  if (batch.empty()) throw std::invalid_argument("MeanLoss: empty batch");
  double s = 0.0;
  for (const auto& e : batch) s += ExampleLoss(model, e);
  return s / static_cast<double>(batch.size());
}

LayeredTensor ExampleGradient(const ModelParams& model, const Example& example) {
  CheckLabel(model, example.label);
  const Trace t = RunForward(model, example.features);
  LayeredTensor grad = ZerosLike(model.params);
  Backward(model, t, OutputDelta(t.pre.back(), example.label), 1.0, grad);
  return grad;
}

std::vector<PerExampleGradient> PerExampleGradients(
    const ModelParams& model, std::span<const Example> batch) {
  if (batch.empty()) {
    throw std::invalid_argument("PerExampleGradients: empty batch");
  }
  std::vector<PerExampleGradient> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.push_back({ExampleGradient(model, batch[i]), i});
  }
  return out;
}

LayeredTensor BatchGradient(const ModelParams& model,
                            std::span<const Example> batch) {
  if (batch.empty()) throw std::invalid_argument("BatchGradient: empty batch");
  LayeredTensor grad = ZerosLike(model.params);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& e : batch) {
    CheckLabel(model, e.label);
    const Trace t = RunForward(model, e.features);
    Backward(model, t, OutputDelta(t.pre.back(), e.label), scale, grad);
  }
  return grad;
}

LayeredTensor MeanGradient(std::span<const PerExampleGradient> grads) {
  if (grads.empty()) throw std::invalid_argument("MeanGradient: empty list");
  LayeredTensor sum = grads.front().per_layer;
  for (std::size_t i = 1; i < grads.size(); ++i) {
    Axpy(1.0, grads[i].per_layer, sum);
  }
  if (grads.size() > 1) Scale(1.0 / static_cast<double>(grads.size()), sum);
  return sum;
}

ModelParams SgdStep(const ModelParams& model, const LayeredTensor& grad,
                    double eta) {
  RequireSameShape(model.params, grad, "SgdStep");
  ModelParams next = model;
  if (eta != 0.0) Axpy(-eta, grad, next.params);
  return next;
}

double MatchLoss(const ModelParams& model, const LayeredTensor& target,
                 const Example& seed) {
  RequireSameShape(model.params, target, "MatchLoss");
  return Subtract(ExampleGradient(model, seed), target).SquaredNorm();
}

std::vector<double> InputGradientOfMatchLoss(const ModelParams& model,
                                             const LayeredTensor& target,
                                             const Example& seed,
                                             InputGradientMethod method,
                                             double fd_step) {
  RequireSameShape(model.params, target, "InputGradientOfMatchLoss");
  CheckLabel(model, seed.label);

  if (method == InputGradientMethod::kFiniteDifference) {
    std::vector<double> g(seed.features.size());
    Example probe = seed;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x0 = probe.features[i];
      probe.features[i] = x0 + fd_step;
      const double up = MatchLoss(model, target, probe);
      probe.features[i] = x0 - fd_step;
      const double down = MatchLoss(model, target, probe);
      probe.features[i] = x0;
      g[i] = (up - down) / (2.0 * fd_step);
    }
    return g;
  }

  const std::size_t n = model.num_layers();
  const Trace t = RunForward(model, seed.features);
  for (std::size_t m = 0; m < n; ++m) RequireFinite(t.pre[m], m, "non-finite activation");

  LayeredTensor direction = ZerosLike(model.params);
  Backward(model, t, OutputDelta(t.pre.back(), seed.label), 1.0, direction);
  Axpy(-1.0, target, direction);  // v = grad(seed) - target
  if (!direction.AllFinite()) throw NumericError("non-finite gradient residual", n - 1);

  // Tangent pass: zdot[m] = V_m a_m + c_m + W_m adot_m, adot_0 = 0.
  std::vector<std::vector<double>> zdot(n);
  std::vector<double> adot(model.input_dim(), 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    const LayerSpec& spec = model.layers[m];
    const ParamBlock& v = direction.blocks[m];
    std::vector<double> z = ApplyWeights(spec, v.weights, t.inputs[m]);
    AddBias(spec, v.bias, z);
    if (m > 0) {
      const std::vector<double> wz =
          ApplyWeights(spec, model.params.blocks[m].weights, adot);
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += wz[i];
    }
    RequireFinite(z, m, "non-finite tangent");
    if (m + 1 < n) {
      adot.assign(z.size(), 0.0);
      for (std::size_t i = 0; i < z.size(); ++i) {
        adot[i] = ActDeriv(spec.activation, t.pre[m][i]) * z[i];
      }
    }
    zdot[m] = std::move(z);
  }

  // phi = (p - e_y) . zdot_out; reverse-mode through both passes.
  const std::vector<double> p = Softmax(t.pre.back());
  std::vector<double> zdot_bar = p;
  zdot_bar[static_cast<std::size_t>(seed.label)] -= 1.0;
  double pz = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) pz += p[i] * zdot[n - 1][i];
  std::vector<double> z_bar(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    z_bar[i] = p[i] * zdot[n - 1][i] - p[i] * pz;
  }

  std::vector<double> a_bar;
  for (std::size_t m = n; m-- > 0;) {
    const LayerSpec& spec = model.layers[m];
    const Matrix& w = model.params.blocks[m].weights;
    a_bar.assign(spec.in_dim, 0.0);
    AccumulateTranspose(spec, w, z_bar, a_bar);
    AccumulateTranspose(spec, direction.blocks[m].weights, zdot_bar, a_bar);
    RequireFinite(a_bar, m, "non-finite input adjoint");
    if (m == 0) break;
    std::vector<double> adot_bar(spec.in_dim, 0.0);
    AccumulateTranspose(spec, w, zdot_bar, adot_bar);
    const LayerSpec& below = model.layers[m - 1];
    z_bar.assign(spec.in_dim, 0.0);
    zdot_bar.assign(spec.in_dim, 0.0);
    for (std::size_t i = 0; i < spec.in_dim; ++i) {
      const double d = ActDeriv(below.activation, t.pre[m - 1][i]);
      z_bar[i] = d * a_bar[i];
      zdot_bar[i] = d * adot_bar[i];
    }
  }
  for (double& g : a_bar) g *= 2.0;
  return a_bar;
}

}  // namespace leaklab
