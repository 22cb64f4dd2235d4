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
#include "leaklab/dp_noise.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/random/normal_distribution.hpp>

#include "leaklab/errors.h"

namespace leaklab {

void NoiseSchedule::Validate() const {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
  if (total_rounds < 1) throw std::invalid_argument("total_rounds must be >= 1");
  if (!(sigma_floor >= 0.0) || sigma_floor > sigma0) {
    throw std::invalid_argument("sigma_floor must lie in [0, sigma0]");
  }
  if (policy != DecayPolicy::kFixed && !(gamma > 0.0)) {
    throw std::invalid_argument("decay policies need gamma > 0");
  }
  if (policy == DecayPolicy::kStaircase && step_size < 1) {
    throw std::invalid_argument("staircase step_size must be >= 1");
  }
}

NoiseSchedule NoiseSchedule::Fixed(double sigma0, int total_rounds) {
  NoiseSchedule s;
  s.policy = DecayPolicy::kFixed;
  s.sigma0 = sigma0;
  s.total_rounds = total_rounds;
  s.sigma_floor = std::min(s.sigma_floor, sigma0);
  return s;
}

namespace {

void CheckEndpoints(double sigma0, double sigma_end, int total_rounds) {
  if (!(sigma0 > 0.0) || !(sigma_end > 0.0) || sigma_end > sigma0) {
    throw std::invalid_argument("need 0 < sigma_end <= sigma0");
  }
  if (total_rounds < 2) {
    throw std::invalid_argument("decay schedules need total_rounds >= 2");
  }
}

}  // namespace

NoiseSchedule NoiseSchedule::LinearTo(double sigma0, double sigma_end,
                                      int total_rounds, double sigma_floor) {
  CheckEndpoints(sigma0, sigma_end, total_rounds);
  NoiseSchedule s;
  s.policy = DecayPolicy::kLinear;
  s.sigma0 = sigma0;
  s.total_rounds = total_rounds;
  s.sigma_floor = sigma_floor;
  s.gamma = (1.0 - sigma_end / sigma0) / (total_rounds - 1);
  return s;
}

NoiseSchedule NoiseSchedule::ExponentialTo(double sigma0, double sigma_end,
                                           int total_rounds,
                                           double sigma_floor) {
  CheckEndpoints(sigma0, sigma_end, total_rounds);
  NoiseSchedule s;
  s.policy = DecayPolicy::kExponential;
  s.sigma0 = sigma0;
  s.total_rounds = total_rounds;
  s.sigma_floor = sigma_floor;
  s.gamma = std::log(sigma0 / sigma_end) / (total_rounds - 1);
  return s;
}

NoiseSchedule NoiseSchedule::StaircaseTo(double sigma0, double sigma_end,
                                         int total_rounds, int step_size,
                                         double sigma_floor) {
  CheckEndpoints(sigma0, sigma_end, total_rounds);
  if (step_size < 1 || step_size > total_rounds - 1) {
    throw std::invalid_argument("staircase step_size must be in [1, T-1]");
  }
  NoiseSchedule s;
  s.policy = DecayPolicy::kStaircase;
  s.sigma0 = sigma0;
  s.total_rounds = total_rounds;
  s.step_size = step_size;
  s.sigma_floor = sigma_floor;
  s.gamma = (1.0 - sigma_end / sigma0) / ((total_rounds - 1) / step_size);
  return s;
}

NoiseSchedule NoiseSchedule::Cyclic(double sigma0, double cycles,
                                    int total_rounds, double sigma_floor) {
  NoiseSchedule s;
  s.policy = DecayPolicy::kCyclic;
  s.sigma0 = sigma0;
  s.gamma = cycles;
  s.total_rounds = total_rounds;
  s.sigma_floor = sigma_floor;
  return s;
}

void PrivacyParams::Validate() const {
  if (!(clip_bound > 0.0)) throw std::invalid_argument("clip bound C must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  schedule.Validate();
}

double ClipLayersInPlace(LayeredTensor& grad, double clip) {
  if (!(clip > 0.0)) throw std::invalid_argument("clip bound must be positive");
  double max_norm = 0.0;
  for (ParamBlock& block : grad.blocks) {
    const double norm = block.Norm();
    if (norm <= clip) {
      max_norm = std::max(max_norm, norm);
      continue;
    }
    const double factor = clip / norm;
    for (double& w : block.weights.data) w *= factor;
    for (double& b : block.bias) b *= factor;
    max_norm = std::max(max_norm, block.Norm());
  }
  return max_norm;
}

PerExampleGradient ClipPerExample(const PerExampleGradient& grad, double clip) {
  PerExampleGradient out = grad;
  ClipLayersInPlace(out.per_layer, clip);
  return out;
}

double L2MaxSensitivity(std::span<const PerExampleGradient> clipped_batch,
                        double clip) {
  if (clipped_batch.empty()) {
    throw std::invalid_argument("L2MaxSensitivity: empty batch");
  }
  if (!(clip > 0.0)) throw std::invalid_argument("clip bound must be positive");
  double mx = 0.0;
  for (const auto& g : clipped_batch) {
    for (const auto& block : g.per_layer.blocks) mx = std::max(mx, block.Norm());
  }
  if (mx == 0.0) {
    throw DegenerateSensitivityError("all clipped gradients in the batch are zero");
  }
  return std::min(mx, clip);
}

double BatchSensitivity(SensitivityMode mode,
                        std::span<const PerExampleGradient> clipped_batch,
                        double clip, bool* degenerate) {
  if (clipped_batch.empty()) throw std::invalid_argument("BatchSensitivity: empty batch");
  double mx = 0.0;
  for (const auto& g : clipped_batch) {
    for (const auto& block : g.per_layer.blocks) mx = std::max(mx, block.Norm());
  }
  return SensitivityFromMaxNorm(mode, mx, clip, degenerate);
}

double SensitivityFromMaxNorm(SensitivityMode mode, double max_norm, double clip,
                              bool* degenerate) {
  if (!(clip > 0.0)) throw std::invalid_argument("clip bound must be positive");
  if (degenerate) *degenerate = false;
  if (mode == SensitivityMode::kFixedClip) return clip;
  if (max_norm == 0.0) {
    if (degenerate) *degenerate = true;
    return DegenerateSensitivityFallback(clip);
  }
  return std::min(max_norm, clip);
}

std::vector<double> GaussianNoise(std::size_t n, double sigma,
                                  double sensitivity, Rng& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("noise scale must be positive");
  if (!(sensitivity > 0.0)) throw std::invalid_argument("sensitivity must be positive");
  boost::random::normal_distribution<double> normal(0.0, sigma * sensitivity);
  std::vector<double> out(n);
  for (double& v : out) v = normal(rng);
  return out;
}

LayeredTensor GaussianNoiseLike(const LayeredTensor& shape, double sigma,
                                double sensitivity, Rng& rng) {
  LayeredTensor out = ZerosLike(shape);
  out.Assign(GaussianNoise(out.NumCoordinates(), sigma, sensitivity, rng));
  return out;
}

double NoiseScaleAt(const NoiseSchedule& schedule, int t) {
  if (t < 0 || t >= schedule.total_rounds) {
    throw std::invalid_argument("round " + std::to_string(t) +
                                " outside schedule horizon [0, " +
                                std::to_string(schedule.total_rounds) + ")");
  }
  const double s0 = schedule.sigma0;
  const double g = schedule.gamma;
  double sigma = s0;
  switch (schedule.policy) {
    case DecayPolicy::kFixed:
      return s0;
    case DecayPolicy::kLinear:
      sigma = s0 * (1.0 - g * t);
      break;
    case DecayPolicy::kStaircase:
      sigma = s0 * (1.0 - g * static_cast<double>(t / schedule.step_size));
      break;
    case DecayPolicy::kExponential:
      sigma = s0 * std::exp(-g * t);
      break;
    case DecayPolicy::kCyclic: {
      const int period = std::max(
          1, static_cast<int>(std::ceil(schedule.total_rounds / g)));
      const double phase = static_cast<double>(t % period) / period;
      sigma = 0.5 * s0 * (std::cos(std::numbers::pi * phase) + 1.0);
      break;
    }
  }
  return std::max(sigma, schedule.sigma_floor);
}

double MinEpsilonForSigma(double sigma, double delta) {
  if (!(sigma > 0.0)) throw std::invalid_argument("noise scale must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  return std::sqrt(2.0 * std::log(1.25 / delta)) / sigma;
}

}  // namespace leaklab
