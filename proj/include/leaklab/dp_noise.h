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
#ifndef LEAKLAB_DP_NOISE_H_
#define LEAKLAB_DP_NOISE_H_

#include <cstddef>
#include <span>
#include <vector>

#include "leaklab/nn.h"
#include "leaklab/rng.h"
#include "leaklab/tensor.h"

namespace leaklab {

enum class DecayPolicy { kFixed, kLinear, kStaircase, kExponential, kCyclic };

// Noise scale as a function of the round index t in [0, total_rounds).
//   linear       sigma0 * (1 - gamma * t)
//   staircase    sigma0 * (1 - gamma * floor(t / step_size))
//   exponential  sigma0 * exp(-gamma * t)
//   cyclic       sigma0 / 2 * (cos(pi * (t mod P) / P) + 1),
//                P = ceil(total_rounds / gamma), gamma = number of cycles
// Every policy is clamped below by sigma_floor.
struct NoiseSchedule {
  DecayPolicy policy = DecayPolicy::kFixed;
  double sigma0 = 6.0;
  double gamma = 0.0;
  int step_size = 10;
  int total_rounds = 100;
  double sigma_floor = 0.5;

  void Validate() const;

  static NoiseSchedule Fixed(double sigma0, int total_rounds);
  // The gamma that lands exactly on sigma_end at t = total_rounds - 1.
  static NoiseSchedule LinearTo(double sigma0, double sigma_end,
                                int total_rounds, double sigma_floor = 0.5);
  static NoiseSchedule ExponentialTo(double sigma0, double sigma_end,
                                     int total_rounds,
                                     double sigma_floor = 0.5);
  static NoiseSchedule StaircaseTo(double sigma0, double sigma_end,
                                   int total_rounds, int step_size,
                                   double sigma_floor = 0.5);
  static NoiseSchedule Cyclic(double sigma0, double cycles, int total_rounds,
                              double sigma_floor = 0.5);
};

struct PrivacyParams {
  double clip_bound = 4.0;
  double delta = 1e-5;
  NoiseSchedule schedule;

  double sigma0() const { return schedule.sigma0; }
  void Validate() const;
};

enum class SensitivityMode { kFixedClip, kL2Max };

// Scales each layer block by min(1, C / ||block||). Zero blocks pass through.
PerExampleGradient ClipPerExample(const PerExampleGradient& grad, double clip);
// In-place form; returns the largest block norm after clipping. Blocks already
// within the bound are left bit-for-bit unchanged.
double ClipLayersInPlace(LayeredTensor& grad, double clip);

// S = min(C, max over examples and layers of the block l2 norm). Throws
// DegenerateSensitivityError when every block of every example is zero.
double L2MaxSensitivity(std::span<const PerExampleGradient> clipped_batch,
                        double clip);

// Stand-in sensitivity used when L2MaxSensitivity reports a degenerate batch.
inline double DegenerateSensitivityFallback(double clip) { return 1e-6 * clip; }

// Sensitivity for one iteration under `mode`; substitutes the degenerate
// fallback (and sets *degenerate) instead of throwing.
double BatchSensitivity(SensitivityMode mode,
                        std::span<const PerExampleGradient> clipped_batch,
                        double clip, bool* degenerate = nullptr);

// The same rule from a precomputed max block norm over the clipped batch.
double SensitivityFromMaxNorm(SensitivityMode mode, double max_norm, double clip,
                              bool* degenerate = nullptr);
// i.i.d. N(0, sigma^2 S^2) samples (Boost ziggurat normal, so draws do not
// depend on the standard library implementation).
std::vector<double> GaussianNoise(std::size_t n, double sigma,
                                  double sensitivity, Rng& rng);
LayeredTensor GaussianNoiseLike(const LayeredTensor& shape, double sigma,
                                double sensitivity, Rng& rng);

double NoiseScaleAt(const NoiseSchedule& schedule, int t);

// sqrt(2 ln(1.25/delta)) / sigma, the per-invocation epsilon the Gaussian
// mechanism certifies at noise multiplier sigma.
double MinEpsilonForSigma(double sigma, double delta);

}  // namespace leaklab

#endif  // LEAKLAB_DP_NOISE_H_
