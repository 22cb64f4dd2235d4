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
#ifndef LEAKLAB_ATTACK_H_
#define LEAKLAB_ATTACK_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "leaklab/federation.h"
#include "leaklab/nn.h"
#include "leaklab/rng.h"
#include "leaklab/tensor.h"

namespace leaklab {

enum class AttackSurface {
  kType0ServerSharedUpdate,
  kType1ClientPostTraining,
  kType2PerExampleGradient,
};

const char* SurfaceName(AttackSurface surface);
AttackSurface ParseSurface(const std::string& name);

enum class SeedKind { kRandom, kPatterned };

struct AttackConfig {
  AttackSurface surface = AttackSurface::kType2PerExampleGradient;
  SeedKind seed_kind = SeedKind::kPatterned;
  int max_iterations = 300;
  double attack_lr = 0.05;
  double success_rmse = 0.1;
  double loss_tolerance = 1e-8;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct AttackReport {
  bool resilient = true;
  double recon_distance = 0.0;
  int iterations_used = 0;
  std::vector<double> per_iteration_loss;
  bool diverged = false;
  std::vector<double> reconstruction;
};

// random: uniform [0, 1] features. patterned: a fixed checkerboard of 4x4
// tiles with a diagonal ramp inside each, independent of rng.
Example InitSeed(SeedKind kind, std::size_t dim, int label, Rng& rng);

// sqrt(mean((x - y)^2)).
double Rmse(std::span<const double> x, std::span<const double> y);

// Gradient descent on MatchLoss(model, target, x) over x in [0, 1]^d, with a
// backtracking line search that only accepts loss-decreasing steps. The
// victim is used for the label and for scoring, never for the attack itself.
AttackReport Reconstruct(const ModelParams& model, const LayeredTensor& target,
                         const Example& victim, const AttackConfig& cfg);

// Converts a transmitted update into the gradient an L-step SGD of rate eta
// would have followed on average: -delta / (eta * L).
LayeredTensor GradientEquivalent(const LayeredTensor& delta, double eta,
                                 int local_iterations);

// What the adversary sees when `victim` trains alone with B = L = 1 at
// round 0 of `fed`, `victim_id` naming its client stream.
LayeredTensor CaptureTarget(AttackSurface surface, const ModelParams& model,
                            const Example& victim, int victim_id,
                            const FederationConfig& fed,
                            std::size_t total_examples);

struct CampaignResult {
  std::vector<AttackReport> victims;
  double attack_success_rate = 0.0;
  double mean_distance = 0.0;
  double mean_iterations = 0.0;
};

// One reconstruction per victim against the round-0 capture of each.
CampaignResult AttackCampaign(const ModelParams& model,
                              std::span<const Example> victims,
                              const FederationConfig& fed,
                              std::size_t total_examples,
                              const AttackConfig& cfg);

}  // namespace leaklab

#endif  // LEAKLAB_ATTACK_H_
