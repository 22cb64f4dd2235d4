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
#include "leaklab/attack.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace leaklab {
namespace {

constexpr int kMaxHalvings = 40;

std::vector<double> Project(std::vector<double> x) {
  for (double& v : x) v = std::clamp(v, 0.0, 1.0);
  return x;
}

}  // namespace

const char* SurfaceName(AttackSurface surface) {
  switch (surface) {
    case AttackSurface::kType0ServerSharedUpdate: return "type0";
    case AttackSurface::kType1ClientPostTraining: return "type1";
    case AttackSurface::kType2PerExampleGradient: return "type2";
  }
  return "unknown";
}

AttackSurface ParseSurface(const std::string& name) {
  if (name == "type0" || name == "type0_server_shared_update") {
    return AttackSurface::kType0ServerSharedUpdate;
  }
  if (name == "type1" || name == "type1_client_post_training_update") {
    return AttackSurface::kType1ClientPostTraining;
  }
  if (name == "type2" || name == "type2_per_example_gradient") {
    return AttackSurface::kType2PerExampleGradient;
  }
  throw std::invalid_argument("unknown attack surface '" + name + "'");
}

void AttackConfig::Validate() const {
  if (max_iterations < 1) throw std::invalid_argument("tau must be >= 1");
  if (!(success_rmse > 0.0)) throw std::invalid_argument("success_rmse must be positive");
  if (!(attack_lr > 0.0)) throw std::invalid_argument("attack_lr must be positive");
  if (!(loss_tolerance >= 0.0)) throw std::invalid_argument("loss tolerance must be >= 0");
}

Example InitSeed(SeedKind kind, std::size_t dim, int label, Rng& rng) {
  Example seed;
  seed.label = label;
  seed.features.resize(dim);
  if (kind == SeedKind::kRandom) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : seed.features) v = unit(rng);
    return seed;
  }
  auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(dim))));
  const std::size_t width = side * side == dim ? side : dim;
  for (std::size_t k = 0; k < dim; ++k) {
    const std::size_t i = k / width, j = k % width;
    double v = static_cast<double>(i % 4 + j % 4) / 6.0;
    if ((i / 4 + j / 4) % 2 == 1) v = 1.0 - v;
    seed.features[k] = v;
  }
  return seed;
}

double Rmse(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("Rmse: length mismatch");
  if (x.empty()) throw std::invalid_argument("Rmse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(x.size()));
}

AttackReport Reconstruct(const ModelParams& model, const LayeredTensor& target,
                         const Example& victim, const AttackConfig& cfg) {
  cfg.Validate();
  RequireSameShape(model.params, target, "Reconstruct");
  Rng rng(cfg.seed);
  Example x = InitSeed(cfg.seed_kind, model.input_dim(), victim.label, rng);

  AttackReport report;
  double loss = MatchLoss(model, target, x);
  report.per_iteration_loss.push_back(loss);
  double step = cfg.attack_lr;
  bool diverged = !std::isfinite(loss);
  int it = 0;
  while (!diverged && it < cfg.max_iterations && loss >= cfg.loss_tolerance) {
    ++it;
    const std::vector<double> g = InputGradientOfMatchLoss(model, target, x);
    if (!std::all_of(g.begin(), g.end(), [](double v) { return std::isfinite(v); })) {
      diverged = true;
      break;
    }
    bool accepted = false;
    double alpha = step;
    for (int h = 0; h < kMaxHalvings && !accepted; ++h, alpha *= 0.5) {
      Example cand = x;
      for (std::size_t i = 0; i < g.size(); ++i) cand.features[i] -= alpha * g[i];
      cand.features = Project(std::move(cand.features));
      const double cand_loss = MatchLoss(model, target, cand);
      if (std::isfinite(cand_loss) && cand_loss < loss) {
        x = std::move(cand);
        loss = cand_loss;
        accepted = true;
        step = 2.0 * alpha;
      }
    }
    if (!accepted) {  // no descent direction left inside the box
      --it;
      break;
    }
    report.per_iteration_loss.push_back(loss);
  }

  report.diverged = diverged;
  report.iterations_used = diverged ? cfg.max_iterations : it;
  report.recon_distance = Rmse(victim.features, x.features);
  report.resilient = diverged || !(report.recon_distance < cfg.success_rmse);
  report.reconstruction = std::move(x.features);
  return report;
}

LayeredTensor GradientEquivalent(const LayeredTensor& delta, double eta,
                                 int local_iterations) {
  if (!(eta > 0.0) || local_iterations < 1) {
    throw std::invalid_argument("update-to-gradient conversion needs eta > 0 and L >= 1");
  }
  LayeredTensor g = delta;
  Scale(-1.0 / (eta * local_iterations), g);
  return g;
}

LayeredTensor CaptureTarget(AttackSurface surface, const ModelParams& model,
                            const Example& victim, int victim_id,
                            const FederationConfig& fed,
                            std::size_t total_examples) {
  FederationConfig one = fed;
  one.local_iterations = 1;
  one.batch_size = 1;
  const ClientDataset data{victim_id, {victim}};
  LayeredTensor seen;
  TrainingTaps taps;
  taps.per_example = [&](int iteration, std::size_t example, const LayeredTensor& g) {
    if (iteration == 0 && example == 0) seen = g;
  };
  const ClientRound cr = RunClientRound(model, data, one, 0, total_examples, &taps);
  if (surface == AttackSurface::kType2PerExampleGradient) return seen;
  // Both update surfaces observe the update as it leaves the client: after
  // client-side transforms, before any server-side sanitization.
  return GradientEquivalent(cr.transmitted.delta, one.learning_rate, 1);
}

CampaignResult AttackCampaign(const ModelParams& model,
                              std::span<const Example> victims,
                              const FederationConfig& fed,
                              std::size_t total_examples,
                              const AttackConfig& cfg) {
  if (victims.empty()) throw std::invalid_argument("campaign needs at least one victim");
  cfg.Validate();
  CampaignResult out;
  int successes = 0;
  for (std::size_t v = 0; v < victims.size(); ++v) {
    const LayeredTensor target = CaptureTarget(cfg.surface, model, victims[v],
                                               static_cast<int>(v), fed, total_examples);
    AttackConfig run = cfg;
    run.seed = DeriveSeed(cfg.seed, "attack", {v});
    out.victims.push_back(Reconstruct(model, target, victims[v], run));
    const AttackReport& r = out.victims.back();
    if (!r.resilient) ++successes;
    out.mean_distance += r.recon_distance;
    out.mean_iterations += r.iterations_used;
  }
  const double n = static_cast<double>(victims.size());
  out.attack_success_rate = successes / n;
  out.mean_distance /= n;
  out.mean_iterations /= n;
  return out;
}

}  // namespace leaklab
