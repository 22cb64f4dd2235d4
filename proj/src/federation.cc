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
#include "leaklab/federation.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

#include "leaklab/errors.h"

namespace leaklab {
namespace {

struct AlgorithmNameEntry {
  AlgorithmKind kind;
  const char* name;
};

constexpr AlgorithmNameEntry kAlgorithmNames[] = {
    {AlgorithmKind::kNonPrivate, "non_private"},
    {AlgorithmKind::kFedSdpServer, "fed_sdp_server"},
    {AlgorithmKind::kFedSdpClient, "fed_sdp_client"},
    {AlgorithmKind::kFedCdp, "fed_cdp"},
    {AlgorithmKind::kFedAlphaCdp, "fed_alpha_cdp"},
    {AlgorithmKind::kFedAlphaCdpSigma, "fed_alpha_cdp_sigma"},
    {AlgorithmKind::kPruneThreshold, "prune_threshold"},
    {AlgorithmKind::kPruneRandomDssgd, "prune_random_dssgd"},
    {AlgorithmKind::kAdditiveNoise, "additive_noise"},
};

void RequireTrainable(const ClientDataset& data, const FederationConfig& cfg) {
  if (cfg.batch_size > static_cast<int>(data.examples.size())) {
    throw std::invalid_argument(
        "batch size " + std::to_string(cfg.batch_size) + " exceeds client " +
        std::to_string(data.client_id) + "'s " +
        std::to_string(data.examples.size()) + " examples");
  }
}

// Batch mean accumulated in batch order. Raw and DP training share it, so a
// DP step with noise off reproduces the raw step bit for bit; the arithmetic
// matches MeanGradient.
class BatchMean {
 public:
  void Add(LayeredTensor g) {
    if (count_++ == 0) {
      sum_ = std::move(g);
    } else {
      Axpy(1.0, g, sum_);
    }
  }
  LayeredTensor Take() {
    if (count_ > 1) Scale(1.0 / static_cast<double>(count_), sum_);
    count_ = 0;
    return std::move(sum_);
  }

 private:
  LayeredTensor sum_;
  std::size_t count_ = 0;
};

bool Before(const LedgerEntry& a, const LedgerEntry& b) {
  return a.round != b.round ? a.round < b.round : a.step < b.step;
}

}  // namespace

const char* AlgorithmName(AlgorithmKind kind) {
  for (const auto& e : kAlgorithmNames) {
    if (e.kind == kind) return e.name;
  }
  return "unknown";
}

AlgorithmKind ParseAlgorithm(const std::string& name) {
  for (const auto& e : kAlgorithmNames) {
    if (name == e.name) return e.kind;
  }
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

void AlgorithmVariant::Validate() const {
  switch (kind) {
    case AlgorithmKind::kPruneThreshold:
      if (!(prune_percent >= 0.0 && prune_percent < 100.0)) {
        throw std::invalid_argument("prune percent must lie in [0, 100)");
      }
      break;
    case AlgorithmKind::kPruneRandomDssgd:
      if (!(dssgd_fraction > 0.0 && dssgd_fraction <= 1.0)) {
        throw std::invalid_argument("dssgd fraction must lie in (0, 1]");
      }
      if (!(dssgd_threshold >= 0.0)) {
        throw std::invalid_argument("dssgd threshold must be >= 0");
      }
      break;
    case AlgorithmKind::kAdditiveNoise:
      if (!(noise_variance >= 0.0)) {
        throw std::invalid_argument("noise variance must be >= 0");
      }
      break;
    default:
      break;
  }
}

void FederationConfig::Validate() const {
  if (num_clients < 1) throw std::invalid_argument("N must be >= 1");
  if (clients_per_round < 1 || clients_per_round > num_clients) {
    throw std::invalid_argument("K_t must lie in [1, N]");
  }
  if (rounds < 1) throw std::invalid_argument("T must be >= 1");
  if (local_iterations < 1) throw std::invalid_argument("L must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("B must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be finite and >= 0");
  }
  algorithm.Validate();
  privacy.Validate();
}

SensitivityMode SensitivityFor(AlgorithmKind kind) {
  return kind == AlgorithmKind::kFedAlphaCdp || kind == AlgorithmKind::kFedAlphaCdpSigma
             ? SensitivityMode::kL2Max
             : SensitivityMode::kFixedClip;
}

double SigmaForRound(const FederationConfig& cfg, int round) {
  const NoiseSchedule& s = cfg.privacy.schedule;
  if (cfg.algorithm.kind != AlgorithmKind::kFedAlphaCdpSigma) return s.sigma0;
  return NoiseScaleAt(s, std::clamp(round, 0, s.total_rounds - 1));
}

std::vector<ClientDataset> PartitionIid(std::span<const Example> examples,
                                        int num_clients, Rng& rng) {
  if (num_clients < 1) throw std::invalid_argument("need at least one client");
  if (examples.size() < static_cast<std::size_t>(num_clients)) {
    throw std::invalid_argument("fewer examples than clients");
  }
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n = static_cast<std::size_t>(num_clients);
  const std::size_t base = examples.size() / n;
  const std::size_t extra = examples.size() % n;
  std::vector<ClientDataset> clients(n);
  std::size_t next = 0;
  for (std::size_t c = 0; c < n; ++c) {
    clients[c].client_id = static_cast<int>(c);
    const std::size_t count = base + (c < extra ? 1 : 0);
    clients[c].examples.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      clients[c].examples.push_back(examples[order[next++]]);
    }
  }
  return clients;
}

std::vector<int> SampleClients(int num_clients, int clients_per_round, Rng& rng) {
  if (clients_per_round < 1 || clients_per_round > num_clients) {
    throw std::invalid_argument("cannot sample " + std::to_string(clients_per_round) +
                                " of " + std::to_string(num_clients) + " clients");
  }
  std::vector<int> all(static_cast<std::size_t>(num_clients));
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(clients_per_round));
  std::sample(all.begin(), all.end(), std::back_inserter(out), clients_per_round, rng);
  return out;
}

std::vector<std::size_t> SampleBatch(std::size_t n, int batch_size, Rng& rng) {
  if (batch_size < 1 || static_cast<std::size_t>(batch_size) > n) {
    throw std::invalid_argument("batch size must lie in [1, dataset size]");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first B slots end up a uniform B-subset.
  for (std::size_t i = 0; i < static_cast<std::size_t>(batch_size); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(batch_size));
  return idx;
}

RoundUpdate LocalTrainRaw(const ModelParams& global, const ClientDataset& data,
                          const FederationConfig& cfg, Rng& batch_rng,
                          const TrainingTaps* taps) {
  RequireTrainable(data, cfg);
  const bool tapped = taps && taps->per_example;
  ModelParams w = global;
  for (int l = 0; l < cfg.local_iterations; ++l) {
    const auto idx = SampleBatch(data.examples.size(), cfg.batch_size, batch_rng);
    BatchMean mean;
    for (std::size_t i : idx) {
      LayeredTensor g = ExampleGradient(w, data.examples[i]);
      if (tapped) taps->per_example(l, i, g);
      mean.Add(std::move(g));
    }
    w = SgdStep(w, mean.Take(), cfg.learning_rate);
  }
  return {data.client_id, Subtract(w.params, global.params), false};
}

DpLocalResult LocalTrainPerExampleDp(const ModelParams& global,
                                     const ClientDataset& data,
                                     const FederationConfig& cfg, int round,
                                     double sampling_rate, Rng& batch_rng,
                                     Rng& noise_rng, const TrainingTaps* taps) {
  if (!cfg.algorithm.per_example_dp()) {
    throw std::invalid_argument("per-example DP training needs a Fed-CDP variant");
  }
  RequireTrainable(data, cfg);
  const double clip = cfg.privacy.clip_bound;
  const double sigma = SigmaForRound(cfg, round);
  const SensitivityMode mode = SensitivityFor(cfg.algorithm.kind);
  const bool per_example_noise =
      cfg.noise_placement == NoisePlacement::kPerExampleThenAverage;
  const bool tapped = taps && taps->per_example;
  DpLocalResult out;
  ModelParams w = global;
  double sum_s = 0.0;
  for (int l = 0; l < cfg.local_iterations; ++l) {
    const auto idx = SampleBatch(data.examples.size(), cfg.batch_size, batch_rng);
    // Clipped gradients are kept only when something needs them one by one;
    // raw gradients never outlive the loop body.
    const bool keep = per_example_noise || tapped;
    std::vector<LayeredTensor> clipped;
    BatchMean mean;
    double max_norm = 0.0;
    for (std::size_t i : idx) {
      LayeredTensor g = ExampleGradient(w, data.examples[i]);
      max_norm = std::max(max_norm, ClipLayersInPlace(g, clip));
      if (keep) {
        clipped.push_back(std::move(g));
      } else {
        mean.Add(std::move(g));
      }
    }
    bool degenerate = false;
    const double s = SensitivityFromMaxNorm(mode, max_norm, clip, &degenerate);
    if (degenerate) ++out.degenerate_iterations;
    sum_s += s;

    LayeredTensor shared_noise;
    if (per_example_noise) {
      for (std::size_t j = 0; j < clipped.size(); ++j) {
        LayeredTensor& g = clipped[j];
        if (cfg.noise_enabled) Axpy(1.0, GaussianNoiseLike(g, sigma, s, noise_rng), g);
        if (tapped) taps->per_example(l, idx[j], g);
        mean.Add(std::move(g));
      }
    } else {
      for (std::size_t j = 0; j < clipped.size(); ++j) mean.Add(clipped[j]);
    }
    LayeredTensor step = mean.Take();
    if (!per_example_noise && cfg.noise_enabled) {
      shared_noise = GaussianNoiseLike(step, sigma, s, noise_rng);
      Axpy(1.0, shared_noise, step);
    }
    if (!per_example_noise && tapped) {
      for (std::size_t j = 0; j < clipped.size(); ++j) {
        if (cfg.noise_enabled) Axpy(1.0, shared_noise, clipped[j]);
        taps->per_example(l, idx[j], clipped[j]);
      }
    }
    w = SgdStep(w, step, cfg.learning_rate);
    out.ledger.push_back({round, l, sigma, s, sampling_rate, Mechanism::kPerExample});
  }
  out.update = {data.client_id, Subtract(w.params, global.params), true};
  out.mean_sensitivity = sum_s / cfg.local_iterations;
  return out;
}

RoundUpdate SdpSanitize(const RoundUpdate& update, double clip, double sigma,
                        Rng& rng, bool add_noise) {
  if (!(clip > 0.0)) throw std::invalid_argument("clip bound must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("noise scale must be positive");
  RoundUpdate out = update;
  const double norm = out.delta.Norm();
  if (norm > clip) Scale(clip / norm, out.delta);
  if (add_noise) Axpy(1.0, GaussianNoiseLike(out.delta, sigma, clip, rng), out.delta);
  out.sanitized = true;
  return out;
}

LayeredTensor PruneThreshold(const LayeredTensor& update, double mu_percent) {
  if (!(mu_percent >= 0.0 && mu_percent < 100.0)) {
    throw std::invalid_argument("prune percent must lie in [0, 100)");
  }
  std::vector<double> flat = update.Flatten();
  const std::size_t k = static_cast<std::size_t>(
      std::floor(mu_percent * static_cast<double>(flat.size()) / 100.0));
  if (k == 0) return update;
  std::vector<std::size_t> order(flat.size());
  std::iota(order.begin(), order.end(), 0);
  auto smaller = [&](std::size_t a, std::size_t b) {
    const double ma = std::fabs(flat[a]), mb = std::fabs(flat[b]);
    return ma != mb ? ma < mb : a < b;
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   order.end(), smaller);
  const std::size_t pivot = order[k - 1];
  // Everything ranked at or below the k-th smallest is dropped.
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (!smaller(pivot, i)) flat[i] = 0.0;
  }
  LayeredTensor out = update;
  out.Assign(flat);
  return out;
}

LayeredTensor PruneRandomDssgd(const LayeredTensor& update, double theta,
                               double threshold, Rng& rng) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("dssgd fraction must lie in (0, 1]");
  }
  std::vector<double> flat = update.Flatten();
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (std::fabs(flat[i]) > threshold) eligible.push_back(i);
  }
  const auto keep = static_cast<std::size_t>(
      std::ceil(theta * static_cast<double>(eligible.size())));
  std::vector<std::size_t> kept;
  kept.reserve(keep);
  std::sample(eligible.begin(), eligible.end(), std::back_inserter(kept), keep, rng);
  std::vector<double> pruned(flat.size(), 0.0);
  for (std::size_t i : kept) pruned[i] = flat[i];
  LayeredTensor out = update;
  out.Assign(pruned);
  return out;
}

LayeredTensor AdditiveRandomNoise(const LayeredTensor& update, double variance,
                                  Rng& rng) {
  if (!(variance >= 0.0)) throw std::invalid_argument("noise variance must be >= 0");
  LayeredTensor out = update;
  if (variance == 0.0) return out;
  boost::random::normal_distribution<double> normal(0.0, std::sqrt(variance));
  out.ForEach([&](double& v) { v += normal(rng); });
  return out;
}

ModelParams Aggregate(const ModelParams& global,
                      std::span<const RoundUpdate> updates) {
  if (updates.empty()) throw std::invalid_argument("Aggregate: no updates");
  LayeredTensor sum = ZerosLike(global.params);
  for (const auto& u : updates) {
    RequireSameShape(global.params, u.delta, "Aggregate");
    Axpy(1.0, u.delta, sum);
  }
  ModelParams out = global;
  Axpy(1.0 / static_cast<double>(updates.size()), sum, out.params);
  return out;
}

ClientRound RunClientRound(const ModelParams& global, const ClientDataset& data,
                           const FederationConfig& cfg, int round,
                           std::size_t total_examples, const TrainingTaps* taps) {
  const auto r = static_cast<std::uint64_t>(round);
  const auto c = static_cast<std::uint64_t>(data.client_id);
  Rng batch_rng = MakeRng(cfg.seed, "batch", {r, c});
  Rng noise_rng = MakeRng(cfg.seed, "noise", {r, c});
  const AlgorithmVariant& alg = cfg.algorithm;
  ClientRound out;
  if (alg.per_example_dp()) {
    const double q1 = std::min(
        1.0, static_cast<double>(cfg.batch_size) * cfg.clients_per_round /
                 static_cast<double>(total_examples));
    DpLocalResult dp =
        LocalTrainPerExampleDp(global, data, cfg, round, q1, batch_rng, noise_rng, taps);
    out.local = dp.update;
    out.transmitted = dp.update;
    out.ledger = std::move(dp.ledger);
    out.mean_sensitivity = dp.mean_sensitivity;
    return out;
  }
  out.local = LocalTrainRaw(global, data, cfg, batch_rng, taps);
  out.transmitted = out.local;
  switch (alg.kind) {
    case AlgorithmKind::kFedSdpClient: {
      const double sigma = SigmaForRound(cfg, round);
      out.transmitted = SdpSanitize(out.local, cfg.privacy.clip_bound, sigma,
                                    noise_rng, cfg.noise_enabled);
      const double q2 = static_cast<double>(cfg.clients_per_round) / cfg.num_clients;
      out.ledger.push_back(
          {round, 0, sigma, cfg.privacy.clip_bound, q2, Mechanism::kPerClient});
      out.mean_sensitivity = cfg.privacy.clip_bound;
      break;
    }
    case AlgorithmKind::kPruneThreshold:
      out.transmitted.delta = PruneThreshold(out.local.delta, alg.prune_percent);
      break;
    case AlgorithmKind::kPruneRandomDssgd:
      out.transmitted.delta = PruneRandomDssgd(out.local.delta, alg.dssgd_fraction,
                                               alg.dssgd_threshold, noise_rng);
      break;
    case AlgorithmKind::kAdditiveNoise:
      out.transmitted.delta =
          AdditiveRandomNoise(out.local.delta, alg.noise_variance, noise_rng);
      break;
    default:
      break;
  }
  return out;
}

RoundUpdate ServerReceive(const RoundUpdate& received, const FederationConfig& cfg,
                          int round, std::vector<LedgerEntry>& ledger) {
  if (cfg.algorithm.kind != AlgorithmKind::kFedSdpServer) return received;
  Rng rng = MakeRng(cfg.seed, "server_noise",
                    {static_cast<std::uint64_t>(round),
                     static_cast<std::uint64_t>(received.client_id)});
  const double sigma = SigmaForRound(cfg, round);
  const double q2 = static_cast<double>(cfg.clients_per_round) / cfg.num_clients;
  ledger.push_back({round, 0, sigma, cfg.privacy.clip_bound, q2, Mechanism::kPerClient});
  return SdpSanitize(received, cfg.privacy.clip_bound, sigma, rng, cfg.noise_enabled);
}

TrainingReport RunTraining(const FederationConfig& cfg, const ModelParams& init,
                           std::span<const ClientDataset> clients,
                           std::span<const Example> validation,
                           const StopCondition& stop) {
  cfg.Validate();
  init.Validate();
  if (clients.size() != static_cast<std::size_t>(cfg.num_clients)) {
    throw std::invalid_argument("client count differs from N");
  }
  std::size_t total_examples = 0;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (clients[i].client_id != static_cast<int>(i)) {
      throw std::invalid_argument("client ids must be 0..N-1 in order");
    }
    total_examples += clients[i].examples.size();
  }
  if (stop.kind == StopKind::kBudget && !(stop.budget > 0.0)) {
    throw std::invalid_argument("budget stop needs a positive budget");
  }
  if (stop.kind == StopKind::kBudget && !cfg.algorithm.differentially_private()) {
    throw std::invalid_argument("budget stop needs a differentially private variant");
  }
  if (stop.kind == StopKind::kTargetAccuracy && validation.empty()) {
    throw std::invalid_argument("accuracy stop needs a validation set");
  }

  TrainingReport report;
  report.algorithm = AlgorithmName(cfg.algorithm.kind);
  report.ledger = PrivacyLedger(cfg.privacy.delta);
  ModelParams w = init;
  report.initial_accuracy = validation.empty() ? 0.0 : Accuracy(w, validation);
  RunningAccountant acc(cfg.privacy.delta);
  const bool dp = cfg.algorithm.differentially_private();
  const int cap = stop.kind == StopKind::kRounds ? cfg.rounds : 10 * cfg.rounds;
  bool reached = stop.kind == StopKind::kRounds;
  long iterations = 0;
  const auto start = std::chrono::steady_clock::now();

  for (int t = 0; t < cap; ++t) {
    Rng client_rng = MakeRng(cfg.seed, "clients", {static_cast<std::uint64_t>(t)});
    const auto ids = SampleClients(cfg.num_clients, cfg.clients_per_round, client_rng);
    std::vector<RoundUpdate> updates;
    std::vector<LedgerEntry> round_ledger;
    double sum_s = 0.0;
    for (int id : ids) {
      ClientRound cr = RunClientRound(w, clients[static_cast<std::size_t>(id)], cfg, t,
                                      total_examples);
      round_ledger.insert(round_ledger.end(), cr.ledger.begin(), cr.ledger.end());
      updates.push_back(ServerReceive(cr.transmitted, cfg, t, round_ledger));
      sum_s += cfg.algorithm.kind == AlgorithmKind::kFedSdpServer ? cfg.privacy.clip_bound
                                                                  : cr.mean_sensitivity;
      iterations += cfg.local_iterations;
    }
    w = Aggregate(w, updates);
    // Per-client segments arrive in client order; interleave them by step.
    std::stable_sort(round_ledger.begin(), round_ledger.end(), Before);
    report.ledger.Append(round_ledger);
    acc.Add(round_ledger);

    RoundRecord rec;
    rec.round = t;
    rec.val_accuracy = validation.empty() ? 0.0 : Accuracy(w, validation);
    if (dp) {
      rec.sigma = SigmaForRound(cfg, t);
      rec.mean_sensitivity = sum_s / static_cast<double>(ids.size());
      rec.eps_moments = acc.Spend(AccountingMethod::kMoments).epsilon;
      rec.eps_zcdp = acc.Spend(AccountingMethod::kZcdp).epsilon;
      rec.eps_advanced = acc.Spend(AccountingMethod::kAdvanced).epsilon;
      rec.eps_base = acc.Spend(AccountingMethod::kBase).epsilon;
    }
    report.per_round.push_back(rec);

    if (stop.kind == StopKind::kBudget && acc.Spend(stop.method).epsilon > stop.budget) {
      reached = true;
      break;
    }
    if (stop.kind == StopKind::kTargetAccuracy && rec.val_accuracy >= stop.target_accuracy) {
      reached = true;
      break;
    }
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.seconds_per_iteration = iterations > 0 ? seconds / iterations : 0.0;
  report.rounds_used = static_cast<int>(report.per_round.size());
  report.final_accuracy = report.per_round.empty() ? report.initial_accuracy
                                                   : report.per_round.back().val_accuracy;
  report.stop_reached = reached;
  if (dp) {
    for (auto m : {AccountingMethod::kBase, AccountingMethod::kAdvanced,
                   AccountingMethod::kZcdp, AccountingMethod::kMoments}) {
      report.spends.push_back(acc.Spend(m));
    }
  }
  report.model = std::move(w);
  return report;
}

}  // namespace leaklab
