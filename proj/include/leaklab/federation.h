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
#ifndef LEAKLAB_FEDERATION_H_
#define LEAKLAB_FEDERATION_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "leaklab/accountant.h"
#include "leaklab/dp_noise.h"
#include "leaklab/nn.h"
#include "leaklab/rng.h"
#include "leaklab/tensor.h"

namespace leaklab {

enum class AlgorithmKind {
  kNonPrivate,
  kFedSdpServer,
  kFedSdpClient,
  kFedCdp,
  kFedAlphaCdp,
  kFedAlphaCdpSigma,
  kPruneThreshold,
  kPruneRandomDssgd,
  kAdditiveNoise,
};

const char* AlgorithmName(AlgorithmKind kind);
AlgorithmKind ParseAlgorithm(const std::string& name);

struct AlgorithmVariant {
  AlgorithmKind kind = AlgorithmKind::kNonPrivate;
  double prune_percent = 10.0;     // prune_threshold: mu in [0, 100)
  double dssgd_fraction = 0.1;     // prune_random_dssgd: theta in (0, 1]
  double dssgd_threshold = 0.0;
  double noise_variance = 0.01;    // additive_noise

  // Noise injected into every local step (Fed-CDP and its alpha variants).
  bool per_example_dp() const {
    return kind == AlgorithmKind::kFedCdp || kind == AlgorithmKind::kFedAlphaCdp ||
           kind == AlgorithmKind::kFedAlphaCdpSigma;
  }
  bool client_level_dp() const {
    return kind == AlgorithmKind::kFedSdpServer || kind == AlgorithmKind::kFedSdpClient;
  }
  bool differentially_private() const { return per_example_dp() || client_level_dp(); }
  void Validate() const;
};

// Where the per-iteration Gaussian noise enters a Fed-CDP step. post_average
// adds N(0, sigma^2 S^2) once to the mean clipped gradient; the other option
// adds it to every clipped example before averaging (variance / B).
enum class NoisePlacement { kPostAverage, kPerExampleThenAverage };

struct FederationConfig {
  int num_clients = 1000;
  int clients_per_round = 100;
  int rounds = 100;
  int local_iterations = 100;
  int batch_size = 5;
  double learning_rate = 0.1;
  AlgorithmVariant algorithm;
  PrivacyParams privacy;
  NoisePlacement noise_placement = NoisePlacement::kPostAverage;
  std::uint64_t seed = 0;
  // Test hook: when false every Gaussian draw of the DP mechanisms is
  // skipped, leaving clipping and accounting in place.
  bool noise_enabled = true;

  void Validate() const;
};

// Fed-CDP clips with C as the sensitivity; both alpha variants use l2-max.
SensitivityMode SensitivityFor(AlgorithmKind kind);
// Per-iteration noise scale for round t. Only fed_alpha_cdp_sigma follows the
// decay schedule; all other DP variants use sigma0. Rounds past the schedule
// horizon keep its last value.
double SigmaForRound(const FederationConfig& cfg, int round);

struct ClientDataset {
  int client_id = 0;
  std::vector<Example> examples;
};

// Shuffles and splits into num_clients disjoint shards whose sizes differ by
// at most one (the first |D| mod N shards get the extra example).
std::vector<ClientDataset> PartitionIid(std::span<const Example> examples,
                                        int num_clients, Rng& rng);

// K distinct ids from [0, N), uniform without replacement, ascending.
std::vector<int> SampleClients(int num_clients, int clients_per_round, Rng& rng);

// B distinct positions in [0, n); a fresh draw every call.
std::vector<std::size_t> SampleBatch(std::size_t n, int batch_size, Rng& rng);

struct RoundUpdate {
  int client_id = 0;
  LayeredTensor delta;
  bool sanitized = false;
};

// Observation points inside one client round, used by the attack simulator.
// per_example receives, for each example the client trains on, the gradient
// as it exists right before local SGD consumes it: raw for plain training,
// clipped-and-noised for Fed-CDP variants.
struct TrainingTaps {
  std::function<void(int iteration, std::size_t example, const LayeredTensor&)>
      per_example;
};

// Plain L-iteration minibatch SGD. The batch gradient is the mean of
// per-example gradients, summed in batch order.
RoundUpdate LocalTrainRaw(const ModelParams& global, const ClientDataset& data,
                          const FederationConfig& cfg, Rng& batch_rng,
                          const TrainingTaps* taps = nullptr);

struct DpLocalResult {
  RoundUpdate update;
  std::vector<LedgerEntry> ledger;
  double mean_sensitivity = 0.0;
  int degenerate_iterations = 0;
};

// Fed-CDP family local training: per-example clipping, per-iteration
// sensitivity and Gaussian noise before each SGD step. Emits one ledger entry
// per iteration with q = sampling_rate.
DpLocalResult LocalTrainPerExampleDp(const ModelParams& global,
                                     const ClientDataset& data,
                                     const FederationConfig& cfg, int round,
                                     double sampling_rate, Rng& batch_rng,
                                     Rng& noise_rng,
                                     const TrainingTaps* taps = nullptr);

// Fed-SDP: clip the flattened update to l2 norm C, then add N(0, sigma^2 C^2)
// per coordinate (skipped when add_noise is false).
RoundUpdate SdpSanitize(const RoundUpdate& update, double clip, double sigma,
                        Rng& rng, bool add_noise = true);

// Zeroes the floor(mu * n / 100) smallest-magnitude coordinates; equal
// magnitudes are ranked by coordinate index.
LayeredTensor PruneThreshold(const LayeredTensor& update, double mu_percent);

// Keeps ceil(theta * m) coordinates drawn uniformly among the m with
// |value| > threshold; zeroes the rest.
LayeredTensor PruneRandomDssgd(const LayeredTensor& update, double theta,
                               double threshold, Rng& rng);

LayeredTensor AdditiveRandomNoise(const LayeredTensor& update, double variance,
                                  Rng& rng);

// global + (1/K) sum of deltas.
ModelParams Aggregate(const ModelParams& global,
                      std::span<const RoundUpdate> updates);

// One client's participation in a round, through every client-side transform
// the variant applies. `local` is the update as local training produced it,
// `transmitted` what leaves the client.
struct ClientRound {
  RoundUpdate local;
  RoundUpdate transmitted;
  std::vector<LedgerEntry> ledger;
  double mean_sensitivity = 0.0;
};

ClientRound RunClientRound(const ModelParams& global, const ClientDataset& data,
                           const FederationConfig& cfg, int round,
                           std::size_t total_examples,
                           const TrainingTaps* taps = nullptr);

// Server-side handling of a received update (Fed-SDP at the server sanitizes
// here; every other variant passes it through). Appends its ledger entry.
RoundUpdate ServerReceive(const RoundUpdate& received, const FederationConfig& cfg,
                          int round, std::vector<LedgerEntry>& ledger);

enum class StopKind { kRounds, kBudget, kTargetAccuracy };

struct StopCondition {
  StopKind kind = StopKind::kRounds;
  double budget = 0.0;
  AccountingMethod method = AccountingMethod::kMoments;
  double target_accuracy = 0.0;
};

struct RoundRecord {
  int round = 0;
  double val_accuracy = 0.0;
  double sigma = 0.0;
  double mean_sensitivity = 0.0;
  double eps_moments = 0.0;
  double eps_zcdp = 0.0;
  double eps_advanced = 0.0;
  double eps_base = 0.0;
  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct TrainingReport {
  std::string algorithm;
  double initial_accuracy = 0.0;
  std::vector<RoundRecord> per_round;
  double final_accuracy = 0.0;
  int rounds_used = 0;
  bool stop_reached = true;  // false when the 10*T hard cap fired first
  std::vector<PrivacySpend> spends;  // base, advanced, zcdp, moments
  PrivacyLedger ledger;
  ModelParams model;
  double seconds_per_iteration = 0.0;
};

// Runs rounds until `stop` fires. A budget stop ends after the round whose
// spend first exceeds the budget; with stop = kRounds exactly cfg.rounds
// rounds run. Non-DP variants report zero epsilon.
TrainingReport RunTraining(const FederationConfig& cfg, const ModelParams& init,
                           std::span<const ClientDataset> clients,
                           std::span<const Example> validation,
                           const StopCondition& stop = {});

}  // namespace leaklab

#endif  // LEAKLAB_FEDERATION_H_
