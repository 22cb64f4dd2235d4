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
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "leaklab/attack.h"
#include "leaklab/errors.h"
#include "leaklab/federation.h"
#include "leaklab/nn.h"
#include "test_util.h"

namespace leaklab {
namespace {

using testing::RandomExamples;
using testing::SmallMlp;

FederationConfig Fed(AlgorithmKind kind) {
  FederationConfig cfg;
  cfg.num_clients = 10;
  cfg.clients_per_round = 2;
  cfg.learning_rate = 0.1;
  cfg.algorithm.kind = kind;
  cfg.privacy.clip_bound = 4.0;
  cfg.privacy.schedule = NoiseSchedule::Fixed(6.0, 1);
  cfg.seed = 5;
  return cfg;
}

AttackConfig Atk(AttackSurface surface) {
  AttackConfig cfg;
  cfg.surface = surface;
  cfg.max_iterations = 300;
  cfg.seed = 17;
  return cfg;
}

TEST(InitSeedTest, PatternedIsFixedCheckerboardRamp) {
  Rng a(1), b(2);
  const Example x = InitSeed(SeedKind::kPatterned, 64, 3, a);
  EXPECT_EQ(x.features, InitSeed(SeedKind::kPatterned, 64, 3, b).features);
  EXPECT_EQ(x.label, 3);
  EXPECT_DOUBLE_EQ(x.features[0], 0.0);
  EXPECT_DOUBLE_EQ(x.features[3], 0.5);            // row 0, col 3
  EXPECT_DOUBLE_EQ(x.features[4], 1.0);            // tile (0, 1) inverted
  EXPECT_DOUBLE_EQ(x.features[8 * 3 + 3], 1.0);    // (3, 3): 6 / 6
  EXPECT_DOUBLE_EQ(x.features[8 * 4 + 4], 0.0);    // tile (1, 1) not inverted
  for (double v : x.features) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(InitSeedTest, RandomIsUnitBoxAndSeeded) {
  Rng a(4), b(4);
  const Example x = InitSeed(SeedKind::kRandom, 500, 0, a);
  EXPECT_EQ(x.features, InitSeed(SeedKind::kRandom, 500, 0, b).features);
  double mean = 0.0;
  for (double v : x.features) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    mean += v / 500.0;
  }
  EXPECT_NEAR(mean, 0.5, 0.05);
}

TEST(RmseTest, Values) {
  const std::vector<double> a = {0, 0, 0, 0}, b = {1, 1, 1, 1}, c = {2, 0, 0, 0};
  EXPECT_DOUBLE_EQ(Rmse(a, a), 0.0);
  EXPECT_DOUBLE_EQ(Rmse(a, b), 1.0);
  EXPECT_DOUBLE_EQ(Rmse(a, c), 1.0);
  EXPECT_THROW(Rmse(a, std::vector<double>{1}), std::invalid_argument);
  EXPECT_THROW(Rmse(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST(GradientEquivalentTest, InvertsSgdStep) {
  const ModelParams m = SmallMlp(4, {3}, 2);
  const Example e{{0.1, 0.9, 0.3, 0.5}, 1};
  const LayeredTensor g = ExampleGradient(m, e);
  LayeredTensor delta = g;
  Scale(-0.3 * 2, delta);  // two identical steps at eta = 0.3
  const LayeredTensor back = GradientEquivalent(delta, 0.3, 2);
  const auto x = back.Flatten(), y = g.Flatten();
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x[i], y[i], 1e-15);
  EXPECT_THROW(GradientEquivalent(delta, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(GradientEquivalent(delta, 0.1, 0), std::invalid_argument);
}

TEST(AttackConfigTest, Validation) {
  AttackConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.max_iterations = 0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = AttackConfig{};
  cfg.success_rmse = 0.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  for (AttackSurface s : {AttackSurface::kType0ServerSharedUpdate,
                          AttackSurface::kType1ClientPostTraining,
                          AttackSurface::kType2PerExampleGradient}) {
    EXPECT_EQ(ParseSurface(SurfaceName(s)), s);
  }
  EXPECT_THROW(ParseSurface("type3"), std::invalid_argument);
}

TEST(ReconstructTest, RecoversVictimFromItsExactGradient) {
  const ModelParams m = SmallMlp(16, {12}, 3);
  const Example victim = RandomExamples(1, 16, 3, 8)[0];
  const LayeredTensor target = ExampleGradient(m, victim);
  AttackConfig cfg = Atk(AttackSurface::kType2PerExampleGradient);
  cfg.max_iterations = 1;
  const AttackReport one = Reconstruct(m, target, victim, cfg);
  EXPECT_EQ(one.iterations_used, 1);
  EXPECT_EQ(one.per_iteration_loss.size(), 2u);
  EXPECT_LT(one.per_iteration_loss[1], one.per_iteration_loss[0]);
  cfg.max_iterations = 1000;
  const AttackReport r = Reconstruct(m, target, victim, cfg);
  EXPECT_FALSE(r.resilient);
  EXPECT_LT(r.recon_distance, cfg.success_rmse);
  EXPECT_EQ(r.per_iteration_loss.size(), static_cast<std::size_t>(r.iterations_used) + 1);
  for (std::size_t i = 1; i < r.per_iteration_loss.size(); ++i) {
    EXPECT_LT(r.per_iteration_loss[i], r.per_iteration_loss[i - 1]);
  }
  for (double v : r.reconstruction) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  const AttackReport again = Reconstruct(m, target, victim, cfg);
  EXPECT_EQ(again.reconstruction, r.reconstruction);
  EXPECT_EQ(again.per_iteration_loss, r.per_iteration_loss);
}

TEST(ReconstructTest, ShapeMismatchThrows) {
  const ModelParams m = SmallMlp(4, {3}, 2);
  const Example v{{0, 0, 0, 0}, 0};
  EXPECT_THROW(Reconstruct(m, SmallMlp(4, {5}, 2).params, v, AttackConfig{}), ShapeError);
}

TEST(ReconstructTest, NonFiniteTargetDivergesAndCountsAsResilient) {
  const ModelParams m = SmallMlp(4, {3}, 2);
  const Example v{{0.2, 0.4, 0.6, 0.8}, 0};
  LayeredTensor target = ExampleGradient(m, v);
  target.blocks[0].weights.data[0] = std::nan("");
  AttackConfig cfg = Atk(AttackSurface::kType2PerExampleGradient);
  const AttackReport r = Reconstruct(m, target, v, cfg);
  EXPECT_TRUE(r.diverged);
  EXPECT_TRUE(r.resilient);
  EXPECT_EQ(r.iterations_used, cfg.max_iterations);
}

TEST(CaptureTargetTest, SurfacesOfNonPrivateAgree) {
  const ModelParams m = SmallMlp(16, {12}, 3);
  const Example victim = RandomExamples(1, 16, 3)[0];
  const FederationConfig fed = Fed(AlgorithmKind::kNonPrivate);
  const LayeredTensor g = ExampleGradient(m, victim);
  const auto t2 = CaptureTarget(AttackSurface::kType2PerExampleGradient, m, victim, 0, fed, 100);
  EXPECT_EQ(t2, g);
  const auto t0 = CaptureTarget(AttackSurface::kType0ServerSharedUpdate, m, victim, 0, fed, 100)
                      .Flatten();
  const auto gf = g.Flatten();
  for (std::size_t i = 0; i < gf.size(); ++i) EXPECT_NEAR(t0[i], gf[i], 1e-12);
}

TEST(CaptureTargetTest, PerExampleDpNoisesEverySurface) {
  const ModelParams m = SmallMlp(16, {12}, 3);
  const Example victim = RandomExamples(1, 16, 3)[0];
  const FederationConfig fed = Fed(AlgorithmKind::kFedCdp);
  const LayeredTensor g = ExampleGradient(m, victim);
  for (AttackSurface s : {AttackSurface::kType0ServerSharedUpdate,
                          AttackSurface::kType2PerExampleGradient}) {
    LayeredTensor t = CaptureTarget(s, m, victim, 0, fed, 100);
    Axpy(-1.0, g, t);
    // Noise of std sigma * C = 24 per coordinate dwarfs the gradient.
    EXPECT_GT(t.Norm(), 10.0 * g.Norm());
  }
}

TEST(AttackCampaignTest, NonPrivateLeaksAndPerExampleDpResists) {
  const ModelParams m = SmallMlp(16, {12}, 3);
  const auto victims = RandomExamples(5, 16, 3, 8);
  for (AttackSurface s : {AttackSurface::kType0ServerSharedUpdate,
                          AttackSurface::kType2PerExampleGradient}) {
    const CampaignResult open =
        AttackCampaign(m, victims, Fed(AlgorithmKind::kNonPrivate), 100, Atk(s));
    EXPECT_GE(open.attack_success_rate, 0.8) << SurfaceName(s);
    EXPECT_LT(open.mean_distance, 0.1);
    const CampaignResult dp =
        AttackCampaign(m, victims, Fed(AlgorithmKind::kFedAlphaCdpSigma), 100, Atk(s));
    EXPECT_EQ(dp.attack_success_rate, 0.0) << SurfaceName(s);
    EXPECT_GT(dp.mean_distance, 3.0 * open.mean_distance);
  }
}

TEST(AttackCampaignTest, ClientLevelDpLeavesPerExampleGradientExposed) {
  const ModelParams m = SmallMlp(16, {12}, 3);
  const auto victims = RandomExamples(5, 16, 3, 8);
  const FederationConfig sdp = Fed(AlgorithmKind::kFedSdpClient);
  const CampaignResult t0 =
      AttackCampaign(m, victims, sdp, 100, Atk(AttackSurface::kType0ServerSharedUpdate));
  const CampaignResult t2 =
      AttackCampaign(m, victims, sdp, 100, Atk(AttackSurface::kType2PerExampleGradient));
  EXPECT_EQ(t0.attack_success_rate, 0.0);
  EXPECT_GE(t2.attack_success_rate, 0.8);
}

TEST(AttackCampaignTest, DeterministicAndSingleIteration) {
  const ModelParams m = SmallMlp(16, {12}, 3);
  const auto victims = RandomExamples(3, 16, 3, 8);
  const FederationConfig fed = Fed(AlgorithmKind::kFedCdp);
  AttackConfig cfg = Atk(AttackSurface::kType2PerExampleGradient);
  const CampaignResult a = AttackCampaign(m, victims, fed, 100, cfg);
  const CampaignResult b = AttackCampaign(m, victims, fed, 100, cfg);
  ASSERT_EQ(a.victims.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.victims[i].reconstruction, b.victims[i].reconstruction);
  }
  cfg.max_iterations = 1;
  const CampaignResult one = AttackCampaign(m, victims, fed, 100, cfg);
  for (const AttackReport& r : one.victims) EXPECT_LE(r.iterations_used, 1);
  EXPECT_THROW(AttackCampaign(m, std::vector<Example>{}, fed, 100, cfg), std::invalid_argument);
}

}  // namespace
}  // namespace leaklab
