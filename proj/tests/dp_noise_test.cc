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
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "leaklab/dp_noise.h"
#include "leaklab/errors.h"
#include "leaklab/nn.h"
#include "test_util.h"

namespace leaklab {
namespace {

using testing::RandomExamples;
using testing::SmallMlp;

PerExampleGradient OneBlock(std::vector<double> weights, std::vector<double> bias) {
  PerExampleGradient g;
  ParamBlock b;
  b.weights = Matrix(1, weights.size());
  b.weights.data = std::move(weights);
  b.bias = std::move(bias);
  g.per_layer.blocks.push_back(std::move(b));
  return g;
}

TEST(ClipTest, ScalesOnlyBlocksAboveBound) {
  PerExampleGradient g = OneBlock({3.0, 0.0}, {4.0});  // norm 5
  ParamBlock small;
  small.weights = Matrix(1, 1, 0.5);
  g.per_layer.blocks.push_back(small);
  const PerExampleGradient c = ClipPerExample(g, 1.0);
  EXPECT_NEAR(c.per_layer.blocks[0].Norm(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(c.per_layer.blocks[0].weights.data[0], 0.6);
  EXPECT_DOUBLE_EQ(c.per_layer.blocks[0].bias[0], 0.8);
  EXPECT_EQ(c.per_layer.blocks[1], small);  // within bound: untouched
}

TEST(ClipTest, ClippedNormsNeverExceedBoundOnRealGradients) {
  const ModelParams m = SmallMlp(12, {10}, 3);
  for (double clip : {1e-3, 0.05, 0.5, 4.0}) {
    for (const auto& g : PerExampleGradients(m, RandomExamples(20, 12, 3))) {
      const PerExampleGradient c = ClipPerExample(g, clip);
      for (std::size_t l = 0; l < c.per_layer.size(); ++l) {
        EXPECT_LE(c.per_layer.blocks[l].Norm(), clip * (1 + 1e-12));
        // Direction is preserved.
        const double raw = g.per_layer.blocks[l].Norm();
        const double factor = c.per_layer.blocks[l].Norm() / raw;
        EXPECT_NEAR(c.per_layer.blocks[l].weights.data[0],
                    g.per_layer.blocks[l].weights.data[0] * factor, 1e-12);
      }
    }
  }
}

TEST(ClipTest, RejectsNonPositiveBound) {
  EXPECT_THROW(ClipPerExample(OneBlock({1.0}, {}), 0.0), std::invalid_argument);
}

TEST(SensitivityTest, L2MaxIsLargestBlockNormCappedAtClip) {
  std::vector<PerExampleGradient> batch = {OneBlock({0.3, 0.4}, {}),   // 0.5
                                           OneBlock({0.0, 0.0}, {0.2}),
                                           OneBlock({0.6, 0.0}, {0.8})};  // 1.0
  EXPECT_DOUBLE_EQ(L2MaxSensitivity(batch, 4.0), 1.0);
  EXPECT_DOUBLE_EQ(L2MaxSensitivity(batch, 0.7), 0.7);
  EXPECT_DOUBLE_EQ(BatchSensitivity(SensitivityMode::kFixedClip, batch, 4.0), 4.0);
  EXPECT_DOUBLE_EQ(BatchSensitivity(SensitivityMode::kL2Max, batch, 4.0), 1.0);
}

TEST(SensitivityTest, L2MaxNeverExceedsClipOnClippedGradients) {
  const ModelParams m = SmallMlp(8, {6}, 2);
  const auto grads = PerExampleGradients(m, RandomExamples(16, 8, 2));
  for (double clip : {0.01, 0.1, 1.0, 10.0}) {
    std::vector<PerExampleGradient> clipped;
    for (const auto& g : grads) clipped.push_back(ClipPerExample(g, clip));
    const double s = L2MaxSensitivity(clipped, clip);
    EXPECT_GT(s, 0.0);
    EXPECT_LE(s, clip);
  }
}

TEST(SensitivityTest, DegenerateBatch) {
  std::vector<PerExampleGradient> zeros = {OneBlock({0.0}, {0.0})};
  EXPECT_THROW(L2MaxSensitivity(zeros, 1.0), DegenerateSensitivityError);
  bool degenerate = false;
  EXPECT_DOUBLE_EQ(BatchSensitivity(SensitivityMode::kL2Max, zeros, 2.0, &degenerate),
                   DegenerateSensitivityFallback(2.0));
  EXPECT_TRUE(degenerate);
}

TEST(NoiseTest, MonteCarloMomentsMatchSigmaTimesSensitivity) {
  Rng rng(123);
  const std::size_t n = 400000;
  const double sigma = 2.0, s = 1.5;
  const std::vector<double> x = GaussianNoise(n, sigma, s, rng);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n - 1;
  const double want = sigma * sigma * s * s;  // 9
  EXPECT_NEAR(mean, 0.0, 5 * std::sqrt(want / n));
  EXPECT_NEAR(var, want, 5 * want * std::sqrt(2.0 / n));
  // Fraction within one standard deviation.
  const double sd = sigma * s;
  const double inside =
      std::count_if(x.begin(), x.end(), [&](double v) { return std::abs(v) < sd; }) /
      static_cast<double>(n);
  EXPECT_NEAR(inside, std::erf(1.0 / std::numbers::sqrt2), 0.005);
}

TEST(NoiseTest, SeededAndShapedLikeInput) {
  const LayeredTensor shape = SmallMlp(4, {3}, 2).params;
  Rng a(5), b(5);
  const LayeredTensor na = GaussianNoiseLike(shape, 1.0, 1.0, a);
  EXPECT_TRUE(SameShape(na, shape));
  EXPECT_EQ(na, GaussianNoiseLike(shape, 1.0, 1.0, b));
  Rng c(6);
  EXPECT_NE(na, GaussianNoiseLike(shape, 1.0, 1.0, c));
  EXPECT_THROW(GaussianNoise(3, 0.0, 1.0, a), std::invalid_argument);
}

TEST(CalibrationTest, MinEpsilonForSigma) {
  EXPECT_NEAR(MinEpsilonForSigma(6.0, 1e-5), std::sqrt(2 * std::log(1.25e5)) / 6.0, 1e-15);
  // Inverse: sigma = sqrt(2 ln(1.25/delta)) / eps.
  const double eps = 0.5;
  const double sigma = std::sqrt(2 * std::log(1.25 / 1e-5)) / eps;
  EXPECT_NEAR(MinEpsilonForSigma(sigma, 1e-5), eps, 1e-14);
  EXPECT_THROW(MinEpsilonForSigma(1.0, 0.0), std::invalid_argument);
}

class ScheduleTest : public ::testing::TestWithParam<int> {};

TEST_P(ScheduleTest, ClosedForms) {
  const int T = 100;
  const int t = GetParam();
  const double s0 = 15.0;
  const NoiseSchedule lin{DecayPolicy::kLinear, s0, 0.005, 10, T, 0.5};
  EXPECT_NEAR(NoiseScaleAt(lin, t), std::max(0.5, s0 * (1 - 0.005 * t)), 1e-9);
  const NoiseSchedule stair{DecayPolicy::kStaircase, s0, 0.05, 10, T, 0.5};
  EXPECT_NEAR(NoiseScaleAt(stair, t), std::max(0.5, s0 * (1 - 0.05 * (t / 10))), 1e-9);
  const NoiseSchedule expo{DecayPolicy::kExponential, s0, 0.01, 10, T, 0.5};
  EXPECT_NEAR(NoiseScaleAt(expo, t), std::max(0.5, s0 * std::exp(-0.01 * t)), 1e-9);
  const NoiseSchedule cyc = NoiseSchedule::Cyclic(s0, 3.0, T, 0.5);
  const int period = 34;  // ceil(100 / 3)
  EXPECT_NEAR(NoiseScaleAt(cyc, t),
              std::max(0.5, s0 / 2 *
                                (std::cos(std::numbers::pi * (t % period) / period) + 1)),
              1e-9);
  EXPECT_EQ(NoiseScaleAt(NoiseSchedule::Fixed(6.0, T), t), 6.0);
}

INSTANTIATE_TEST_SUITE_P(Rounds, ScheduleTest, ::testing::Values(0, 1, 50, 99));

TEST(ScheduleTest, EndpointSolvers) {
  const int T = 100;
  for (const NoiseSchedule& s :
       {NoiseSchedule::LinearTo(15.0, 4.85, T), NoiseSchedule::ExponentialTo(15.0, 4.85, T),
        NoiseSchedule::StaircaseTo(15.0, 4.85, T, 10)}) {
    EXPECT_NEAR(NoiseScaleAt(s, 0), 15.0, 1e-12);
    EXPECT_NEAR(NoiseScaleAt(s, T - 1), 4.85, 1e-9);
    for (int t = 1; t < T; ++t) EXPECT_LE(NoiseScaleAt(s, t), NoiseScaleAt(s, t - 1));
  }
  EXPECT_NEAR(NoiseSchedule::LinearTo(15.0, 4.85, T).gamma, (1 - 4.85 / 15) / 99, 1e-15);
  EXPECT_NEAR(NoiseSchedule::ExponentialTo(15.0, 4.85, T).gamma, std::log(15 / 4.85) / 99,
              1e-15);
}

TEST(ScheduleTest, FloorClampsAndValidation) {
  const NoiseSchedule s{DecayPolicy::kLinear, 6.0, 0.02, 10, 100, 1.0};
  EXPECT_DOUBLE_EQ(NoiseScaleAt(s, 99), 1.0);
  EXPECT_THROW(NoiseScaleAt(s, 100), std::invalid_argument);
  EXPECT_THROW(NoiseScaleAt(s, -1), std::invalid_argument);
  EXPECT_THROW(NoiseSchedule::LinearTo(4.0, 5.0, 100), std::invalid_argument);
  NoiseSchedule bad = s;
  bad.gamma = 0.0;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
  bad = s;
  bad.sigma_floor = 7.0;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
  PrivacyParams p;
  p.clip_bound = 0.0;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace leaklab
