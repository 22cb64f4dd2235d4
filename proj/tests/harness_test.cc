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
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "leaklab/config.h"
#include "leaklab/dataset.h"
#include "leaklab/harness.h"
#include "test_util.h"

namespace leaklab {
namespace {

namespace fs = std::filesystem;

ExperimentConfig Parse(const std::string& text, const std::string& base = ".") {
  std::istringstream in(text);
  return ParseConfig(in, base);
}

std::string ErrorOf(const std::string& text) {
  try {
    Parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig TinySynthetic() {
  return Parse(
      "[dataset]\nn = 300\nclasses = 3\ndims = 5\n"
      "[model]\nhidden = 6\n"
      "[federation]\nclients = 10\nclients_per_round = 3\nrounds = 3\n"
      "local_iterations = 2\nbatch_size = 4\nalgorithm = fed_cdp\n"
      "[privacy]\nsigma = 1\n"
      "[experiment]\nseed = 7\n");
}

TEST(ConfigTest, DefaultTextParsesToDefaults) {
  const ExperimentConfig d = Parse(DefaultConfigText());
  const ExperimentConfig ref;
  EXPECT_EQ(d.name, ref.name);
  EXPECT_EQ(d.master_seed, ref.master_seed);
  EXPECT_EQ(d.dataset.n, ref.dataset.n);
  EXPECT_EQ(d.dataset.label_column, ref.dataset.label_column);
  EXPECT_EQ(d.model.hidden, ref.model.hidden);
  const FederationConfig& f = d.federation;
  EXPECT_EQ(f.num_clients, ref.federation.num_clients);
  EXPECT_EQ(f.clients_per_round, ref.federation.clients_per_round);
  EXPECT_EQ(f.rounds, ref.federation.rounds);
  EXPECT_EQ(f.local_iterations, ref.federation.local_iterations);
  EXPECT_EQ(f.batch_size, ref.federation.batch_size);
  EXPECT_EQ(f.learning_rate, ref.federation.learning_rate);
  EXPECT_EQ(f.algorithm.kind, ref.federation.algorithm.kind);
  EXPECT_EQ(f.privacy.clip_bound, ref.federation.privacy.clip_bound);
  EXPECT_EQ(f.privacy.delta, ref.federation.privacy.delta);
  EXPECT_EQ(f.privacy.schedule.sigma0, ref.federation.privacy.schedule.sigma0);
  EXPECT_EQ(f.privacy.schedule.policy, ref.federation.privacy.schedule.policy);
  EXPECT_EQ(f.privacy.schedule.sigma_floor, ref.federation.privacy.schedule.sigma_floor);
  EXPECT_EQ(d.stop.kind, ref.stop.kind);
  ASSERT_TRUE(d.attack.has_value());
  EXPECT_EQ(d.attack->attack.max_iterations, AttackConfig{}.max_iterations);
  EXPECT_EQ(d.attack->attack.success_rmse, AttackConfig{}.success_rmse);
  EXPECT_EQ(d.attack->victims, 20);
  EXPECT_EQ(Parse("").federation.num_clients, 1000);
}

TEST(ConfigTest, ValuesAndSchedules) {
  const ExperimentConfig c = Parse(
      "# comment\n[experiment]\nname = run\n; full-line comment\nseed = 42\n"
      "[model]\nhidden = 32, 16\n"
      "[federation]\nalgorithm = fed_alpha_cdp_sigma\nrounds = 10\n"
      "[privacy]\nsigma = 6\ndecay = exponential\nsigma_end = 4.85\n"
      "[stop]\nkind = budget\nbudget = 3.5\nmethod = zcdp\n"
      "[attack]\nsurface = all\nvictims = 5\n");
  EXPECT_EQ(c.name, "run");
  EXPECT_EQ(c.master_seed, 42u);
  EXPECT_EQ(c.federation.seed, 42u);
  EXPECT_EQ(c.model.hidden, (std::vector<std::size_t>{32, 16}));
  EXPECT_NEAR(SigmaForRound(c.federation, 9), 4.85, 1e-12);
  EXPECT_EQ(c.stop.kind, StopKind::kBudget);
  EXPECT_EQ(c.stop.method, AccountingMethod::kZcdp);
  EXPECT_TRUE(c.attack->all_surfaces);
  EXPECT_EQ(c.attack->victims, 5);
  EXPECT_TRUE(Parse("[model]\nhidden =\n").model.hidden.empty());
}

TEST(ConfigTest, ErrorsNameLineAndField) {
  EXPECT_NE(ErrorOf("[federation]\nclients = ten\n").find("line 2"), std::string::npos);
  EXPECT_NE(ErrorOf("[federation]\nclients = ten\n").find("clients"), std::string::npos);
  EXPECT_NE(ErrorOf("[federation]\ncleints = 3\n").find("cleints"), std::string::npos);
  EXPECT_NE(ErrorOf("[fed]\n").find("fed"), std::string::npos);
  EXPECT_NE(ErrorOf("[privacy]\nsigma\n").find("line 2"), std::string::npos);
  EXPECT_NE(ErrorOf("[federation]\nalgorithm = fedavg\n"), "");
  EXPECT_NE(ErrorOf("[federation]\nclients = 5\nclients_per_round = 6\n"), "");
  EXPECT_NE(ErrorOf("[stop]\nkind = budget\nbudget = 1\n"), "");  // non-private
  EXPECT_NE(ErrorOf("[federation]\nlearning_rate = 0\n[attack]\nsurface = type0\n"), "");
  EXPECT_EQ(ErrorOf("[federation]\nlearning_rate = 0\n[attack]\nsurface = type2\n"), "");
  EXPECT_THROW(LoadConfig("/nonexistent/leaklab.ini"), ConfigError);
}

TEST(ConfigTest, PathsResolveAgainstConfigDirectory) {
  const ExperimentConfig c = Parse(
      "[dataset]\nsource = csv\npath = data/x.csv\n[attack]\ncheckpoint = /abs/m.ckpt\n",
      "/base/dir");
  EXPECT_EQ(fs::path(c.dataset.csv_path), fs::path("/base/dir/data/x.csv"));
  EXPECT_EQ(c.attack->checkpoint, "/abs/m.ckpt");
  EXPECT_EQ(fs::path(c.output_dir), fs::path("/base/dir/out"));
  const ExperimentConfig shipped =
      LoadConfig(LEAKLAB_SOURCE_DIR "/configs/mnist_utility_fed_cdp.ini");
  EXPECT_TRUE(fs::exists(shipped.dataset.train_images)) << shipped.dataset.train_images;
}

TEST(LoadDatasetTest, DeterministicScaledAndSplit) {
  const ExperimentConfig c = TinySynthetic();
  const LoadedData a = LoadDataset(c.dataset, c.master_seed);
  const LoadedData b = LoadDataset(c.dataset, c.master_seed);
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_EQ(a.train.size(), 240u);
  EXPECT_EQ(a.validation.size(), 60u);
  EXPECT_EQ(a.num_classes, 3);
  for (const Example& e : a.train) {
    for (double v : e.features) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_NE(LoadDataset(c.dataset, 8).hash, a.hash);
  EXPECT_EQ(DatasetHash(a.train, a.validation), a.hash);
}

TEST(LoadDatasetTest, IdxWithExplicitValidation) {
  ExperimentConfig c = LoadConfig(LEAKLAB_SOURCE_DIR "/configs/mnist_utility_fed_cdp.ini");
  c.dataset.train_n = 200;
  c.dataset.val_n = 50;
  const LoadedData d = LoadDataset(c.dataset, c.master_seed);
  EXPECT_EQ(d.train.size(), 200u);
  EXPECT_EQ(d.validation.size(), 50u);
  EXPECT_EQ(d.height, 28u);
  c.dataset.train_images = "/nonexistent";
  EXPECT_THROW(LoadDataset(c.dataset, c.master_seed), DatasetError);
}

TEST(ReportTest, RoundAndSummaryRoundTrip) {
  const ExperimentConfig c = TinySynthetic();
  const LoadedData data = LoadDataset(c.dataset, c.master_seed);
  const TrainingReport r = RunTrainExperiment(c, data);
  std::stringstream rounds, summary;
  WriteRoundReport(r, rounds);
  WriteTrainSummary(r, summary);
  EXPECT_EQ(rounds.str().substr(0, rounds.str().find('\n')),
            "round,val_accuracy,sigma,mean_sensitivity,eps_moments,eps_zcdp,eps_advanced,"
            "eps_base");
  const TrainingReport back = ReadTrainReport(rounds, summary);
  EXPECT_EQ(back.per_round, r.per_round);
  EXPECT_EQ(back.algorithm, r.algorithm);
  EXPECT_EQ(back.final_accuracy, r.final_accuracy);
  EXPECT_EQ(back.rounds_used, r.rounds_used);
  ASSERT_EQ(back.spends.size(), r.spends.size());
  for (std::size_t i = 0; i < r.spends.size(); ++i) {
    EXPECT_EQ(back.spends[i].epsilon, r.spends[i].epsilon);
    EXPECT_EQ(back.spends[i].method, r.spends[i].method);
  }
  std::istringstream bad_rounds("round,val_accuracy\n0,x\n"), any("");
  EXPECT_THROW(ReadTrainReport(bad_rounds, any), FormatError);
}

TEST(ReportTest, NonPrivateSummaryLeavesEpsilonEmpty) {
  ExperimentConfig c = TinySynthetic();
  c.federation.algorithm.kind = AlgorithmKind::kNonPrivate;
  const LoadedData data = LoadDataset(c.dataset, c.master_seed);
  std::stringstream s;
  WriteTrainSummary(RunTrainExperiment(c, data), s);
  std::string header, row;
  std::getline(s, header);
  std::getline(s, row);
  EXPECT_EQ(row.substr(row.size() - 4), ",,,,");
}

TEST(CheckpointTest, RoundTripIsExact) {
  for (const ModelParams& m : {testing::SmallMlp(5, {4, 3}, 2, 9), testing::SmallConvNet(4)}) {
    std::stringstream s;
    WriteCheckpoint(m, s);
    EXPECT_EQ(s.str().substr(0, 21), "leaklab-checkpoint v1");
    EXPECT_EQ(ReadCheckpoint(s), m);
  }
}

TEST(CheckpointTest, MalformedInputReportsLine) {
  std::istringstream magic("leaklab-checkpoint v2\n");
  EXPECT_THROW(ReadCheckpoint(magic), FormatError);
  std::stringstream s;
  WriteCheckpoint(testing::SmallMlp(2, {}, 2), s);
  std::string text = s.str();
  text.replace(text.find("weights 2 2"), 11, "weights 2 3");
  std::istringstream shape(text);
  try {
    ReadCheckpoint(shape);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_GT(e.line(), 1u);
  }
  std::istringstream cut(s.str().substr(0, s.str().size() / 2));
  EXPECT_THROW(ReadCheckpoint(cut), FormatError);
}

TEST(AttackExperimentTest, VictimsDistinctAndDeterministic) {
  ExperimentConfig c = TinySynthetic();
  c.attack = AttackSection{};
  c.attack->victims = 4;
  c.attack->all_surfaces = true;
  c.attack->attack.max_iterations = 20;
  const LoadedData data = LoadDataset(c.dataset, c.master_seed);
  const ModelParams m = AttackTargetModel(c, data);
  EXPECT_EQ(m, InitialModel(c, data));
  const AttackRun a = RunAttackExperiment(c, data, m);
  const AttackRun b = RunAttackExperiment(c, data, m);
  EXPECT_EQ(a.victim_indices, b.victim_indices);
  EXPECT_EQ(std::set<std::size_t>(a.victim_indices.begin(), a.victim_indices.end()).size(), 4u);
  ASSERT_EQ(a.surfaces.size(), 3u);
  std::stringstream rep, sum, trace;
  WriteAttackReport(a, data.train, rep);
  WriteAttackSummary(a, sum);
  WriteAttackTrace(a, trace);
  const std::string rep_text = rep.str(), sum_text = sum.str();
  EXPECT_EQ(std::count(rep_text.begin(), rep_text.end(), '\n'), 1 + 12);
  EXPECT_EQ(std::count(sum_text.begin(), sum_text.end(), '\n'), 1 + 3);
  c.attack->victims = 1000;
  EXPECT_THROW(RunAttackExperiment(c, data, m), std::invalid_argument);
}

TEST(AccountRowsTest, OneRowPerMethod) {
  PrivacyLedger ledger;
  for (int t = 0; t < 10; ++t) ledger.Append({t, 0, 6.0, 4.0, 0.01, Mechanism::kPerExample});
  const std::vector<AccountingMethod> methods = {AccountingMethod::kBase,
                                                 AccountingMethod::kMoments};
  std::stringstream s;
  WriteAccountRows(ledger, methods, s);
  std::string header, base, moments;
  std::getline(s, header);
  std::getline(s, base);
  std::getline(s, moments);
  EXPECT_EQ(header, "method,epsilon,delta,steps");
  EXPECT_EQ(base.substr(0, 5), "base,");
  EXPECT_EQ(moments.substr(0, 8), "moments,");
  EXPECT_NE(base.find(",10"), std::string::npos);
}

}  // namespace
}  // namespace leaklab
