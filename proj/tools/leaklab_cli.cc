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
// Command-line front end: train, attack, account and compare.
//
// Exit codes: 0 success, 1 unexpected failure, 2 bad config or usage,
// 3 dataset or checkpoint IO.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "leaklab/accountant.h"
#include "leaklab/config.h"
#include "leaklab/dataset.h"
#include "leaklab/format.h"
#include "leaklab/harness.h"

namespace leaklab {
namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::string out;
};

ExperimentConfig Load(const std::string& path, const CommonFlags& flags) {
  ExperimentConfig cfg = LoadConfig(path);
  if (flags.seed) {
    cfg.master_seed = *flags.seed;
    cfg.federation.seed = *flags.seed;
    if (cfg.attack) cfg.attack->attack.seed = *flags.seed;
  }
  if (!flags.out.empty()) cfg.output_dir = flags.out;
  return cfg;
}

std::filesystem::path OutputDir(const std::string& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

void WriteFile(const std::filesystem::path& path, const auto& write) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write(out);
  if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
}

double Epsilon(const TrainingReport& report, AccountingMethod method) {
  for (const PrivacySpend& s : report.spends) {
    if (s.method == method) return s.epsilon;
  }
  return 0.0;
}

int Train(const std::string& config, const CommonFlags& flags) {
  const ExperimentConfig cfg = Load(config, flags);
  const LoadedData data = LoadDataset(cfg.dataset, cfg.master_seed);
  const TrainingReport report = RunTrainExperiment(cfg, data);
  const auto dir = OutputDir(cfg.output_dir);
  WriteFile(dir / "train_report.csv", [&](std::ostream& o) { WriteRoundReport(report, o); });
  WriteFile(dir / "train_summary.csv", [&](std::ostream& o) { WriteTrainSummary(report, o); });
  WriteFile(dir / "ledger.txt", [&](std::ostream& o) { report.ledger.Write(o); });
  WriteFile(dir / "model.ckpt", [&](std::ostream& o) { WriteCheckpoint(report.model, o); });
  std::printf("algorithm=%s final_accuracy=%s eps_moments=%s rounds=%d stop_reached=%d "
              "seconds_per_iteration=%.3g\n",
              report.algorithm.c_str(), FormatDouble(report.final_accuracy).c_str(),
              FormatDouble(Epsilon(report, AccountingMethod::kMoments)).c_str(),
              report.rounds_used, report.stop_reached ? 1 : 0,
              report.seconds_per_iteration);
  return 0;
}

int Attack(const std::string& config, const CommonFlags& flags) {
  const ExperimentConfig cfg = Load(config, flags);
  if (!cfg.attack) throw UsageError("config has no [attack] section");
  const LoadedData data = LoadDataset(cfg.dataset, cfg.master_seed);
  const ModelParams model = AttackTargetModel(cfg, data);
  const AttackRun run = RunAttackExperiment(cfg, data, model);
  const auto dir = OutputDir(cfg.output_dir);
  WriteFile(dir / "attack_report.csv",
            [&](std::ostream& o) { WriteAttackReport(run, data.train, o); });
  WriteFile(dir / "attack_summary.csv", [&](std::ostream& o) { WriteAttackSummary(run, o); });
  WriteFile(dir / "attack_trace.csv", [&](std::ostream& o) { WriteAttackTrace(run, o); });
  for (const SurfaceResult& s : run.surfaces) {
    std::printf("algorithm=%s surface=%s victims=%zu asr=%s mean_distance=%s "
                "mean_iterations=%s\n",
                AlgorithmName(cfg.federation.algorithm.kind), SurfaceName(s.surface),
                s.campaign.victims.size(),
                FormatDouble(s.campaign.attack_success_rate).c_str(),
                FormatDouble(s.campaign.mean_distance).c_str(),
                FormatDouble(s.campaign.mean_iterations).c_str());
  }
  return 0;
}

int Account(const std::string& ledger_path, const std::string& method,
            std::optional<double> delta, const std::string& config, const CommonFlags& flags) {
  double d = 1e-5;
  if (!config.empty()) d = LoadConfig(config).federation.privacy.delta;
  if (delta) d = *delta;
  if (!(d > 0.0 && d < 1.0)) throw UsageError("--delta must lie in (0, 1)");
  std::ifstream in(ledger_path);
  if (!in) throw DatasetError("cannot open ledger '" + ledger_path + "'");
  const PrivacyLedger ledger = PrivacyLedger::Read(in, d);
  if (ledger.empty()) throw UsageError("ledger '" + ledger_path + "' has no entries");
  std::vector<AccountingMethod> methods;
  if (method == "all") {
    methods = {AccountingMethod::kBase, AccountingMethod::kAdvanced, AccountingMethod::kZcdp,
               AccountingMethod::kMoments};
  } else {
    methods = {ParseMethod(method)};
  }
  const auto dir = OutputDir(flags.out.empty() ? "." : flags.out);
  WriteFile(dir / "account.csv",
            [&](std::ostream& o) { WriteAccountRows(ledger, methods, o); });
  WriteAccountRows(ledger, methods, std::cout);
  return 0;
}

int Compare(const std::vector<std::string>& configs, const CommonFlags& flags) {
  if (configs.size() < 2) throw UsageError("compare needs at least two configs");
  std::vector<ExperimentConfig> cfgs;
  for (const std::string& path : configs) cfgs.push_back(Load(path, flags));
  std::vector<CompareRow> rows;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    ExperimentConfig& cfg = cfgs[i];
    if (!cfg.attack) {
      cfg.attack = AttackSection{};
      cfg.attack->attack.seed = cfg.master_seed;
    }
    cfg.attack->all_surfaces = true;
    if (!(cfg.federation.learning_rate > 0.0)) {
      throw UsageError(configs[i] + ": type0 and type1 attacks need learning_rate > 0");
    }
    const LoadedData data = LoadDataset(cfg.dataset, cfg.master_seed);
    if (!rows.empty() && data.hash != rows.front().dataset_hash) {
      throw UsageError(configs[i] + " uses a different dataset than " + configs.front());
    }
    CompareRow row;
    row.config = configs[i];
    row.name = cfg.name;
    row.algorithm = AlgorithmName(cfg.federation.algorithm.kind);
    row.dataset_hash = data.hash;
    row.report = RunTrainExperiment(cfg, data);
    row.attack = RunAttackExperiment(cfg, data, AttackTargetModel(cfg, data));
    std::printf("config=%s algorithm=%s final_accuracy=%s eps_moments=%s rounds=%d\n",
                configs[i].c_str(), row.algorithm.c_str(),
                FormatDouble(row.report.final_accuracy).c_str(),
                FormatDouble(Epsilon(row.report, AccountingMethod::kMoments)).c_str(),
                row.report.rounds_used);
    rows.push_back(std::move(row));
  }
  const auto dir = OutputDir(flags.out.empty() ? cfgs.front().output_dir : flags.out);
  WriteFile(dir / "compare.csv", [&](std::ostream& o) { WriteCompare(rows, o); });
  return 0;
}

int Run(int argc, char** argv) {
  CLI::App app{"leaklab: gradient leakage and differentially private federated learning"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::string config;
  std::vector<std::string> configs;
  std::string ledger;
  std::string method = "all";
  std::optional<double> delta;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", flags.seed, "Override the master seed");
    sub->add_option("--out", flags.out, "Override the output directory");
  };
  CLI::App* train = app.add_subcommand("train", "Run federated training");
  train->add_option("--config", config, "Experiment config")->required();
  add_common(train);
  CLI::App* attack = app.add_subcommand("attack", "Run a gradient leakage campaign");
  attack->add_option("--config", config, "Experiment config")->required();
  add_common(attack);
  CLI::App* account = app.add_subcommand("account", "Account a privacy ledger");
  account->add_option("ledger", ledger, "Ledger file (t,l,sigma,S,q,mechanism)")->required();
  account->add_option("--method", method, "Accountant")
      ->check(CLI::IsMember({"base", "advanced", "zcdp", "moments", "all"}));
  account->add_option("--delta", delta, "Target delta (default: config or 1e-05)");
  account->add_option("--config", config, "Take delta from this config");
  account->add_option("--out", flags.out, "Output directory for account.csv");
  CLI::App* compare = app.add_subcommand("compare", "Train and attack several configs");
  compare->add_option("--config,configs", configs, "Experiment configs (two or more)")
      ->required();
  add_common(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train) return Train(config, flags);
    if (*attack) return Attack(config, flags);
    if (*account) return Account(ledger, method, delta, config, flags);
    return Compare(configs, flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const LedgerParseError& e) {
    std::cerr << "ledger error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DatasetError& e) {
    std::cerr << "dataset error: " << e.what() << '\n';
    return kExitData;
  } catch (const FormatError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid setting: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace
}  // namespace leaklab

int main(int argc, char** argv) { return leaklab::Run(argc, argv); }
