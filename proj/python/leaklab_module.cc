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
// Python bindings for the leaklab core: configs, datasets, training, attack
// campaigns and the privacy accountants.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "leaklab/accountant.h"
#include "leaklab/attack.h"
#include "leaklab/config.h"
#include "leaklab/dataset.h"
#include "leaklab/dp_noise.h"
#include "leaklab/federation.h"
#include "leaklab/harness.h"

namespace py = pybind11;

namespace leaklab {
namespace {

void SetSeed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.master_seed = seed;
  cfg.federation.seed = seed;
  if (cfg.attack) cfg.attack->attack.seed = seed;
}

LedgerEntry EntryFromTuple(const py::tuple& t) {
  if (t.size() != 6) throw py::value_error("ledger entries are (t, l, sigma, S, q, mechanism)");
  LedgerEntry e;
  e.round = t[0].cast<int>();
  e.step = t[1].cast<int>();
  e.sigma = t[2].cast<double>();
  e.sensitivity = t[3].cast<double>();
  e.sampling_rate = t[4].cast<double>();
  const auto mechanism = t[5].cast<std::string>();
  if (mechanism == "per_example") {
    e.mechanism = Mechanism::kPerExample;
  } else if (mechanism == "per_client") {
    e.mechanism = Mechanism::kPerClient;
  } else {
    throw py::value_error("mechanism must be per_example or per_client");
  }
  return e;
}

PrivacyLedger LedgerFrom(const std::vector<py::tuple>& entries, double delta) {
  PrivacyLedger ledger(delta);
  for (const auto& t : entries) ledger.Append(EntryFromTuple(t));
  return ledger;
}

py::dict SpendDict(const PrivacySpend& s) {
  py::dict d;
  d["method"] = MethodName(s.method);
  d["epsilon"] = s.epsilon;
  d["delta"] = s.delta;
  return d;
}

py::list RoundsList(const TrainingReport& r) {
  py::list rows;
  for (const RoundRecord& rec : r.per_round) {
    py::dict d;
    d["round"] = rec.round;
    d["val_accuracy"] = rec.val_accuracy;
    d["sigma"] = rec.sigma;
    d["mean_sensitivity"] = rec.mean_sensitivity;
    d["eps_moments"] = rec.eps_moments;
    d["eps_zcdp"] = rec.eps_zcdp;
    d["eps_advanced"] = rec.eps_advanced;
    d["eps_base"] = rec.eps_base;
    rows.append(d);
  }
  return rows;
}

py::list LedgerList(const PrivacyLedger& ledger) {
  py::list out;
  for (const LedgerEntry& e : ledger.entries()) {
    out.append(py::make_tuple(e.round, e.step, e.sigma, e.sensitivity, e.sampling_rate,
                              e.mechanism == Mechanism::kPerExample ? "per_example"
                                                                    : "per_client"));
  }
  return out;
}

py::list AttackList(const AttackRun& run) {
  py::list out;
  for (const SurfaceResult& s : run.surfaces) {
    py::dict d;
    d["surface"] = SurfaceName(s.surface);
    d["attack_success_rate"] = s.campaign.attack_success_rate;
    d["mean_distance"] = s.campaign.mean_distance;
    d["mean_iterations"] = s.campaign.mean_iterations;
    py::list victims;
    for (std::size_t v = 0; v < s.campaign.victims.size(); ++v) {
      const AttackReport& r = s.campaign.victims[v];
      py::dict row;
      row["train_index"] = run.victim_indices[v];
      row["resilient"] = r.resilient;
      row["recon_distance"] = r.recon_distance;
      row["iterations_used"] = r.iterations_used;
      row["diverged"] = r.diverged;
      row["loss"] = r.per_iteration_loss;
      victims.append(row);
    }
    d["victims"] = victims;
    out.append(d);
  }
  return out;
}

}  // namespace
}  // namespace leaklab

PYBIND11_MODULE(_leaklab, m) {
  using namespace leaklab;
  m.doc() = "Differentially private federated learning and gradient leakage attacks.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DatasetError>(m, "DatasetError", PyExc_OSError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<LedgerParseError>(m, "LedgerParseError", PyExc_ValueError);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readwrite("name", &ExperimentConfig::name)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_property(
          "seed", [](const ExperimentConfig& c) { return c.master_seed; }, &SetSeed)
      .def_property(
          "algorithm",
          [](const ExperimentConfig& c) { return AlgorithmName(c.federation.algorithm.kind); },
          [](ExperimentConfig& c, const std::string& name) {
            c.federation.algorithm.kind = ParseAlgorithm(name);
          })
      .def_property(
          "rounds", [](const ExperimentConfig& c) { return c.federation.rounds; },
          [](ExperimentConfig& c, int t) {
            c.federation.rounds = t;
            c.federation.privacy.schedule.total_rounds = t;
          })
      .def_property(
          "noise_enabled", [](const ExperimentConfig& c) { return c.federation.noise_enabled; },
          [](ExperimentConfig& c, bool on) { c.federation.noise_enabled = on; })
      .def_property(
          "clip", [](const ExperimentConfig& c) { return c.federation.privacy.clip_bound; },
          [](ExperimentConfig& c, double v) { c.federation.privacy.clip_bound = v; })
      .def_property_readonly(
          "sigma0", [](const ExperimentConfig& c) { return c.federation.privacy.sigma0(); })
      .def_property_readonly("has_attack",
                             [](const ExperimentConfig& c) { return c.attack.has_value(); })
      .def("sigma_at", [](const ExperimentConfig& c, int t) {
        return SigmaForRound(c.federation, t);
      });

  m.def("load_config", &LoadConfig, py::arg("path"));
  m.def(
      "parse_config",
      [](const std::string& text, const std::string& base_dir) {
        std::istringstream in(text);
        return ParseConfig(in, base_dir);
      },
      py::arg("text"), py::arg("base_dir") = ".");
  m.def("default_config_text", &DefaultConfigText);

  py::class_<LoadedData>(m, "Dataset")
      .def_property_readonly("train_size", [](const LoadedData& d) { return d.train.size(); })
      .def_property_readonly("validation_size",
                             [](const LoadedData& d) { return d.validation.size(); })
      .def_readonly("num_features", &LoadedData::num_features)
      .def_readonly("num_classes", &LoadedData::num_classes)
      .def_readonly("hash", &LoadedData::hash)
      .def("train_example", [](const LoadedData& d, std::size_t i) {
        if (i >= d.train.size()) throw py::index_error("training example out of range");
        return py::make_tuple(d.train[i].features, d.train[i].label);
      });
  m.def(
      "load_dataset",
      [](const ExperimentConfig& cfg) { return LoadDataset(cfg.dataset, cfg.master_seed); },
      py::arg("config"));

  py::class_<ModelParams>(m, "Model")
      .def_property_readonly("num_layers", &ModelParams::num_layers)
      .def_property_readonly("num_parameters",
                             [](const ModelParams& p) { return p.params.Flatten().size(); })
      .def("to_checkpoint",
           [](const ModelParams& p) {
             std::ostringstream out;
             WriteCheckpoint(p, out);
             return out.str();
           })
      .def_static("from_checkpoint",
                  [](const std::string& text) {
                    std::istringstream in(text);
                    return ReadCheckpoint(in);
                  })
      .def("__eq__", [](const ModelParams& a, const ModelParams& b) { return a == b; });
  m.def("initial_model", &InitialModel, py::arg("config"), py::arg("data"));

  py::class_<TrainingReport>(m, "TrainingReport")
      .def_readonly("algorithm", &TrainingReport::algorithm)
      .def_readonly("initial_accuracy", &TrainingReport::initial_accuracy)
      .def_readonly("final_accuracy", &TrainingReport::final_accuracy)
      .def_readonly("rounds_used", &TrainingReport::rounds_used)
      .def_readonly("stop_reached", &TrainingReport::stop_reached)
      .def_readonly("model", &TrainingReport::model)
      .def_property_readonly("rounds", &RoundsList)
      .def_property_readonly("ledger", [](const TrainingReport& r) { return LedgerList(r.ledger); })
      .def_property_readonly("spends", [](const TrainingReport& r) {
        py::list out;
        for (const PrivacySpend& s : r.spends) out.append(SpendDict(s));
        return out;
      });
  m.def(
      "train",
      [](const ExperimentConfig& cfg, const LoadedData& data) {
        py::gil_scoped_release release;
        return RunTrainExperiment(cfg, data);
      },
      py::arg("config"), py::arg("data"));

  m.def(
      "attack",
      [](const ExperimentConfig& cfg, const LoadedData& data,
         std::optional<ModelParams> model) {
        if (!cfg.attack) throw py::value_error("config has no [attack] section");
        const ModelParams target = model ? *model : AttackTargetModel(cfg, data);
        AttackRun run;
        {
          py::gil_scoped_release release;
          run = RunAttackExperiment(cfg, data, target);
        }
        return AttackList(run);
      },
      py::arg("config"), py::arg("data"), py::arg("model") = py::none());

  m.def(
      "account",
      [](const std::vector<py::tuple>& entries, const std::string& method, double delta) {
        return SpendDict(Account(LedgerFrom(entries, delta), ParseMethod(method)));
      },
      py::arg("entries"), py::arg("method") = "moments", py::arg("delta") = 1e-5);
  m.def(
      "read_ledger",
      [](const std::string& text) {
        std::istringstream in(text);
        return LedgerList(PrivacyLedger::Read(in, 1e-5));
      },
      py::arg("text"));
  m.def("log_moment", &LogMoment, py::arg("q"), py::arg("sigma"), py::arg("order"));
  m.def(
      "noise_scale",
      [](const std::string& policy, double sigma0, double sigma_end, int total_rounds,
         int t, int step_size, double sigma_floor) {
        NoiseSchedule s;
        if (policy == "fixed") {
          s = NoiseSchedule::Fixed(sigma0, total_rounds);
        } else if (policy == "linear") {
          s = NoiseSchedule::LinearTo(sigma0, sigma_end, total_rounds, sigma_floor);
        } else if (policy == "exponential") {
          s = NoiseSchedule::ExponentialTo(sigma0, sigma_end, total_rounds, sigma_floor);
        } else if (policy == "staircase") {
          s = NoiseSchedule::StaircaseTo(sigma0, sigma_end, total_rounds, step_size,
                                         sigma_floor);
        } else {
          throw py::value_error("policy must be fixed, linear, exponential or staircase");
        }
        return NoiseScaleAt(s, t);
      },
      py::arg("policy"), py::arg("sigma0"), py::arg("sigma_end"), py::arg("total_rounds"),
      py::arg("t"), py::arg("step_size") = 10, py::arg("sigma_floor") = 0.5);
  m.def("rmse", [](const std::vector<double>& a, const std::vector<double>& b) {
    return Rmse(a, b);
  });
}
