# Copyright 2026 The leaklab Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Differentially private federated learning and gradient leakage attacks."""

from leaklab._leaklab import (
    ConfigError,
    Dataset,
    DatasetError,
    ExperimentConfig,
    FormatError,
    LedgerParseError,
    Model,
    TrainingReport,
    account,
    attack,
    default_config_text,
    initial_model,
    load_config,
    load_dataset,
    log_moment,
    noise_scale,
    parse_config,
    read_ledger,
    rmse,
    train,
)

__all__ = [
    "ConfigError",
    "Dataset",
    "DatasetError",
    "ExperimentConfig",
    "FormatError",
    "LedgerParseError",
    "Model",
    "TrainingReport",
    "account",
    "attack",
    "default_config_text",
    "initial_model",
    "load_config",
    "load_dataset",
    "log_moment",
    "noise_scale",
    "parse_config",
    "read_ledger",
    "rmse",
    "train",
]
