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
#ifndef LEAKLAB_RNG_H_
#define LEAKLAB_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace leaklab {

using Rng = std::mt19937_64;

// Hierarchical seed derivation. Every random stream in an experiment is
// DeriveSeed(master, "purpose", i, j, ...) so that streams never overlap and
// a single master seed fixes all of them:
//
//   partition            DeriveSeed(master, "partition")
//   model init           DeriveSeed(master, "init")
//   synthetic data       DeriveSeed(master, "dataset")
//   train/val split      DeriveSeed(master, "split")
//   client sampling      DeriveSeed(master, "clients", round)
//   local batches        DeriveSeed(master, "batch", round, client)
//   mechanism noise      DeriveSeed(master, "noise", round, client)
//   server-side noise    DeriveSeed(master, "server_noise", round, client)
//   attack victims       DeriveSeed(master, "victims")
//   attack seeds         DeriveSeed(master, "attack", victim)
std::uint64_t DeriveSeed(std::uint64_t parent, std::string_view purpose,
                         std::initializer_list<std::uint64_t> indices = {});

inline Rng MakeRng(std::uint64_t parent, std::string_view purpose,
                   std::initializer_list<std::uint64_t> indices = {}) {
  return Rng(DeriveSeed(parent, purpose, indices));
}

}  // namespace leaklab

#endif  // LEAKLAB_RNG_H_
