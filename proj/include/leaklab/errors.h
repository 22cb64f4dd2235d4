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
#ifndef LEAKLAB_ERRORS_H_
#define LEAKLAB_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace leaklab {

// Argument errors use std::invalid_argument. The types below mark the
// failure classes callers are expected to tell apart.

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::size_t layer)
      : std::runtime_error(what + " (layer " + std::to_string(layer) + ")"),
        layer_(layer) {}
  std::size_t layer() const { return layer_; }

 private:
  std::size_t layer_;
};

// Raised when every clipped gradient in a batch is exactly zero, so the
// l2-max sensitivity would be 0.
class DegenerateSensitivityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AccountingError : public std::runtime_error {
 public:
  AccountingError(const std::string& what, int order, std::size_t entry)
      : std::runtime_error(what + " (lambda=" + std::to_string(order) +
                           ", entry " + std::to_string(entry) + ")"),
        order_(order),
        entry_(entry) {}
  int order() const { return order_; }
  std::size_t entry() const { return entry_; }

 private:
  int order_;
  std::size_t entry_;
};

}  // namespace leaklab

#endif  // LEAKLAB_ERRORS_H_
