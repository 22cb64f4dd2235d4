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
#ifndef LEAKLAB_SRC_QUADRATURE_H_
#define LEAKLAB_SRC_QUADRATURE_H_

#include <functional>

namespace leaklab::internal {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

// Adaptive 7/15-point Gauss-Kronrod on [a, b]; bisects until the Kronrod and
// Gauss estimates agree to within abs_tol in total, spread over [a, b] by
// length.
QuadratureResult IntegrateGaussKronrod(const std::function<double(double)>& f,
                                       double a, double b, double abs_tol,
                                       int max_depth = 24);

}  // namespace leaklab::internal

#endif  // LEAKLAB_SRC_QUADRATURE_H_
