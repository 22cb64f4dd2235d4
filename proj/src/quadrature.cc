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
#include "quadrature.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace leaklab::internal {
namespace {

constexpr double kNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kKronrod[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed nodes 1, 3, 5 and the center.
constexpr double kGauss[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

void Rule(const std::function<double(double)>& f, double a, double b,
          double& kronrod, double& gauss) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  kronrod = kKronrod[7] * fc;
  gauss = kGauss[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double s = f(c - h * kNodes[i]) + f(c + h * kNodes[i]);
    kronrod += kKronrod[i] * s;
    if (i % 2 == 1) gauss += kGauss[i / 2] * s;
  }
  kronrod *= h;
  gauss *= h;
}

// The tolerance is a density: each subinterval may contribute error in
// proportion to its length, so bisection never demands more than the whole.
void Adapt(const std::function<double(double)>& f, double a, double b,
           double tol_per_length, int depth, QuadratureResult& acc) {
  double k = 0.0, g = 0.0;
  Rule(f, a, b, k, g);
  const double err = std::fabs(k - g);
  const double tol = tol_per_length * (b - a);
  // Below ~50 ulps of the estimate the difference is rounding, not error.
  const double floor = 50.0 * std::numeric_limits<double>::epsilon() * std::fabs(k);
  const bool ok = err <= std::max(tol, floor);
  if (ok || depth <= 0 || !std::isfinite(k)) {
    acc.value += k;
    acc.error += err;
    if (!ok || !std::isfinite(k)) acc.converged = false;
    return;
  }
  const double mid = 0.5 * (a + b);
  Adapt(f, a, mid, tol_per_length, depth - 1, acc);
  Adapt(f, mid, b, tol_per_length, depth - 1, acc);
}

}  // namespace

QuadratureResult IntegrateGaussKronrod(const std::function<double(double)>& f,
                                       double a, double b, double abs_tol,
                                       int max_depth) {
  QuadratureResult acc;
  if (!(b > a)) return acc;
  Adapt(f, a, b, abs_tol / (b - a), max_depth, acc);
  return acc;
}

}  // namespace leaklab::internal
