#!/usr/bin/env python3
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
"""Independent oracle for the sampled-Gaussian log moments.

Evaluates both directions of the moment integral with mpmath at 50 digits
and prints the values pinned in accountant_test.cc.
"""
import mpmath as mp

mp.mp.dps = 50


def log_moment(q, sigma, lam):
    q, sigma = mp.mpf(q), mp.mpf(sigma)

    def mu0(z):
        return mp.npdf(z, 0, sigma)

    def mu1(z):
        return mp.npdf(z, 1, sigma)

    def mu(z):
        return (1 - q) * mu0(z) + q * mu1(z)

    def integrate(f):
        # Integrand mass sits within a few hundred sigma of the origin.
        pts = [-40 * sigma * lam ** 0.5 - 40, -10 * sigma, 0, 1, 10 * sigma,
               40 * sigma * lam ** 0.5 + 40]
        return mp.quad(f, pts)

    a = integrate(lambda z: mu(z) * (mu(z) / mu0(z)) ** lam)
    b = integrate(lambda z: mu0(z) * (mu0(z) / mu(z)) ** lam)
    return mp.log(max(a, b))


def moments_epsilon(q, sigma, steps, delta):
    best = mp.inf
    for lam in range(1, 65):
        best = min(best, (steps * log_moment(q, sigma, lam) + mp.log(1 / delta)) / lam)
    return best


if __name__ == "__main__":
    for q, sigma, lam in [(0.01, 6, 8), (0.01, 6, 32), (1 / 120, 6, 16), (0.1, 6, 12),
                          (0.1, 2, 4), (0.05, 1, 3)]:
        print(f"LogMoment({q!r}, {sigma}, {lam}) = {mp.nstr(log_moment(q, sigma, lam), 17)}")
    for q, sigma, steps in [(1 / 120, 6, 10000), (0.01, 6, 10000), (0.1, 6, 100)]:
        print(f"moments eps q={q!r} sigma={sigma} steps={steps} = "
              f"{mp.nstr(moments_epsilon(q, sigma, steps, 1e-5), 12)}")
