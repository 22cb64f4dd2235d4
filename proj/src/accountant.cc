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
#include "leaklab/accountant.h"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <utility>

#include "leaklab/dp_noise.h"
#include "leaklab/errors.h"
#include "leaklab/format.h"
#include "quadrature.h"

namespace leaklab {
namespace {

void ValidateEntry(const LedgerEntry& e) {
  if (!(e.sampling_rate > 0.0 && e.sampling_rate <= 1.0)) {
    throw std::invalid_argument("ledger entry sampling rate must lie in (0, 1]");
  }
  if (!(e.sigma > 0.0)) throw std::invalid_argument("ledger entry sigma must be positive");
  if (!(e.sensitivity >= 0.0)) {
    throw std::invalid_argument("ledger entry sensitivity must be non-negative");
  }
}

bool Before(const LedgerEntry& a, const LedgerEntry& b) {
  return std::pair(a.round, a.step) < std::pair(b.round, b.step);
}

void RequireNonEmpty(const PrivacyLedger& ledger, const char* who) {
  if (ledger.empty()) {
    throw std::invalid_argument(std::string(who) + ": ledger is empty");
  }
}

}  // namespace

PrivacyLedger::PrivacyLedger(double delta) : delta_(delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("ledger delta must lie in (0, 1)");
  }
}

void PrivacyLedger::Append(const LedgerEntry& entry) {
  ValidateEntry(entry);
  if (!entries_.empty() && Before(entry, entries_.back())) {
    throw std::invalid_argument("ledger entries must be appended in (round, step) order");
  }
  entries_.push_back(entry);
}

void PrivacyLedger::Append(std::span<const LedgerEntry> entries) {
  for (const auto& e : entries) Append(e);
}

void PrivacyLedger::Write(std::ostream& out) const {
  for (const auto& e : entries_) {
    out << e.round << ',' << e.step << ',' << FormatDouble(e.sigma) << ','
        << FormatDouble(e.sensitivity) << ',' << FormatDouble(e.sampling_rate)
        << ',' << (e.mechanism == Mechanism::kPerExample ? "per_example" : "per_client")
        << '\n';
  }
}

PrivacyLedger PrivacyLedger::Read(std::istream& in, double delta) {
  PrivacyLedger ledger(delta);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 6) {
      throw LedgerParseError("expected 6 fields t,l,sigma,S,q,mechanism", line_no);
    }
    LedgerEntry e;
    auto parse_int = [&](const std::string& s, int& out) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw LedgerParseError("bad integer '" + s + "'", line_no);
      }
    };
    auto parse_double = [&](const std::string& s, double& out) {
      if (!ParseDouble(s, out)) throw LedgerParseError("bad number '" + s + "'", line_no);
    };
    parse_int(fields[0], e.round);
    parse_int(fields[1], e.step);
    parse_double(fields[2], e.sigma);
    parse_double(fields[3], e.sensitivity);
    parse_double(fields[4], e.sampling_rate);
    if (fields[5] == "per_example") {
      e.mechanism = Mechanism::kPerExample;
    } else if (fields[5] == "per_client") {
      e.mechanism = Mechanism::kPerClient;
    } else {
      throw LedgerParseError("unknown mechanism '" + fields[5] + "'", line_no);
    }
    try {
      ledger.Append(e);
    } catch (const std::invalid_argument& err) {
      throw LedgerParseError(err.what(), line_no);
    }
  }
  return ledger;
}

const char* MethodName(AccountingMethod method) {
  switch (method) {
    case AccountingMethod::kBase: return "base";
    case AccountingMethod::kAdvanced: return "advanced";
    case AccountingMethod::kZcdp: return "zcdp";
    case AccountingMethod::kMoments: return "moments";
    case AccountingMethod::kParallel: return "parallel";
  }
  return "unknown";
}

AccountingMethod ParseMethod(const std::string& name) {
  if (name == "base") return AccountingMethod::kBase;
  if (name == "advanced") return AccountingMethod::kAdvanced;
  if (name == "zcdp") return AccountingMethod::kZcdp;
  if (name == "moments") return AccountingMethod::kMoments;
  if (name == "parallel") return AccountingMethod::kParallel;
  throw std::invalid_argument("unknown accounting method '" + name + "'");
}

std::vector<CompositionStep> CompositionSteps(std::span<const LedgerEntry> es) {
  std::vector<CompositionStep> steps;
  for (std::size_t i = 0; i < es.size(); ++i) {
    const bool same_group = i > 0 && es[i].round == es[i - 1].round &&
                            es[i].step == es[i - 1].step;
    if (!same_group) {
      steps.push_back({es[i].sigma, es[i].sampling_rate, i});
      continue;
    }
    CompositionStep& s = steps.back();
    s.sigma = std::min(s.sigma, es[i].sigma);
    s.sampling_rate = std::max(s.sampling_rate, es[i].sampling_rate);
  }
  return steps;
}

std::vector<CompositionStep> CompositionSteps(const PrivacyLedger& ledger) {
  return CompositionSteps(std::span<const LedgerEntry>(ledger.entries()));
}

double AmplifiedStepEpsilon(double sigma, double sampling_rate, double delta) {
  const double eps = MinEpsilonForSigma(sigma, delta);
  if (sampling_rate >= 1.0) return eps;
  return std::log1p(sampling_rate * std::expm1(eps));
}

PrivacySpend BaseCompose(const PrivacyLedger& ledger) {
  RequireNonEmpty(ledger, "BaseCompose");
  RunningAccountant acc(ledger.delta());
  acc.Add(ledger.entries());
  return acc.Spend(AccountingMethod::kBase);
}

PrivacySpend ParallelCompose(std::span<const PrivacySpend> spends) {
  if (spends.empty()) throw std::invalid_argument("ParallelCompose: no spends");
  PrivacySpend out{0.0, 0.0, AccountingMethod::kParallel};
  for (const auto& s : spends) {
    out.epsilon = std::max(out.epsilon, s.epsilon);
    out.delta = std::max(out.delta, s.delta);
  }
  return out;
}

PrivacySpend AdvancedCompose(double step_epsilon, double step_delta, long steps,
                             double slack) {
  if (!(step_epsilon >= 0.0)) throw std::invalid_argument("step epsilon must be >= 0");
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (!(slack > 0.0 && slack < 1.0)) throw std::invalid_argument("slack must lie in (0, 1)");
  const double t = static_cast<double>(steps);
  PrivacySpend out;
  out.method = AccountingMethod::kAdvanced;
  out.epsilon = step_epsilon * std::sqrt(2.0 * t * std::log(1.0 / slack)) +
                t * step_epsilon * std::expm1(step_epsilon);
  out.delta = t * step_delta + slack;
  return out;
}

PrivacySpend AdvancedCompose(const PrivacyLedger& ledger) {
  RequireNonEmpty(ledger, "AdvancedCompose");
  RunningAccountant acc(ledger.delta());
  acc.Add(ledger.entries());
  return acc.Spend(AccountingMethod::kAdvanced);
}

PrivacySpend ZcdpEpsilon(const PrivacyLedger& ledger) {
  RequireNonEmpty(ledger, "ZcdpEpsilon");
  RunningAccountant acc(ledger.delta());
  acc.Add(ledger.entries());
  return acc.Spend(AccountingMethod::kZcdp);
}

namespace {

// log of the likelihood ratio mu(z)/mu0(z) = log(1 - q + q exp((2z-1)/(2 sigma^2))).
double LogRatio(double q, double sigma, double z) {
  const double u = (2.0 * z - 1.0) / (2.0 * sigma * sigma);
  if (q >= 1.0) return u;
  if (u > 0.0) return u + std::log(q + (1.0 - q) * std::exp(-u));
  return std::log1p(q * std::expm1(u));
}

// log of integral N(z; 0, sigma^2) * (mu/mu0)^power dz.
double LogMixtureMoment(double q, double sigma, double power) {
  const double log_norm = -std::log(sigma * std::sqrt(2.0 * std::numbers::pi));
  auto log_integrand = [&](double z) {
    return -z * z / (2.0 * sigma * sigma) + log_norm + power * LogRatio(q, sigma, z);
  };
  // Both modes (z ~ 0 and z ~ power) carry Gaussian tails of width sigma.
  const double lo = std::min(0.0, power) - 40.0 * sigma - 1.0;
  const double hi = std::max(0.0, power) + 40.0 * sigma + 1.0;
  // Pieces of about sigma/2, capped so that tiny sigma stays tractable; the
  // adaptive rule resolves what the coarse pieces miss.
  constexpr int kMaxPieces = 2048;
  const int pieces = std::clamp(static_cast<int>(std::ceil((hi - lo) / (0.5 * sigma))), 1,
                                kMaxPieces);
  const double piece = (hi - lo) / pieces;
  // Locate the peak on a grid no coarser than sigma/4, then refine it by
  // golden-section search so the rescaled integrand never overflows.
  const int grid =
      std::min(1 << 20, static_cast<int>(std::ceil((hi - lo) / (0.25 * sigma))));
  const double h = (hi - lo) / grid;
  double best_z = lo;
  double peak = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double z = lo + h * i;
    const double v = log_integrand(z);
    if (v > peak) {
      peak = v;
      best_z = z;
    }
  }
  {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = best_z - h, b = best_z + h;
    for (int it = 0; it < 80 && b - a > 1e-12 * (1.0 + std::fabs(best_z)); ++it) {
      const double c = b - phi * (b - a), d = a + phi * (b - a);
      if (log_integrand(c) > log_integrand(d)) {
        b = d;
      } else {
        a = c;
      }
    }
    peak = std::max(peak, log_integrand(0.5 * (a + b)));
  }
  auto scaled = [&](double z) { return std::exp(log_integrand(z) - peak); };
  // The log integrand is a difference of terms of size ~mag, so the rescaled
  // integrand carries relative rounding noise of order eps * mag; asking for
  // less than that only makes the bisection spin.
  const double mag = best_z * best_z / (2.0 * sigma * sigma) +
                     std::fabs(power * LogRatio(q, sigma, best_z)) + 1.0;
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * mag;
  double total = 0.0;
  const double tol = std::max(1e-13, noise) * piece;
  for (int i = 0; i < pieces; ++i) {
    const double a = lo + piece * i;
    const double b = i + 1 == pieces ? hi : a + piece;
    total += internal::IntegrateGaussKronrod(scaled, a, b, tol).value;
  }
  return peak + std::log(total);
}

using MomentTable = std::array<double, kMaxMomentOrder + 1>;

const MomentTable& MomentsFor(double q, double sigma) {
  static std::mutex mu;
  static std::map<std::pair<std::uint64_t, std::uint64_t>, MomentTable> cache;
  const auto key = std::pair(std::bit_cast<std::uint64_t>(q),
                             std::bit_cast<std::uint64_t>(sigma));
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  MomentTable table{};
  table[0] = 0.0;
  for (int lambda = 1; lambda <= kMaxMomentOrder; ++lambda) {
    const double e_mu = LogMixtureMoment(q, sigma, lambda + 1.0);
    const double e_mu0 = LogMixtureMoment(q, sigma, -static_cast<double>(lambda));
    table[lambda] = std::max({e_mu, e_mu0, 0.0});
    if (!std::isfinite(e_mu) || !std::isfinite(e_mu0)) {
      table[lambda] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, table).first->second;
}

}  // namespace

double LogMoment(double sampling_rate, double sigma, int lambda) {
  if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) {
    throw std::invalid_argument("sampling rate must lie in (0, 1]");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (lambda < 1 || lambda > kMaxMomentOrder) {
    throw std::invalid_argument("moment order outside [1, 64]");
  }
  return MomentsFor(sampling_rate, sigma)[lambda];
}

PrivacySpend MomentsEpsilon(const PrivacyLedger& ledger, int max_order) {
  RequireNonEmpty(ledger, "MomentsEpsilon");
  RunningAccountant acc(ledger.delta());
  acc.Add(ledger.entries());
  return acc.MomentsSpend(max_order);
}

RunningAccountant::RunningAccountant(double delta) : delta_(delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  log_moments_.fill(0.0);
}

void RunningAccountant::Add(std::span<const LedgerEntry> entries) {
  for (const auto& s : CompositionSteps(entries)) {
    const MomentTable& m = MomentsFor(s.sampling_rate, s.sigma);
    for (int lambda = 1; lambda <= kMaxMomentOrder; ++lambda) {
      if (!std::isfinite(m[lambda])) {
        throw AccountingError("non-finite log moment", lambda, entries_seen_ + s.first_entry);
      }
    }
    const double e = AmplifiedStepEpsilon(s.sigma, s.sampling_rate, delta_);
    base_epsilon_ += e;
    sum_delta_ += s.sampling_rate * delta_;
    sum_sq_ += e * e;
    sum_excess_ += e * std::expm1(e);
    const double inv_var = 1.0 / (s.sigma * s.sigma);
    rho_ += std::min(0.5 * inv_var, s.sampling_rate * s.sampling_rate * inv_var);
    for (int lambda = 1; lambda <= kMaxMomentOrder; ++lambda) {
      log_moments_[lambda] += m[lambda];
    }
    ++steps_;
  }
  entries_seen_ += entries.size();
}

PrivacySpend RunningAccountant::MomentsSpend(int max_order) const {
  if (max_order < 1 || max_order > kMaxMomentOrder) {
    throw std::invalid_argument("max_order outside [1, 64]");
  }
  const double log_inv_delta = std::log(1.0 / delta_);
  double best = std::numeric_limits<double>::infinity();
  for (int lambda = 1; lambda <= max_order; ++lambda) {
    best = std::min(best, (log_moments_[lambda] + log_inv_delta) / lambda);
  }
  return {best, delta_, AccountingMethod::kMoments};
}

PrivacySpend RunningAccountant::Spend(AccountingMethod method) const {
  if (steps_ == 0) throw std::invalid_argument("accounting requires a non-empty ledger");
  switch (method) {
    case AccountingMethod::kBase:
      return {base_epsilon_, sum_delta_, method};
    case AccountingMethod::kAdvanced:
      return {std::sqrt(2.0 * std::log(1.0 / delta_) * sum_sq_) + sum_excess_,
              sum_delta_ + delta_, method};
    case AccountingMethod::kZcdp:
      return {rho_ + 2.0 * std::sqrt(rho_ * std::log(1.0 / delta_)), delta_, method};
    case AccountingMethod::kMoments:
      return MomentsSpend(kMaxMomentOrder);
    case AccountingMethod::kParallel:
      break;
  }
  throw std::invalid_argument("parallel composition applies to spends, not a ledger");
}

PrivacySpend Account(const PrivacyLedger& ledger, AccountingMethod method) {
  switch (method) {
    case AccountingMethod::kBase: return BaseCompose(ledger);
    case AccountingMethod::kAdvanced: return AdvancedCompose(ledger);
    case AccountingMethod::kZcdp: return ZcdpEpsilon(ledger);
    case AccountingMethod::kMoments: return MomentsEpsilon(ledger);
    case AccountingMethod::kParallel: break;
  }
  throw std::invalid_argument("parallel composition applies to spends, not a ledger");
}

bool BudgetExhausted(const PrivacyLedger& ledger, AccountingMethod method,
                     double budget) {
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
  if (ledger.empty()) return false;
  return Account(ledger, method).epsilon > budget;
}

}  // namespace leaklab
