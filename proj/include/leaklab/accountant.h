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
#ifndef LEAKLAB_ACCOUNTANT_H_
#define LEAKLAB_ACCOUNTANT_H_

#include <array>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace leaklab {

enum class Mechanism { kPerExample, kPerClient };

// One noise-injection event. Entries sharing (round, step) come from
// different clients in the same global step; they compose in parallel.
struct LedgerEntry {
  int round = 0;
  int step = 0;
  double sigma = 1.0;
  double sensitivity = 1.0;
  double sampling_rate = 1.0;
  Mechanism mechanism = Mechanism::kPerExample;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

class LedgerParseError : public std::runtime_error {
 public:
  LedgerParseError(const std::string& what, std::size_t line)
      : std::runtime_error("ledger line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Append-only record of noise-injection events, ordered by (round, step).
class PrivacyLedger {
 public:
  explicit PrivacyLedger(double delta = 1e-5);

  void Append(const LedgerEntry& entry);
  void Append(std::span<const LedgerEntry> entries);

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  double delta() const { return delta_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  // One line per entry: t,l,sigma,S,q,mechanism
  void Write(std::ostream& out) const;
  // Blank lines and lines starting with '#' are skipped.
  static PrivacyLedger Read(std::istream& in, double delta);

 private:
  double delta_;
  std::vector<LedgerEntry> entries_;
};

enum class AccountingMethod { kBase, kAdvanced, kZcdp, kMoments, kParallel };

const char* MethodName(AccountingMethod method);
AccountingMethod ParseMethod(const std::string& name);

struct PrivacySpend {
  double epsilon = 0.0;
  double delta = 0.0;
  AccountingMethod method = AccountingMethod::kBase;

  friend bool operator==(const PrivacySpend&, const PrivacySpend&) = default;
};

// A sequential composition step: the most expensive entry of a (round, step)
// group.
struct CompositionStep {
  double sigma;
  double sampling_rate;
  std::size_t first_entry;
};
std::vector<CompositionStep> CompositionSteps(std::span<const LedgerEntry> entries);
std::vector<CompositionStep> CompositionSteps(const PrivacyLedger& ledger);

// Per-step epsilon of the subsampled Gaussian mechanism used by the base and
// advanced accountants: ln(1 + q (e^eps - 1)) with eps = MinEpsilonForSigma.
double AmplifiedStepEpsilon(double sigma, double sampling_rate, double delta);

PrivacySpend BaseCompose(const PrivacyLedger& ledger);
PrivacySpend ParallelCompose(std::span<const PrivacySpend> spends);

// eps' = eps sqrt(2 T ln(1/slack)) + T eps (e^eps - 1), delta' = T delta + slack.
PrivacySpend AdvancedCompose(double step_epsilon, double step_delta, long steps,
                             double slack);
// Heterogeneous form over the ledger's amplified per-step epsilons, with the
// ledger delta as slack.
PrivacySpend AdvancedCompose(const PrivacyLedger& ledger);

// Per-step rho = min(1 / (2 sigma^2), q^2 / sigma^2); the q^2/sigma^2 branch
// is the moment bound for the subsampled Gaussian and is an approximation,
// not a tight amplification result. eps = rho + 2 sqrt(rho ln(1/delta)).
PrivacySpend ZcdpEpsilon(const PrivacyLedger& ledger);

inline constexpr int kMaxMomentOrder = 64;

// Log moment alpha(lambda) of the privacy loss of the sampled Gaussian
// mechanism, log max(E_mu[(mu/mu0)^lambda], E_mu0[(mu0/mu)^lambda]) with
// mu0 = N(0, sigma^2), mu = (1-q) mu0 + q N(1, sigma^2), by adaptive
// Gauss-Kronrod quadrature. Results are memoized per (q, sigma).
double LogMoment(double sampling_rate, double sigma, int lambda);

// eps = min over lambda in [1, max_order] of (sum alpha(lambda) + ln(1/delta)) / lambda.
PrivacySpend MomentsEpsilon(const PrivacyLedger& ledger,
                            int max_order = kMaxMomentOrder);

// Dispatches to the accountant for `method`; kParallel is not a ledger method.
PrivacySpend Account(const PrivacyLedger& ledger, AccountingMethod method);

// Running sums behind every ledger accountant, for ledgers that grow a round
// at a time. Each Add must start a new (round, step) group; Spend then equals
// Account on the concatenated ledger.
class RunningAccountant {
 public:
  explicit RunningAccountant(double delta = 1e-5);
  void Add(std::span<const LedgerEntry> entries);
  PrivacySpend Spend(AccountingMethod method) const;
  PrivacySpend MomentsSpend(int max_order) const;
  long steps() const { return steps_; }
  double delta() const { return delta_; }

 private:
  double delta_;
  long steps_ = 0;
  std::size_t entries_seen_ = 0;
  double base_epsilon_ = 0.0;
  double sum_delta_ = 0.0;
  double sum_sq_ = 0.0;
  double sum_excess_ = 0.0;
  double rho_ = 0.0;
  std::array<double, kMaxMomentOrder + 1> log_moments_;
};

bool BudgetExhausted(const PrivacyLedger& ledger, AccountingMethod method,
                     double budget);

}  // namespace leaklab

#endif  // LEAKLAB_ACCOUNTANT_H_
