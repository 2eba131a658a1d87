//
// Copyright 2026 The dpmean Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "dpmean/errors.hpp"

namespace dpmean {

enum class BudgetKind { kZcdp, kApproxDp };

// A privacy budget: either rho-zCDP or (epsilon, delta)-DP.
class PrivacyBudget {
 public:
  static PrivacyBudget zcdp(double rho);
  static PrivacyBudget approx_dp(double epsilon, double delta);

  BudgetKind kind() const { return kind_; }
  double rho() const;
  double epsilon() const;
  double delta() const;

 private:
  PrivacyBudget(BudgetKind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
  BudgetKind kind_;
  double a_;  // rho or epsilon
  double b_;  // delta (approx only)
};

// Budget shares are tracked as exact fractions of the declared budget so
// that ledger closure is an exact rational identity, not a float compare.
using BudgetFraction = boost::rational<std::int64_t>;

struct LedgerEntry {
  std::string label;
  BudgetFraction fraction;        // share of rho, or of epsilon
  BudgetFraction delta_fraction;  // share of delta (approx budgets only)
};

// Composition audit trail for one pipeline invocation. Charging past the
// declared budget throws immediately; finalize() demands the shares sum to
// exactly one.
class PrivacyLedger {
 public:
  explicit PrivacyLedger(PrivacyBudget declared);

  // zCDP charge, or an approx-DP charge that uses the same share of
  // epsilon and delta.
  void charge(std::string label, BudgetFraction fraction);
  // Approx-DP charge with distinct epsilon and delta shares.
  void charge(std::string label, BudgetFraction eps_fraction,
              BudgetFraction delta_fraction);

  void finalize() const;
  bool closed() const;

  const PrivacyBudget& declared() const { return declared_; }
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  BudgetFraction total_fraction() const { return total_; }
  BudgetFraction total_delta_fraction() const { return total_delta_; }

  // The cost of one entry as a concrete budget (fraction times declared).
  PrivacyBudget entry_cost(const LedgerEntry& entry) const;

 private:
  PrivacyBudget declared_;
  std::vector<LedgerEntry> entries_;
  BudgetFraction total_{0};
  BudgetFraction total_delta_{0};
};

// rho-zCDP implies (rho + 2*sqrt(rho*ln(1/delta)), delta)-DP.
double zcdp_to_approx_dp(double rho, double delta);

// Inverse of the conversion above: the largest rho whose (epsilon, delta)
// guarantee matches the given pair.
double approx_dp_to_zcdp(double epsilon, double delta);

}  // namespace dpmean
