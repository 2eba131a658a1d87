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

#include "dpmean/budget.hpp"

#include <cmath>
#include <utility>

namespace dpmean {

PrivacyBudget PrivacyBudget::zcdp(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ConfigError("zCDP budget requires rho > 0");
  }
  return PrivacyBudget(BudgetKind::kZcdp, rho, 0.0);
}

PrivacyBudget PrivacyBudget::approx_dp(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("approx-DP budget requires epsilon > 0");
  }
  if (!(delta >= 0.0) || !(delta < 1.0)) {
    throw ConfigError("approx-DP budget requires 0 <= delta < 1");
  }
  return PrivacyBudget(BudgetKind::kApproxDp, epsilon, delta);
}

double PrivacyBudget::rho() const {
  if (kind_ != BudgetKind::kZcdp) throw ConfigError("budget is not zCDP");
  return a_;
}

double PrivacyBudget::epsilon() const {
  if (kind_ != BudgetKind::kApproxDp) throw ConfigError("budget is not approx-DP");
  return a_;
}

double PrivacyBudget::delta() const {
  if (kind_ != BudgetKind::kApproxDp) throw ConfigError("budget is not approx-DP");
  return b_;
}

PrivacyLedger::PrivacyLedger(PrivacyBudget declared) : declared_(declared) {}

void PrivacyLedger::charge(std::string label, BudgetFraction fraction) {
  charge(std::move(label), fraction, fraction);
}

void PrivacyLedger::charge(std::string label, BudgetFraction eps_fraction,
                           BudgetFraction delta_fraction) {
  if (eps_fraction <= BudgetFraction(0)) {
    throw BudgetError("ledger charge must be positive: " + label);
  }
  if (delta_fraction < BudgetFraction(0)) {
    throw BudgetError("ledger delta charge must be nonnegative: " + label);
  }
  const BudgetFraction one(1);
  if (total_ + eps_fraction > one || total_delta_ + delta_fraction > one) {
    throw BudgetError("privacy budget overspend at entry: " + label);
  }
  total_ += eps_fraction;
  total_delta_ += delta_fraction;
  entries_.push_back(LedgerEntry{std::move(label), eps_fraction, delta_fraction});
}

bool PrivacyLedger::closed() const {
  const BudgetFraction one(1);
  if (declared_.kind() == BudgetKind::kZcdp) return total_ == one;
  return total_ == one && total_delta_ == one;
}

void PrivacyLedger::finalize() const {
  if (!closed()) {
    throw BudgetError("privacy ledger does not close: consumed " +
                      std::to_string(boost::rational_cast<double>(total_)) +
                      " of declared budget");
  }
}

PrivacyBudget PrivacyLedger::entry_cost(const LedgerEntry& entry) const {
  const double f = boost::rational_cast<double>(entry.fraction);
  if (declared_.kind() == BudgetKind::kZcdp) {
    return PrivacyBudget::zcdp(f * declared_.rho());
  }
  const double fd = boost::rational_cast<double>(entry.delta_fraction);
  return PrivacyBudget::approx_dp(f * declared_.epsilon(), fd * declared_.delta());
}

double zcdp_to_approx_dp(double rho, double delta) {
  if (!(rho > 0.0)) throw ConfigError("zcdp_to_approx_dp requires rho > 0");
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw ConfigError("zcdp_to_approx_dp requires delta in (0,1)");
  }
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

double approx_dp_to_zcdp(double epsilon, double delta) {
  if (!(epsilon > 0.0)) throw ConfigError("approx_dp_to_zcdp requires epsilon > 0");
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw ConfigError("approx_dp_to_zcdp requires delta in (0,1)");
  }
  // Solve rho + 2*sqrt(rho*L) = epsilon for L = ln(1/delta); quadratic in
  // sqrt(rho).
  const double l = std::log(1.0 / delta);
  const double t = std::sqrt(l + epsilon) - std::sqrt(l);
  return t * t;
}

}  // namespace dpmean
