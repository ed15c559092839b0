// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "beamgraph/problem.hpp"

namespace beamgraph {

/// Mixed-radix counter over per-pair options: digit 0 is inactive, digit
/// v >= 1 encodes beam pair (r, t) with r = (v-1) / n_tx, t = (v-1) % n_tx.
/// Pair 0 is the fastest-moving digit; enumeration starts at all-inactive
/// and visits each of the (n_rx * n_tx + 1)^N selections exactly once.
class OptionIterator {
 public:
  OptionIterator(int n_pairs, int n_rx, int n_tx);

  /// Advances to the next selection; returns false once all have been seen.
  bool next();
  BinarySelection current() const;
  const std::vector<int>& digits() const { return digits_; }

 private:
  int n_rx_;
  int n_tx_;
  int n_options_;
  std::vector<int> digits_;
};

/// Thrown when the exhaustive option count exceeds the budget.
struct BudgetExceededError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every pair active on its strongest direct beam pair, interference
/// ignored. Ties resolve to the lowest (r, then t).
BinarySelection greedy_nosched(const EffectiveGains& gains);

struct ExhaustiveResult {
  BinarySelection selection;
  double wsr = 0.0;
};

/// Global optimum of the weighted sum rate over all feasible selections.
/// Ties keep the first maximizer in enumeration order. Throws
/// BudgetExceededError when (n_rx*n_tx + 1)^N exceeds option_budget.
ExhaustiveResult exhaustive_search(const EffectiveGains& gains,
                                   const SimConfig& config,
                                   std::uint64_t option_budget = 100000000);

}  // namespace beamgraph
