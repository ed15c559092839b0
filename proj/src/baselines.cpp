// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/baselines.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace beamgraph {

OptionIterator::OptionIterator(int n_pairs, int n_rx, int n_tx)
    : n_rx_(n_rx), n_tx_(n_tx), n_options_(n_rx * n_tx + 1),
      digits_(static_cast<std::size_t>(n_pairs), 0) {
  if (n_pairs < 1 || n_rx < 1 || n_tx < 1)
    throw std::invalid_argument("OptionIterator: dimensions must be >= 1");
}

bool OptionIterator::next() {
  for (auto& digit : digits_) {
    if (++digit < n_options_) return true;
    digit = 0;
  }
  return false;  // wrapped around to all-inactive
}

BinarySelection OptionIterator::current() const {
  BinarySelection sel;
  sel.links.resize(digits_.size());
  for (std::size_t m = 0; m < digits_.size(); ++m) {
    if (digits_[m] == 0) continue;
    const int v = digits_[m] - 1;
    sel.links[m] = BinarySelection::Link{v / n_tx_, v % n_tx_};
  }
  return sel;
}

BinarySelection greedy_nosched(const EffectiveGains& gains) {
  BinarySelection sel;
  sel.links.resize(gains.n_pairs);
  for (int m = 0; m < gains.n_pairs; ++m) {
    int best_r = 0;
    int best_t = 0;
    double best = gains.at(m, 0, m, 0);
    for (int r = 0; r < gains.n_rx; ++r)
      for (int t = 0; t < gains.n_tx; ++t)
        if (gains.at(m, r, m, t) > best) {
          best = gains.at(m, r, m, t);
          best_r = r;
          best_t = t;
        }
    sel.links[m] = BinarySelection::Link{best_r, best_t};
  }
  return sel;
}

ExhaustiveResult exhaustive_search(const EffectiveGains& gains,
                                   const SimConfig& config,
                                   std::uint64_t option_budget) {
  const int n = gains.n_pairs;
  const int n_options = gains.n_rx * gains.n_tx + 1;
  // Overflow-safe (n_options)^n budget check.
  double log_count = n * std::log10(static_cast<double>(n_options));
  if (log_count > std::log10(static_cast<double>(option_budget)) + 1e-12) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "exhaustive_search: %d^%d = %.3g selections exceed the "
                  "budget of %llu",
                  n_options, n, std::pow(static_cast<double>(n_options), n),
                  static_cast<unsigned long long>(option_budget));
    throw BudgetExceededError(msg);
  }

  OptionIterator it(n, gains.n_rx, gains.n_tx);
  std::vector<int> best_digits = it.digits();
  double best_wsr = 0.0;  // all-inactive scores zero
  const double p = config.tx_power;
  std::vector<int> rx_beam(n);
  std::vector<int> tx_beam(n);
  while (it.next()) {
    const auto& digits = it.digits();
    for (int m = 0; m < n; ++m) {
      rx_beam[m] = (digits[m] - 1) / gains.n_tx;
      tx_beam[m] = (digits[m] - 1) % gains.n_tx;
    }
    double wsr = 0.0;
    for (int m = 0; m < n; ++m) {
      if (digits[m] == 0) continue;
      double inter = 0.0;
      for (int l = 0; l < n; ++l) {
        if (l == m || digits[l] == 0) continue;
        inter += p * gains.at(m, rx_beam[m], l, tx_beam[l]);
      }
      const double signal = p * gains.at(m, rx_beam[m], m, tx_beam[m]);
      wsr += config.weights[m] *
             std::log2(1.0 + signal / (inter + config.noise_power));
    }
    if (wsr > best_wsr) {
      best_wsr = wsr;
      best_digits = digits;
    }
  }

  BinarySelection best;
  best.links.resize(n);
  for (int m = 0; m < n; ++m) {
    if (best_digits[m] == 0) continue;
    const int v = best_digits[m] - 1;
    best.links[m] =
        BinarySelection::Link{v / gains.n_tx, v % gains.n_tx};
  }
  // Report the value through the shared evaluator so callers can compare
  // bit-for-bit against re-evaluation of the returned selection.
  return {best, weighted_sum_rate(gains, best, config)};
}

}  // namespace beamgraph
