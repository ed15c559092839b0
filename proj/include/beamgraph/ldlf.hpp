// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "beamgraph/grad.hpp"

namespace beamgraph {

struct DualStepSizes {
  double lambda = 1e-6;
  double mu = 1e-6;
  double nu = 1e-6;
  double xi = 1e-6;
  double rho = 1e-6;
};

struct TrainConfig {
  int epochs = 0;
  int batch_size = 20;
  double learning_rate = 1e-3;  // zeta
  DualStepSizes dual_steps;
  std::uint64_t seed = 0;
  bool reproducible = true;  // reserved; this build is always deterministic
  bool shuffle = false;      // paper setting: consecutive minibatches
  bool plain_sgd = false;    // ablation: bare gradient step instead of Adam
  double round_threshold = 0.5;

  void validate() const;
};

/// Per-epoch series. Violation means average over samples and constraint
/// entries; dual norms are L2 norms after the epoch's multiplier update.
struct TrainReport {
  std::vector<double> loss;  // mean per-sample Lagrangian loss
  std::vector<double> wsr;   // mean rounded-policy weighted sum rate
  std::array<std::vector<double>, 5>
      violation_means;  // binary_tx, binary_rx, row_tx, row_rx, coupling
  std::array<std::vector<double>, 5>
      dual_norms;  // lambda, mu, nu, xi, rho

  bool operator==(const TrainReport&) const = default;
};

/// Subgradient ascent step from epoch-accumulated violation sums. Every
/// increment is nonnegative for policies in the box, so multipliers never
/// decrease.
DualMultipliers dual_update(const DualMultipliers& duals,
                            const ViolationReport& accumulated,
                            const DualStepSizes& steps);

/// Alternating primal descent / dual ascent: duals start at zero; every
/// minibatch takes one optimizer step against the current epoch's duals
/// while violations accumulate; multipliers update once per epoch from the
/// accumulated sums. Minibatches are consecutive slices unless shuffling is
/// enabled. Throws std::invalid_argument on dimension mismatch.
std::pair<ModelParams, TrainReport> train(const std::vector<Sample>& dataset,
                                          ModelParams model,
                                          const SimConfig& sim_config,
                                          const TrainConfig& config);

/// CSV with header
/// epoch,loss,wsr,viol_binary_tx,viol_binary_rx,viol_row_tx,viol_row_rx,
/// viol_coupling,dual_lambda,dual_mu,dual_nu,dual_xi,dual_rho.
std::string train_report_csv(const TrainReport& report);

}  // namespace beamgraph
