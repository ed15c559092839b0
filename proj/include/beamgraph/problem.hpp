// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "beamgraph/channel.hpp"

namespace beamgraph {

/// Continuous beam selection matrices, entries in [0,1]. phi(m, r) selects
/// receive beam r at pair m, psi(n, l) transmit beam l at pair n.
struct BeamPolicy {
  Eigen::MatrixXd phi;  // N x n_rx
  Eigen::MatrixXd psi;  // N x n_tx

  static BeamPolicy constant(int n_pairs, int n_rx, int n_tx, double value);
};

/// Feasible schedule: each pair is inactive or uses exactly one beam pair.
struct BinarySelection {
  struct Link {
    int rx_beam = 0;
    int tx_beam = 0;
    bool operator==(const Link&) const = default;
  };
  std::vector<std::optional<Link>> links;

  int active_count() const;
  bool operator==(const BinarySelection&) const = default;
};

/// Nonnegative multipliers of the relaxed constraints.
struct DualMultipliers {
  Eigen::MatrixXd lambda;   // N x n_tx, binary penalty on psi
  Eigen::MatrixXd mu;       // N x n_rx, binary penalty on phi
  Eigen::VectorXd nu;       // N, transmit row-sum penalty
  Eigen::VectorXd xi;       // N, receive row-sum penalty
  Eigen::VectorXd rho_dual; // N, activation coupling penalty

  static DualMultipliers zeros(int n_pairs, int n_rx, int n_tx);
};

/// Per-constraint violation values of a policy, all >= 0 on [0,1] entries.
struct ViolationReport {
  Eigen::MatrixXd binary_tx;  // psi - psi^2
  Eigen::MatrixXd binary_rx;  // phi - phi^2
  Eigen::VectorXd row_tx;     // max(0, sum_l psi - 1)
  Eigen::VectorXd row_rx;     // max(0, sum_r phi - 1)
  Eigen::VectorXd coupling;   // | sum_l psi - sum_r phi |
};

/// Rate of pair m on beam pair (r, t):
/// log2(1 + phi(m,r) psi(m,t) p rho(m,r,m,t) /
///          (sum_{n != m} sum_l phi(m,r) psi(n,l) p rho(m,r,n,l) + sigma^2)).
/// Accepts continuous and binary policies identically.
double pair_rate(const EffectiveGains& gains, const BeamPolicy& policy,
                 const SimConfig& config, int m, int r, int t);

/// sum_m sum_r sum_t w_m * pair_rate(m, r, t).
double weighted_sum_rate(const EffectiveGains& gains, const BeamPolicy& policy,
                         const SimConfig& config);

/// Same objective evaluated directly on a schedule.
double weighted_sum_rate(const EffectiveGains& gains,
                         const BinarySelection& selection,
                         const SimConfig& config);

ViolationReport violations(const BeamPolicy& policy);

/// Relaxed training objective:
/// -weighted_sum_rate + lambda.(psi - psi^2) + mu.(phi - phi^2)
/// + nu.max(0, row_tx - 1) + xi.max(0, row_rx - 1) + rho.|row_tx - row_rx|.
double lagrangian_loss(const EffectiveGains& gains, const BeamPolicy& policy,
                       const DualMultipliers& duals, const SimConfig& config);

/// Gradient of lagrangian_loss with respect to the policy entries.
/// Subgradients at kinks: step functions take 0 at the kink, sign(0) = 0.
void lagrangian_loss_policy_grad(const EffectiveGains& gains,
                                 const BeamPolicy& policy,
                                 const DualMultipliers& duals,
                                 const SimConfig& config,
                                 Eigen::MatrixXd& d_phi,
                                 Eigen::MatrixXd& d_psi);

/// Per row m: beam indices are the lowest-index argmax of each row; pair m
/// activates iff min(phi(m,r*), psi(m,t*)) >= threshold. Always feasible.
BinarySelection round_policy(const BeamPolicy& policy, double threshold = 0.5);

/// One-hot (or zero) rows from a schedule. Round-trips through round_policy.
BeamPolicy selection_to_policy(const BinarySelection& selection, int n_rx,
                               int n_tx);

}  // namespace beamgraph
