// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/problem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamgraph {

namespace {
constexpr double kInvLn2 = 1.4426950408889634;  // 1 / ln 2

int lowest_index_argmax(const Eigen::MatrixXd& mat, int row) {
  int best = 0;
  for (int j = 1; j < mat.cols(); ++j)
    if (mat(row, j) > mat(row, best)) best = j;
  return best;
}

double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace

BeamPolicy BeamPolicy::constant(int n_pairs, int n_rx, int n_tx,
                                double value) {
  BeamPolicy p;
  p.phi = Eigen::MatrixXd::Constant(n_pairs, n_rx, value);
  p.psi = Eigen::MatrixXd::Constant(n_pairs, n_tx, value);
  return p;
}

int BinarySelection::active_count() const {
  int count = 0;
  for (const auto& link : links)
    if (link.has_value()) ++count;
  return count;
}

DualMultipliers DualMultipliers::zeros(int n_pairs, int n_rx, int n_tx) {
  DualMultipliers d;
  d.lambda = Eigen::MatrixXd::Zero(n_pairs, n_tx);
  d.mu = Eigen::MatrixXd::Zero(n_pairs, n_rx);
  d.nu = Eigen::VectorXd::Zero(n_pairs);
  d.xi = Eigen::VectorXd::Zero(n_pairs);
  d.rho_dual = Eigen::VectorXd::Zero(n_pairs);
  return d;
}

// Interference at receiver m, beam r, without the phi(m, r) factor:
// sum_{n != m} sum_l psi(n, l) p rho(m, r, n, l).
static double interference_sum(const EffectiveGains& gains,
                               const Eigen::MatrixXd& psi, double tx_power,
                               int m, int r) {
  double acc = 0.0;
  for (int n = 0; n < gains.n_pairs; ++n) {
    if (n == m) continue;
    for (int l = 0; l < gains.n_tx; ++l)
      acc += psi(n, l) * tx_power * gains.at(m, r, n, l);
  }
  return acc;
}

double pair_rate(const EffectiveGains& gains, const BeamPolicy& policy,
                 const SimConfig& config, int m, int r, int t) {
  if (m < 0 || m >= gains.n_pairs || r < 0 || r >= gains.n_rx || t < 0 ||
      t >= gains.n_tx)
    throw std::invalid_argument("pair_rate: index out of range");
  const double signal = policy.phi(m, r) * policy.psi(m, t) *
                        config.tx_power * gains.at(m, r, m, t);
  const double denom =
      policy.phi(m, r) * interference_sum(gains, policy.psi, config.tx_power,
                                          m, r) +
      config.noise_power;
  return std::log2(1.0 + signal / denom);
}

double weighted_sum_rate(const EffectiveGains& gains, const BeamPolicy& policy,
                         const SimConfig& config) {
  double total = 0.0;
  for (int m = 0; m < gains.n_pairs; ++m) {
    for (int r = 0; r < gains.n_rx; ++r) {
      const double inter =
          interference_sum(gains, policy.psi, config.tx_power, m, r);
      const double denom = policy.phi(m, r) * inter + config.noise_power;
      for (int t = 0; t < gains.n_tx; ++t) {
        const double signal = policy.phi(m, r) * policy.psi(m, t) *
                              config.tx_power * gains.at(m, r, m, t);
        total += config.weights[m] * std::log2(1.0 + signal / denom);
      }
    }
  }
  return total;
}

double weighted_sum_rate(const EffectiveGains& gains,
                         const BinarySelection& selection,
                         const SimConfig& config) {
  const int n = gains.n_pairs;
  if (selection.links.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("weighted_sum_rate: selection size mismatch");
  double total = 0.0;
  for (int m = 0; m < n; ++m) {
    if (!selection.links[m].has_value()) continue;
    const auto [r, t] = *selection.links[m];
    double inter = 0.0;
    for (int l = 0; l < n; ++l) {
      if (l == m || !selection.links[l].has_value()) continue;
      inter += config.tx_power * gains.at(m, r, l, selection.links[l]->tx_beam);
    }
    const double signal = config.tx_power * gains.at(m, r, m, t);
    total += config.weights[m] *
             std::log2(1.0 + signal / (inter + config.noise_power));
  }
  return total;
}

ViolationReport violations(const BeamPolicy& policy) {
  ViolationReport v;
  v.binary_tx = policy.psi.array() - policy.psi.array().square();
  v.binary_rx = policy.phi.array() - policy.phi.array().square();
  v.row_tx = (policy.psi.rowwise().sum().array() - 1.0).max(0.0);
  v.row_rx = (policy.phi.rowwise().sum().array() - 1.0).max(0.0);
  v.coupling =
      (policy.psi.rowwise().sum() - policy.phi.rowwise().sum()).array().abs();
  return v;
}

double lagrangian_loss(const EffectiveGains& gains, const BeamPolicy& policy,
                       const DualMultipliers& duals, const SimConfig& config) {
  const ViolationReport v = violations(policy);
  double penalty = (duals.lambda.array() * v.binary_tx.array()).sum();
  penalty += (duals.mu.array() * v.binary_rx.array()).sum();
  penalty += duals.nu.dot(v.row_tx);
  penalty += duals.xi.dot(v.row_rx);
  penalty += duals.rho_dual.dot(v.coupling);
  return -weighted_sum_rate(gains, policy, config) + penalty;
}

void lagrangian_loss_policy_grad(const EffectiveGains& gains,
                                 const BeamPolicy& policy,
                                 const DualMultipliers& duals,
                                 const SimConfig& config,
                                 Eigen::MatrixXd& d_phi,
                                 Eigen::MatrixXd& d_psi) {
  const int n = gains.n_pairs;
  const int n_rx = gains.n_rx;
  const int n_tx = gains.n_tx;
  const double p = config.tx_power;
  d_phi = Eigen::MatrixXd::Zero(n, n_rx);
  d_psi = Eigen::MatrixXd::Zero(n, n_tx);

  // -WSR part. For fixed (m, r) the interference denominator is shared
  // across transmit beams t.
  for (int m = 0; m < n; ++m) {
    const double w = config.weights[m];
    for (int r = 0; r < n_rx; ++r) {
      const double inter = interference_sum(gains, policy.psi, p, m, r);
      const double v = policy.phi(m, r) * inter + config.noise_power;
      double inv_total_sum = 0.0;  // sum_t 1 / (u_t + v)
      for (int t = 0; t < n_tx; ++t) {
        const double rho_d = gains.at(m, r, m, t);
        const double u = policy.phi(m, r) * policy.psi(m, t) * p * rho_d;
        const double inv_total = 1.0 / (u + v);
        inv_total_sum += inv_total;
        d_phi(m, r) -=
            w * kInvLn2 * ((policy.psi(m, t) * p * rho_d + inter) * inv_total -
                           inter / v);
        d_psi(m, t) -= w * kInvLn2 * policy.phi(m, r) * p * rho_d * inv_total;
      }
      const double cross_factor = inv_total_sum - n_tx / v;
      for (int l = 0; l < n; ++l) {
        if (l == m) continue;
        for (int t = 0; t < n_tx; ++t)
          d_psi(l, t) -= w * kInvLn2 * policy.phi(m, r) * p *
                         gains.at(m, r, l, t) * cross_factor;
      }
    }
  }

  // Penalty part. Kink conventions: step functions and sign take 0 at the
  // kink itself.
  for (int m = 0; m < n; ++m) {
    const double row_tx = policy.psi.row(m).sum();
    const double row_rx = policy.phi.row(m).sum();
    const double step_tx = row_tx - 1.0 > 0.0 ? 1.0 : 0.0;
    const double step_rx = row_rx - 1.0 > 0.0 ? 1.0 : 0.0;
    const double couple = sign0(row_tx - row_rx);
    for (int t = 0; t < n_tx; ++t)
      d_psi(m, t) += duals.lambda(m, t) * (1.0 - 2.0 * policy.psi(m, t)) +
                     duals.nu(m) * step_tx + duals.rho_dual(m) * couple;
    for (int r = 0; r < n_rx; ++r)
      d_phi(m, r) += duals.mu(m, r) * (1.0 - 2.0 * policy.phi(m, r)) +
                     duals.xi(m) * step_rx - duals.rho_dual(m) * couple;
  }
}

BinarySelection round_policy(const BeamPolicy& policy, double threshold) {
  if (!(threshold > 0.0) || threshold > 1.0)
    throw std::invalid_argument("round_policy: threshold must be in (0, 1]");
  const int n = static_cast<int>(policy.phi.rows());
  BinarySelection sel;
  sel.links.resize(n);
  for (int m = 0; m < n; ++m) {
    const int r = lowest_index_argmax(policy.phi, m);
    const int t = lowest_index_argmax(policy.psi, m);
    if (std::min(policy.phi(m, r), policy.psi(m, t)) >= threshold)
      sel.links[m] = BinarySelection::Link{r, t};
  }
  return sel;
}

BeamPolicy selection_to_policy(const BinarySelection& selection, int n_rx,
                               int n_tx) {
  const int n = static_cast<int>(selection.links.size());
  BeamPolicy policy = BeamPolicy::constant(n, n_rx, n_tx, 0.0);
  for (int m = 0; m < n; ++m) {
    if (!selection.links[m].has_value()) continue;
    const auto [r, t] = *selection.links[m];
    if (r < 0 || r >= n_rx || t < 0 || t >= n_tx)
      throw std::invalid_argument("selection_to_policy: beam index out of range");
    policy.phi(m, r) = 1.0;
    policy.psi(m, t) = 1.0;
  }
  return policy;
}

}  // namespace beamgraph
