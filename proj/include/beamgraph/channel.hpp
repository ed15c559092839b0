// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "beamgraph/rng.hpp"

namespace beamgraph {

/// Scenario parameters for one network instance. snr_db, tx_power and
/// noise_power are redundant by construction: snr_db = 10 log10(p / sigma^2).
struct SimConfig {
  int n_pairs = 1;       // N
  int n_tx = 1;          // transmit antennas / codewords per transmitter
  int n_rx = 1;          // receive antennas / codewords per receiver
  int n_paths = 2;       // propagation paths per channel
  double region_side = 50.0;  // meters, transmitters uniform on the square
  double d_min = 10.0;        // pair distance lower bound, meters
  double d_max = 40.0;        // pair distance upper bound, meters
  double snr_db = 0.0;
  double noise_power = 1.0;  // sigma^2, watts
  double tx_power = 1.0;     // p, watts (all transmitters equal)
  std::vector<double> weights;  // w_m, length n_pairs

  /// Fills tx_power from snr_db (noise_power fixed) and defaults weights
  /// to all ones.
  static SimConfig from_snr(int n_pairs, int n_tx, int n_rx, int n_paths,
                            double region_side, double d_min, double d_max,
                            double snr_db);

  /// Throws std::invalid_argument when any invariant is broken.
  void validate() const;
};

struct NetworkTopology {
  std::vector<Eigen::Vector2d> tx_pos;
  std::vector<Eigen::Vector2d> rx_pos;
  Eigen::MatrixXd dist;  // dist(m, n) = || rx_pos[m] - tx_pos[n] ||
};

/// N x N grid of complex channel matrices, each n_rx x n_tx.
struct ChannelSet {
  int n_pairs = 0;
  std::vector<Eigen::MatrixXcd> entries;  // index m * n_pairs + n

  const Eigen::MatrixXcd& at(int m, int n) const {
    return entries[static_cast<std::size_t>(m) * n_pairs + n];
  }
  Eigen::MatrixXcd& at(int m, int n) {
    return entries[static_cast<std::size_t>(m) * n_pairs + n];
  }
};

/// Unit-norm beam codewords as columns.
struct Codebook {
  Eigen::MatrixXcd tx;  // n_tx x n_tx
  Eigen::MatrixXcd rx;  // n_rx x n_rx
};

/// Beam-pair power gains rho(m, r, n, l) = |v_r^H H_{m,n} u_l|^2,
/// stored row-major over (m, r, n, l).
struct EffectiveGains {
  int n_pairs = 0;
  int n_rx = 0;
  int n_tx = 0;
  std::vector<double> rho;

  double at(int m, int r, int n, int l) const {
    return rho[((static_cast<std::size_t>(m) * n_rx + r) * n_pairs + n) *
                   n_tx +
               l];
  }
  double& at(int m, int r, int n, int l) {
    return rho[((static_cast<std::size_t>(m) * n_rx + r) * n_pairs + n) *
                   n_tx +
               l];
  }
};

/// Receiver location for a pair: tx + d * (cos beta, sin beta).
Eigen::Vector2d place_receiver(const Eigen::Vector2d& tx, double d,
                               double beta);

/// Transmitters uniform on [0, region_side]^2; each receiver at distance
/// Uniform[d_min, d_max] and angle Uniform[0, 2pi) from its transmitter.
/// Receivers are not clipped to the square. Draw order: first (x, y) for
/// every transmitter, then (d, beta) for every pair.
NetworkTopology gen_topology(const SimConfig& config, RngState& rng);

/// ULA response (1/sqrt(n)) [1, e^{j pi sin a}, ..., e^{j (n-1) pi sin a}].
Eigen::VectorXcd ula_steering(double angle, int n_ant);

/// Clustered channel H_{m,n} = sqrt(d^-3 Nt Nr) sum_p alpha_p h_r(tau_p)
/// h_t(psi_p)^H with alpha ~ CN(0,1) and angles Uniform[0, 2pi).
/// Draw order per (m, n, p): alpha, tau, psi.
ChannelSet gen_channels(const NetworkTopology& topology,
                        const SimConfig& config, RngState& rng);

/// DFT matrix with entry (a, b) = (1/sqrt(n)) e^{j 2 pi a b / n}.
Eigen::MatrixXcd dft_codebook(int n_ant);

/// Convenience: DFT codebooks for both array sizes.
Codebook make_codebook(int n_tx, int n_rx);

EffectiveGains effective_gains(const ChannelSet& channels,
                               const Codebook& codebook);

}  // namespace beamgraph
