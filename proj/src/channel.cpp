// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamgraph {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

SimConfig SimConfig::from_snr(int n_pairs, int n_tx, int n_rx, int n_paths,
                              double region_side, double d_min, double d_max,
                              double snr_db) {
  SimConfig c;
  c.n_pairs = n_pairs;
  c.n_tx = n_tx;
  c.n_rx = n_rx;
  c.n_paths = n_paths;
  c.region_side = region_side;
  c.d_min = d_min;
  c.d_max = d_max;
  c.snr_db = snr_db;
  c.noise_power = 1.0;
  c.tx_power = std::pow(10.0, snr_db / 10.0);
  c.weights.assign(static_cast<std::size_t>(n_pairs), 1.0);
  c.validate();
  return c;
}

void SimConfig::validate() const {
  if (n_pairs < 1 || n_tx < 1 || n_rx < 1 || n_paths < 1)
    throw std::invalid_argument("SimConfig: counts must be >= 1");
  if (!(d_min > 0.0) || !(d_min <= d_max))
    throw std::invalid_argument("SimConfig: need 0 < d_min <= d_max");
  if (!(region_side > 0.0))
    throw std::invalid_argument("SimConfig: region_side must be > 0");
  if (!(noise_power > 0.0) || !(tx_power > 0.0))
    throw std::invalid_argument("SimConfig: powers must be > 0");
  const double implied = 10.0 * std::log10(tx_power / noise_power);
  if (std::abs(implied - snr_db) > 1e-9 * std::max(1.0, std::abs(snr_db)))
    throw std::invalid_argument(
        "SimConfig: snr_db inconsistent with tx_power / noise_power");
  if (weights.size() != static_cast<std::size_t>(n_pairs))
    throw std::invalid_argument("SimConfig: weights length must equal n_pairs");
  for (double w : weights)
    if (w < 0.0) throw std::invalid_argument("SimConfig: weights must be >= 0");
}

Eigen::Vector2d place_receiver(const Eigen::Vector2d& tx, double d,
                               double beta) {
  return tx + d * Eigen::Vector2d(std::cos(beta), std::sin(beta));
}

NetworkTopology gen_topology(const SimConfig& config, RngState& rng) {
  config.validate();
  const int n = config.n_pairs;
  NetworkTopology topo;
  topo.tx_pos.resize(n);
  topo.rx_pos.resize(n);
  for (int m = 0; m < n; ++m) {
    const double x = config.region_side * next_uniform(rng);
    const double y = config.region_side * next_uniform(rng);
    topo.tx_pos[m] = Eigen::Vector2d(x, y);
  }
  for (int m = 0; m < n; ++m) {
    const double d =
        config.d_min + (config.d_max - config.d_min) * next_uniform(rng);
    const double beta = kTwoPi * next_uniform(rng);
    topo.rx_pos[m] = place_receiver(topo.tx_pos[m], d, beta);
  }
  topo.dist.resize(n, n);
  for (int m = 0; m < n; ++m)
    for (int l = 0; l < n; ++l)
      topo.dist(m, l) = (topo.rx_pos[m] - topo.tx_pos[l]).norm();
  return topo;
}

Eigen::VectorXcd ula_steering(double angle, int n_ant) {
  if (n_ant < 1) throw std::invalid_argument("ula_steering: n_ant must be >= 1");
  Eigen::VectorXcd v(n_ant);
  const double phase = std::numbers::pi * std::sin(angle);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_ant));
  for (int k = 0; k < n_ant; ++k)
    v(k) = scale * std::polar(1.0, phase * k);
  return v;
}

ChannelSet gen_channels(const NetworkTopology& topology,
                        const SimConfig& config, RngState& rng) {
  const int n = config.n_pairs;
  ChannelSet set;
  set.n_pairs = n;
  set.entries.resize(static_cast<std::size_t>(n) * n);
  for (int m = 0; m < n; ++m) {
    for (int l = 0; l < n; ++l) {
      const double pathloss = std::pow(topology.dist(m, l), -3.0);
      const double scale =
          std::sqrt(pathloss * config.n_tx * config.n_rx);
      Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(config.n_rx, config.n_tx);
      for (int p = 0; p < config.n_paths; ++p) {
        const std::complex<double> alpha = next_complex_gaussian(rng, 1.0);
        const double aoa = kTwoPi * next_uniform(rng);
        const double aod = kTwoPi * next_uniform(rng);
        h.noalias() += alpha * ula_steering(aoa, config.n_rx) *
                       ula_steering(aod, config.n_tx).adjoint();
      }
      set.at(m, l) = scale * h;
    }
  }
  return set;
}

Eigen::MatrixXcd dft_codebook(int n_ant) {
  if (n_ant < 1)
    throw std::invalid_argument("dft_codebook: n_ant must be >= 1");
  Eigen::MatrixXcd f(n_ant, n_ant);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_ant));
  for (int a = 0; a < n_ant; ++a)
    for (int b = 0; b < n_ant; ++b)
      f(a, b) = scale * std::polar(1.0, kTwoPi * a * b / n_ant);
  return f;
}

Codebook make_codebook(int n_tx, int n_rx) {
  return Codebook{dft_codebook(n_tx), dft_codebook(n_rx)};
}

EffectiveGains effective_gains(const ChannelSet& channels,
                               const Codebook& codebook) {
  const int n = channels.n_pairs;
  if (n < 1 || channels.entries.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("effective_gains: malformed channel set");
  const int n_rx = static_cast<int>(codebook.rx.rows());
  const int n_tx = static_cast<int>(codebook.tx.rows());
  EffectiveGains gains;
  gains.n_pairs = n;
  gains.n_rx = n_rx;
  gains.n_tx = n_tx;
  gains.rho.resize(static_cast<std::size_t>(n) * n_rx * n * n_tx);
  for (int m = 0; m < n; ++m) {
    for (int l = 0; l < n; ++l) {
      const Eigen::MatrixXcd& h = channels.at(m, l);
      if (h.rows() != n_rx || h.cols() != n_tx)
        throw std::invalid_argument(
            "effective_gains: channel/codebook shape mismatch");
      // All beam pairs at once: (V^H H U)(r, t).
      const Eigen::MatrixXcd eff = codebook.rx.adjoint() * h * codebook.tx;
      for (int r = 0; r < n_rx; ++r)
        for (int t = 0; t < n_tx; ++t)
          gains.at(m, r, l, t) = std::norm(eff(r, t));
    }
  }
  return gains;
}

}  // namespace beamgraph
