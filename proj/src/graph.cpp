// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/graph.hpp"

#include <stdexcept>

namespace beamgraph {

GraphFeatures build_features(const ChannelSet& channels,
                             const Codebook& codebook) {
  const int n = channels.n_pairs;
  if (n < 1 || channels.entries.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("build_features: malformed channel set");
  const int n_rx = static_cast<int>(codebook.rx.rows());
  const int n_tx = static_cast<int>(codebook.tx.rows());
  GraphFeatures feats;
  feats.n_pairs = n;
  feats.n_rx = n_rx;
  feats.n_tx = n_tx;
  feats.dim = n_rx * n_tx;
  feats.kappa.resize(static_cast<std::size_t>(n) * n * feats.dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Eigen::MatrixXcd& h = channels.at(i, j);
      if (h.rows() != n_rx || h.cols() != n_tx)
        throw std::invalid_argument(
            "build_features: channel/codebook shape mismatch");
      const Eigen::MatrixXcd eff = codebook.rx.adjoint() * h * codebook.tx;
      double* out = feats.feature(i, j);
      for (int r = 0; r < n_rx; ++r)
        for (int t = 0; t < n_tx; ++t)
          out[r * n_tx + t] = std::abs(eff(r, t));
    }
  }
  return feats;
}

}  // namespace beamgraph
