// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "beamgraph/channel.hpp"

namespace beamgraph {

/// Feature tensor of the directed complete wireless channel graph.
/// kappa[i][i] is the vertex feature of pair i, kappa[i][j] (i != j) the
/// feature of the directed edge from vertex i to vertex j. Each feature is
/// the element-wise modulus of V_r^H H_{i,j} U_t flattened row-by-row, so
/// entry (r, l) sits at flat index r * n_tx + l.
struct GraphFeatures {
  int n_pairs = 0;
  int n_rx = 0;
  int n_tx = 0;
  int dim = 0;  // n_rx * n_tx
  std::vector<double> kappa;  // row-major over (i, j, k)

  const double* feature(int i, int j) const {
    return kappa.data() +
           (static_cast<std::size_t>(i) * n_pairs + j) * dim;
  }
  double* feature(int i, int j) {
    return kappa.data() +
           (static_cast<std::size_t>(i) * n_pairs + j) * dim;
  }
};

GraphFeatures build_features(const ChannelSet& channels,
                             const Codebook& codebook);

}  // namespace beamgraph
