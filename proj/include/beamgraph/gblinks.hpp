// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "beamgraph/graph.hpp"
#include "beamgraph/problem.hpp"
#include "beamgraph/rng.hpp"

namespace beamgraph {

enum class Activation { kRelu, kBoxProject, kNone };

/// Layer widths of one MLP; hidden activations are always ReLU.
struct MlpSpec {
  std::vector<int> widths;
  Activation output_activation = Activation::kRelu;
};

struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;  // per layer, out x in
  std::vector<Eigen::VectorXd> biases;
  Activation output_activation = Activation::kRelu;

  int input_width() const { return static_cast<int>(weights.front().cols()); }
  int output_width() const { return static_cast<int>(weights.back().rows()); }
};

/// Parameters of one aggregate/combine round. Rounds do not share weights.
struct GnnLayerParams {
  MlpParams message_mlp;  // neighbor message network (MLP1)
  MlpParams tx_mlp;       // transmit-policy update head
  MlpParams rx_mlp;       // receive-policy update head
};

struct ModelParams {
  int n_tx = 0;
  int n_rx = 0;
  int agg_width = 0;  // f, output width of the message network
  std::vector<GnnLayerParams> layers;

  int rounds() const { return static_cast<int>(layers.size()); }
};

/// Per-MLP forward record used by the gradient engine.
struct MlpTrace {
  Eigen::VectorXd input;
  std::vector<Eigen::VectorXd> pre;   // pre-activation per layer
  std::vector<Eigen::VectorXd> post;  // post-activation per layer
};

/// Full forward record: one entry per round.
struct ForwardTrace {
  struct Round {
    BeamPolicy input_policy;
    std::vector<MlpTrace> messages;   // n*n flat, index m*n + neighbor
    std::vector<Eigen::VectorXi> max_source;  // per m: arg neighbor per coord
    std::vector<MlpTrace> tx;
    std::vector<MlpTrace> rx;
  };
  std::vector<Round> rounds;
};

/// Projection onto [0,1].
double project(double u);

/// Published default layer widths for the three networks.
MlpSpec message_mlp_spec(int n_tx, int n_rx);
MlpSpec tx_mlp_spec(int n_tx, int n_rx);
MlpSpec rx_mlp_spec(int n_tx, int n_rx);

/// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero biases.
MlpParams init_mlp(const MlpSpec& spec, RngState& rng);

/// K independent rounds with the default widths.
ModelParams init_params(int n_tx, int n_rx, int n_layers, RngState& rng);

Eigen::VectorXd mlp_eval(const MlpParams& mlp, const Eigen::VectorXd& input,
                         MlpTrace* trace = nullptr);

/// Neighbor aggregation for vertex m: element-wise MAX and MEAN of the
/// message vectors, concatenated (width 2f). A vertex without neighbors
/// aggregates to the zero vector.
Eigen::VectorXd aggregate(const GnnLayerParams& layer,
                          const GraphFeatures& features,
                          const BeamPolicy& policy_prev, int m);

/// Policy update for vertex m from its aggregated neighborhood.
/// Outputs lie in [0,1].
std::pair<Eigen::VectorXd, Eigen::VectorXd> combine(
    const GnnLayerParams& layer, const Eigen::VectorXd& agg,
    const GraphFeatures& features, const BeamPolicy& policy_prev, int m);

/// All-0.5 starting policy.
BeamPolicy initial_policy(int n_pairs, int n_rx, int n_tx);

/// Synchronous application of all rounds; every vertex in a round reads the
/// previous round's policy. Throws std::invalid_argument on dimension
/// mismatch. When trace is non-null the full computation is recorded.
BeamPolicy forward(const ModelParams& params, const GraphFeatures& features,
                   const BeamPolicy& policy_init, ForwardTrace* trace = nullptr);

/// Model file: one-line JSON header {format_version, n_tx, n_rx, rounds,
/// agg_width, widths per network} followed by raw little-endian doubles,
/// round by round, network by network, per layer weights (row-major) then
/// biases.
void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

}  // namespace beamgraph
