// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/gblinks.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "io_util.hpp"

namespace beamgraph {

using nlohmann::json;

double project(double u) { return std::clamp(u, 0.0, 1.0); }

namespace {

double activate(double x, Activation act) {
  switch (act) {
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kBoxProject: return project(x);
    case Activation::kNone: return x;
  }
  return x;
}

constexpr int kAggWidth = 64;  // f

}  // namespace

MlpSpec message_mlp_spec(int n_tx, int n_rx) {
  const int d = n_tx * n_rx;
  return {{3 * d + n_rx + n_tx, 256, 128, kAggWidth}, Activation::kRelu};
}

MlpSpec tx_mlp_spec(int n_tx, int n_rx) {
  const int d = n_tx * n_rx;
  return {{2 * kAggWidth + d + n_tx, 256, 128, 64, n_tx},
          Activation::kBoxProject};
}

MlpSpec rx_mlp_spec(int n_tx, int n_rx) {
  const int d = n_tx * n_rx;
  return {{2 * kAggWidth + d + n_rx, 256, 128, 64, n_rx},
          Activation::kBoxProject};
}

MlpParams init_mlp(const MlpSpec& spec, RngState& rng) {
  if (spec.widths.size() < 2)
    throw std::invalid_argument("init_mlp: need at least two layer widths");
  MlpParams mlp;
  mlp.output_activation = spec.output_activation;
  for (std::size_t i = 0; i + 1 < spec.widths.size(); ++i) {
    const int fan_in = spec.widths[i];
    const int fan_out = spec.widths[i + 1];
    if (fan_in < 1 || fan_out < 1)
      throw std::invalid_argument("init_mlp: widths must be >= 1");
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int row = 0; row < fan_out; ++row)
      for (int col = 0; col < fan_in; ++col)
        w(row, col) = bound * (2.0 * next_uniform(rng) - 1.0);
    mlp.weights.push_back(std::move(w));
    mlp.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return mlp;
}

ModelParams init_params(int n_tx, int n_rx, int n_layers, RngState& rng) {
  if (n_tx < 1 || n_rx < 1 || n_layers < 1)
    throw std::invalid_argument("init_params: dimensions must be >= 1");
  ModelParams params;
  params.n_tx = n_tx;
  params.n_rx = n_rx;
  params.agg_width = kAggWidth;
  for (int k = 0; k < n_layers; ++k) {
    GnnLayerParams layer;
    layer.message_mlp = init_mlp(message_mlp_spec(n_tx, n_rx), rng);
    layer.tx_mlp = init_mlp(tx_mlp_spec(n_tx, n_rx), rng);
    layer.rx_mlp = init_mlp(rx_mlp_spec(n_tx, n_rx), rng);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

Eigen::VectorXd mlp_eval(const MlpParams& mlp, const Eigen::VectorXd& input,
                         MlpTrace* trace) {
  if (input.size() != mlp.input_width())
    throw std::invalid_argument("mlp_eval: input width mismatch");
  if (trace) {
    trace->input = input;
    trace->pre.clear();
    trace->post.clear();
  }
  Eigen::VectorXd x = input;
  const std::size_t n_layers = mlp.weights.size();
  for (std::size_t i = 0; i < n_layers; ++i) {
    Eigen::VectorXd pre = mlp.weights[i] * x + mlp.biases[i];
    const Activation act =
        i + 1 == n_layers ? mlp.output_activation : Activation::kRelu;
    Eigen::VectorXd post(pre.size());
    for (Eigen::Index j = 0; j < pre.size(); ++j) post(j) = activate(pre(j), act);
    if (trace) {
      trace->pre.push_back(pre);
      trace->post.push_back(post);
    }
    x = std::move(post);
  }
  return x;
}

namespace {

Eigen::VectorXd message_input(const GraphFeatures& features,
                              const BeamPolicy& policy_prev, int m, int n) {
  const int d = features.dim;
  const int n_rx = static_cast<int>(policy_prev.phi.cols());
  const int n_tx = static_cast<int>(policy_prev.psi.cols());
  Eigen::VectorXd x(3 * d + n_rx + n_tx);
  x.segment(0, d) = Eigen::Map<const Eigen::VectorXd>(features.feature(n, n), d);
  x.segment(d, d) = Eigen::Map<const Eigen::VectorXd>(features.feature(m, n), d);
  x.segment(2 * d, d) =
      Eigen::Map<const Eigen::VectorXd>(features.feature(n, m), d);
  x.segment(3 * d, n_rx) = policy_prev.phi.row(m).transpose();
  x.segment(3 * d + n_rx, n_tx) = policy_prev.psi.row(m).transpose();
  return x;
}

Eigen::VectorXd combine_input(const Eigen::VectorXd& agg,
                              const GraphFeatures& features,
                              const Eigen::RowVectorXd& history, int m) {
  const int d = features.dim;
  Eigen::VectorXd x(agg.size() + d + history.size());
  x.segment(0, agg.size()) = agg;
  x.segment(agg.size(), d) =
      Eigen::Map<const Eigen::VectorXd>(features.feature(m, m), d);
  x.segment(agg.size() + d, history.size()) = history.transpose();
  return x;
}

/// MAX/MEAN over neighbor messages; records the winning neighbor per
/// coordinate (lowest index on ties) when max_source is non-null.
Eigen::VectorXd reduce_messages(const std::vector<MlpTrace>& messages,
                                const std::vector<int>& neighbor_ids, int width,
                                Eigen::VectorXi* max_source) {
  Eigen::VectorXd agg = Eigen::VectorXd::Zero(2 * width);
  if (neighbor_ids.empty()) {
    if (max_source) *max_source = Eigen::VectorXi::Constant(width, -1);
    return agg;
  }
  Eigen::VectorXd best = messages[neighbor_ids.front()].post.back();
  Eigen::VectorXi source = Eigen::VectorXi::Constant(width, neighbor_ids.front());
  Eigen::VectorXd mean = best;
  for (std::size_t idx = 1; idx < neighbor_ids.size(); ++idx) {
    const int n = neighbor_ids[idx];
    const Eigen::VectorXd& msg = messages[n].post.back();
    for (int q = 0; q < width; ++q) {
      if (msg(q) > best(q)) {
        best(q) = msg(q);
        source(q) = n;
      }
    }
    mean += msg;
  }
  mean /= static_cast<double>(neighbor_ids.size());
  agg.head(width) = best;
  agg.tail(width) = mean;
  if (max_source) *max_source = source;
  return agg;
}

void check_dimensions(const ModelParams& params, const GraphFeatures& features,
                      const BeamPolicy& policy) {
  const int d = features.dim;
  if (features.n_tx != params.n_tx || features.n_rx != params.n_rx)
    throw std::invalid_argument("forward: feature/model antenna mismatch");
  if (policy.phi.rows() != features.n_pairs ||
      policy.phi.cols() != params.n_rx ||
      policy.psi.rows() != features.n_pairs || policy.psi.cols() != params.n_tx)
    throw std::invalid_argument("forward: policy shape mismatch");
  if (params.layers.empty())
    throw std::invalid_argument("forward: model has no layers");
  for (const auto& layer : params.layers) {
    if (layer.message_mlp.input_width() != 3 * d + params.n_rx + params.n_tx ||
        layer.message_mlp.output_width() != params.agg_width ||
        layer.tx_mlp.input_width() !=
            2 * params.agg_width + d + params.n_tx ||
        layer.tx_mlp.output_width() != params.n_tx ||
        layer.rx_mlp.input_width() !=
            2 * params.agg_width + d + params.n_rx ||
        layer.rx_mlp.output_width() != params.n_rx)
      throw std::invalid_argument("forward: layer width mismatch");
  }
}

}  // namespace

Eigen::VectorXd aggregate(const GnnLayerParams& layer,
                          const GraphFeatures& features,
                          const BeamPolicy& policy_prev, int m) {
  const int n = features.n_pairs;
  const int width = layer.message_mlp.output_width();
  std::vector<MlpTrace> messages(static_cast<std::size_t>(n));
  std::vector<int> neighbor_ids;
  for (int other = 0; other < n; ++other) {
    if (other == m) continue;
    mlp_eval(layer.message_mlp, message_input(features, policy_prev, m, other),
             &messages[other]);
    neighbor_ids.push_back(other);
  }
  return reduce_messages(messages, neighbor_ids, width, nullptr);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> combine(
    const GnnLayerParams& layer, const Eigen::VectorXd& agg,
    const GraphFeatures& features, const BeamPolicy& policy_prev, int m) {
  Eigen::VectorXd tx_row = mlp_eval(
      layer.tx_mlp, combine_input(agg, features, policy_prev.psi.row(m), m));
  Eigen::VectorXd rx_row = mlp_eval(
      layer.rx_mlp, combine_input(agg, features, policy_prev.phi.row(m), m));
  return {std::move(tx_row), std::move(rx_row)};
}

BeamPolicy initial_policy(int n_pairs, int n_rx, int n_tx) {
  return BeamPolicy::constant(n_pairs, n_rx, n_tx, 0.5);
}

BeamPolicy forward(const ModelParams& params, const GraphFeatures& features,
                   const BeamPolicy& policy_init, ForwardTrace* trace) {
  check_dimensions(params, features, policy_init);
  const int n = features.n_pairs;
  const int width = params.agg_width;
  if (trace) trace->rounds.clear();
  BeamPolicy policy = policy_init;
  for (const auto& layer : params.layers) {
    ForwardTrace::Round round;
    round.input_policy = policy;
    round.messages.resize(static_cast<std::size_t>(n) * n);
    round.max_source.resize(n);
    round.tx.resize(n);
    round.rx.resize(n);

    BeamPolicy next = BeamPolicy::constant(n, params.n_rx, params.n_tx, 0.0);
    std::vector<MlpTrace> messages(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
      std::vector<int> neighbor_ids;
      for (int other = 0; other < n; ++other) {
        if (other == m) continue;
        mlp_eval(layer.message_mlp, message_input(features, policy, m, other),
                 &messages[other]);
        neighbor_ids.push_back(other);
      }
      Eigen::VectorXi max_source;
      const Eigen::VectorXd agg =
          reduce_messages(messages, neighbor_ids, width, &max_source);

      MlpTrace tx_trace;
      MlpTrace rx_trace;
      next.psi.row(m) =
          mlp_eval(layer.tx_mlp,
                   combine_input(agg, features, policy.psi.row(m), m),
                   &tx_trace)
              .transpose();
      next.phi.row(m) =
          mlp_eval(layer.rx_mlp,
                   combine_input(agg, features, policy.phi.row(m), m),
                   &rx_trace)
              .transpose();
      if (trace) {
        for (int other : neighbor_ids)
          round.messages[static_cast<std::size_t>(m) * n + other] =
              messages[other];
        round.max_source[m] = max_source;
        round.tx[m] = std::move(tx_trace);
        round.rx[m] = std::move(rx_trace);
      }
    }
    policy = std::move(next);
    if (trace) trace->rounds.push_back(std::move(round));
  }
  return policy;
}

namespace {

std::vector<int> mlp_widths(const MlpParams& mlp) {
  std::vector<int> widths{mlp.input_width()};
  for (const auto& w : mlp.weights) widths.push_back(static_cast<int>(w.rows()));
  return widths;
}

void write_mlp(std::ostream& os, const MlpParams& mlp) {
  for (std::size_t i = 0; i < mlp.weights.size(); ++i) {
    const auto& w = mlp.weights[i];
    for (Eigen::Index row = 0; row < w.rows(); ++row)
      for (Eigen::Index col = 0; col < w.cols(); ++col)
        detail::write_f64(os, w(row, col));
    for (Eigen::Index j = 0; j < mlp.biases[i].size(); ++j)
      detail::write_f64(os, mlp.biases[i](j));
  }
}

MlpParams read_mlp(std::istream& is, const std::vector<int>& widths,
                   Activation output_activation) {
  MlpParams mlp;
  mlp.output_activation = output_activation;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    Eigen::MatrixXd w(widths[i + 1], widths[i]);
    for (Eigen::Index row = 0; row < w.rows(); ++row)
      for (Eigen::Index col = 0; col < w.cols(); ++col)
        w(row, col) = detail::read_f64(is);
    Eigen::VectorXd b(widths[i + 1]);
    for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = detail::read_f64(is);
    mlp.weights.push_back(std::move(w));
    mlp.biases.push_back(std::move(b));
  }
  return mlp;
}

}  // namespace

void save_model(const ModelParams& params, const std::string& path) {
  if (params.layers.empty())
    throw std::invalid_argument("save_model: model has no layers");
  json header;
  header["format_version"] = 1;
  header["n_tx"] = params.n_tx;
  header["n_rx"] = params.n_rx;
  header["rounds"] = params.rounds();
  header["agg_width"] = params.agg_width;
  header["message_mlp_widths"] = mlp_widths(params.layers.front().message_mlp);
  header["tx_mlp_widths"] = mlp_widths(params.layers.front().tx_mlp);
  header["rx_mlp_widths"] = mlp_widths(params.layers.front().rx_mlp);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_model: cannot open " + path);
  os << header.dump() << '\n';
  for (const auto& layer : params.layers) {
    write_mlp(os, layer.message_mlp);
    write_mlp(os, layer.tx_mlp);
    write_mlp(os, layer.rx_mlp);
  }
  if (!os) throw std::runtime_error("save_model: write failed for " + path);
}

ModelParams load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_model: cannot open " + path);
  const json header = json::parse(detail::read_header_line(is));
  if (header.at("format_version").get<int>() != 1)
    throw std::runtime_error("load_model: unsupported format version in " + path);
  ModelParams params;
  params.n_tx = header.at("n_tx").get<int>();
  params.n_rx = header.at("n_rx").get<int>();
  params.agg_width = header.at("agg_width").get<int>();
  const int rounds = header.at("rounds").get<int>();
  const auto msg_widths = header.at("message_mlp_widths").get<std::vector<int>>();
  const auto tx_widths = header.at("tx_mlp_widths").get<std::vector<int>>();
  const auto rx_widths = header.at("rx_mlp_widths").get<std::vector<int>>();
  for (int k = 0; k < rounds; ++k) {
    GnnLayerParams layer;
    layer.message_mlp = read_mlp(is, msg_widths, Activation::kRelu);
    layer.tx_mlp = read_mlp(is, tx_widths, Activation::kBoxProject);
    layer.rx_mlp = read_mlp(is, rx_widths, Activation::kBoxProject);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

}  // namespace beamgraph
