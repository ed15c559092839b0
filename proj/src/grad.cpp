// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/grad.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace beamgraph {

namespace {

struct TensorView {
  double* data;
  std::size_t size;
};

void collect_views(ModelParams& params, std::vector<TensorView>& views) {
  for (auto& layer : params.layers) {
    for (MlpParams* mlp : {&layer.message_mlp, &layer.tx_mlp, &layer.rx_mlp}) {
      for (std::size_t i = 0; i < mlp->weights.size(); ++i) {
        views.push_back({mlp->weights[i].data(),
                         static_cast<std::size_t>(mlp->weights[i].size())});
        views.push_back({mlp->biases[i].data(),
                         static_cast<std::size_t>(mlp->biases[i].size())});
      }
    }
  }
}

std::vector<TensorView> tensor_views(ModelParams& params) {
  std::vector<TensorView> views;
  collect_views(params, views);
  return views;
}

/// Backprop through one MLP; accumulates weight/bias gradients and returns
/// the gradient with respect to the input vector.
Eigen::VectorXd mlp_backward(const MlpParams& mlp, const MlpTrace& trace,
                             Eigen::VectorXd d_out, MlpParams& grads) {
  const int n_layers = static_cast<int>(mlp.weights.size());
  for (int i = n_layers - 1; i >= 0; --i) {
    const Eigen::VectorXd& pre = trace.pre[i];
    const Activation act =
        i == n_layers - 1 ? mlp.output_activation : Activation::kRelu;
    for (Eigen::Index j = 0; j < d_out.size(); ++j) {
      const bool pass = act == Activation::kNone ||
                        (act == Activation::kRelu && pre(j) > 0.0) ||
                        (act == Activation::kBoxProject && pre(j) > 0.0 &&
                         pre(j) < 1.0);
      if (!pass) d_out(j) = 0.0;
    }
    const Eigen::VectorXd& in = i == 0 ? trace.input : trace.post[i - 1];
    grads.weights[i].noalias() += d_out * in.transpose();
    grads.biases[i] += d_out;
    d_out = mlp.weights[i].transpose() * d_out;
  }
  return d_out;
}

/// Backprop from the output-policy gradient to the parameter gradients.
void backward_sample(const ModelParams& params, const GraphFeatures& features,
                     const ForwardTrace& trace, Eigen::MatrixXd d_phi,
                     Eigen::MatrixXd d_psi, ModelParams& grads) {
  const int n = features.n_pairs;
  const int d = features.dim;
  const int f = params.agg_width;
  for (int k = params.rounds() - 1; k >= 0; --k) {
    const auto& round = trace.rounds[k];
    auto& layer_grads = grads.layers[k];
    const auto& layer = params.layers[k];
    Eigen::MatrixXd d_phi_prev = Eigen::MatrixXd::Zero(n, params.n_rx);
    Eigen::MatrixXd d_psi_prev = Eigen::MatrixXd::Zero(n, params.n_tx);
    for (int m = 0; m < n; ++m) {
      Eigen::VectorXd d_agg = Eigen::VectorXd::Zero(2 * f);
      {
        const Eigen::VectorXd d_in = mlp_backward(
            layer.rx_mlp, round.rx[m], d_phi.row(m).transpose(),
            layer_grads.rx_mlp);
        d_agg += d_in.head(2 * f);
        d_phi_prev.row(m) += d_in.tail(params.n_rx).transpose();
      }
      {
        const Eigen::VectorXd d_in = mlp_backward(
            layer.tx_mlp, round.tx[m], d_psi.row(m).transpose(),
            layer_grads.tx_mlp);
        d_agg += d_in.head(2 * f);
        d_psi_prev.row(m) += d_in.tail(params.n_tx).transpose();
      }
      if (n > 1) {
        const double inv_neighbors = 1.0 / static_cast<double>(n - 1);
        for (int other = 0; other < n; ++other) {
          if (other == m) continue;
          Eigen::VectorXd d_msg = d_agg.tail(f) * inv_neighbors;
          for (int q = 0; q < f; ++q)
            if (round.max_source[m](q) == other) d_msg(q) += d_agg(q);
          const Eigen::VectorXd d_in = mlp_backward(
              layer.message_mlp,
              round.messages[static_cast<std::size_t>(m) * n + other],
              std::move(d_msg), layer_grads.message_mlp);
          d_phi_prev.row(m) += d_in.segment(3 * d, params.n_rx).transpose();
          d_psi_prev.row(m) +=
              d_in.segment(3 * d + params.n_rx, params.n_tx).transpose();
        }
      }
    }
    d_phi = std::move(d_phi_prev);
    d_psi = std::move(d_psi_prev);
  }
}

}  // namespace

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z = params;
  for (auto& layer : z.layers)
    for (MlpParams* mlp : {&layer.message_mlp, &layer.tx_mlp, &layer.rx_mlp}) {
      for (auto& w : mlp->weights) w.setZero();
      for (auto& b : mlp->biases) b.setZero();
    }
  return z;
}

std::size_t parameter_count(const ModelParams& params) {
  std::size_t total = 0;
  auto views = tensor_views(const_cast<ModelParams&>(params));
  for (const auto& view : views) total += view.size;
  return total;
}

AdamState AdamState::zeros_like(const ModelParams& params) {
  AdamState state;
  state.first_moment = beamgraph::zeros_like(params);
  state.second_moment = beamgraph::zeros_like(params);
  return state;
}

LossAndGrad loss_and_grad_stats(const ModelParams& params,
                                std::span<const Sample> batch,
                                const DualMultipliers& duals,
                                const SimConfig& config, double round_threshold,
                                BatchStats* stats) {
  if (batch.empty())
    throw std::invalid_argument("loss_and_grad: batch must be nonempty");
  LossAndGrad result;
  result.grads = zeros_like(params);
  for (const Sample& sample : batch) {
    ForwardTrace trace;
    const BeamPolicy out =
        forward(params, sample.features,
                initial_policy(sample.features.n_pairs, params.n_rx,
                               params.n_tx),
                &trace);
    result.loss += lagrangian_loss(sample.gains, out, duals, config);
    Eigen::MatrixXd d_phi;
    Eigen::MatrixXd d_psi;
    lagrangian_loss_policy_grad(sample.gains, out, duals, config, d_phi, d_psi);
    backward_sample(params, sample.features, trace, std::move(d_phi),
                    std::move(d_psi), result.grads);
    if (stats) {
      const ViolationReport v = violations(out);
      if (stats->violation_sums.binary_tx.size() == 0) {
        stats->violation_sums = v;
      } else {
        stats->violation_sums.binary_tx += v.binary_tx;
        stats->violation_sums.binary_rx += v.binary_rx;
        stats->violation_sums.row_tx += v.row_tx;
        stats->violation_sums.row_rx += v.row_rx;
        stats->violation_sums.coupling += v.coupling;
      }
      stats->rounded_wsr_sum += weighted_sum_rate(
          sample.gains, round_policy(out, round_threshold), config);
      ++stats->count;
    }
  }
  if (stats) stats->loss_sum += result.loss;
  return result;
}

LossAndGrad loss_and_grad(const ModelParams& params,
                          std::span<const Sample> batch,
                          const DualMultipliers& duals,
                          const SimConfig& config) {
  return loss_and_grad_stats(params, batch, duals, config, 0.5, nullptr);
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               double learning_rate) {
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("adam_step: learning rate must be > 0");
  ++state.step;
  const double bias1 = 1.0 - std::pow(state.beta1, state.step);
  const double bias2 = 1.0 - std::pow(state.beta2, state.step);
  auto p = tensor_views(params);
  auto g = tensor_views(const_cast<ModelParams&>(grads));
  auto m = tensor_views(state.first_moment);
  auto v = tensor_views(state.second_moment);
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t i = 0; i < p[t].size; ++i) {
      const double grad = g[t].data[i];
      m[t].data[i] = state.beta1 * m[t].data[i] + (1.0 - state.beta1) * grad;
      v[t].data[i] =
          state.beta2 * v[t].data[i] + (1.0 - state.beta2) * grad * grad;
      p[t].data[i] -= learning_rate * (m[t].data[i] / bias1) /
                      (std::sqrt(v[t].data[i] / bias2) + state.epsilon);
    }
  }
}

void sgd_step(ModelParams& params, const ModelParams& grads,
              double learning_rate) {
  auto p = tensor_views(params);
  auto g = tensor_views(const_cast<ModelParams&>(grads));
  for (std::size_t t = 0; t < p.size(); ++t)
    for (std::size_t i = 0; i < p[t].size; ++i)
      p[t].data[i] -= learning_rate * g[t].data[i];
}

namespace {

/// Activation regions, reduction winners and penalty-kink sides of one
/// forward pass. Two probes bracketing a smooth segment share the signature.
std::vector<std::int32_t> pattern_signature(const ForwardTrace& trace,
                                            const BeamPolicy& out) {
  std::vector<std::int32_t> sig;
  auto add_mlp = [&sig](const MlpTrace& t, Activation final_act) {
    const int n_layers = static_cast<int>(t.pre.size());
    for (int i = 0; i < n_layers; ++i) {
      const Activation act = i == n_layers - 1 ? final_act : Activation::kRelu;
      for (Eigen::Index j = 0; j < t.pre[i].size(); ++j) {
        const double pre = t.pre[i](j);
        if (act == Activation::kBoxProject)
          sig.push_back(pre <= 0.0 ? 0 : (pre >= 1.0 ? 2 : 1));
        else
          sig.push_back(pre > 0.0 ? 1 : 0);
      }
    }
  };
  for (const auto& round : trace.rounds) {
    const int n = static_cast<int>(round.tx.size());
    for (int m = 0; m < n; ++m) {
      for (int other = 0; other < n; ++other) {
        if (other == m || n == 1) continue;
        add_mlp(round.messages[static_cast<std::size_t>(m) * n + other],
                Activation::kRelu);
      }
      for (Eigen::Index q = 0; q < round.max_source[m].size(); ++q)
        sig.push_back(round.max_source[m](q));
      add_mlp(round.tx[m], Activation::kBoxProject);
      add_mlp(round.rx[m], Activation::kBoxProject);
    }
  }
  const int n = static_cast<int>(out.phi.rows());
  for (int m = 0; m < n; ++m) {
    const double row_tx = out.psi.row(m).sum() - 1.0;
    const double row_rx = out.phi.row(m).sum() - 1.0;
    const double couple = out.psi.row(m).sum() - out.phi.row(m).sum();
    sig.push_back(row_tx > 0.0 ? 1 : (row_tx < 0.0 ? -1 : 0));
    sig.push_back(row_rx > 0.0 ? 1 : (row_rx < 0.0 ? -1 : 0));
    sig.push_back(couple > 0.0 ? 1 : (couple < 0.0 ? -1 : 0));
  }
  return sig;
}

}  // namespace

FiniteDiffReport finite_diff_check(const ModelParams& params,
                                   const Sample& sample,
                                   const DualMultipliers& duals,
                                   const SimConfig& config, double h, int count,
                                   RngState& rng) {
  if (!(h > 0.0))
    throw std::invalid_argument("finite_diff_check: h must be > 0");
  const std::span<const Sample> batch(&sample, 1);
  const LossAndGrad analytic = loss_and_grad(params, batch, duals, config);

  ModelParams probe = params;
  auto probe_views = tensor_views(probe);
  auto grad_views = tensor_views(const_cast<ModelParams&>(analytic.grads));
  std::size_t total = 0;
  for (const auto& view : probe_views) total += view.size;

  const BeamPolicy init =
      initial_policy(sample.features.n_pairs, params.n_rx, params.n_tx);
  auto eval = [&](std::vector<std::int32_t>& sig) {
    ForwardTrace trace;
    const BeamPolicy out = forward(probe, sample.features, init, &trace);
    sig = pattern_signature(trace, out);
    return lagrangian_loss(sample.gains, out, duals, config);
  };
  std::vector<std::int32_t> base_sig;
  eval(base_sig);

  FiniteDiffReport report;
  double err_sum = 0.0;
  const int max_attempts = 50 * count;
  for (int attempt = 0; attempt < max_attempts && report.checked < count;
       ++attempt) {
    const std::size_t flat = next_u64(rng) % total;
    std::size_t tensor = 0;
    std::size_t offset = flat;
    while (offset >= probe_views[tensor].size) {
      offset -= probe_views[tensor].size;
      ++tensor;
    }
    double& value = probe_views[tensor].data[offset];
    const double saved = value;
    std::vector<std::int32_t> sig_plus;
    std::vector<std::int32_t> sig_minus;
    value = saved + h;
    const double loss_plus = eval(sig_plus);
    value = saved - h;
    const double loss_minus = eval(sig_minus);
    value = saved;
    if (sig_plus != base_sig || sig_minus != base_sig) {
      ++report.excluded;
      continue;
    }
    const double numeric = (loss_plus - loss_minus) / (2.0 * h);
    const double exact = grad_views[tensor].data[offset];
    const double denom =
        std::max({std::abs(exact), std::abs(numeric), 1e-8});
    const double rel = std::abs(numeric - exact) / denom;
    report.max_rel_err = std::max(report.max_rel_err, rel);
    err_sum += rel;
    ++report.checked;
  }
  if (report.checked > 0) report.mean_rel_err = err_sum / report.checked;
  return report;
}

}  // namespace beamgraph
