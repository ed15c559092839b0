// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/ldlf.hpp"

#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace beamgraph {

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (batch_size < 1)
    throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  for (double s : {dual_steps.lambda, dual_steps.mu, dual_steps.nu,
                   dual_steps.xi, dual_steps.rho})
    if (s < 0.0)
      throw std::invalid_argument("TrainConfig: dual steps must be >= 0");
}

DualMultipliers dual_update(const DualMultipliers& duals,
                            const ViolationReport& accumulated,
                            const DualStepSizes& steps) {
  DualMultipliers next = duals;
  next.lambda += steps.lambda * accumulated.binary_tx;
  next.mu += steps.mu * accumulated.binary_rx;
  next.nu += steps.nu * accumulated.row_tx;
  next.xi += steps.xi * accumulated.row_rx;
  next.rho_dual += steps.rho * accumulated.coupling;
  return next;
}

namespace {

ViolationReport zero_violations(int n_pairs, int n_rx, int n_tx) {
  ViolationReport v;
  v.binary_tx = Eigen::MatrixXd::Zero(n_pairs, n_tx);
  v.binary_rx = Eigen::MatrixXd::Zero(n_pairs, n_rx);
  v.row_tx = Eigen::VectorXd::Zero(n_pairs);
  v.row_rx = Eigen::VectorXd::Zero(n_pairs);
  v.coupling = Eigen::VectorXd::Zero(n_pairs);
  return v;
}

}  // namespace

std::pair<ModelParams, TrainReport> train(const std::vector<Sample>& dataset,
                                          ModelParams model,
                                          const SimConfig& sim_config,
                                          const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("train: dataset is empty");
  const int n_pairs = dataset.front().features.n_pairs;
  for (const Sample& sample : dataset)
    if (sample.features.n_tx != model.n_tx ||
        sample.features.n_rx != model.n_rx ||
        sample.features.n_pairs != n_pairs)
      throw std::invalid_argument("train: sample/model dimension mismatch");

  TrainReport report;
  if (config.epochs == 0) return {std::move(model), report};

  const int n_samples = static_cast<int>(dataset.size());
  DualMultipliers duals =
      DualMultipliers::zeros(n_pairs, model.n_rx, model.n_tx);
  AdamState adam = AdamState::zeros_like(model);
  RngState shuffle_rng = seed_from(config.seed, 0x5355464C45ULL);  // "SHUFLE"
  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) {
      for (int i = n_samples - 1; i > 0; --i) {
        const int j = static_cast<int>(next_u64(shuffle_rng) %
                                       static_cast<std::uint64_t>(i + 1));
        std::swap(order[i], order[j]);
      }
    }
    BatchStats stats;
    stats.violation_sums = zero_violations(n_pairs, model.n_rx, model.n_tx);
    std::vector<Sample> batch_storage;
    for (int start = 0; start < n_samples; start += config.batch_size) {
      const int len = std::min(config.batch_size, n_samples - start);
      std::span<const Sample> batch;
      if (config.shuffle) {
        batch_storage.clear();
        for (int i = 0; i < len; ++i)
          batch_storage.push_back(dataset[order[start + i]]);
        batch = std::span<const Sample>(batch_storage);
      } else {
        batch = std::span<const Sample>(dataset.data() + start,
                                        static_cast<std::size_t>(len));
      }
      const LossAndGrad pass = loss_and_grad_stats(
          model, batch, duals, sim_config, config.round_threshold, &stats);
      if (config.plain_sgd)
        sgd_step(model, pass.grads, config.learning_rate);
      else
        adam_step(model, pass.grads, adam, config.learning_rate);
    }
    duals = dual_update(duals, stats.violation_sums, config.dual_steps);

    const double n = static_cast<double>(n_samples);
    report.loss.push_back(stats.loss_sum / n);
    report.wsr.push_back(stats.rounded_wsr_sum / n);
    const auto& v = stats.violation_sums;
    report.violation_means[0].push_back(v.binary_tx.sum() /
                                        (n * v.binary_tx.size()));
    report.violation_means[1].push_back(v.binary_rx.sum() /
                                        (n * v.binary_rx.size()));
    report.violation_means[2].push_back(v.row_tx.sum() / (n * v.row_tx.size()));
    report.violation_means[3].push_back(v.row_rx.sum() / (n * v.row_rx.size()));
    report.violation_means[4].push_back(v.coupling.sum() /
                                        (n * v.coupling.size()));
    report.dual_norms[0].push_back(duals.lambda.norm());
    report.dual_norms[1].push_back(duals.mu.norm());
    report.dual_norms[2].push_back(duals.nu.norm());
    report.dual_norms[3].push_back(duals.xi.norm());
    report.dual_norms[4].push_back(duals.rho_dual.norm());
  }
  return {std::move(model), report};
}

std::string train_report_csv(const TrainReport& report) {
  std::string out =
      "epoch,loss,wsr,viol_binary_tx,viol_binary_rx,viol_row_tx,viol_row_rx,"
      "viol_coupling,dual_lambda,dual_mu,dual_nu,dual_xi,dual_rho\n";
  char buf[32];
  auto append = [&out, &buf](double v) {
    std::snprintf(buf, sizeof(buf), ",%.17g", v);
    out += buf;
  };
  for (std::size_t e = 0; e < report.loss.size(); ++e) {
    out += std::to_string(e);
    append(report.loss[e]);
    append(report.wsr[e]);
    for (const auto& series : report.violation_means) append(series[e]);
    for (const auto& series : report.dual_norms) append(series[e]);
    out += '\n';
  }
  return out;
}

}  // namespace beamgraph
