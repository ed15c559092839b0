// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "beamgraph/grad.hpp"

using namespace beamgraph;

namespace {

SimConfig desk_config(int n_pairs, int n_tx, int n_rx) {
  return SimConfig::from_snr(n_pairs, n_tx, n_rx, 2, 20.0, 3.0, 8.0, 10.0);
}

DualMultipliers small_duals(int n_pairs, int n_rx, int n_tx,
                            std::uint64_t seed) {
  DualMultipliers d = DualMultipliers::zeros(n_pairs, n_rx, n_tx);
  RngState rng = seed_from(seed, 77);
  for (int m = 0; m < n_pairs; ++m) {
    for (int t = 0; t < n_tx; ++t) d.lambda(m, t) = 0.1 * next_uniform(rng);
    for (int r = 0; r < n_rx; ++r) d.mu(m, r) = 0.1 * next_uniform(rng);
    d.nu(m) = 0.1 * next_uniform(rng);
    d.xi(m) = 0.1 * next_uniform(rng);
    d.rho_dual(m) = 0.1 * next_uniform(rng);
  }
  return d;
}

}  // namespace

TEST_SUITE("grad") {

TEST_CASE("zero model with zero duals has zero loss") {
  RngState rng = seed_from(1, 0);
  ModelParams params = init_params(2, 2, 1, rng);
  for (auto& layer : params.layers)
    for (auto* mlp : {&layer.message_mlp, &layer.tx_mlp, &layer.rx_mlp})
      for (auto& w : mlp->weights) w.setZero();
  const SimConfig config = desk_config(2, 2, 2);
  const Sample sample = gen_sample(config, 5, 0);
  const DualMultipliers duals = DualMultipliers::zeros(2, 2, 2);
  const LossAndGrad result =
      loss_and_grad(params, std::span<const Sample>(&sample, 1), duals, config);
  CHECK(result.loss == 0.0);
}

TEST_CASE("quadratic penalty gradient through the identity region") {
  // With zero weights the loss reduces to the penalty terms; check
  // d/d_psi [lambda (psi - psi^2)] = lambda (1 - 2 psi) on the interior.
  const SimConfig base = desk_config(1, 2, 2);
  SimConfig config = base;
  config.weights = {0.0};
  const Sample sample = gen_sample(config, 6, 0);
  DualMultipliers duals = DualMultipliers::zeros(1, 2, 2);
  duals.lambda(0, 1) = 0.7;
  BeamPolicy policy = BeamPolicy::constant(1, 2, 2, 0.0);
  policy.psi(0, 1) = 0.3;
  policy.phi(0, 0) = 1.0;
  policy.psi(0, 0) = 0.0;
  Eigen::MatrixXd d_phi, d_psi;
  lagrangian_loss_policy_grad(sample.gains, policy, duals, config, d_phi,
                              d_psi);
  CHECK(d_psi(0, 1) == doctest::Approx(0.7 * (1.0 - 2.0 * 0.3)).epsilon(1e-12));
}

TEST_CASE("policy-gradient matches finite differences of the loss") {
  const SimConfig config = desk_config(3, 2, 2);
  const Sample sample = gen_sample(config, 7, 0);
  const DualMultipliers duals = small_duals(3, 2, 2, 7);
  RngState rng = seed_from(8, 0);
  BeamPolicy policy = BeamPolicy::constant(3, 2, 2, 0.0);
  for (int m = 0; m < 3; ++m) {
    for (int r = 0; r < 2; ++r) policy.phi(m, r) = 0.1 + 0.8 * next_uniform(rng);
    for (int t = 0; t < 2; ++t) policy.psi(m, t) = 0.1 + 0.8 * next_uniform(rng);
  }
  Eigen::MatrixXd d_phi, d_psi;
  lagrangian_loss_policy_grad(sample.gains, policy, duals, config, d_phi,
                              d_psi);
  const double h = 1e-6;
  for (int m = 0; m < 3; ++m) {
    for (int r = 0; r < 2; ++r) {
      BeamPolicy plus = policy;
      BeamPolicy minus = policy;
      plus.phi(m, r) += h;
      minus.phi(m, r) -= h;
      const double numeric = (lagrangian_loss(sample.gains, plus, duals, config) -
                              lagrangian_loss(sample.gains, minus, duals, config)) /
                             (2.0 * h);
      CHECK(d_phi(m, r) == doctest::Approx(numeric).epsilon(1e-5));
    }
    for (int t = 0; t < 2; ++t) {
      BeamPolicy plus = policy;
      BeamPolicy minus = policy;
      plus.psi(m, t) += h;
      minus.psi(m, t) -= h;
      const double numeric = (lagrangian_loss(sample.gains, plus, duals, config) -
                              lagrangian_loss(sample.gains, minus, duals, config)) /
                             (2.0 * h);
      CHECK(d_psi(m, t) == doctest::Approx(numeric).epsilon(1e-5));
    }
  }
}

TEST_CASE("full-model finite-difference agreement on a small instance") {
  const SimConfig config = desk_config(2, 2, 2);
  const Sample sample = gen_sample(config, 9, 0);
  RngState rng = seed_from(10, 0);
  const ModelParams params = init_params(2, 2, 1, rng);
  const DualMultipliers duals = small_duals(2, 2, 2, 10);
  RngState pick = seed_from(11, 0);
  const FiniteDiffReport report =
      finite_diff_check(params, sample, duals, config, 1e-5, 300, pick);
  CHECK(report.checked >= 300);
  CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("finite-difference agreement with two rounds") {
  const SimConfig config = desk_config(2, 2, 2);
  const Sample sample = gen_sample(config, 12, 0);
  RngState rng = seed_from(13, 0);
  const ModelParams params = init_params(2, 2, 2, rng);
  const DualMultipliers duals = small_duals(2, 2, 2, 13);
  RngState pick = seed_from(14, 0);
  const FiniteDiffReport report =
      finite_diff_check(params, sample, duals, config, 1e-5, 200, pick);
  CHECK(report.checked >= 200);
  CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("batch loss is the sum of per-sample losses") {
  const SimConfig config = desk_config(2, 2, 2);
  std::vector<Sample> samples;
  for (int i = 0; i < 3; ++i) samples.push_back(gen_sample(config, 20, i));
  RngState rng = seed_from(21, 0);
  const ModelParams params = init_params(2, 2, 1, rng);
  const DualMultipliers duals = small_duals(2, 2, 2, 21);
  double sum = 0.0;
  for (const Sample& s : samples)
    sum += loss_and_grad(params, std::span<const Sample>(&s, 1), duals, config)
               .loss;
  const LossAndGrad batch = loss_and_grad(
      params, std::span<const Sample>(samples.data(), samples.size()), duals,
      config);
  CHECK(batch.loss == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("adam") {
  RngState rng = seed_from(30, 0);
  ModelParams params = init_params(1, 1, 1, rng);
  SUBCASE("first step magnitude matches the closed form") {
    ModelParams grads = zeros_like(params);
    grads.layers[0].tx_mlp.biases.back()(0) = 1.0;
    const double before = params.layers[0].tx_mlp.biases.back()(0);
    AdamState state = AdamState::zeros_like(params);
    adam_step(params, grads, state, 1e-3);
    const double after = params.layers[0].tx_mlp.biases.back()(0);
    CHECK(before - after == doctest::Approx(1e-3 / (1.0 + 1e-8)).epsilon(1e-9));
  }
  SUBCASE("zero gradient leaves parameters unchanged") {
    const ModelParams grads = zeros_like(params);
    AdamState state = AdamState::zeros_like(params);
    const Eigen::MatrixXd before = params.layers[0].message_mlp.weights[0];
    adam_step(params, grads, state, 1e-3);
    CHECK(params.layers[0].message_mlp.weights[0] == before);
  }
  SUBCASE("identical calls from identical state match") {
    ModelParams a = params;
    ModelParams b = params;
    ModelParams grads = zeros_like(params);
    grads.layers[0].message_mlp.weights[0].setConstant(0.25);
    AdamState sa = AdamState::zeros_like(params);
    AdamState sb = AdamState::zeros_like(params);
    adam_step(a, grads, sa, 1e-3);
    adam_step(b, grads, sb, 1e-3);
    CHECK(a.layers[0].message_mlp.weights[0] ==
          b.layers[0].message_mlp.weights[0]);
  }
}

TEST_CASE("one small step decreases the loss at a random point") {
  const SimConfig config = desk_config(2, 2, 2);
  const Sample sample = gen_sample(config, 40, 0);
  const DualMultipliers duals = small_duals(2, 2, 2, 40);
  RngState rng = seed_from(41, 0);
  int decreased = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    ModelParams params = init_params(2, 2, 1, rng);
    const std::span<const Sample> batch(&sample, 1);
    const LossAndGrad before = loss_and_grad(params, batch, duals, config);
    AdamState state = AdamState::zeros_like(params);
    adam_step(params, before.grads, state, 1e-5);
    const LossAndGrad after = loss_and_grad(params, batch, duals, config);
    if (after.loss < before.loss) ++decreased;
  }
  CHECK(decreased >= 95);
}

TEST_CASE("empty batch rejected") {
  RngState rng = seed_from(50, 0);
  const ModelParams params = init_params(2, 2, 1, rng);
  const SimConfig config = desk_config(2, 2, 2);
  const DualMultipliers duals = DualMultipliers::zeros(2, 2, 2);
  CHECK_THROWS_AS(
      loss_and_grad(params, std::span<const Sample>(), duals, config),
      std::invalid_argument);
}

}  // TEST_SUITE
