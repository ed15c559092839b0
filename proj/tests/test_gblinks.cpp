// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>

#include "beamgraph/dataset.hpp"
#include "beamgraph/gblinks.hpp"

using namespace beamgraph;

namespace {

Sample desk_sample(int n_pairs, int n_tx, int n_rx, std::uint64_t seed) {
  const SimConfig config =
      SimConfig::from_snr(n_pairs, n_tx, n_rx, 2, 20.0, 3.0, 8.0, 10.0);
  return gen_sample(config, seed, 0);
}

}  // namespace

TEST_SUITE("gblinks") {

TEST_CASE("published widths at 16 antennas") {
  const MlpSpec msg = message_mlp_spec(16, 16);
  CHECK(msg.widths == std::vector<int>{800, 256, 128, 64});
  const MlpSpec tx = tx_mlp_spec(16, 16);
  CHECK(tx.widths == std::vector<int>{128 + 256 + 16, 256, 128, 64, 16});
  const MlpSpec rx = rx_mlp_spec(16, 16);
  CHECK(rx.widths == std::vector<int>{128 + 256 + 16, 256, 128, 64, 16});
}

TEST_CASE("initialization stays within the fan bound and is deterministic") {
  RngState rng = seed_from(1, 0);
  const ModelParams params = init_params(4, 4, 1, rng);
  int inspected = 0;
  for (const auto& layer : params.layers)
    for (const MlpParams* mlp :
         {&layer.message_mlp, &layer.tx_mlp, &layer.rx_mlp})
      for (std::size_t i = 0; i < mlp->weights.size(); ++i) {
        const auto& w = mlp->weights[i];
        const double bound = std::sqrt(6.0 / (w.rows() + w.cols()));
        for (Eigen::Index a = 0; a < w.rows() && inspected < 10000; ++a)
          for (Eigen::Index b = 0; b < w.cols(); ++b, ++inspected) {
            CHECK(w(a, b) <= bound);
            CHECK(w(a, b) >= -bound);
          }
        CHECK(mlp->biases[i].cwiseAbs().maxCoeff() == 0.0);
      }
  RngState rng2 = seed_from(1, 0);
  const ModelParams again = init_params(4, 4, 1, rng2);
  CHECK(params.layers[0].message_mlp.weights[0] ==
        again.layers[0].message_mlp.weights[0]);
}

TEST_CASE("projection clamps to the unit interval") {
  CHECK(project(-0.3) == 0.0);
  CHECK(project(0.4) == 0.4);
  CHECK(project(1.7) == 1.0);
}

TEST_CASE("zero message network aggregates to zero") {
  RngState rng = seed_from(2, 0);
  ModelParams params = init_params(2, 2, 1, rng);
  for (auto& w : params.layers[0].message_mlp.weights) w.setZero();
  const Sample sample = desk_sample(3, 2, 2, 7);
  const BeamPolicy prev = initial_policy(3, 2, 2);
  const Eigen::VectorXd agg =
      aggregate(params.layers[0], sample.features, prev, 0);
  CHECK(agg.size() == 2 * params.agg_width);
  CHECK(agg.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single neighbor makes MAX equal MEAN") {
  RngState rng = seed_from(3, 0);
  const ModelParams params = init_params(2, 2, 1, rng);
  const Sample sample = desk_sample(2, 2, 2, 8);
  const BeamPolicy prev = initial_policy(2, 2, 2);
  const Eigen::VectorXd agg =
      aggregate(params.layers[0], sample.features, prev, 1);
  const int f = params.agg_width;
  CHECK((agg.head(f) - agg.tail(f)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("isolated vertex aggregates to the zero vector") {
  RngState rng = seed_from(4, 0);
  const ModelParams params = init_params(2, 2, 1, rng);
  const Sample sample = desk_sample(1, 2, 2, 9);
  const BeamPolicy prev = initial_policy(1, 2, 2);
  const Eigen::VectorXd agg =
      aggregate(params.layers[0], sample.features, prev, 0);
  CHECK(agg.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("aggregation ignores neighbor ordering") {
  RngState rng = seed_from(5, 0);
  const ModelParams params = init_params(2, 2, 1, rng);
  const SimConfig config = SimConfig::from_snr(4, 2, 2, 2, 20.0, 3.0, 8.0, 10.0);
  const Sample sample = gen_sample(config, 11, 0);
  const BeamPolicy prev = initial_policy(4, 2, 2);
  const Eigen::VectorXd base =
      aggregate(params.layers[0], sample.features, prev, 0);
  // Relabel the neighbors (vertices 1..3) and aggregate again at vertex 0.
  const int perm[4] = {0, 3, 1, 2};
  GraphFeatures permuted = sample.features;
  BeamPolicy prev_permuted = prev;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < permuted.dim; ++k)
        permuted.feature(i, j)[k] = sample.features.feature(perm[i], perm[j])[k];
  const Eigen::VectorXd relabeled =
      aggregate(params.layers[0], permuted, prev_permuted, 0);
  CHECK((base - relabeled).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("combine basics") {
  RngState rng = seed_from(6, 0);
  const Sample sample = desk_sample(2, 2, 2, 12);
  const BeamPolicy prev = initial_policy(2, 2, 2);
  SUBCASE("zero parameters clamp to zero rows") {
    ModelParams params = init_params(2, 2, 1, rng);
    for (auto* mlp : {&params.layers[0].tx_mlp, &params.layers[0].rx_mlp})
      for (auto& w : mlp->weights) w.setZero();
    const Eigen::VectorXd agg = Eigen::VectorXd::Zero(2 * params.agg_width);
    const auto [tx_row, rx_row] =
        combine(params.layers[0], agg, sample.features, prev, 0);
    CHECK(tx_row.cwiseAbs().maxCoeff() == 0.0);
    CHECK(rx_row.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("outputs always land in the unit box") {
    for (int trial = 0; trial < 1000; ++trial) {
      const ModelParams params = init_params(2, 2, 1, rng);
      const Eigen::VectorXd agg =
          aggregate(params.layers[0], sample.features, prev, 0);
      const auto [tx_row, rx_row] =
          combine(params.layers[0], agg, sample.features, prev, 0);
      CHECK(tx_row.minCoeff() >= 0.0);
      CHECK(tx_row.maxCoeff() <= 1.0);
      CHECK(rx_row.minCoeff() >= 0.0);
      CHECK(rx_row.maxCoeff() <= 1.0);
    }
  }
  SUBCASE("saturated pre-activation pins the output to one") {
    ModelParams params = init_params(2, 2, 1, rng);
    auto& tx = params.layers[0].tx_mlp;
    for (auto& w : tx.weights) w.setZero();
    tx.biases.back()(0) = 2.0;
    const Eigen::VectorXd agg = Eigen::VectorXd::Zero(2 * params.agg_width);
    const auto [tx_row, rx_row] =
        combine(params.layers[0], agg, sample.features, prev, 0);
    CHECK(tx_row(0) == 1.0);
  }
}

TEST_CASE("forward with one round equals aggregate plus combine") {
  RngState rng = seed_from(7, 0);
  const ModelParams params = init_params(2, 2, 1, rng);
  const Sample sample = desk_sample(3, 2, 2, 13);
  const BeamPolicy init = initial_policy(3, 2, 2);
  const BeamPolicy out = forward(params, sample.features, init);
  for (int m = 0; m < 3; ++m) {
    const Eigen::VectorXd agg =
        aggregate(params.layers[0], sample.features, init, m);
    const auto [tx_row, rx_row] =
        combine(params.layers[0], agg, sample.features, init, m);
    CHECK((out.psi.row(m).transpose() - tx_row).cwiseAbs().maxCoeff() == 0.0);
    CHECK((out.phi.row(m).transpose() - rx_row).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("zero model rounds to an all-inactive schedule") {
  RngState rng = seed_from(8, 0);
  ModelParams params = init_params(2, 2, 1, rng);
  for (auto& layer : params.layers)
    for (auto* mlp : {&layer.message_mlp, &layer.tx_mlp, &layer.rx_mlp})
      for (auto& w : mlp->weights) w.setZero();
  const Sample sample = desk_sample(3, 2, 2, 14);
  const BeamPolicy out =
      forward(params, sample.features, initial_policy(3, 2, 2));
  CHECK(out.phi.cwiseAbs().maxCoeff() == 0.0);
  const BinarySelection sel = round_policy(out, 0.5);
  CHECK(sel.active_count() == 0);
}

TEST_CASE("forward is equivariant under pair relabeling") {
  RngState rng = seed_from(9, 0);
  const ModelParams params = init_params(2, 2, 1, rng);
  const SimConfig config = SimConfig::from_snr(4, 2, 2, 2, 20.0, 3.0, 8.0, 10.0);
  RngState instance_rng = seed_from(100, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Sample sample =
        gen_sample(config, 200, next_u64(instance_rng) % 1000);
    const BeamPolicy out =
        forward(params, sample.features, initial_policy(4, 2, 2));
    int perm[4] = {0, 1, 2, 3};
    for (int i = 3; i > 0; --i)
      std::swap(perm[i], perm[next_u64(instance_rng) % (i + 1)]);
    GraphFeatures permuted = sample.features;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < permuted.dim; ++k)
          permuted.feature(i, j)[k] =
              sample.features.feature(perm[i], perm[j])[k];
    const BeamPolicy out_permuted =
        forward(params, permuted, initial_policy(4, 2, 2));
    for (int i = 0; i < 4; ++i) {
      CHECK((out_permuted.phi.row(i) - out.phi.row(perm[i]))
                .cwiseAbs()
                .maxCoeff() <= 1e-6);
      CHECK((out_permuted.psi.row(i) - out.psi.row(perm[i]))
                .cwiseAbs()
                .maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("size generalization: one model, several network sizes") {
  RngState rng = seed_from(10, 0);
  const ModelParams params = init_params(2, 2, 1, rng);
  for (int n : {1, 2, 5}) {
    const Sample sample = desk_sample(n, 2, 2, 15 + n);
    const BeamPolicy out =
        forward(params, sample.features, initial_policy(n, 2, 2));
    CHECK(out.phi.rows() == n);
    CHECK(out.phi.minCoeff() >= 0.0);
    CHECK(out.phi.maxCoeff() <= 1.0);
  }
}

TEST_CASE("dimension mismatch rejected") {
  RngState rng = seed_from(11, 0);
  const ModelParams params = init_params(4, 4, 1, rng);
  const Sample sample = desk_sample(2, 2, 2, 16);
  CHECK_THROWS_AS(
      forward(params, sample.features, initial_policy(2, 2, 2)),
      std::invalid_argument);
}

TEST_CASE("two rounds apply distinct parameter sets") {
  RngState rng = seed_from(12, 0);
  const ModelParams params = init_params(2, 2, 2, rng);
  CHECK(params.rounds() == 2);
  const Sample sample = desk_sample(2, 2, 2, 17);
  // Hand-rolled two synchronous rounds.
  BeamPolicy policy = initial_policy(2, 2, 2);
  for (int k = 0; k < 2; ++k) {
    BeamPolicy next = policy;
    for (int m = 0; m < 2; ++m) {
      const Eigen::VectorXd agg =
          aggregate(params.layers[k], sample.features, policy, m);
      const auto [tx_row, rx_row] =
          combine(params.layers[k], agg, sample.features, policy, m);
      next.psi.row(m) = tx_row.transpose();
      next.phi.row(m) = rx_row.transpose();
    }
    policy = next;
  }
  const BeamPolicy out =
      forward(params, sample.features, initial_policy(2, 2, 2));
  CHECK((out.phi - policy.phi).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out.psi - policy.psi).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("model file round trip is bit exact") {
  RngState rng = seed_from(13, 0);
  const ModelParams params = init_params(3, 2, 2, rng);
  const std::string path = "/tmp/beamgraph_model_test.bin";
  save_model(params, path);
  const ModelParams loaded = load_model(path);
  CHECK(loaded.n_tx == params.n_tx);
  CHECK(loaded.n_rx == params.n_rx);
  CHECK(loaded.rounds() == params.rounds());
  for (int k = 0; k < params.rounds(); ++k) {
    const auto& a = params.layers[k];
    const auto& b = loaded.layers[k];
    for (std::size_t i = 0; i < a.message_mlp.weights.size(); ++i) {
      CHECK(a.message_mlp.weights[i] == b.message_mlp.weights[i]);
      CHECK(a.message_mlp.biases[i] == b.message_mlp.biases[i]);
    }
    for (std::size_t i = 0; i < a.tx_mlp.weights.size(); ++i)
      CHECK(a.tx_mlp.weights[i] == b.tx_mlp.weights[i]);
    for (std::size_t i = 0; i < a.rx_mlp.weights.size(); ++i)
      CHECK(a.rx_mlp.weights[i] == b.rx_mlp.weights[i]);
  }
  std::remove(path.c_str());
}

}  // TEST_SUITE
