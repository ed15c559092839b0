// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "beamgraph/channel.hpp"

using namespace beamgraph;

namespace {

SimConfig desk_config(int n_pairs = 2, int n_tx = 4, int n_rx = 4) {
  return SimConfig::from_snr(n_pairs, n_tx, n_rx, 2, 30.0, 5.0, 15.0, 10.0);
}

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("config validation") {
  SimConfig c = desk_config();
  CHECK_NOTHROW(c.validate());
  SUBCASE("snr consistency enforced") {
    c.tx_power *= 2.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
  SUBCASE("distance bounds") {
    c.d_min = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
  SUBCASE("weights length") {
    c.weights.push_back(1.0);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
}

TEST_CASE("degenerate distance interval pins the pair distance") {
  SimConfig c = desk_config(4);
  c.d_min = c.d_max = 10.0;
  RngState rng = seed_from(3, 0);
  const NetworkTopology topo = gen_topology(c, rng);
  for (int m = 0; m < c.n_pairs; ++m)
    CHECK(topo.dist(m, m) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("receiver placement geometry") {
  const Eigen::Vector2d rx = place_receiver({1.0, 1.0}, 5.0, 0.0);
  CHECK(rx.x() == doctest::Approx(6.0));
  CHECK(rx.y() == doctest::Approx(1.0));
}

TEST_CASE("distance matrix matches positions exactly") {
  SimConfig c = desk_config(3);
  RngState rng = seed_from(4, 0);
  const NetworkTopology topo = gen_topology(c, rng);
  for (int m = 0; m < c.n_pairs; ++m)
    for (int n = 0; n < c.n_pairs; ++n)
      CHECK(topo.dist(m, n) == (topo.rx_pos[m] - topo.tx_pos[n]).norm());
}

TEST_CASE("pair distances are uniform over [d1, d2] on average") {
  SimConfig c = desk_config(1);
  c.d_min = 5.0;
  c.d_max = 15.0;
  RngState rng = seed_from(5, 0);
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const NetworkTopology topo = gen_topology(c, rng);
    sum += topo.dist(0, 0);
  }
  const double mean = sum / n;
  CHECK(mean > 10.0 * 0.98);
  CHECK(mean < 10.0 * 1.02);
}

TEST_CASE("steering vector closed forms") {
  SUBCASE("two antennas, boresight") {
    const Eigen::VectorXcd v = ula_steering(0.0, 2);
    CHECK(std::abs(v(0) - std::complex<double>(1.0 / std::sqrt(2.0), 0.0)) < 1e-15);
    CHECK(std::abs(v(1) - std::complex<double>(1.0 / std::sqrt(2.0), 0.0)) < 1e-15);
  }
  SUBCASE("two antennas, endfire flips the second element") {
    const Eigen::VectorXcd v = ula_steering(M_PI / 2.0, 2);
    CHECK(std::abs(v(1) + v(0)) < 1e-12);  // e^{j pi} = -1
  }
  SUBCASE("single antenna") {
    const Eigen::VectorXcd v = ula_steering(1.234, 1);
    CHECK(std::abs(v(0) - std::complex<double>(1.0, 0.0)) < 1e-15);
  }
  SUBCASE("unit norm across sizes") {
    for (int n : {1, 2, 8, 16})
      CHECK(std::abs(ula_steering(0.7, n).norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("dft codebook") {
  SUBCASE("n=2 columns") {
    const Eigen::MatrixXcd f = dft_codebook(2);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(f(0, 0) - std::complex<double>(s, 0)) < 1e-15);
    CHECK(std::abs(f(1, 0) - std::complex<double>(s, 0)) < 1e-15);
    CHECK(std::abs(f(0, 1) - std::complex<double>(s, 0)) < 1e-15);
    CHECK(std::abs(f(1, 1) + std::complex<double>(s, 0)) < 1e-12);
  }
  SUBCASE("n=1 trivial") {
    const Eigen::MatrixXcd f = dft_codebook(1);
    CHECK(std::abs(f(0, 0) - std::complex<double>(1, 0)) < 1e-15);
  }
  SUBCASE("gram identity within 1e-12") {
    for (int n : {1, 2, 8, 16}) {
      const Eigen::MatrixXcd f = dft_codebook(n);
      const Eigen::MatrixXcd gram = f.adjoint() * f;
      CHECK((gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <=
            1e-12);
    }
  }
}

TEST_CASE("single-path channel norm matches the drawn path gain") {
  SimConfig c = desk_config(1);
  c.n_paths = 1;
  RngState rng = seed_from(17, 0);
  const NetworkTopology topo = gen_topology(c, rng);
  // Replay the channel draw order (alpha, tau, psi) on a copy of the stream.
  RngState replay = rng;
  const std::complex<double> alpha = next_complex_gaussian(replay, 1.0);
  const ChannelSet channels = gen_channels(topo, c, rng);
  const double pathloss = std::pow(topo.dist(0, 0), -3.0);
  const double expected =
      std::sqrt(pathloss * c.n_tx * c.n_rx) * std::abs(alpha);
  CHECK(channels.at(0, 0).norm() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("channel rank never exceeds the path count") {
  SimConfig c = desk_config(2, 4, 4);
  c.n_paths = 2;
  RngState rng = seed_from(18, 0);
  const NetworkTopology topo = gen_topology(c, rng);
  const ChannelSet channels = gen_channels(topo, c, rng);
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n) {
      const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(channels.at(m, n));
      int rank = 0;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-9 * svd.singularValues()(0)) ++rank;
      CHECK(rank <= c.n_paths);
    }
}

TEST_CASE("mean squared Frobenius norm matches the model expectation") {
  // E ||H||_F^2 = pathloss * Nt * Nr * Np for a fixed topology entry.
  SimConfig c = desk_config(1, 4, 4);
  c.d_min = c.d_max = 10.0;
  RngState rng = seed_from(19, 0);
  const NetworkTopology topo = gen_topology(c, rng);
  const double expected = std::pow(10.0, -3.0) * c.n_tx * c.n_rx * c.n_paths;
  double sum = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const ChannelSet channels = gen_channels(topo, c, rng);
    sum += channels.at(0, 0).squaredNorm();
  }
  const double mean = sum / draws;
  CHECK(mean > expected * 0.97);
  CHECK(mean < expected * 1.03);
}

TEST_CASE("effective gains") {
  SUBCASE("zero channel gives zero gains") {
    ChannelSet channels;
    channels.n_pairs = 1;
    channels.entries = {Eigen::MatrixXcd::Zero(2, 2)};
    const Codebook cb = make_codebook(2, 2);
    const EffectiveGains g = effective_gains(channels, cb);
    for (int r = 0; r < 2; ++r)
      for (int t = 0; t < 2; ++t) CHECK(g.at(0, r, 0, t) == 0.0);
  }
  SUBCASE("rank-one channel built from codewords gives unit gain") {
    const Codebook cb = make_codebook(4, 4);
    ChannelSet channels;
    channels.n_pairs = 1;
    channels.entries = {cb.rx.col(1) * cb.tx.col(2).adjoint()};
    const EffectiveGains g = effective_gains(channels, cb);
    CHECK(g.at(0, 1, 0, 2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.at(0, 0, 0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("matches a scalar re-computation") {
    SimConfig c = desk_config(2, 2, 2);
    RngState rng = seed_from(20, 0);
    const NetworkTopology topo = gen_topology(c, rng);
    const ChannelSet channels = gen_channels(topo, c, rng);
    const Codebook cb = make_codebook(2, 2);
    const EffectiveGains g = effective_gains(channels, cb);
    for (int m = 0; m < 2; ++m)
      for (int r = 0; r < 2; ++r)
        for (int n = 0; n < 2; ++n)
          for (int l = 0; l < 2; ++l) {
            std::complex<double> acc = 0.0;
            for (int a = 0; a < 2; ++a)
              for (int b = 0; b < 2; ++b)
                acc += std::conj(cb.rx(a, r)) * channels.at(m, n)(a, b) *
                       cb.tx(b, l);
            CHECK(g.at(m, r, n, l) == doctest::Approx(std::norm(acc)).epsilon(1e-12));
          }
  }
  SUBCASE("phase-rotated codeword leaves gains unchanged") {
    SimConfig c = desk_config(1, 4, 4);
    RngState rng = seed_from(21, 0);
    const NetworkTopology topo = gen_topology(c, rng);
    const ChannelSet channels = gen_channels(topo, c, rng);
    Codebook cb = make_codebook(4, 4);
    const EffectiveGains base = effective_gains(channels, cb);
    cb.tx.col(1) *= std::polar(1.0, 0.9);
    cb.rx.col(2) *= std::polar(1.0, -2.1);
    const EffectiveGains rotated = effective_gains(channels, cb);
    for (int r = 0; r < 4; ++r)
      for (int t = 0; t < 4; ++t)
        CHECK(rotated.at(0, r, 0, t) ==
              doctest::Approx(base.at(0, r, 0, t)).epsilon(1e-12));
  }
  SUBCASE("shape mismatch rejected") {
    ChannelSet channels;
    channels.n_pairs = 1;
    channels.entries = {Eigen::MatrixXcd::Zero(3, 2)};
    const Codebook cb = make_codebook(2, 2);
    CHECK_THROWS_AS(effective_gains(channels, cb), std::invalid_argument);
  }
}

}  // TEST_SUITE
