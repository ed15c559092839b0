// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamgraph {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += kGoldenGamma);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngState seed_from(std::uint64_t master_seed, std::uint64_t stream_id) {
  // Stream offset uses the splitmix increment so adjacent ids land far apart.
  std::uint64_t sm = master_seed ^ (stream_id * kGoldenGamma);
  RngState state;
  for (auto& word : state.s) word = splitmix64(sm);
  if (state.s[0] == 0 && state.s[1] == 0 && state.s[2] == 0 && state.s[3] == 0)
    state.s[0] = kGoldenGamma;
  return state;
}

std::uint64_t next_u64(RngState& state) {
  auto& s = state.s;
  const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
  const std::uint64_t t = s[1] << 17;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = rotl(s[3], 45);
  return result;
}

double next_uniform(RngState& state) {
  return static_cast<double>(next_u64(state) >> 11) * 0x1.0p-53;
}

double next_gaussian(RngState& state) {
  double u1 = next_uniform(state);
  const double u2 = next_uniform(state);
  if (u1 == 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::complex<double> next_complex_gaussian(RngState& state, double variance) {
  if (!(variance > 0.0))
    throw std::invalid_argument("next_complex_gaussian: variance must be > 0");
  const double scale = std::sqrt(variance / 2.0);
  const double re = scale * next_gaussian(state);
  const double im = scale * next_gaussian(state);
  return {re, im};
}

}  // namespace beamgraph
