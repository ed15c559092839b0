// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace beamgraph {

/// xoshiro256++ state. A state is never all-zero. One state per logical
/// stream; independent streams may be advanced concurrently.
struct RngState {
  std::array<std::uint64_t, 4> s{};
};

/// Expands (master_seed XOR a stream-derived offset) through four splitmix64
/// steps into the four state words. Identical arguments give identical
/// streams on every platform.
RngState seed_from(std::uint64_t master_seed, std::uint64_t stream_id);

/// Advances the generator by one step.
std::uint64_t next_u64(RngState& state);

/// Uniform on [0,1): top 53 bits of the next word divided by 2^53.
double next_uniform(RngState& state);

/// Standard normal via Box-Muller, z = sqrt(-2 ln u1) * cos(2 pi u2).
/// Consumes exactly two uniforms per call; u1 = 0 is remapped to 2^-53.
double next_gaussian(RngState& state);

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
/// Real and imaginary parts are independent N(0, variance/2).
/// Throws std::invalid_argument for variance <= 0.
std::complex<double> next_complex_gaussian(RngState& state, double variance);

}  // namespace beamgraph
