// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace beamgraph::detail {

inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | ((v >> (8 * i)) & 0xFF);
  return out;
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
  const std::uint64_t le = to_little_endian(v);
  os.write(reinterpret_cast<const char*>(&le), sizeof(le));
}

inline std::uint64_t read_u64(std::istream& is) {
  std::uint64_t le = 0;
  is.read(reinterpret_cast<char*>(&le), sizeof(le));
  if (!is) throw std::runtime_error("binary read failed: truncated u64");
  return to_little_endian(le);
}

inline void write_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  write_u64(os, bits);
}

inline double read_f64(std::istream& is) {
  const std::uint64_t bits = read_u64(is);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

/// Reads characters up to the first '\n' (consumed, not returned).
inline std::string read_header_line(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("binary read failed: missing header line");
  return line;
}

}  // namespace beamgraph::detail
