// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "beamgraph/channel.hpp"
#include "beamgraph/graph.hpp"

namespace beamgraph {

/// One network instance ready for scheduling: beam-pair gains plus the
/// graph feature tensor derived from the same channels.
struct Sample {
  GraphFeatures features;
  EffectiveGains gains;
};

enum class StorageMode { kSeeds, kTensors };

/// In seeds mode the file stores one stream id per sample and samples are
/// regenerated bit-identically on load; tensors mode stores the raw gain and
/// feature tensors.
struct Dataset {
  SimConfig config;
  std::uint64_t master_seed = 0;
  StorageMode mode = StorageMode::kSeeds;
  std::vector<std::uint64_t> stream_ids;
  std::vector<Sample> samples;
};

/// Topology -> channels -> gains -> features for one rng stream.
Sample gen_sample(const SimConfig& config, std::uint64_t master_seed,
                  std::uint64_t stream_id);

/// Sample i uses stream id i.
Dataset gen_dataset(const SimConfig& config, int count,
                    std::uint64_t master_seed, StorageMode mode);

/// File layout: one-line JSON header {format_version, config, master_seed,
/// sample_count, storage_mode} followed by the binary body — per sample a
/// little-endian u64 stream id (seeds mode) or the gain tensor in (m, r, n, l)
/// order then the feature tensor in (i, j, k) order as little-endian doubles
/// (tensors mode).
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace beamgraph
