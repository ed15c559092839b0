// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/dataset.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "io_util.hpp"

namespace beamgraph {

using nlohmann::json;

namespace {

json config_to_json(const SimConfig& config) {
  return json{{"n_pairs", config.n_pairs},
              {"n_tx", config.n_tx},
              {"n_rx", config.n_rx},
              {"n_paths", config.n_paths},
              {"region_side", config.region_side},
              {"d_min", config.d_min},
              {"d_max", config.d_max},
              {"snr_db", config.snr_db},
              {"noise_power", config.noise_power},
              {"tx_power", config.tx_power},
              {"weights", config.weights}};
}

SimConfig config_from_json(const json& j) {
  SimConfig config;
  config.n_pairs = j.at("n_pairs").get<int>();
  config.n_tx = j.at("n_tx").get<int>();
  config.n_rx = j.at("n_rx").get<int>();
  config.n_paths = j.at("n_paths").get<int>();
  config.region_side = j.at("region_side").get<double>();
  config.d_min = j.at("d_min").get<double>();
  config.d_max = j.at("d_max").get<double>();
  config.snr_db = j.at("snr_db").get<double>();
  config.noise_power = j.at("noise_power").get<double>();
  config.tx_power = j.at("tx_power").get<double>();
  config.weights = j.at("weights").get<std::vector<double>>();
  config.validate();
  return config;
}

}  // namespace

Sample gen_sample(const SimConfig& config, std::uint64_t master_seed,
                  std::uint64_t stream_id) {
  RngState rng = seed_from(master_seed, stream_id);
  const NetworkTopology topo = gen_topology(config, rng);
  const ChannelSet channels = gen_channels(topo, config, rng);
  const Codebook codebook = make_codebook(config.n_tx, config.n_rx);
  Sample sample;
  sample.gains = effective_gains(channels, codebook);
  sample.features = build_features(channels, codebook);
  return sample;
}

Dataset gen_dataset(const SimConfig& config, int count,
                    std::uint64_t master_seed, StorageMode mode) {
  if (count < 1) throw std::invalid_argument("gen_dataset: count must be >= 1");
  config.validate();
  Dataset dataset;
  dataset.config = config;
  dataset.master_seed = master_seed;
  dataset.mode = mode;
  dataset.stream_ids.reserve(count);
  dataset.samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    dataset.stream_ids.push_back(static_cast<std::uint64_t>(i));
    dataset.samples.push_back(gen_sample(config, master_seed, i));
  }
  return dataset;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  json header;
  header["format_version"] = 1;
  header["config"] = config_to_json(dataset.config);
  header["master_seed"] = dataset.master_seed;
  header["sample_count"] = dataset.samples.size();
  header["storage_mode"] =
      dataset.mode == StorageMode::kSeeds ? "seeds" : "tensors";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_dataset: cannot open " + path);
  os << header.dump() << '\n';
  if (dataset.mode == StorageMode::kSeeds) {
    for (std::uint64_t id : dataset.stream_ids) detail::write_u64(os, id);
  } else {
    for (const Sample& sample : dataset.samples) {
      for (double v : sample.gains.rho) detail::write_f64(os, v);
      for (double v : sample.features.kappa) detail::write_f64(os, v);
    }
  }
  if (!os) throw std::runtime_error("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
  const json header = json::parse(detail::read_header_line(is));
  if (header.at("format_version").get<int>() != 1)
    throw std::runtime_error("load_dataset: unsupported format version in " +
                             path);
  Dataset dataset;
  dataset.config = config_from_json(header.at("config"));
  dataset.master_seed = header.at("master_seed").get<std::uint64_t>();
  const auto count = header.at("sample_count").get<std::size_t>();
  const std::string mode = header.at("storage_mode").get<std::string>();
  if (mode == "seeds") {
    dataset.mode = StorageMode::kSeeds;
    dataset.stream_ids.reserve(count);
    dataset.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint64_t id = detail::read_u64(is);
      dataset.stream_ids.push_back(id);
      dataset.samples.push_back(
          gen_sample(dataset.config, dataset.master_seed, id));
    }
  } else if (mode == "tensors") {
    dataset.mode = StorageMode::kTensors;
    const auto& c = dataset.config;
    const std::size_t gain_count = static_cast<std::size_t>(c.n_pairs) *
                                   c.n_rx * c.n_pairs * c.n_tx;
    const std::size_t feat_count =
        static_cast<std::size_t>(c.n_pairs) * c.n_pairs * c.n_rx * c.n_tx;
    for (std::size_t i = 0; i < count; ++i) {
      Sample sample;
      sample.gains.n_pairs = c.n_pairs;
      sample.gains.n_rx = c.n_rx;
      sample.gains.n_tx = c.n_tx;
      sample.gains.rho.resize(gain_count);
      for (double& v : sample.gains.rho) v = detail::read_f64(is);
      sample.features.n_pairs = c.n_pairs;
      sample.features.n_rx = c.n_rx;
      sample.features.n_tx = c.n_tx;
      sample.features.dim = c.n_rx * c.n_tx;
      sample.features.kappa.resize(feat_count);
      for (double& v : sample.features.kappa) v = detail::read_f64(is);
      dataset.samples.push_back(std::move(sample));
      dataset.stream_ids.push_back(i);
    }
  } else {
    throw std::runtime_error("load_dataset: unknown storage mode in " + path);
  }
  return dataset;
}

}  // namespace beamgraph
