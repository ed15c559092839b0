// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "beamgraph/baselines.hpp"
#include "beamgraph/dataset.hpp"
#include "beamgraph/gblinks.hpp"
#include "beamgraph/sca.hpp"

namespace beamgraph {

enum class Method { kGblinks, kGreedy, kExhaustive, kSca };

/// Accepts "gblinks", "greedy", "exhaustive", "sca".
Method parse_method(const std::string& name);
std::string method_name(Method method);

struct MetricsRow {
  std::int64_t sample_id = 0;
  std::string method;
  double wsr = 0.0;
  int active_pairs = 0;
  double runtime_ms = 0.0;
  std::optional<double> ratio;
  bool failed = false;   // e.g. exhaustive budget refusal
  std::string error;
};

struct EvalOptions {
  const ModelParams* model = nullptr;  // required for gblinks
  double round_threshold = 0.5;
  std::uint64_t exhaustive_budget = 100000000;
  ScaConfig sca;
};

/// Runs the method on every sample; continuous outputs are rounded and the
/// weighted sum rate is computed on the rounded schedule. Per-sample
/// failures (budget refusals, non-convergence) are marked in the row rather
/// than aborting the sweep. Worker count is capped by BEAMGRAPH_THREADS.
std::vector<MetricsRow> evaluate(const Dataset& dataset, Method method,
                                 const EvalOptions& options);

struct RatioReport {
  std::vector<double> per_sample;  // NaN where flagged
  double mean = 0.0;               // over valid samples
  double frac_above = 0.0;         // fraction of valid samples >= threshold
  double threshold = 0.9;
  int valid = 0;
  int flagged = 0;  // denominator zero with nonzero numerator, or failures
};

/// Per-sample wsr ratios numerator/denominator. Both zero counts as 1.
/// Throws std::invalid_argument when sample ids do not match pairwise.
RatioReport compute_ratios(const std::vector<MetricsRow>& numerator,
                           const std::vector<MetricsRow>& denominator,
                           double threshold = 0.9);

/// Fixed column order: sample_id,method,wsr,active_pairs,runtime_ms[,ra].
/// Failed rows carry wsr=nan and active_pairs=-1.
std::string metrics_csv(const std::vector<MetricsRow>& rows,
                        bool with_ratio = false);

void write_text_file(const std::string& path, const std::string& content);

/// Worker cap from BEAMGRAPH_THREADS (defaults to the hardware count).
int worker_count();

}  // namespace beamgraph
