// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/evaluate.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace beamgraph {

Method parse_method(const std::string& name) {
  if (name == "gblinks") return Method::kGblinks;
  if (name == "greedy") return Method::kGreedy;
  if (name == "exhaustive") return Method::kExhaustive;
  if (name == "sca") return Method::kSca;
  throw std::invalid_argument(
      "unknown method '" + name +
      "'; allowed methods: gblinks, greedy, exhaustive, sca");
}

std::string method_name(Method method) {
  switch (method) {
    case Method::kGblinks: return "gblinks";
    case Method::kGreedy: return "greedy";
    case Method::kExhaustive: return "exhaustive";
    case Method::kSca: return "sca";
  }
  return "?";
}

int worker_count() {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (const char* env = std::getenv("BEAMGRAPH_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) workers = std::min(workers, cap);
  }
  return workers;
}

namespace {

MetricsRow eval_one(const Dataset& dataset, Method method,
                    const EvalOptions& options, int index) {
  const Sample& sample = dataset.samples[index];
  MetricsRow row;
  row.sample_id = index;
  row.method = method_name(method);
  const auto start = std::chrono::steady_clock::now();
  try {
    BinarySelection selection;
    switch (method) {
      case Method::kGblinks: {
        if (!options.model)
          throw std::invalid_argument("gblinks evaluation needs a model");
        const BeamPolicy out = forward(
            *options.model, sample.features,
            initial_policy(sample.features.n_pairs, options.model->n_rx,
                           options.model->n_tx));
        selection = round_policy(out, options.round_threshold);
        break;
      }
      case Method::kGreedy:
        selection = greedy_nosched(sample.gains);
        break;
      case Method::kExhaustive:
        selection = exhaustive_search(sample.gains, dataset.config,
                                      options.exhaustive_budget)
                        .selection;
        break;
      case Method::kSca:
        selection = run(sample.gains, dataset.config, options.sca).selection;
        break;
    }
    row.wsr = weighted_sum_rate(sample.gains, selection, dataset.config);
    row.active_pairs = selection.active_count();
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
    row.wsr = std::nan("");
    row.active_pairs = -1;
  }
  const auto end = std::chrono::steady_clock::now();
  row.runtime_ms =
      std::chrono::duration<double, std::milli>(end - start).count();
  return row;
}

}  // namespace

std::vector<MetricsRow> evaluate(const Dataset& dataset, Method method,
                                 const EvalOptions& options) {
  const int count = static_cast<int>(dataset.samples.size());
  std::vector<MetricsRow> rows(count);
  const int workers = std::min(worker_count(), std::max(count, 1));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i)
      rows[i] = eval_one(dataset, method, options, i);
    return rows;
  }
  std::atomic<int> cursor{0};
  auto work = [&] {
    while (true) {
      const int i = cursor.fetch_add(1);
      if (i >= count) return;
      rows[i] = eval_one(dataset, method, options, i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return rows;
}

RatioReport compute_ratios(const std::vector<MetricsRow>& numerator,
                           const std::vector<MetricsRow>& denominator,
                           double threshold) {
  if (numerator.size() != denominator.size())
    throw std::invalid_argument("compute_ratios: row count mismatch");
  RatioReport report;
  report.threshold = threshold;
  double sum = 0.0;
  int above = 0;
  for (std::size_t i = 0; i < numerator.size(); ++i) {
    if (numerator[i].sample_id != denominator[i].sample_id)
      throw std::invalid_argument("compute_ratios: sample id mismatch");
    double ratio = std::nan("");
    if (numerator[i].failed || denominator[i].failed) {
      ++report.flagged;
    } else if (denominator[i].wsr == 0.0) {
      if (numerator[i].wsr == 0.0) {
        ratio = 1.0;
      } else {
        ++report.flagged;
      }
    } else {
      ratio = numerator[i].wsr / denominator[i].wsr;
    }
    report.per_sample.push_back(ratio);
    if (!std::isnan(ratio)) {
      sum += ratio;
      ++report.valid;
      if (ratio >= threshold) ++above;
    }
  }
  if (report.valid > 0) {
    report.mean = sum / report.valid;
    report.frac_above = static_cast<double>(above) / report.valid;
  }
  return report;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows, bool with_ratio) {
  std::string out = with_ratio
                        ? "sample_id,method,wsr,active_pairs,runtime_ms,ra\n"
                        : "sample_id,method,wsr,active_pairs,runtime_ms\n";
  char buf[192];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%s,%.17g,%d,%.6g",
                  static_cast<long long>(row.sample_id), row.method.c_str(),
                  row.wsr, row.active_pairs, row.runtime_ms);
    out += buf;
    if (with_ratio) {
      if (row.ratio.has_value())
        std::snprintf(buf, sizeof(buf), ",%.17g", *row.ratio);
      else
        std::snprintf(buf, sizeof(buf), ",nan");
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << content;
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace beamgraph
