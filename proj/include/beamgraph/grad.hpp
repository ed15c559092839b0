// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "beamgraph/dataset.hpp"
#include "beamgraph/gblinks.hpp"
#include "beamgraph/problem.hpp"

namespace beamgraph {

/// Adam accumulators shaped like the model.
struct AdamState {
  ModelParams first_moment;
  ModelParams second_moment;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState zeros_like(const ModelParams& params);
};

struct LossAndGrad {
  double loss = 0.0;
  ModelParams grads;
};

/// Running sums collected while a batch is forwarded.
struct BatchStats {
  double loss_sum = 0.0;
  double rounded_wsr_sum = 0.0;
  ViolationReport violation_sums;  // element-wise sums over samples
  int count = 0;
};

ModelParams zeros_like(const ModelParams& params);
std::size_t parameter_count(const ModelParams& params);

/// Loss summed over the batch (each sample forwarded from the all-0.5
/// starting policy) and its exact gradient. Subgradient conventions:
/// ReLU'(0) = 0, clamp' = 0 outside (0,1) and on the boundary, |.|' (0) = 0,
/// MAX routes to the lowest achieving neighbor index.
LossAndGrad loss_and_grad(const ModelParams& params,
                          std::span<const Sample> batch,
                          const DualMultipliers& duals,
                          const SimConfig& config);

/// Same pass, also collecting per-sample statistics for training reports.
/// round_threshold controls the rounded-WSR statistic only.
LossAndGrad loss_and_grad_stats(const ModelParams& params,
                                std::span<const Sample> batch,
                                const DualMultipliers& duals,
                                const SimConfig& config, double round_threshold,
                                BatchStats* stats);

/// Bias-corrected Adam update, in place.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               double learning_rate);

/// Plain gradient step, kept for ablation runs.
void sgd_step(ModelParams& params, const ModelParams& grads,
              double learning_rate);

struct FiniteDiffReport {
  double max_rel_err = 0.0;
  double mean_rel_err = 0.0;
  int checked = 0;
  int excluded = 0;
};

/// Compares analytic gradients against central differences on `count`
/// randomly chosen parameters. A candidate is excluded when the +-h segment
/// is not smooth: any activation region, reduction winner or penalty-kink
/// side changes between the probes and the base point (a parameter sitting
/// exactly on a clamp boundary is the limiting case). Relative error uses
/// max(|analytic|, |numeric|, 1e-8) as denominator.
FiniteDiffReport finite_diff_check(const ModelParams& params,
                                   const Sample& sample,
                                   const DualMultipliers& duals,
                                   const SimConfig& config, double h, int count,
                                   RngState& rng);

}  // namespace beamgraph
