// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "beamgraph/problem.hpp"

namespace beamgraph {

struct ScaConfig {
  double dual_step = 0.1;    // multiplier ascent step (kept large on purpose)
  double tolerance = 1e-5;   // relative-change stopping rule, inner and outer
  int max_outer = 200;       // dual ascent iterations
  int max_inner = 50;        // surrogate rebuilds per dual setting
  double round_threshold = 0.5;

  // Subproblem solver (augmented Lagrangian + box-projected gradient).
  double subproblem_tol = 1e-6;    // projected-gradient residual target
  double feasibility_tol = 1e-6;   // max constraint violation at exit
  int max_al_rounds = 60;
  int max_pg_iters = 8000;
};

/// Iterate of the relaxed problem. w_bar(m, n, r, l) relaxes the product
/// phi(m, r) * psi(n, l); flat index ((m*N + n)*Nr + r)*Nt + l.
struct ScaState {
  Eigen::MatrixXd phi;    // N x Nr
  Eigen::MatrixXd psi;    // N x Nt
  Eigen::VectorXd w_bar;  // N*N*Nr*Nt
  double theta = 0.0;     // multiplier of the transmit binariness penalty
  double delta = 0.0;     // multiplier of the receive binariness penalty
  int inner_iter = 0;
  int outer_iter = 0;
  double surrogate_value = 0.0;

  int n_pairs() const { return static_cast<int>(phi.rows()); }
  int n_rx() const { return static_cast<int>(phi.cols()); }
  int n_tx() const { return static_cast<int>(psi.cols()); }
  std::size_t w_index(int m, int n, int r, int l) const {
    return ((static_cast<std::size_t>(m) * n_pairs() + n) * n_rx() + r) *
               n_tx() +
           l;
  }
};

struct DcTerms {
  double g1 = 0.0;
  double h1 = 0.0;
  double g2 = 0.0;
  double h2 = 0.0;
};

/// First-order expansions frozen at an anchor point.
struct Surrogates {
  Eigen::MatrixXd phi_anchor;
  Eigen::MatrixXd psi_anchor;
  Eigen::VectorXd w_anchor;
  double theta = 0.0;
  double delta = 0.0;
  double h1_anchor = 0.0;
  double h2_anchor = 0.0;
  Eigen::MatrixXd dh1;          // per psi entry
  Eigen::MatrixXd dh2;          // per phi entry
  Eigen::MatrixXd q_anchor;     // per (m, r)
  Eigen::MatrixXd q_slope_den;  // per (m, r): ln2 * (interference + sigma^2)
};

struct ScaTraceRow {
  int iteration = 0;
  double surrogate = 0.0;        // subproblem objective after the solve
  double outer_objective = 0.0;  // objective under the current multipliers
  double theta = 0.0;
  double delta = 0.0;
  double max_violation = 0.0;
};

struct ScaResult {
  BinarySelection selection;
  BeamPolicy policy;  // final continuous iterate
  std::vector<ScaTraceRow> trace;
};

struct ScaNonConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Single activated pair: phi(0,0) = psi(0,0) = w_bar(0,0,0,0) = 1, zero
/// multipliers. Feasible for every constraint.
ScaState init_state(int n_pairs, int n_rx, int n_tx);

/// g1/h1 penalize transmit binariness (scaled by theta), g2/h2 receive
/// binariness (scaled by delta); g1 - h1 = theta * sum psi(1 - psi).
DcTerms dc_terms(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& psi,
                 double theta, double delta);

Surrogates taylor_surrogates(const ScaState& state, const EffectiveGains& gains,
                             const SimConfig& config);

/// Convex majorizer value at `point`: rate terms with the linearized
/// interference bound, DC terms with linearized subtrahends. Equals the
/// true objective at the anchor.
double surrogate_objective(const ScaState& point, const Surrogates& surrogates,
                           const EffectiveGains& gains, const SimConfig& config);

/// Objective under the point's own multipliers (surrogates re-anchored at
/// the point itself).
double true_objective(const ScaState& point, const EffectiveGains& gains,
                      const SimConfig& config);

/// Largest residual over row-sum, coupling and McCormick constraints.
double max_constraint_violation(const ScaState& point);

/// Opaque constraint-multiplier state reused between subproblem solves of
/// one run; successive subproblems share the constraint set, so warm starts
/// cut the solve cost sharply.
struct SubproblemWarmStart {
  Eigen::VectorXd eq, row_tx, row_rx, mc_psi, mc_phi, mc_low;
  double beta = 10.0;
  bool valid = false;
};

/// Minimizes the surrogate subject to the row-sum, coupling, box and
/// McCormick constraints; updates phi/psi/w_bar in place and returns the
/// achieved surrogate value. Falls back to the input point when the solver
/// fails to improve it. Throws ScaNonConvergenceError when feasibility is
/// not reached within the iteration caps.
double solve_subproblem(ScaState& state, const Surrogates& surrogates,
                        const EffectiveGains& gains, const SimConfig& config,
                        const ScaConfig& sca,
                        SubproblemWarmStart* warm = nullptr);

/// Full nested loop: inner SCA iterations until the surrogate value
/// stabilizes, then a multiplier ascent step, until the outer objective
/// stabilizes. The final continuous point is rounded to a schedule.
ScaResult run(const EffectiveGains& gains, const SimConfig& config,
              const ScaConfig& sca);

/// CSV with header iteration,surrogate,objective,theta,delta,max_violation.
std::string sca_trace_csv(const std::vector<ScaTraceRow>& trace);

}  // namespace beamgraph
