// SPDX-License-Identifier: Apache-2.0
#include "beamgraph/sca.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

namespace beamgraph {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double interference_of(const ScaState& x, const EffectiveGains& gains,
                       double p, int m, int r) {
  double acc = 0.0;
  for (int n = 0; n < x.n_pairs(); ++n) {
    if (n == m) continue;
    for (int l = 0; l < x.n_tx(); ++l)
      acc += x.w_bar(x.w_index(m, n, r, l)) * p * gains.at(m, r, n, l);
  }
  return acc;
}

}  // namespace

ScaState init_state(int n_pairs, int n_rx, int n_tx) {
  if (n_pairs < 1 || n_rx < 1 || n_tx < 1)
    throw std::invalid_argument("init_state: dimensions must be >= 1");
  ScaState s;
  s.phi = Eigen::MatrixXd::Zero(n_pairs, n_rx);
  s.psi = Eigen::MatrixXd::Zero(n_pairs, n_tx);
  s.w_bar = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(n_pairs) * n_pairs * n_rx * n_tx);
  s.phi(0, 0) = 1.0;
  s.psi(0, 0) = 1.0;
  s.w_bar(s.w_index(0, 0, 0, 0)) = 1.0;
  return s;
}

DcTerms dc_terms(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& psi,
                 double theta, double delta) {
  DcTerms dc;
  const double sum_psi = psi.sum();
  const double sum_phi = phi.sum();
  dc.g1 = theta * sum_psi + theta * sum_psi * sum_psi;
  dc.h1 = theta * psi.squaredNorm() + theta * sum_psi * sum_psi;
  dc.g2 = delta * sum_phi + delta * sum_phi * sum_phi;
  dc.h2 = delta * phi.squaredNorm() + delta * sum_phi * sum_phi;
  return dc;
}

Surrogates taylor_surrogates(const ScaState& state, const EffectiveGains& gains,
                             const SimConfig& config) {
  Surrogates s;
  s.phi_anchor = state.phi;
  s.psi_anchor = state.psi;
  s.w_anchor = state.w_bar;
  s.theta = state.theta;
  s.delta = state.delta;
  const double sum_psi = state.psi.sum();
  const double sum_phi = state.phi.sum();
  s.h1_anchor =
      state.theta * state.psi.squaredNorm() + state.theta * sum_psi * sum_psi;
  s.h2_anchor =
      state.delta * state.phi.squaredNorm() + state.delta * sum_phi * sum_phi;
  s.dh1 = 2.0 * state.theta * (state.psi.array() + sum_psi).matrix();
  s.dh2 = 2.0 * state.delta * (state.phi.array() + sum_phi).matrix();
  s.q_anchor.resize(state.n_pairs(), state.n_rx());
  s.q_slope_den.resize(state.n_pairs(), state.n_rx());
  for (int m = 0; m < state.n_pairs(); ++m)
    for (int r = 0; r < state.n_rx(); ++r) {
      const double inter =
          interference_of(state, gains, config.tx_power, m, r);
      s.q_anchor(m, r) = std::log2(inter + config.noise_power);
      s.q_slope_den(m, r) = kLn2 * (inter + config.noise_power);
    }
  return s;
}

double surrogate_objective(const ScaState& point, const Surrogates& surrogates,
                           const EffectiveGains& gains,
                           const SimConfig& config) {
  const int n = point.n_pairs();
  const double p = config.tx_power;
  double value = 0.0;
  for (int m = 0; m < n; ++m) {
    for (int r = 0; r < point.n_rx(); ++r) {
      double inter = 0.0;
      double slope = 0.0;
      for (int other = 0; other < n; ++other) {
        if (other == m) continue;
        for (int l = 0; l < point.n_tx(); ++l) {
          const std::size_t idx = point.w_index(m, other, r, l);
          const double gain = p * gains.at(m, r, other, l);
          inter += point.w_bar(idx) * gain;
          slope += gain * (point.w_bar(idx) - surrogates.w_anchor(idx));
        }
      }
      const double q_bar =
          surrogates.q_anchor(m, r) + slope / surrogates.q_slope_den(m, r);
      for (int t = 0; t < point.n_tx(); ++t) {
        const double direct =
            point.w_bar(point.w_index(m, m, r, t)) * p * gains.at(m, r, m, t);
        const double f = std::log2(inter + config.noise_power + direct);
        value -= config.weights[m] * (f - q_bar);
      }
    }
  }
  const double sum_psi = point.psi.sum();
  const double sum_phi = point.phi.sum();
  const double g1 = surrogates.theta * (sum_psi + sum_psi * sum_psi);
  const double g2 = surrogates.delta * (sum_phi + sum_phi * sum_phi);
  const double h1_bar =
      surrogates.h1_anchor +
      (surrogates.dh1.array() *
       (point.psi.array() - surrogates.psi_anchor.array()))
          .sum();
  const double h2_bar =
      surrogates.h2_anchor +
      (surrogates.dh2.array() *
       (point.phi.array() - surrogates.phi_anchor.array()))
          .sum();
  return value + g1 - h1_bar + g2 - h2_bar;
}

double true_objective(const ScaState& point, const EffectiveGains& gains,
                      const SimConfig& config) {
  const int n = point.n_pairs();
  const double p = config.tx_power;
  double value = 0.0;
  for (int m = 0; m < n; ++m)
    for (int r = 0; r < point.n_rx(); ++r) {
      const double inter = interference_of(point, gains, p, m, r);
      const double q = std::log2(inter + config.noise_power);
      for (int t = 0; t < point.n_tx(); ++t) {
        const double direct =
            point.w_bar(point.w_index(m, m, r, t)) * p * gains.at(m, r, m, t);
        const double f = std::log2(inter + config.noise_power + direct);
        value -= config.weights[m] * (f - q);
      }
    }
  const DcTerms dc = dc_terms(point.phi, point.psi, point.theta, point.delta);
  return value + dc.g1 - dc.h1 + dc.g2 - dc.h2;
}

double max_constraint_violation(const ScaState& x) {
  const int n = x.n_pairs();
  double worst = 0.0;
  for (int m = 0; m < n; ++m) {
    worst = std::max(worst, x.psi.row(m).sum() - 1.0);
    worst = std::max(worst, x.phi.row(m).sum() - 1.0);
    worst = std::max(worst, std::abs(x.psi.row(m).sum() - x.phi.row(m).sum()));
  }
  for (int m = 0; m < n; ++m)
    for (int other = 0; other < n; ++other)
      for (int r = 0; r < x.n_rx(); ++r)
        for (int l = 0; l < x.n_tx(); ++l) {
          const double w = x.w_bar(x.w_index(m, other, r, l));
          worst = std::max(worst, -w);
          worst = std::max(worst, w - x.psi(other, l));
          worst = std::max(worst, w - x.phi(m, r));
          worst = std::max(worst, x.psi(other, l) + x.phi(m, r) - 1.0 - w);
        }
  return worst;
}

namespace {

/// Flat variable vector layout: phi row-major, psi row-major, w_bar.
struct Packed {
  int n, n_rx, n_tx;
  Eigen::Index phi_off = 0, psi_off = 0, w_off = 0, size = 0;

  explicit Packed(const ScaState& s)
      : n(s.n_pairs()), n_rx(s.n_rx()), n_tx(s.n_tx()) {
    phi_off = 0;
    psi_off = static_cast<Eigen::Index>(n) * n_rx;
    w_off = psi_off + static_cast<Eigen::Index>(n) * n_tx;
    size = w_off + s.w_bar.size();
  }
  Eigen::Index phi(int m, int r) const {
    return phi_off + static_cast<Eigen::Index>(m) * n_rx + r;
  }
  Eigen::Index psi(int m, int t) const {
    return psi_off + static_cast<Eigen::Index>(m) * n_tx + t;
  }
  Eigen::Index w(int m, int other, int r, int l) const {
    return w_off +
           ((static_cast<Eigen::Index>(m) * n + other) * n_rx + r) * n_tx + l;
  }
  Eigen::VectorXd pack(const ScaState& s) const {
    Eigen::VectorXd x(size);
    for (int m = 0; m < n; ++m)
      for (int r = 0; r < n_rx; ++r) x(phi(m, r)) = s.phi(m, r);
    for (int m = 0; m < n; ++m)
      for (int t = 0; t < n_tx; ++t) x(psi(m, t)) = s.psi(m, t);
    x.tail(s.w_bar.size()) = s.w_bar;
    return x;
  }
  void unpack(const Eigen::VectorXd& x, ScaState& s) const {
    for (int m = 0; m < n; ++m)
      for (int r = 0; r < n_rx; ++r) s.phi(m, r) = x(phi(m, r));
    for (int m = 0; m < n; ++m)
      for (int t = 0; t < n_tx; ++t) s.psi(m, t) = x(psi(m, t));
    s.w_bar = x.tail(s.w_bar.size());
  }
};

/// Surrogate objective and gradient on the packed vector.
class SurrogateModel {
 public:
  SurrogateModel(const Packed& layout, const Surrogates& s,
                 const EffectiveGains& gains, const SimConfig& config)
      : lay_(layout), s_(s), gains_(gains), config_(config) {}

  double value(const Eigen::VectorXd& x) const {
    return eval(x, nullptr);
  }
  double value_and_grad(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
    grad.setZero(lay_.size);
    return eval(x, &grad);
  }

 private:
  double eval(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    const int n = lay_.n;
    const int n_rx = lay_.n_rx;
    const int n_tx = lay_.n_tx;
    const double p = config_.tx_power;
    double value = 0.0;
    for (int m = 0; m < n; ++m) {
      const double wm = config_.weights[m];
      for (int r = 0; r < n_rx; ++r) {
        double inter = 0.0;
        double slope = 0.0;
        for (int other = 0; other < n; ++other) {
          if (other == m) continue;
          for (int l = 0; l < n_tx; ++l) {
            const double gain = p * gains_.at(m, r, other, l);
            const double w = x(lay_.w(m, other, r, l));
            inter += w * gain;
            slope += gain * (w - s_.w_anchor(((static_cast<Eigen::Index>(m) *
                                                   n +
                                               other) *
                                                  n_rx +
                                              r) *
                                                 n_tx +
                                             l));
          }
        }
        const double q_bar = s_.q_anchor(m, r) + slope / s_.q_slope_den(m, r);
        double inv_arg_sum = 0.0;
        for (int t = 0; t < n_tx; ++t) {
          const double gain_d = p * gains_.at(m, r, m, t);
          const double arg =
              inter + config_.noise_power + x(lay_.w(m, m, r, t)) * gain_d;
          value -= wm * (std::log2(arg) - q_bar);
          if (grad) {
            const double inv = 1.0 / (kLn2 * arg);
            inv_arg_sum += inv;
            (*grad)(lay_.w(m, m, r, t)) -= wm * gain_d * inv;
          }
        }
        if (grad) {
          const double cross = wm * (static_cast<double>(n_tx) /
                                         s_.q_slope_den(m, r) -
                                     inv_arg_sum);
          for (int other = 0; other < n; ++other) {
            if (other == m) continue;
            for (int l = 0; l < n_tx; ++l)
              (*grad)(lay_.w(m, other, r, l)) +=
                  cross * p * gains_.at(m, r, other, l);
          }
        }
      }
    }
    double sum_psi = 0.0;
    double sum_phi = 0.0;
    for (int m = 0; m < n; ++m) {
      for (int t = 0; t < n_tx; ++t) sum_psi += x(lay_.psi(m, t));
      for (int r = 0; r < n_rx; ++r) sum_phi += x(lay_.phi(m, r));
    }
    value += s_.theta * (sum_psi + sum_psi * sum_psi);
    value += s_.delta * (sum_phi + sum_phi * sum_phi);
    double lin1 = s_.h1_anchor;
    double lin2 = s_.h2_anchor;
    for (int m = 0; m < n; ++m) {
      for (int t = 0; t < n_tx; ++t)
        lin1 += s_.dh1(m, t) * (x(lay_.psi(m, t)) - s_.psi_anchor(m, t));
      for (int r = 0; r < n_rx; ++r)
        lin2 += s_.dh2(m, r) * (x(lay_.phi(m, r)) - s_.phi_anchor(m, r));
    }
    value -= lin1 + lin2;
    if (grad) {
      const double gpsi = s_.theta * (1.0 + 2.0 * sum_psi);
      const double gphi = s_.delta * (1.0 + 2.0 * sum_phi);
      for (int m = 0; m < n; ++m) {
        for (int t = 0; t < n_tx; ++t)
          (*grad)(lay_.psi(m, t)) += gpsi - s_.dh1(m, t);
        for (int r = 0; r < n_rx; ++r)
          (*grad)(lay_.phi(m, r)) += gphi - s_.dh2(m, r);
      }
    }
    return value;
  }

  const Packed& lay_;
  const Surrogates& s_;
  const EffectiveGains& gains_;
  const SimConfig& config_;
};

/// Augmented-Lagrangian multipliers for the linear constraints.
struct AlMultipliers {
  Eigen::VectorXd eq;       // coupling rows
  Eigen::VectorXd row_tx;   // transmit row sums
  Eigen::VectorXd row_rx;   // receive row sums
  Eigen::VectorXd mc_psi;   // w - psi <= 0
  Eigen::VectorXd mc_phi;   // w - phi <= 0
  Eigen::VectorXd mc_low;   // psi + phi - 1 - w <= 0
};

class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const Packed& lay, const SurrogateModel& model)
      : lay_(lay), model_(model) {}

  double value(const Eigen::VectorXd& x, const AlMultipliers& mult,
               double beta) const {
    return eval(x, mult, beta, nullptr);
  }
  double value_and_grad(const Eigen::VectorXd& x, const AlMultipliers& mult,
                        double beta, Eigen::VectorXd& grad) const {
    const double v = model_.value_and_grad(x, grad);
    return v + penalty(x, mult, beta, &grad);
  }

 private:
  double eval(const Eigen::VectorXd& x, const AlMultipliers& mult, double beta,
              Eigen::VectorXd* grad) const {
    return model_.value(x) + penalty(x, mult, beta, grad);
  }

  // PHR penalty; gradient contributions are appended to *grad when present.
  double penalty(const Eigen::VectorXd& x, const AlMultipliers& mult,
                 double beta, Eigen::VectorXd* grad) const {
    const int n = lay_.n;
    double total = 0.0;
    auto ineq = [&](double c, double z, auto&& add_grad) {
      const double active = z + beta * c;
      total += (std::max(0.0, active) * std::max(0.0, active) - z * z) /
               (2.0 * beta);
      if (grad && active > 0.0) add_grad(active);
    };
    for (int m = 0; m < n; ++m) {
      double row_psi = 0.0;
      double row_phi = 0.0;
      for (int t = 0; t < lay_.n_tx; ++t) row_psi += x(lay_.psi(m, t));
      for (int r = 0; r < lay_.n_rx; ++r) row_phi += x(lay_.phi(m, r));
      const double e = row_psi - row_phi;
      total += mult.eq(m) * e + 0.5 * beta * e * e;
      if (grad) {
        const double coef = mult.eq(m) + beta * e;
        for (int t = 0; t < lay_.n_tx; ++t) (*grad)(lay_.psi(m, t)) += coef;
        for (int r = 0; r < lay_.n_rx; ++r) (*grad)(lay_.phi(m, r)) -= coef;
      }
      ineq(row_psi - 1.0, mult.row_tx(m), [&](double a) {
        for (int t = 0; t < lay_.n_tx; ++t) (*grad)(lay_.psi(m, t)) += a;
      });
      ineq(row_phi - 1.0, mult.row_rx(m), [&](double a) {
        for (int r = 0; r < lay_.n_rx; ++r) (*grad)(lay_.phi(m, r)) += a;
      });
    }
    Eigen::Index k = 0;
    for (int m = 0; m < n; ++m)
      for (int other = 0; other < n; ++other)
        for (int r = 0; r < lay_.n_rx; ++r)
          for (int l = 0; l < lay_.n_tx; ++l, ++k) {
            const Eigen::Index iw = lay_.w(m, other, r, l);
            const Eigen::Index ipsi = lay_.psi(other, l);
            const Eigen::Index iphi = lay_.phi(m, r);
            ineq(x(iw) - x(ipsi), mult.mc_psi(k), [&](double a) {
              (*grad)(iw) += a;
              (*grad)(ipsi) -= a;
            });
            ineq(x(iw) - x(iphi), mult.mc_phi(k), [&](double a) {
              (*grad)(iw) += a;
              (*grad)(iphi) -= a;
            });
            ineq(x(ipsi) + x(iphi) - 1.0 - x(iw), mult.mc_low(k),
                 [&](double a) {
                   (*grad)(ipsi) += a;
                   (*grad)(iphi) += a;
                   (*grad)(iw) -= a;
                 });
          }
    return total;
  }

  const Packed& lay_;
  const SurrogateModel& model_;
};

Eigen::VectorXd clamp01(Eigen::VectorXd v) {
  return v.cwiseMax(0.0).cwiseMin(1.0);
}

struct PgResult {
  double residual = 0.0;
  int iterations = 0;
};

/// Monotone projected-gradient descent; Barzilai-Borwein trial steps with
/// Armijo backtracking on the projection arc.
PgResult projected_gradient(const AugmentedLagrangian& al,
                            const AlMultipliers& mult, double beta,
                            Eigen::VectorXd& x, double tol, int max_iters) {
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd prev_x;
  Eigen::VectorXd prev_grad;
  double step = 1.0;
  PgResult result;
  for (int iter = 0; iter < max_iters; ++iter) {
    const double value = al.value_and_grad(x, mult, beta, grad);
    result.residual = (x - clamp01(x - grad)).lpNorm<Eigen::Infinity>();
    result.iterations = iter;
    if (result.residual <= tol) return result;
    if (prev_x.size() > 0) {
      const Eigen::VectorXd s = x - prev_x;
      const Eigen::VectorXd y = grad - prev_grad;
      const double sy = s.dot(y);
      if (sy > 0.0) step = std::clamp(s.dot(s) / sy, 1e-12, 1e4);
    }
    prev_x = x;
    prev_grad = grad;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd candidate = clamp01(x - step * grad);
      const Eigen::VectorXd dx = candidate - x;
      const double directional = grad.dot(dx);
      if (al.value(candidate, mult, beta) <= value + 1e-4 * directional) {
        x = std::move(candidate);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) return result;  // step collapsed; stationary to fp precision
  }
  return result;
}

void update_multipliers(const Packed& lay, const Eigen::VectorXd& x,
                        AlMultipliers& mult, double beta) {
  const int n = lay.n;
  for (int m = 0; m < n; ++m) {
    double row_psi = 0.0;
    double row_phi = 0.0;
    for (int t = 0; t < lay.n_tx; ++t) row_psi += x(lay.psi(m, t));
    for (int r = 0; r < lay.n_rx; ++r) row_phi += x(lay.phi(m, r));
    mult.eq(m) += beta * (row_psi - row_phi);
    mult.row_tx(m) = std::max(0.0, mult.row_tx(m) + beta * (row_psi - 1.0));
    mult.row_rx(m) = std::max(0.0, mult.row_rx(m) + beta * (row_phi - 1.0));
  }
  Eigen::Index k = 0;
  for (int m = 0; m < n; ++m)
    for (int other = 0; other < n; ++other)
      for (int r = 0; r < lay.n_rx; ++r)
        for (int l = 0; l < lay.n_tx; ++l, ++k) {
          mult.mc_psi(k) = std::max(
              0.0, mult.mc_psi(k) + beta * (x(lay.w(m, other, r, l)) -
                                            x(lay.psi(other, l))));
          mult.mc_phi(k) = std::max(
              0.0, mult.mc_phi(k) + beta * (x(lay.w(m, other, r, l)) -
                                            x(lay.phi(m, r))));
          mult.mc_low(k) = std::max(
              0.0, mult.mc_low(k) + beta * (x(lay.psi(other, l)) +
                                            x(lay.phi(m, r)) - 1.0 -
                                            x(lay.w(m, other, r, l))));
        }
}

}  // namespace

double solve_subproblem(ScaState& state, const Surrogates& surrogates,
                        const EffectiveGains& gains, const SimConfig& config,
                        const ScaConfig& sca, SubproblemWarmStart* warm) {
  const Packed lay(state);
  const SurrogateModel model(lay, surrogates, gains, config);
  const AugmentedLagrangian al(lay, model);

  const Eigen::VectorXd x_input = lay.pack(state);
  const double input_value = model.value(x_input);
  Eigen::VectorXd x = x_input;

  AlMultipliers mult;
  const Eigen::Index w_count = state.w_bar.size();
  double beta = 10.0;
  if (warm && warm->valid && warm->eq.size() == lay.n &&
      warm->mc_psi.size() == w_count) {
    mult.eq = warm->eq;
    mult.row_tx = warm->row_tx;
    mult.row_rx = warm->row_rx;
    mult.mc_psi = warm->mc_psi;
    mult.mc_phi = warm->mc_phi;
    mult.mc_low = warm->mc_low;
    // With carried-over multipliers a moderate penalty is enough; large
    // inherited values only slow the projected-gradient solves down.
    beta = std::clamp(warm->beta, 10.0, 1e3);
  } else {
    mult.eq = Eigen::VectorXd::Zero(lay.n);
    mult.row_tx = Eigen::VectorXd::Zero(lay.n);
    mult.row_rx = Eigen::VectorXd::Zero(lay.n);
    mult.mc_psi = Eigen::VectorXd::Zero(w_count);
    mult.mc_phi = Eigen::VectorXd::Zero(w_count);
    mult.mc_low = Eigen::VectorXd::Zero(w_count);
  }
  double prev_viol = std::numeric_limits<double>::infinity();
  bool converged = false;
  double residual = 0.0;
  double viol = 0.0;
  ScaState probe = state;
  for (int round = 0; round < sca.max_al_rounds; ++round) {
    // Loose inner tolerance early, tight once multipliers settle.
    const double inner_tol =
        std::max(sca.subproblem_tol, 1e-3 * std::pow(0.1, round));
    const PgResult pg =
        projected_gradient(al, mult, beta, x, inner_tol, sca.max_pg_iters);
    residual = pg.residual;
    lay.unpack(x, probe);
    viol = max_constraint_violation(probe);
    if (viol <= sca.feasibility_tol && residual <= sca.subproblem_tol) {
      converged = true;
      break;
    }
    update_multipliers(lay, x, mult, beta);
    if (viol > sca.feasibility_tol && viol > 0.25 * prev_viol)
      beta = std::min(beta * 2.0, 1e6);
    prev_viol = viol;
  }
  if (warm) {
    warm->eq = mult.eq;
    warm->row_tx = mult.row_tx;
    warm->row_rx = mult.row_rx;
    warm->mc_psi = mult.mc_psi;
    warm->mc_phi = mult.mc_phi;
    warm->mc_low = mult.mc_low;
    warm->beta = beta;
    warm->valid = true;
  }
  if (!converged && viol > sca.feasibility_tol) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "solve_subproblem: no feasible point (max violation %.3e, "
                  "projected-gradient residual %.3e)",
                  viol, residual);
    throw ScaNonConvergenceError(msg);
  }
  // A feasible point that cannot certify stationarity is still usable; the
  // safeguard below rejects it unless it improves the surrogate.
  const double solved_value = model.value(x);
  if (solved_value > input_value) return input_value;  // monotone safeguard
  lay.unpack(x, state);
  return solved_value;
}

namespace {

double mean_binariness(const ScaState& state) {
  const double total =
      (state.phi.array() - state.phi.array().square()).sum() +
      (state.psi.array() - state.psi.array().square()).sum();
  return total / (state.phi.size() + state.psi.size());
}

/// Deterministic escape from fractional fixed points: the relaxation can
/// park rows at interior ties (e.g. all entries 0.5) where the linearized
/// binariness penalty has zero slope for every multiplier value. Blending
/// each row toward its own lowest-index argmax keeps the row mass, hence
/// every row-sum and coupling constraint, and w_bar is rebuilt as the exact
/// products so the McCormick constraints hold too.
void nudge_toward_rowmax(ScaState& state, double gamma) {
  auto nudge_rows = [gamma](Eigen::MatrixXd& mat) {
    for (int m = 0; m < mat.rows(); ++m) {
      int arg = 0;
      for (int j = 1; j < mat.cols(); ++j)
        if (mat(m, j) > mat(m, arg)) arg = j;
      const double mass = mat.row(m).sum();
      Eigen::RowVectorXd target = Eigen::RowVectorXd::Zero(mat.cols());
      target(arg) = mass;
      mat.row(m) = (1.0 - gamma) * mat.row(m) + gamma * target;
    }
  };
  nudge_rows(state.phi);
  nudge_rows(state.psi);
  for (int m = 0; m < state.n_pairs(); ++m)
    for (int other = 0; other < state.n_pairs(); ++other)
      for (int r = 0; r < state.n_rx(); ++r)
        for (int l = 0; l < state.n_tx(); ++l)
          state.w_bar(state.w_index(m, other, r, l)) =
              state.phi(m, r) * state.psi(other, l);
}

}  // namespace

ScaResult run(const EffectiveGains& gains, const SimConfig& config,
              const ScaConfig& sca) {
  ScaState state = init_state(gains.n_pairs, gains.n_rx, gains.n_tx);
  ScaResult result;
  int iteration = 0;

  double outer_prev = true_objective(state, gains, config);
  state.surrogate_value = outer_prev;
  result.trace.push_back({iteration++, outer_prev, outer_prev, state.theta,
                          state.delta, max_constraint_violation(state)});

  double prev_binariness = std::numeric_limits<double>::infinity();
  SubproblemWarmStart warm;
  for (int outer = 0; outer < sca.max_outer; ++outer) {
    state.outer_iter = outer;
    double sigma_prev = true_objective(state, gains, config);
    for (int inner = 0; inner < sca.max_inner; ++inner) {
      state.inner_iter = inner;
      const Surrogates surrogates = taylor_surrogates(state, gains, config);
      const double sigma =
          solve_subproblem(state, surrogates, gains, config, sca, &warm);
      state.surrogate_value = sigma;
      result.trace.push_back({iteration++, sigma,
                              true_objective(state, gains, config), state.theta,
                              state.delta, max_constraint_violation(state)});
      const double change =
          std::abs(sigma - sigma_prev) / std::max(std::abs(sigma_prev), 1e-12);
      sigma_prev = sigma;
      if (change <= sca.tolerance) break;
    }
    // Multiplier ascent on the binariness penalties.
    state.theta +=
        sca.dual_step * (state.psi.array() * (1.0 - state.psi.array())).sum();
    state.delta +=
        sca.dual_step * (state.phi.array() * (1.0 - state.phi.array())).sum();
    // Break interior ties that the growing multipliers cannot move.
    const double binariness = mean_binariness(state);
    if (binariness > 5e-4 && binariness > 0.98 * prev_binariness)
      nudge_toward_rowmax(state, 0.05);
    prev_binariness = binariness;
    const double outer_value = true_objective(state, gains, config);
    // Under the new multipliers the anchored surrogate equals the objective,
    // so this row also seeds the next inner loop's surrogate sequence.
    state.surrogate_value = outer_value;
    result.trace.push_back({iteration++, outer_value, outer_value, state.theta,
                            state.delta, max_constraint_violation(state)});
    const double change = std::abs(outer_value - outer_prev) /
                          std::max(std::abs(outer_prev), 1e-12);
    outer_prev = outer_value;
    if (change <= sca.tolerance) break;
  }

  result.policy.phi = state.phi;
  result.policy.psi = state.psi;
  result.selection = round_policy(result.policy, sca.round_threshold);
  return result;
}

std::string sca_trace_csv(const std::vector<ScaTraceRow>& trace) {
  std::string out = "iteration,surrogate,objective,theta,delta,max_violation\n";
  char buf[160];
  for (const auto& row : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  row.iteration, row.surrogate, row.outer_objective, row.theta,
                  row.delta, row.max_violation);
    out += buf;
  }
  return out;
}

}  // namespace beamgraph
