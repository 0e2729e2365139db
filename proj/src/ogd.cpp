#include "ospred/ogd.hpp"

#include <cmath>

#include "ospred/polytopes.hpp"

namespace ospred {

LearnerState make_learner(int score_dim, int input_dim, double diameter) {
  if (!(diameter > 0.0)) throw std::domain_error("make_learner: diameter must be positive");
  LearnerState s;
  s.w = Matrix::Zero(score_dim, input_dim);
  s.radius = diameter / 2.0;
  return s;
}

double lr_constant(double alpha, double m) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::domain_error("lr_constant: alpha must be in (0, 1)");
  if (!(m > 0.0)) throw std::domain_error("lr_constant: M must be positive");
  return alpha / m;
}

EtaDecision lr_adagrad(double diameter, double cum_grad_sq) {
  if (cum_grad_sq <= 0.0) return {false, 0.0};
  return {true, diameter / std::sqrt(2.0 * cum_grad_sq)};
}

EtaDecision lr_polyak(double surrogate_value, double expected_target, double grad_norm_sq,
                      double eta_prev, double floor, bool bound_strict) {
  if (surrogate_value < expected_target - 1e-6)
    throw std::runtime_error("lr_polyak: surrogate below expected target loss (broken decoder)");
  if (grad_norm_sq <= 0.0) return {false, 0.0};
  const double numerator = std::max(0.0, surrogate_value - expected_target);
  if (numerator <= 0.0) return {false, 0.0};
  double eta = std::min(2.0 * numerator / grad_norm_sq, eta_prev);
  if (bound_strict) eta = std::max(eta, floor);
  return {true, eta};
}

void ogd_step(LearnerState& state, const Matrix& grad, const EtaDecision& eta) {
  ++state.t;
  if (!eta.update) return;
  if (!grad.allFinite()) throw std::runtime_error("ogd_step: non-finite gradient");
  if (!(eta.eta > 0.0)) throw std::domain_error("ogd_step: learning rate must be positive");
  state.w = project_ball(state.w - eta.eta * grad, state.radius);
  state.eta_prev = eta.eta;
}

double dynamic_regret_bound(double diameter, double eta_last, std::span<const double> etas,
                            std::span<const double> grad_sq, double path_length) {
  if (etas.size() != grad_sq.size())
    throw std::domain_error("dynamic_regret_bound: sequence length mismatch");
  for (std::size_t i = 1; i < etas.size(); ++i)
    if (etas[i] > etas[i - 1] + 1e-12)
      throw std::domain_error("dynamic_regret_bound: learning rates must be non-increasing");
  double sum = 0.0;
  for (std::size_t i = 0; i < etas.size(); ++i) sum += 0.5 * etas[i] * grad_sq[i];
  return (diameter / eta_last) * (diameter / 2.0 + path_length) + sum;
}

double theorem_bound(double f_t, double p_t, double diameter, double ratio) {
  return f_t + ratio * diameter * (diameter / 2.0 + p_t);
}

}  // namespace ospred
