#pragma once

#include <cstdint>
#include <span>

#include "ospred/common.hpp"

namespace ospred {

// Projected online gradient descent over the Frobenius ball of diameter D
// (radius D/2 around the origin).
struct LearnerState {
  Matrix w;
  double radius = 0.0;
  double eta_prev = kInf;     // last used learning rate
  double cum_grad_sq = 0.0;   // running sum of squared gradient norms
  std::int64_t t = 0;         // completed rounds
};

LearnerState make_learner(int score_dim, int input_dim, double diameter);

// A learning-rate decision; update = false means the round makes no step and
// the previous rate is carried.
struct EtaDecision {
  bool update = true;
  double eta = 0.0;
};

double lr_constant(double alpha, double m);

// D / sqrt(2 * cum); cum must already include the current round's squared
// gradient norm. cum = 0 yields the no-update sentinel.
EtaDecision lr_adagrad(double diameter, double cum_grad_sq);

// min{2 (L - E[loss]) / ||G||^2, eta_prev}; zero gradient (or a vanishing
// numerator) yields the no-update sentinel. In bound-strict mode the result
// is additionally clamped from below by `floor`.
EtaDecision lr_polyak(double surrogate_value, double expected_target, double grad_norm_sq,
                      double eta_prev, double floor, bool bound_strict);

void ogd_step(LearnerState& state, const Matrix& grad, const EtaDecision& eta);

// (D / eta_T) (D/2 + P_T) + sum_t eta_t ||G_t||^2 / 2.
double dynamic_regret_bound(double diameter, double eta_last, std::span<const double> etas,
                            std::span<const double> grad_sq, double path_length);

// F_T + ratio * D * (D/2 + P_T), with ratio = M/alpha or 1/lambda.
double theorem_bound(double f_t, double p_t, double diameter, double ratio);

}  // namespace ospred
