#pragma once

#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "ospred/common.hpp"
#include "ospred/loss_decomp.hpp"
#include "ospred/surrogate.hpp"

namespace ospred {

// Randomized decoding output: an explicit small-support distribution over
// prediction handles. Probabilities are nonnegative and sum to one.
struct SparseDistribution {
  std::vector<std::pair<PredHandle, double>> support;

  void validate(double tol = 1e-9) const;
  double probability_of(PredHandle h) const;
};

// Binary decoder for two-class scores: with m = theta_0 - theta_1, the first
// class is predicted with probability clip(1/2 + m, 0, 1).
SparseDistribution binary_clip_decoder(const Vector& theta);

// Deterministic argmax baseline (lowest index on ties). Does not satisfy the
// surrogate-gap condition; kept for the certificate counterexamples.
SparseDistribution argmax_decoder(const Vector& theta);

// Decoding distribution from the prediction-side minimization; the solver
// caches the solve so the surrogate value and gradient reuse it.
SparseDistribution convfy_decoder(ConvFySolver& solver, const Vector& theta);

double expected_target_loss(const SparseDistribution& dist, const LossDecomposition& decomp,
                            LabelHandle y);

PredHandle sample(const SparseDistribution& dist, std::mt19937_64& rng);

using Decoder = std::function<SparseDistribution(const Vector&)>;

struct GapViolation {
  Vector theta;
  LabelHandle y = 0;
  double expected = 0.0;
  double allowed = 0.0;
};

struct GapReport {
  std::vector<GapViolation> violations;
  double worst_slack = kInf;  // min over the grid of allowed - expected
  long checked = 0;
  bool ok() const { return violations.empty(); }
};

// Checks E[loss under the decoder] <= (1 - alpha) * surrogate + tol for every
// grid point and every label. Violations are reported, not thrown.
GapReport gap_certificate(const Decoder& decoder, const SurrogateLoss& surrogate,
                          const LossDecomposition& decomp, double alpha,
                          const std::vector<Vector>& theta_grid, double tol = 1e-9);

// Margin grid used by the binary certificates: theta = (m, 0) for
// m in {lo, lo + step, ..., hi}.
std::vector<Vector> margin_grid(double lo, double hi, double step);

}  // namespace ospred
