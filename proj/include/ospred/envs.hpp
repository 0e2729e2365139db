#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ospred/common.hpp"
#include "ospred/loss_decomp.hpp"
#include "ospred/surrogate.hpp"

namespace ospred {

struct EnvRound {
  Vector x;
  LabelHandle y = 0;
};

// Data streams are pure functions of (parameters, seed, t); rounds can be
// generated in any order and concurrently.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual EnvRound round(std::int64_t t) const = 0;

  std::int64_t horizon() const { return horizon_; }
  int input_dim() const { return input_dim_; }
  const std::string& kind() const { return kind_; }

 protected:
  std::int64_t horizon_ = 0;
  int input_dim_ = 0;
  std::string kind_;
};

// Binary labels live on {+1, -1}; class handle 0 is +1, handle 1 is -1.
inline int binary_sign(LabelHandle y) { return y == 0 ? +1 : -1; }
inline LabelHandle binary_label(int sign) { return sign >= 0 ? 0 : 1; }

// Halfspace labels on the unit circle with segment-wise sign flips at evenly
// spaced points. A positive `margin` resamples inputs until
// |<u, x>| >= margin (the separable variant used by the bound checks).
class FlipBinaryEnv : public Environment {
 public:
  FlipBinaryEnv(std::int64_t horizon, int flips, std::uint64_t seed, double margin = 0.0);

  EnvRound round(std::int64_t t) const override;
  int segment(std::int64_t t) const;
  int segment_sign(std::int64_t t) const;  // +1 on even segments
  int flips() const { return flips_; }
  double margin() const { return margin_; }
  const Vector& reference() const { return u_; }

 private:
  int flips_ = 0;
  double margin_ = 0.0;
  std::uint64_t seed_ = 0;
  Vector u_;
};

// The binary instance with x_t = (1, 0) and labels uniform on {+1, -1}.
class LowerBoundEnv : public Environment {
 public:
  LowerBoundEnv(std::int64_t horizon, std::uint64_t seed);
  EnvRound round(std::int64_t t) const override;
  int label_sign(std::int64_t t) const;

 private:
  std::uint64_t seed_ = 0;
};

// Synthetic ranking stream: relevance grades in {1..k} for d documents from
// a slowly rotating linear model; drift = 0 gives a stationary stream.
class RankingEnv : public Environment {
 public:
  RankingEnv(std::int64_t horizon, int d, int k, double drift, std::uint64_t seed);
  EnvRound round(std::int64_t t) const override;
  int docs() const { return d_; }
  int grade_levels() const { return k_; }
  Matrix model_matrix(std::int64_t t) const;

 private:
  int d_ = 0, k_ = 0;
  double drift_ = 0.0;
  std::uint64_t seed_ = 0;
  Matrix base_a_, base_b_;
};

// Synthetic multiclass stream: labels from argmax of per-segment permuted
// class prototypes; segments rotate the prototype assignment.
class MulticlassDriftEnv : public Environment {
 public:
  MulticlassDriftEnv(std::int64_t horizon, int classes, int input_dim, int segments,
                     std::uint64_t seed);
  EnvRound round(std::int64_t t) const override;
  int classes() const { return k_; }
  int segments() const { return segments_; }
  int segment(std::int64_t t) const;
  // Row matrix whose argmax row matches the labels of the given segment.
  Matrix segment_model(int segment) const;

 private:
  int k_ = 0, segments_ = 1;
  std::uint64_t seed_ = 0;
  Matrix prototypes_;  // k x p, unit rows
};

// Piecewise-constant (or per-round) comparator sequence with exact path
// length. All matrices must stay inside the Frobenius ball of radius D/2.
struct ComparatorSequence {
  std::int64_t horizon = 0;
  std::vector<std::pair<std::int64_t, Matrix>> runs;  // (start_t, U), sorted
  std::function<Matrix(std::int64_t)> per_round;      // overrides runs when set

  Matrix at(std::int64_t t) const;
  double path_length() const;
};

struct ComparatorReport {
  ComparatorSequence seq;
  double f_t = 0.0;
  double p_t = 0.0;
};

double cumulative_surrogate(const ComparatorSequence& seq, const Environment& env,
                            const SurrogateLoss& loss);

// Segment-tracking comparators for the flip environments: U_t = +/- scale
// times the two-row separator built from the reference direction.
ComparatorReport comparators_tracking(const FlipBinaryEnv& env, double scale,
                                      const SurrogateLoss& loss, double diameter);

// The two comparator families for the lower-bound instance: case 1 tracks
// the labels (zero surrogate, long path), case 2 is fixed (zero path).
ComparatorReport comparators_lower_bound(const LowerBoundEnv& env, int which_case,
                                         const SurrogateLoss& loss, double diameter);

// Piecewise comparators for the synthetic multiclass stream.
ComparatorReport comparators_multiclass_drift(const MulticlassDriftEnv& env, double scale,
                                              const SurrogateLoss& loss, double diameter);

// Best fixed estimator found by averaged projected subgradient descent over
// the whole stream; used for zero-path comparator checks.
Matrix offline_best_fixed(const Environment& env, const SurrogateLoss& loss, double diameter,
                          int epochs);

}  // namespace ospred
