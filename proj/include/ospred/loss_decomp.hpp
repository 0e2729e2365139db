#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ospred/common.hpp"
#include "ospred/polytopes.hpp"

namespace ospred {

using LabelHandle = std::int64_t;
using PredHandle = std::int64_t;

// Linear map from a prediction-representation polytope into score space.
// For instances with enumerable predictions the representation space is the
// score space itself (identity map over the hull of loss-encoding vectors);
// for ranking it is the doubly stochastic matrix polytope and the map sends
// a matrix to its weighted column combination.
struct PredictionSpace {
  PolytopeOracle polytope;
  std::function<Vector(const Vector&)> to_score;   // A z
  std::function<Vector(const Vector&)> adjoint;    // A^T g
  double op_norm = 1.0;                            // spectral norm of A
  int reduce_dim = 0;                              // affine-dimension bound for support control
};

// Bilinear representation of a target loss:
//   loss(pred, label) = <rho(label), ell_rho(pred)> + c(label),
// optionally with an affine form loss = <rho(pred), V rho(label) + b> + c(label).
struct LossDecomposition {
  std::string kind;
  int dim = 0;                         // score dimension
  std::int64_t label_count = 0;        // 0 when too large to represent
  std::int64_t prediction_count = 0;   // 0 when too large to represent
  bool labels_enumerable = false;
  bool predictions_enumerable = false;

  std::function<Vector(LabelHandle)> rho;
  std::function<Vector(PredHandle)> ell_rho;   // absent when no d-dim loss encoding exists
  std::function<double(LabelHandle)> c;

  // argmin over predictions of <dir, ell_rho(pred)>; ties resolved to the
  // lowest handle for enumerated scans.
  std::function<VertexHit(const Vector&)> prediction_oracle;

  bool has_affine = false;
  Matrix V;
  Vector b;

  // Constants for the affine-decomposable case, NaN when not stated.
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double nu = std::numeric_limits<double>::quiet_NaN();
  std::string norm_tag;

  PolytopeOracle label_hull;                     // conv of label encodings
  std::optional<PredictionSpace> pred_space;     // conv of loss encodings (or its matrix lift)

  void check_label(LabelHandle y) const;
  void check_prediction(PredHandle p) const;
};

struct ProblemInstance {
  LossDecomposition decomposition;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double nu = std::numeric_limits<double>::quiet_NaN();
  std::string norm_tag;
};

ProblemInstance problem_instance(LossDecomposition decomp);

double target_loss(const LossDecomposition& decomp, PredHandle pred, LabelHandle label);

struct TauResult {
  double value = 0.0;
  PredHandle attained = -1;
};

// tau(mu) = -min over predictions of <mu, ell_rho(pred)>.
TauResult tau(const LossDecomposition& decomp, const Vector& mu);

// 0-1 loss over K classes; rho(y) = e_y, ell_rho(p) = 1 - e_p, c = 0.
LossDecomposition make_multiclass(int k);

// Hamming loss over d binary outcomes, in affine form with V = -(2/d) I,
// b = (1/d) 1, c(y) = (1/d) <rho(y), 1>. Label handle = outcome bitmask.
LossDecomposition make_multilabel(int d);

// NDCG ranking loss over d documents with nonnegative weights and relevance
// grades in {1, ..., k}. Predictions are permutations (Lehmer handles);
// labels are grade vectors (base-k handles).
LossDecomposition make_ndcg(int d, const Vector& weights, int k);

// Codec helpers for the instances above.
Vector multilabel_bits(std::int64_t mask, int d);
std::vector<int> ndcg_grades(LabelHandle handle, int d, int k);
LabelHandle ndcg_label_handle(std::span<const int> grades, int k);
double ndcg_normalizer(std::span<const int> grades, const Vector& weights);

}  // namespace ospred
