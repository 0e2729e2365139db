#pragma once

#include <memory>
#include <string>

#include "ospred/common.hpp"
#include "ospred/loss_decomp.hpp"
#include "ospred/polytopes.hpp"

namespace ospred {

// Regularization function with an explicit domain polytope. Two kinds:
// a lambda-strongly-convex quadratic restricted to the domain, and the
// negative Shannon entropy on the probability simplex.
struct Regularizer {
  enum class Kind { QuadraticHull, NegEntropySimplex };

  Kind kind = Kind::QuadraticHull;
  double lambda = 1.0;  // strong-convexity constant w.r.t. the l2 norm
  PolytopeOracle domain;
  double proj_tol = 1e-10;

  double omega(const Vector& mu) const;

  struct Conjugate {
    double value = 0.0;
    Vector argmax;  // gradient of the conjugate
  };
  Conjugate conjugate(const Vector& xi) const;
};

Regularizer quadratic_regularizer(PolytopeOracle domain, double lambda = 1.0);
Regularizer entropy_regularizer(int k);

// Shared per-learner scratch for losses built on the prediction-side
// minimization: one solve per score vector serves the loss value, the
// gradient, and the decoding distribution. Not safe to share across
// concurrently running learners.
class ConvFySolver {
 public:
  ConvFySolver(std::shared_ptr<const LossDecomposition> decomp, Regularizer reg,
               FwOptions opts = {});

  struct Solution {
    ActiveSet active;    // reduced support over prediction handles
    Vector nu;           // loss-encoding combination
    Vector xi;           // theta + nu
    double conj_value = 0.0;
    Vector conj_grad;
    double gap = 0.0;
    int iters = 0;
  };

  const Solution& solve(const Vector& theta);
  const LossDecomposition& decomp() const { return *decomp_; }
  const Regularizer& regularizer() const { return reg_; }

 private:
  std::shared_ptr<const LossDecomposition> decomp_;
  Regularizer reg_;
  FwOptions opts_;
  bool has_cache_ = false;
  Vector cached_theta_;
  Solution cached_;
  ActiveSet warm_;
};

class SurrogateLoss {
 public:
  enum class Kind { SmoothHinge, Logistic, SparseMap, FenchelYoung, ConvFenchelYoung, PlainHinge };

  static SurrogateLoss smooth_hinge(LossDecomposition decomp);
  // base e by default; pass 2.0 for the base-2 variant (value and gradient
  // scale by 1/ln 2, and so does the self-bounding constant).
  static SurrogateLoss logistic(LossDecomposition decomp, double base = 0.0);
  static SurrogateLoss sparsemap(LossDecomposition decomp);
  static SurrogateLoss fenchel_young(LossDecomposition decomp, Regularizer reg);
  static SurrogateLoss conv_fenchel_young(LossDecomposition decomp, Regularizer reg,
                                          FwOptions opts = {});
  static SurrogateLoss plain_hinge(LossDecomposition decomp, double kappa);

  Kind kind() const { return kind_; }
  std::string name() const;
  const LossDecomposition& decomposition() const { return *decomp_; }

  double value(const Vector& theta, LabelHandle y) const;
  Vector subgradient(const Vector& theta, LabelHandle y) const;
  // Chain rule through theta = W x: subgradient(theta) x^T.
  Matrix gradient_estimator(const Matrix& w, const Vector& x, LabelHandle y) const;

  // M with ||G||_F^2 <= 2 M L; throws for the plain hinge at kappa = 1.
  double self_bounding_constant() const;

  // Non-null only for the ConvFenchelYoung kind.
  ConvFySolver* solver() const { return solver_.get(); }
  double lambda() const;

 private:
  SurrogateLoss() = default;

  Kind kind_ = Kind::SmoothHinge;
  std::shared_ptr<const LossDecomposition> decomp_;
  double scale_ = 1.0;   // logistic: 1/ln(base)
  double kappa_ = 1.0;   // plain hinge
  std::shared_ptr<Regularizer> reg_;
  std::shared_ptr<ConvFySolver> solver_;
};

}  // namespace ospred
