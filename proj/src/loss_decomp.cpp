#include "ospred/loss_decomp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace ospred {

void LossDecomposition::check_label(LabelHandle y) const {
  if (y < 0 || (label_count > 0 && y >= label_count))
    throw std::domain_error(kind + ": label handle out of range");
}

void LossDecomposition::check_prediction(PredHandle p) const {
  if (p < 0 || (prediction_count > 0 && p >= prediction_count))
    throw std::domain_error(kind + ": prediction handle out of range");
}

ProblemInstance problem_instance(LossDecomposition decomp) {
  ProblemInstance inst;
  inst.gamma = decomp.gamma;
  inst.nu = decomp.nu;
  inst.norm_tag = decomp.norm_tag;
  if (!std::isnan(inst.gamma) && !(inst.gamma > 0.0))
    throw std::domain_error("problem_instance: gamma must be positive when set");
  if (!std::isnan(inst.nu) && !(inst.nu > 0.0))
    throw std::domain_error("problem_instance: nu must be positive when set");
  inst.decomposition = std::move(decomp);
  return inst;
}

double target_loss(const LossDecomposition& decomp, PredHandle pred, LabelHandle label) {
  decomp.check_label(label);
  decomp.check_prediction(pred);
  if (decomp.ell_rho)
    return decomp.rho(label).dot(decomp.ell_rho(pred)) + decomp.c(label);
  if (decomp.has_affine)
    return decomp.rho(pred).dot(decomp.V * decomp.rho(label) + decomp.b) + decomp.c(label);
  throw std::domain_error(decomp.kind + ": no loss representation available");
}

TauResult tau(const LossDecomposition& decomp, const Vector& mu) {
  if (!decomp.prediction_oracle)
    throw std::domain_error(decomp.kind + ": no prediction oracle");
  const VertexHit hit = decomp.prediction_oracle(mu);
  return {-hit.objective, hit.handle};
}

LossDecomposition make_multiclass(int k) {
  if (k < 2) throw std::domain_error("make_multiclass: K must be at least 2");
  LossDecomposition d;
  d.kind = "multiclass";
  d.dim = k;
  d.label_count = k;
  d.prediction_count = k;
  d.labels_enumerable = true;
  d.predictions_enumerable = true;
  d.rho = [k](LabelHandle y) { return Vector(Vector::Unit(k, static_cast<int>(y))); };
  d.ell_rho = [k](PredHandle p) {
    Vector v = Vector::Ones(k);
    v[static_cast<int>(p)] -= 1.0;
    return v;
  };
  d.c = [](LabelHandle) { return 0.0; };
  d.prediction_oracle = [k](const Vector& dir) {
    // argmin <dir, 1 - e_p> = argmax dir_p, lowest index on ties
    int best = 0;
    for (int i = 1; i < k; ++i)
      if (dir[i] > dir[best]) best = i;
    Vector v = Vector::Ones(k);
    v[best] -= 1.0;
    return VertexHit{best, v, dir.sum() - dir[best]};
  };
  d.has_affine = true;
  d.V = Matrix::Ones(k, k) - Matrix::Identity(k, k);
  d.b = Vector::Zero(k);
  d.gamma = 0.5;
  d.nu = 2.0;
  d.norm_tag = "l1";
  d.label_hull = simplex_oracle(k);

  PredictionSpace ps;
  std::vector<Vector> pts;
  pts.reserve(k);
  for (int p = 0; p < k; ++p) pts.push_back(d.ell_rho(p));
  ps.polytope = hull_oracle(std::move(pts));
  ps.to_score = [](const Vector& z) { return z; };
  ps.adjoint = [](const Vector& g) { return g; };
  ps.op_norm = 1.0;
  ps.reduce_dim = k;
  d.pred_space = std::move(ps);
  return d;
}

Vector multilabel_bits(std::int64_t mask, int d) {
  Vector v = Vector::Zero(d);
  for (int i = 0; i < d; ++i)
    if ((mask >> i) & 1) v[i] = 1.0;
  return v;
}

LossDecomposition make_multilabel(int d) {
  if (d < 1) throw std::domain_error("make_multilabel: d must be at least 1");
  if (d > 62) throw std::domain_error("make_multilabel: d too large for bitmask handles");
  LossDecomposition dec;
  dec.kind = "multilabel";
  dec.dim = d;
  dec.label_count = std::int64_t(1) << d;
  dec.prediction_count = dec.label_count;
  dec.labels_enumerable = d <= 20;
  dec.predictions_enumerable = d <= 20;
  dec.rho = [d](LabelHandle y) { return multilabel_bits(y, d); };
  // No d-dimensional loss-encoding vector exists for the Hamming loss with
  // this label encoding (the <rho(pred), 1> term cannot be moved into c),
  // so the loss is evaluated through the affine form only.
  dec.ell_rho = nullptr;
  dec.c = [d](LabelHandle y) {
    return static_cast<double>(std::popcount(static_cast<std::uint64_t>(y))) / d;
  };
  dec.has_affine = true;
  dec.V = -(2.0 / d) * Matrix::Identity(d, d);
  dec.b = Vector::Constant(d, 1.0 / d);
  dec.gamma = 1.0 / d;
  dec.nu = 1.0;
  dec.norm_tag = "l1";
  dec.label_hull = box01_oracle(d);
  return dec;
}

double ndcg_normalizer(std::span<const int> grades, const Vector& weights) {
  // Best attainable gain pairs sorted grades with sorted weights.
  std::vector<double> g(grades.begin(), grades.end());
  std::vector<double> w(weights.data(), weights.data() + weights.size());
  std::sort(g.begin(), g.end(), std::greater<double>());
  std::sort(w.begin(), w.end(), std::greater<double>());
  double n = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) n += g[i] * w[i];
  return n;
}

std::vector<int> ndcg_grades(LabelHandle handle, int d, int k) {
  std::vector<int> g(d);
  for (int i = 0; i < d; ++i) {
    g[i] = 1 + static_cast<int>(handle % k);
    handle /= k;
  }
  return g;
}

LabelHandle ndcg_label_handle(std::span<const int> grades, int k) {
  LabelHandle h = 0;
  for (int i = static_cast<int>(grades.size()) - 1; i >= 0; --i) {
    if (grades[i] < 1 || grades[i] > k) throw std::domain_error("ndcg: grade out of range");
    h = h * k + (grades[i] - 1);
  }
  return h;
}

LossDecomposition make_ndcg(int d, const Vector& weights, int k) {
  if (d < 1) throw std::domain_error("make_ndcg: d must be at least 1");
  if (k < 1) throw std::domain_error("make_ndcg: k must be at least 1");
  if (weights.size() != d) throw std::domain_error("make_ndcg: weights must have length d");
  if (weights.minCoeff() < 0.0) throw std::domain_error("make_ndcg: negative weight");
  if (weights.maxCoeff() <= 0.0)
    throw std::domain_error("make_ndcg: all-zero weights make the loss undefined");

  LossDecomposition dec;
  dec.kind = "ndcg";
  dec.dim = d;
  double lc = 1.0;
  for (int i = 0; i < d; ++i) lc *= k;
  dec.label_count = lc <= 9e18 ? static_cast<std::int64_t>(lc) : 0;
  dec.prediction_count = d <= 20 ? factorial(d) : 0;
  dec.labels_enumerable = lc <= 1e6;
  dec.predictions_enumerable = d <= 8;

  const Vector w = weights;
  dec.rho = [d, k, w](LabelHandle y) {
    const std::vector<int> g = ndcg_grades(y, d, k);
    const double n = ndcg_normalizer(g, w);
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = -g[i] / n;
    return v;
  };
  dec.ell_rho = [d, w](PredHandle p) {
    const std::vector<int> perm = index_to_perm(p, d);
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = w[perm[i]];
    return v;
  };
  dec.c = [](LabelHandle) { return 1.0; };
  dec.prediction_oracle = [d, w](const Vector& dir) {
    Matrix cost(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) cost(i, j) = dir[i] * w[j];
    const std::vector<int> perm = assignment_lmo(cost);
    Vector v(d);
    double obj = 0.0;
    for (int i = 0; i < d; ++i) {
      v[i] = w[perm[i]];
      obj += dir[i] * v[i];
    }
    return VertexHit{perm_to_index(perm), v, obj};
  };

  if (dec.labels_enumerable) {
    std::vector<Vector> pts;
    pts.reserve(static_cast<std::size_t>(dec.label_count));
    for (LabelHandle y = 0; y < dec.label_count; ++y) pts.push_back(dec.rho(y));
    dec.label_hull = hull_oracle(std::move(pts));
  }

  PredictionSpace ps;
  ps.polytope = birkhoff_oracle(d);
  ps.to_score = [d, w](const Vector& z) {
    Vector v = Vector::Zero(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) v[i] += z[i * d + j] * w[j];
    return v;
  };
  ps.adjoint = [d, w](const Vector& g) {
    Vector z(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) z[i * d + j] = g[i] * w[j];
    return z;
  };
  ps.op_norm = w.norm();
  ps.reduce_dim = d * d;
  dec.pred_space = std::move(ps);
  return dec;
}

}  // namespace ospred
