#include "ospred/decode.hpp"

#include <algorithm>
#include <cmath>

namespace ospred {

void SparseDistribution::validate(double tol) const {
  double sum = 0.0;
  for (const auto& [h, p] : support) {
    if (p < -tol) throw std::runtime_error("distribution: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol) throw std::runtime_error("distribution: probabilities do not sum to 1");
}

double SparseDistribution::probability_of(PredHandle h) const {
  double p = 0.0;
  for (const auto& [hh, pp] : support)
    if (hh == h) p += pp;
  return p;
}

SparseDistribution binary_clip_decoder(const Vector& theta) {
  if (theta.size() != 2) throw std::domain_error("binary_clip_decoder: needs a 2-dimensional score");
  const double m = theta[0] - theta[1];
  const double p0 = clip01(0.5 + m);
  SparseDistribution d;
  if (p0 > 0.0) d.support.emplace_back(0, p0);
  if (p0 < 1.0) d.support.emplace_back(1, 1.0 - p0);
  return d;
}

SparseDistribution argmax_decoder(const Vector& theta) {
  int best = 0;
  for (int i = 1; i < theta.size(); ++i)
    if (theta[i] > theta[best]) best = i;
  SparseDistribution d;
  d.support.emplace_back(best, 1.0);
  return d;
}

SparseDistribution convfy_decoder(ConvFySolver& solver, const Vector& theta) {
  const ConvFySolver::Solution& sol = solver.solve(theta);
  SparseDistribution d;
  double sum = 0.0;
  for (const auto& item : sol.active.items) {
    if (item.weight <= 0.0) continue;
    d.support.emplace_back(item.handle, item.weight);
    sum += item.weight;
  }
  if (sum <= 0.0) throw std::runtime_error("convfy_decoder: empty support");
  for (auto& [h, p] : d.support) p /= sum;
  d.validate();
  return d;
}

double expected_target_loss(const SparseDistribution& dist, const LossDecomposition& decomp,
                            LabelHandle y) {
  double e = 0.0;
  for (const auto& [h, p] : dist.support) e += p * target_loss(decomp, h, y);
  return e;
}

PredHandle sample(const SparseDistribution& dist, std::mt19937_64& rng) {
  if (dist.support.empty()) throw std::runtime_error("sample: empty distribution");
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double acc = 0.0;
  for (const auto& [h, p] : dist.support) {
    acc += p;
    if (u < acc) return h;
  }
  return dist.support.back().first;
}

GapReport gap_certificate(const Decoder& decoder, const SurrogateLoss& surrogate,
                          const LossDecomposition& decomp, double alpha,
                          const std::vector<Vector>& theta_grid, double tol) {
  if (!decomp.labels_enumerable)
    throw std::domain_error("gap_certificate: labels must be enumerable");
  GapReport rep;
  for (const Vector& theta : theta_grid) {
    const SparseDistribution dist = decoder(theta);
    for (LabelHandle y = 0; y < decomp.label_count; ++y) {
      const double expected = expected_target_loss(dist, decomp, y);
      const double allowed = (1.0 - alpha) * surrogate.value(theta, y);
      const double slack = allowed + tol - expected;
      rep.worst_slack = std::min(rep.worst_slack, allowed - expected);
      ++rep.checked;
      if (slack < 0.0) rep.violations.push_back({theta, y, expected, allowed});
    }
  }
  return rep;
}

std::vector<Vector> margin_grid(double lo, double hi, double step) {
  std::vector<Vector> grid;
  const long n = std::lround((hi - lo) / step);
  for (long i = 0; i <= n; ++i) {
    Vector t(2);
    t << lo + i * step, 0.0;
    grid.push_back(t);
  }
  return grid;
}

}  // namespace ospred
