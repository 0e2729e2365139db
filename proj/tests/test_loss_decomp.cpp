#include "ospred/loss_decomp.hpp"

#include <cmath>
#include <vector>

#include "ospred/common.hpp"
#include "testutil.hpp"

using namespace ospred;

namespace {

// Independent oracles: the textbook loss formulas, evaluated without the
// bilinear representation.
double oracle_zero_one(PredHandle p, LabelHandle y) { return p == y ? 0.0 : 1.0; }

double oracle_hamming(PredHandle p, LabelHandle y, int d) {
  int diff = 0;
  for (int i = 0; i < d; ++i)
    if (((p >> i) & 1) != ((y >> i) & 1)) ++diff;
  return static_cast<double>(diff) / d;
}

double oracle_ndcg(PredHandle p, LabelHandle y, int d, int k, const Vector& w) {
  const std::vector<int> grades = ndcg_grades(y, d, k);
  const std::vector<int> perm = index_to_perm(p, d);
  double best = -kInf;
  {
    // normalizer by brute force over all permutations
    best = 0.0;
    std::vector<int> idx(d);
    for (int i = 0; i < d; ++i) idx[i] = i;
    for (std::int64_t h = 0; h < factorial(d); ++h) {
      const std::vector<int> s = index_to_perm(h, d);
      double gain = 0.0;
      for (int i = 0; i < d; ++i) gain += grades[i] * w[s[i]];
      best = std::max(best, gain);
    }
  }
  double gain = 0.0;
  for (int i = 0; i < d; ++i) gain += grades[i] * w[perm[i]];
  return 1.0 - gain / best;
}

void test_multiclass() {
  LossDecomposition d3 = make_multiclass(3);
  CHECK_NEAR(target_loss(d3, 1, 1), 0.0, 0.0);
  CHECK_NEAR(target_loss(d3, 0, 1), 1.0, 0.0);
  CHECK_NEAR(d3.c(0), 0.0, 0.0);
  CHECK_NEAR(d3.nu, 2.0, 0.0);
  CHECK_NEAR(d3.gamma, 0.5, 0.0);
  CHECK(d3.norm_tag == "l1");

  LossDecomposition d2 = make_multiclass(2);
  const Vector c0 = d2.ell_rho(0), c1 = d2.ell_rho(1);
  CHECK_NEAR(c0[0], 0.0, 0.0);
  CHECK_NEAR(c0[1], 1.0, 0.0);
  CHECK_NEAR(c1[0], 1.0, 0.0);
  CHECK_NEAR(c1[1], 0.0, 0.0);

  CHECK_THROWS(make_multiclass(1), std::domain_error);
  CHECK_THROWS(target_loss(d3, 3, 0), std::domain_error);
  CHECK_THROWS(target_loss(d3, 0, -1), std::domain_error);
}

void test_multilabel() {
  LossDecomposition ml = make_multilabel(2);
  // y = (0,1) is mask 0b10, prediction (0,1) matches, (1,1) differs in one slot
  CHECK_NEAR(target_loss(ml, 0b10, 0b10), 0.0, 0.0);
  CHECK_NEAR(target_loss(ml, 0b11, 0b10), 0.5, 0.0);
  LossDecomposition ml4 = make_multilabel(4);
  CHECK_NEAR(ml4.nu, 1.0, 0.0);
  CHECK_NEAR(ml4.gamma, 0.25, 0.0);
  CHECK_THROWS(make_multilabel(0), std::domain_error);
}

void test_ndcg() {
  Vector w(2);
  w << 1.0, 0.5;
  LossDecomposition nd = make_ndcg(2, w, 2);
  const std::vector<int> grades = {2, 1};
  const LabelHandle y = ndcg_label_handle(grades, 2);
  CHECK_NEAR(ndcg_normalizer(grades, w), 2.5, 1e-15);
  const PredHandle identity = perm_to_index(std::vector<int>{0, 1});
  const PredHandle swap = perm_to_index(std::vector<int>{1, 0});
  CHECK_NEAR(target_loss(nd, identity, y), 0.0, 1e-12);
  CHECK_NEAR(target_loss(nd, swap, y), 0.2, 1e-12);
  CHECK_NEAR(target_loss(nd, identity, y), oracle_ndcg(identity, y, 2, 2, w), 1e-12);
  CHECK_NEAR(target_loss(nd, swap, y), oracle_ndcg(swap, y, 2, 2, w), 1e-12);

  // best permutation gives zero loss for every label
  for (LabelHandle yy = 0; yy < nd.label_count; ++yy) {
    double best = kInf;
    for (PredHandle p = 0; p < nd.prediction_count; ++p)
      best = std::min(best, target_loss(nd, p, yy));
    CHECK_NEAR(best, 0.0, 1e-12);
  }

  // equal weights: every permutation has the same loss
  Vector w3 = Vector::Ones(3);
  LossDecomposition nd3 = make_ndcg(3, w3, 3);
  const LabelHandle y3 = ndcg_label_handle(std::vector<int>{3, 1, 2}, 3);
  const double ref = target_loss(nd3, 0, y3);
  for (PredHandle p = 1; p < nd3.prediction_count; ++p)
    CHECK_NEAR(target_loss(nd3, p, y3), ref, 1e-12);

  Vector bad(2);
  bad << 1.0, -0.1;
  CHECK_THROWS(make_ndcg(2, bad, 2), std::domain_error);
}

void test_tau() {
  LossDecomposition d3 = make_multiclass(3);
  const TauResult t1 = tau(d3, Vector::Unit(3, 1));
  CHECK_NEAR(t1.value, 0.0, 0.0);
  CHECK(t1.attained == 1);
  const TauResult t0 = tau(d3, Vector::Zero(3));
  CHECK_NEAR(t0.value, 0.0, 0.0);

  Vector w(2);
  w << 1.0, 0.5;
  LossDecomposition nd = make_ndcg(2, w, 2);
  const LabelHandle y = ndcg_label_handle(std::vector<int>{2, 1}, 2);
  CHECK_NEAR(tau(nd, nd.rho(y)).value, nd.c(y), 1e-12);
  CHECK_NEAR(tau(nd, nd.rho(y)).value, 1.0, 1e-12);
}

void test_decomposition_consistency() {
  // bilinear (or affine) evaluation vs the direct formulas, exhaustively
  for (int k : {3, 5}) {
    LossDecomposition d = make_multiclass(k);
    for (LabelHandle y = 0; y < k; ++y) {
      double best = kInf;
      for (PredHandle p = 0; p < k; ++p) {
        const double v = target_loss(d, p, y);
        CHECK_NEAR(v, oracle_zero_one(p, y), 1e-12);
        const double affine = d.rho(p).dot(d.V * d.rho(y) + d.b) + d.c(y);
        CHECK_NEAR(v, affine, 1e-12);
        best = std::min(best, v);
      }
      CHECK_NEAR(best, 0.0, 0.0);
      CHECK_NEAR(tau(d, d.rho(y)).value, d.c(y), 1e-12);
    }
  }
  for (int dbits : {2, 4, 6}) {
    LossDecomposition ml = make_multilabel(dbits);
    for (LabelHandle y = 0; y < ml.label_count; ++y) {
      double best = kInf;
      for (PredHandle p = 0; p < ml.prediction_count; ++p) {
        const double v = target_loss(ml, p, y);
        CHECK_NEAR(v, oracle_hamming(p, y, dbits), 1e-12);
        best = std::min(best, v);
      }
      CHECK_NEAR(best, 0.0, 1e-12);
    }
  }
  {
    Vector w(3);
    w << 1.0, 0.6, 0.3;
    LossDecomposition nd = make_ndcg(3, w, 2);
    for (LabelHandle y = 0; y < nd.label_count; ++y) {
      double best = kInf;
      for (PredHandle p = 0; p < nd.prediction_count; ++p) {
        const double v = target_loss(nd, p, y);
        CHECK_NEAR(v, oracle_ndcg(p, y, 3, 2, w), 1e-12);
        best = std::min(best, v);
      }
      CHECK_NEAR(best, 0.0, 1e-12);
      CHECK_NEAR(tau(nd, nd.rho(y)).value, nd.c(y), 1e-12);
    }
  }
}

void test_mean_encoding_identity() {
  // For the 0-1 instance, the expected loss of any decoding distribution
  // equals half the l1 distance between the mean encoding and the label's.
  const int k = 4;
  LossDecomposition d = make_multiclass(k);
  CounterRng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    Vector pi(k);
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      pi[i] = -std::log(rng.next_double() + 1e-300);
      s += pi[i];
    }
    pi /= s;
    const LabelHandle y = static_cast<LabelHandle>(rng.next_below(k));
    double expected = 0.0;
    Vector mean = Vector::Zero(k);
    for (PredHandle p = 0; p < k; ++p) {
      expected += pi[p] * target_loss(d, p, y);
      mean += pi[p] * d.rho(p);
    }
    CHECK_NEAR(expected, 0.5 * (mean - d.rho(y)).lpNorm<1>(), 1e-12);
  }
}

void test_problem_instance() {
  ProblemInstance inst = problem_instance(make_multiclass(3));
  CHECK_NEAR(inst.gamma, 0.5, 0.0);
  CHECK_NEAR(inst.nu, 2.0, 0.0);
  Vector w(2);
  w << 1.0, 0.5;
  ProblemInstance nd = problem_instance(make_ndcg(2, w, 2));
  CHECK(std::isnan(nd.gamma));
  CHECK(std::isnan(nd.nu));
}

}  // namespace

int main() {
  test_multiclass();
  test_multilabel();
  test_ndcg();
  test_tau();
  test_decomposition_consistency();
  test_mean_encoding_identity();
  test_problem_instance();
  return test_summary("loss_decomp");
}
