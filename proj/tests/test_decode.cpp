#include "ospred/decode.hpp"

#include <cmath>
#include <map>

#include "ospred/checks.hpp"
#include "ospred/loss_decomp.hpp"
#include "testutil.hpp"

using namespace ospred;

namespace {

Vector theta2(double a, double b) {
  Vector t(2);
  t << a, b;
  return t;
}

void test_clip_decoder() {
  LossDecomposition d2 = make_multiclass(2);
  SurrogateLoss sh = SurrogateLoss::smooth_hinge(d2);

  // gap identities at the three reference margins (label = class 0)
  {
    const SparseDistribution dist = binary_clip_decoder(theta2(0.0, 0.0));
    CHECK_NEAR(expected_target_loss(dist, d2, 0), 0.5, 1e-15);
    CHECK_NEAR(0.5 * sh.value(theta2(0.0, 0.0), 0), 0.5, 1e-15);
  }
  {
    const SparseDistribution dist = binary_clip_decoder(theta2(0.5, 0.0));
    CHECK_NEAR(expected_target_loss(dist, d2, 0), 0.0, 1e-15);
    CHECK(expected_target_loss(dist, d2, 0) <= 0.5 * 0.25);
  }
  {
    const SparseDistribution dist = binary_clip_decoder(theta2(-0.25, 0.0));
    CHECK_NEAR(expected_target_loss(dist, d2, 0), 0.75, 1e-15);
    CHECK_NEAR(0.5 * sh.value(theta2(-0.25, 0.0), 0), 0.75, 1e-15);
  }
  CHECK_THROWS(binary_clip_decoder(Vector::Zero(3)), std::domain_error);
}

void test_convfy_decoder() {
  LossDecomposition d2 = make_multiclass(2);
  Regularizer reg = quadratic_regularizer(d2.label_hull, 1.0);
  SurrogateLoss conv = SurrogateLoss::conv_fenchel_young(d2, reg);

  const SparseDistribution uniform = convfy_decoder(*conv.solver(), Vector::Zero(2));
  uniform.validate();
  CHECK_NEAR(uniform.probability_of(0), 0.5, 1e-6);
  CHECK_NEAR(uniform.probability_of(1), 0.5, 1e-6);

  // strongly aligned scores give a near-deterministic decoding
  const SparseDistribution aligned = convfy_decoder(*conv.solver(), theta2(3.0, -3.0));
  CHECK(aligned.probability_of(0) >= 1.0 - 1e-3);

  // uniform decoding at zero scores equals half expected mistakes, and the
  // prediction-side losses reproduce it: 0.5 = 0.75 - 0.25
  const double expected = expected_target_loss(uniform, d2, 0);
  CHECK_NEAR(expected, 0.5, 1e-6);
  SurrogateLoss fy = SurrogateLoss::fenchel_young(d2, reg);
  const auto& sol = conv.solver()->solve(Vector::Zero(2));
  CHECK_NEAR(conv.value(Vector::Zero(2), 0) - fy.value(sol.xi, 0), expected, 1e-9);

  // ranking instance: support stays within the guaranteed bound
  Vector w(3);
  w << 1.0, 0.5, 0.25;
  LossDecomposition nd = make_ndcg(3, w, 3);
  Regularizer regn = quadratic_regularizer(nd.label_hull, 1.0);
  SurrogateLoss convn = SurrogateLoss::conv_fenchel_young(nd, regn);
  CounterRng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    Vector theta(3);
    for (int i = 0; i < 3; ++i) theta[i] = 2.0 * rng.normal();
    const SparseDistribution dist = convfy_decoder(*convn.solver(), theta);
    dist.validate();
    CHECK(static_cast<int>(dist.support.size()) <= 10);
  }
}

void test_expected_target_loss() {
  LossDecomposition d2 = make_multiclass(2);
  SparseDistribution point;
  point.support = {{1, 1.0}};
  CHECK_NEAR(expected_target_loss(point, d2, 1), 0.0, 0.0);
  SparseDistribution uniform;
  uniform.support = {{0, 0.5}, {1, 0.5}};
  CHECK_NEAR(expected_target_loss(uniform, d2, 0), 0.5, 0.0);
}

void test_sampling() {
  SparseDistribution point;
  point.support = {{7, 1.0}};
  std::mt19937_64 rng(99);
  for (int i = 0; i < 10; ++i) CHECK(sample(point, rng) == 7);

  SparseDistribution biased;
  biased.support = {{0, 0.25}, {1, 0.75}};
  std::mt19937_64 a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(sample(biased, a) == sample(biased, b));

  std::mt19937_64 mc(2024);
  std::map<PredHandle, long> counts;
  const long n = 100000;
  for (long i = 0; i < n; ++i) ++counts[sample(biased, mc)];
  CHECK_NEAR(static_cast<double>(counts[0]) / n, 0.25, 0.01);
  CHECK_NEAR(static_cast<double>(counts[1]) / n, 0.75, 0.01);
}

void test_gap_certificates() {
  for (const CheckResult& r : certificate_checks(5)) {
    CHECK(r.pass);
    if (!r.pass) std::printf("  suite failure: %s\n", r.name.c_str());
  }

  // report shape: the argmax violation at a slightly negative margin
  LossDecomposition d2 = make_multiclass(2);
  SurrogateLoss sh = SurrogateLoss::smooth_hinge(d2);
  const GapReport rep = gap_certificate([](const Vector& t) { return argmax_decoder(t); }, sh, d2,
                                        0.5, {theta2(-0.1, 0.0)});
  CHECK(!rep.ok());
  CHECK(rep.violations.size() == 1);
  CHECK_NEAR(rep.violations[0].expected, 1.0, 0.0);
  CHECK_NEAR(rep.violations[0].allowed, 0.5 * 1.2, 1e-12);
}

void test_identity_suites() {
  for (const CheckResult& r : identity_checks(17)) {
    CHECK(r.pass);
    if (!r.pass) std::printf("  suite failure: %s (worst %.3e)\n", r.name.c_str(), r.worst);
  }
}

}  // namespace

int main() {
  test_clip_decoder();
  test_convfy_decoder();
  test_expected_target_loss();
  test_sampling();
  test_gap_certificates();
  test_identity_suites();
  return test_summary("decode");
}
