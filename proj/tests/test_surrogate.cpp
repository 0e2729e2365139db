#include "ospred/surrogate.hpp"

#include <cmath>

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

void test_smooth_hinge_values() {
  LossDecomposition d2 = make_multiclass(2);
  SurrogateLoss sh = SurrogateLoss::smooth_hinge(d2);
  CHECK_NEAR(sh.value(theta2(0.0, 0.0), 0), 1.0, 0.0);
  CHECK_NEAR(sh.value(theta2(0.5, 0.0), 0), 0.25, 1e-15);
  CHECK_NEAR(sh.value(theta2(-1.0, 0.0), 0), 3.0, 0.0);
  CHECK_NEAR(sh.value(theta2(1.5, 0.0), 0), 0.0, 0.0);
  // same margins through the second label
  CHECK_NEAR(sh.value(theta2(0.0, 0.5), 1), 0.25, 1e-15);
}

void test_smooth_hinge_subgradients() {
  LossDecomposition d2 = make_multiclass(2);
  SurrogateLoss sh = SurrogateLoss::smooth_hinge(d2);

  // wrong argmax: squared norm 8 (unit input)
  const Vector g = sh.subgradient(theta2(-0.5, 0.5), 0);
  CHECK_NEAR(g.squaredNorm(), 8.0, 0.0);
  CHECK_NEAR(g[0], -2.0, 0.0);
  CHECK_NEAR(g[1], 2.0, 0.0);

  // comfortable margin: zero vector
  CHECK_NEAR(sh.subgradient(theta2(2.0, 0.0), 0).norm(), 0.0, 0.0);

  // correct argmax below unit margin: scaled by 2(1 - m)
  const Vector g2 = sh.subgradient(theta2(0.5, 0.0), 0);
  CHECK_NEAR(g2[0], -1.0, 1e-15);
  CHECK_NEAR(g2[1], 1.0, 1e-15);
}

void test_logistic() {
  LossDecomposition d2 = make_multiclass(2);
  SurrogateLoss lg = SurrogateLoss::logistic(d2);
  CHECK_NEAR(lg.value(theta2(0.0, 0.0), 0), std::log(2.0), 1e-15);
  CHECK_NEAR(lg.value(theta2(0.0, 0.0), 1), std::log(2.0), 1e-15);
  SurrogateLoss lg2 = SurrogateLoss::logistic(d2, 2.0);
  CHECK_NEAR(lg2.value(theta2(0.0, 0.0), 0), 1.0, 1e-15);
  CHECK_NEAR(lg2.self_bounding_constant(), 1.0 / std::log(2.0), 1e-15);
  // scaling wrapper: value and gradient both scale by 1/ln 2
  const Vector gn = lg.subgradient(theta2(0.4, -0.2), 0);
  const Vector gb = lg2.subgradient(theta2(0.4, -0.2), 0);
  CHECK_NEAR((gb - gn / std::log(2.0)).norm(), 0.0, 1e-15);
}

void test_gradient_estimator() {
  LossDecomposition d2 = make_multiclass(2);
  SurrogateLoss sh = SurrogateLoss::smooth_hinge(d2);

  Matrix w(2, 3);
  w << 1, 0, 0.5, -0.5, 0.25, 0;
  const Vector x0 = Vector::Zero(3);
  CHECK_NEAR(sh.gradient_estimator(w, x0, 0).norm(), 0.0, 0.0);

  CounterRng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Vector x(3);
    for (int i = 0; i < 3; ++i) x[i] = rng.normal() * 0.4;
    if (x.norm() > 1.0) x /= x.norm();
    const Vector g = sh.subgradient(w * x, 1);
    const Matrix big = sh.gradient_estimator(w, x, 1);
    CHECK_NEAR(big.norm(), g.norm() * x.norm(), 1e-12);
  }

  // frozen self-bounding point: margin -1, squared gradient 8 <= 8 * 3
  Matrix wb(2, 2);
  wb << -0.5, 0.0, 0.5, 0.0;
  Vector e1(2);
  e1 << 1.0, 0.0;
  const Matrix big = sh.gradient_estimator(wb, e1, 0);
  CHECK_NEAR(big.squaredNorm(), 8.0, 0.0);
  CHECK_NEAR(sh.value(wb * e1, 0), 3.0, 0.0);
  CHECK(big.squaredNorm() <= 2.0 * sh.self_bounding_constant() * sh.value(wb * e1, 0));
}

void test_self_bounding_constants() {
  LossDecomposition d3 = make_multiclass(3);
  CHECK_NEAR(SurrogateLoss::smooth_hinge(d3).self_bounding_constant(), 4.0, 0.0);
  CHECK_NEAR(SurrogateLoss::logistic(d3).self_bounding_constant(), 1.0, 0.0);
  CHECK_NEAR(SurrogateLoss::sparsemap(d3).self_bounding_constant(), 1.0, 0.0);
  Regularizer reg = quadratic_regularizer(d3.label_hull, 2.0);
  CHECK_NEAR(SurrogateLoss::conv_fenchel_young(d3, reg).self_bounding_constant(), 0.5, 0.0);
  CHECK_THROWS(SurrogateLoss::plain_hinge(d3, 1.0).self_bounding_constant(), std::domain_error);
}

void test_plain_hinge() {
  LossDecomposition d2 = make_multiclass(2);
  SurrogateLoss ph1 = SurrogateLoss::plain_hinge(d2, 1.0);
  // vanishing loss with unit-order gradient near the unit margin
  CHECK_NEAR(ph1.value(theta2(1.0, 0.0), 0), 0.0, 0.0);
  const Vector g = ph1.subgradient(theta2(0.999, 0.0), 0);
  CHECK_NEAR(g.squaredNorm(), 2.0, 0.0);
  CHECK_NEAR(ph1.value(theta2(0.999, 0.0), 0), 0.001, 1e-12);
  // comfortable correct margin: zero loss
  CHECK_NEAR(ph1.value(theta2(1.5, 0.0), 0), 0.0, 0.0);

  // kappa = 0.5: jump of at least 1 - kappa across the gate
  SurrogateLoss ph = SurrogateLoss::plain_hinge(d2, 0.5);
  const double below = ph.value(theta2(0.5, 0.0), 0);
  const double above = ph.value(theta2(0.5 + 1e-9, 0.0), 0);
  CHECK(below - above >= 0.5 - 1e-6);
  CHECK_THROWS(SurrogateLoss::plain_hinge(d2, 1.5), std::domain_error);
}

void test_sparsemap_closed_form() {
  // two-class quadratic case: the conjugate argmax is the simplex projection
  LossDecomposition d2 = make_multiclass(2);
  SurrogateLoss sm = SurrogateLoss::sparsemap(d2);
  // aligned vertex: zero loss
  CHECK_NEAR(sm.value(Vector(Vector::Unit(2, 0)), 0), 0.0, 1e-12);
  // theta = 0 projects to the centroid
  const Vector g = sm.subgradient(theta2(0.0, 0.0), 0);
  CHECK_NEAR(g[0], -0.5, 1e-12);
  CHECK_NEAR(g[1], 0.5, 1e-12);

  // multilabel instance: box domain with an exact clamp projection
  LossDecomposition ml = make_multilabel(3);
  SurrogateLoss smb = SurrogateLoss::sparsemap(ml);
  Vector t3(3);
  t3 << 2.0, -1.0, 0.25;
  const Vector gb = smb.subgradient(t3, 0b101);
  CHECK_NEAR(gb[0], 1.0 - 1.0, 1e-12);
  CHECK_NEAR(gb[1], 0.0 - 0.0, 1e-12);
  CHECK_NEAR(gb[2], 0.25 - 1.0, 1e-12);
}

void test_convfy_worked_example() {
  LossDecomposition d2 = make_multiclass(2);
  Regularizer reg = quadratic_regularizer(d2.label_hull, 1.0);
  SurrogateLoss conv = SurrogateLoss::conv_fenchel_young(d2, reg);
  const Vector theta = Vector::Zero(2);
  CHECK_NEAR(conv.value(theta, 0), 0.75, 1e-9);
  const Vector g = conv.subgradient(theta, 0);
  CHECK_NEAR(g[0], -0.5, 1e-7);
  CHECK_NEAR(g[1], 0.5, 1e-7);
  CHECK_NEAR(g.squaredNorm(), 0.5, 1e-7);
  // the cached solve reports the inner conjugate value 1/4
  CHECK_NEAR(conv.solver()->solve(theta).conj_value, 0.25, 1e-9);
}

void test_entropy_regularizer() {
  Regularizer ent = entropy_regularizer(3);
  const Regularizer::Conjugate c = ent.conjugate(Vector::Zero(3));
  CHECK_NEAR(c.value, std::log(3.0), 1e-12);
  CHECK_NEAR(c.argmax[0], 1.0 / 3.0, 1e-12);
  CHECK_NEAR(ent.omega(c.argmax), -std::log(3.0), 1e-12);
}

void test_shared_suites() {
  for (const CheckResult& r : self_bounding_checks(21)) {
    CHECK(r.pass);
    if (!r.pass) std::printf("  suite failure: %s (worst %.3e)\n", r.name.c_str(), r.worst);
  }
  for (const CheckResult& r : gradient_checks(22)) {
    CHECK(r.pass);
    if (!r.pass) std::printf("  suite failure: %s (worst %.3e)\n", r.name.c_str(), r.worst);
  }
}

}  // namespace

int main() {
  test_smooth_hinge_values();
  test_smooth_hinge_subgradients();
  test_logistic();
  test_gradient_estimator();
  test_self_bounding_constants();
  test_plain_hinge();
  test_sparsemap_closed_form();
  test_convfy_worked_example();
  test_entropy_regularizer();
  test_shared_suites();
  return test_summary("surrogate");
}
