#include "ospred/polytopes.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ospred/common.hpp"
#include "ospred/surrogate.hpp"
#include "testutil.hpp"

using namespace ospred;

namespace {

double perm_cost(const Matrix& cost, const std::vector<int>& perm) {
  double s = 0.0;
  for (int i = 0; i < static_cast<int>(perm.size()); ++i) s += cost(i, perm[i]);
  return s;
}

double brute_force_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  double best = kInf;
  for (std::int64_t h = 0; h < factorial(n); ++h)
    best = std::min(best, perm_cost(cost, index_to_perm(h, n)));
  return best;
}

void test_perm_codec() {
  for (int d : {1, 2, 4}) {
    for (std::int64_t h = 0; h < factorial(d); ++h) {
      const std::vector<int> p = index_to_perm(h, d);
      CHECK(perm_to_index(p) == h);
    }
  }
  CHECK_THROWS(index_to_perm(24, 4), std::invalid_argument);
}

void test_assignment() {
  Matrix c(2, 2);
  c << 1, 2, 3, 0;
  const std::vector<int> p = assignment_lmo(c);
  CHECK(p[0] == 0 && p[1] == 1);
  CHECK_NEAR(perm_cost(c, p), 1.0, 0.0);

  Matrix z = Matrix::Zero(3, 3);
  CHECK_NEAR(perm_cost(z, assignment_lmo(z)), 0.0, 0.0);

  CounterRng rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 3 + static_cast<int>(rng.next_below(3));  // 3..5
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = std::floor(rng.uniform(-10.0, 10.0));
    CHECK_NEAR(perm_cost(m, assignment_lmo(m)), brute_force_assignment(m), 1e-12);
  }

  Matrix rect(2, 3);
  rect.setZero();
  CHECK_THROWS(assignment_lmo(rect), std::invalid_argument);
  Matrix inf2 = Matrix::Zero(2, 2);
  inf2(0, 0) = kInf;
  CHECK_THROWS(assignment_lmo(inf2), std::invalid_argument);
}

void test_lmo_optimality() {
  // every oracle vertex must attain the exhaustive minimum
  CounterRng rng(13);
  for (int d : {3, 4, 5, 6}) {  // up to 720 vertices
    PolytopeOracle b = birkhoff_oracle(d);
    for (int rep = 0; rep < 5; ++rep) {
      Vector dir(d * d);
      for (int i = 0; i < dir.size(); ++i) dir[i] = rng.normal();
      const VertexHit hit = b.lmo(dir);
      double best = kInf;
      for (std::int64_t h = 0; h < b.vertex_count; ++h)
        best = std::min(best, dir.dot(b.vertex(h)));
      CHECK_NEAR(hit.objective, best, 1e-9);
      CHECK(b.contains(hit.point, 1e-12));
    }
  }
}

FwObjective sq_dist_objective(const Vector& target) {
  FwObjective obj;
  obj.value = [target](const Vector& x) { return 0.5 * (x - target).squaredNorm(); };
  obj.gradient = [target](const Vector& x) { return Vector(x - target); };
  obj.smoothness = 1.0;
  return obj;
}

void test_frank_wolfe_simplex() {
  // vertex target: the solver should land on that vertex
  std::vector<Vector> pts;
  for (int i = 0; i < 3; ++i) pts.push_back(Vector::Unit(3, i));
  PolytopeOracle simplex_hull = hull_oracle(pts);

  FwResult at_vertex = frank_wolfe_min(simplex_hull, sq_dist_objective(Vector::Unit(3, 1)));
  CHECK(at_vertex.converged);
  CHECK(at_vertex.gap <= 1e-8);
  CHECK_NEAR((at_vertex.x - Vector::Unit(3, 1)).norm(), 0.0, 1e-6);

  Vector half(2);
  half << 0.5, 0.5;
  std::vector<Vector> pts2 = {Vector::Unit(2, 0), Vector::Unit(2, 1)};
  FwResult mid = frank_wolfe_min(hull_oracle(pts2), sq_dist_objective(half));
  CHECK(mid.converged);
  CHECK_NEAR((mid.x - half).norm(), 0.0, 1e-6);

  // the active set always reproduces the iterate
  CHECK_NEAR((mid.active.combination(2) - mid.x).norm(), 0.0, 1e-10);
  CHECK_NEAR(mid.active.weight_sum(), 1.0, 1e-9);
}

void test_frank_wolfe_birkhoff_instance() {
  // conjugate-composite objective over the doubly stochastic polytope,
  // checked against a weight-grid oracle over the 6 permutation vertices
  const int d = 3;
  CounterRng rng(17);
  Vector theta(d), w(d);
  for (int i = 0; i < d; ++i) {
    theta[i] = rng.normal();
    w[i] = rng.next_double() + 0.25;
  }
  Regularizer reg = quadratic_regularizer(simplex_oracle(d), 1.0);
  PolytopeOracle birkhoff = birkhoff_oracle(d);

  FwObjective obj;
  obj.value = [&](const Vector& z) {
    Vector nu(d);
    for (int i = 0; i < d; ++i) {
      nu[i] = 0.0;
      for (int j = 0; j < d; ++j) nu[i] += z[i * d + j] * w[j];
    }
    return reg.conjugate(theta + nu).value;
  };
  obj.gradient = [&](const Vector& z) {
    Vector nu(d);
    for (int i = 0; i < d; ++i) {
      nu[i] = 0.0;
      for (int j = 0; j < d; ++j) nu[i] += z[i * d + j] * w[j];
    }
    const Vector g = reg.conjugate(theta + nu).argmax;
    Vector gz(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) gz[i * d + j] = g[i] * w[j];
    return gz;
  };
  obj.smoothness = w.squaredNorm();
  obj.line_search = true;

  FwResult res = frank_wolfe_min(birkhoff, obj);
  CHECK(res.converged);
  CHECK(res.gap <= 1e-8);

  // grid over convex combinations of the 6 vertices; every grid point is
  // feasible, so the solver value cannot exceed the grid minimum
  const int q = 8;
  double grid_best = kInf;
  std::vector<int> counts(6, 0);
  std::function<void(int, int)> recurse = [&](int idx, int left) {
    if (idx == 5) {
      counts[5] = left;
      Vector z = Vector::Zero(d * d);
      for (int v = 0; v < 6; ++v)
        if (counts[v] > 0) z += (static_cast<double>(counts[v]) / q) * birkhoff.vertex(v);
      grid_best = std::min(grid_best, obj.value(z));
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[idx] = c;
      recurse(idx + 1, left - c);
    }
  };
  recurse(0, q);
  CHECK(res.value <= grid_best + 1e-6);
  // the duality gap certifies the remaining distance to the optimum
  CHECK(grid_best >= res.value - 1e-8);
}

void test_caratheodory() {
  // already small: unchanged
  ActiveSet tiny;
  tiny.items.push_back({0, Vector::Unit(2, 0), 0.5});
  tiny.items.push_back({1, Vector::Unit(2, 1), 0.5});
  const ActiveSet same = caratheodory_reduce(tiny, 2);
  CHECK(same.items.size() == 2);

  // four square corners with an interior barycenter reduce to at most 3
  ActiveSet square;
  Vector p00(2), p01(2), p10(2), p11(2);
  p00 << 0, 0;
  p01 << 0, 1;
  p10 << 1, 0;
  p11 << 1, 1;
  square.items = {{0, p00, 0.25}, {1, p01, 0.25}, {2, p10, 0.25}, {3, p11, 0.25}};
  const Vector before = square.combination(2);
  const ActiveSet reduced = caratheodory_reduce(square, 2);
  CHECK(reduced.items.size() <= 3);
  CHECK_NEAR((reduced.combination(2) - before).norm(), 0.0, 1e-10);
  CHECK_NEAR(reduced.weight_sum(), 1.0, 1e-12);
  for (const auto& it : reduced.items) CHECK(it.weight >= 0.0);

  // doubly stochastic case, d = 3: six vertices already satisfy the bound
  PolytopeOracle b3 = birkhoff_oracle(3);
  ActiveSet six;
  for (std::int64_t h = 0; h < 6; ++h) six.items.push_back({h, b3.vertex(h), 1.0 / 6.0});
  const Vector sum6 = six.combination(9);
  const ActiveSet red6 = caratheodory_reduce(six, 9);
  CHECK(red6.items.size() <= 10);
  CHECK_NEAR((red6.combination(9) - sum6).norm(), 0.0, 1e-10);

  // d = 4: 24 vertices must come down to at most 17
  PolytopeOracle b4 = birkhoff_oracle(4);
  ActiveSet many;
  for (std::int64_t h = 0; h < 24; ++h) many.items.push_back({h, b4.vertex(h), 1.0 / 24.0});
  const Vector sum24 = many.combination(16);
  const ActiveSet red24 = caratheodory_reduce(many, 16);
  CHECK(static_cast<int>(red24.items.size()) <= 17);
  CHECK_NEAR((red24.combination(16) - sum24).norm(), 0.0, 1e-10);
}

void test_project_ball() {
  Matrix w = Matrix::Ones(2, 2) * 2.5;  // norm 5
  CHECK_NEAR((project_ball(w, 10.0) - w).norm(), 0.0, 0.0);
  Matrix big = Matrix::Ones(2, 2) * 10.0;  // norm 20
  CHECK_NEAR(project_ball(big, 10.0).norm(), 10.0, 1e-12);
  Matrix zero = Matrix::Zero(3, 3);
  CHECK_NEAR(project_ball(zero, 1.0).norm(), 0.0, 0.0);
}

void test_project_polytope() {
  // exact-projection oracle path: interior point maps to itself
  PolytopeOracle box = box01_oracle(2);
  Vector inside(2);
  inside << 0.3, 0.7;
  CHECK_NEAR((project_polytope(box, inside).point - inside).norm(), 0.0, 0.0);

  // solver path over the simplex hull
  std::vector<Vector> pts2 = {Vector::Unit(2, 0), Vector::Unit(2, 1)};
  PolytopeOracle hull2 = hull_oracle(pts2);
  Vector outside(2);
  outside << 2.0, 0.0;
  const ProjectionResult pr = project_polytope(hull2, outside);
  CHECK(pr.converged);
  CHECK_NEAR((pr.point - Vector::Unit(2, 0)).norm(), 0.0, 1e-6);

  std::vector<Vector> pts3 = {Vector::Unit(3, 0), Vector::Unit(3, 1), Vector::Unit(3, 2)};
  PolytopeOracle hull3 = hull_oracle(pts3);
  CounterRng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    Vector p(3);
    for (int i = 0; i < 3; ++i) p[i] = rng.uniform(-1.5, 1.5);
    const ProjectionResult got = project_polytope(hull3, p);
    CHECK(got.converged);
    CHECK_NEAR((got.point - simplex_project(p)).norm(), 0.0, 1e-6);
  }
}

}  // namespace

int main() {
  test_perm_codec();
  test_assignment();
  test_lmo_optimality();
  test_frank_wolfe_simplex();
  test_frank_wolfe_birkhoff_instance();
  test_caratheodory();
  test_project_ball();
  test_project_polytope();
  return test_summary("polytopes");
}
