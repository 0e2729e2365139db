#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ospred/common.hpp"

namespace ospred {

// Permutation <-> integer codec (Lehmer order); valid for d <= 20.
std::int64_t factorial(int d);
std::int64_t perm_to_index(std::span<const int> perm);
std::vector<int> index_to_perm(std::int64_t index, int d);

struct VertexHit {
  std::int64_t handle = -1;
  Vector point;
  double objective = 0.0;  // <direction, point>
};

// A polytope described by its vertex linear-minimization oracle.
struct PolytopeOracle {
  int dim = 0;
  std::int64_t vertex_count = 0;  // 0 when unknown or too large to matter
  std::function<VertexHit(const Vector&)> lmo;        // argmin_v <dir, v>
  std::function<Vector(std::int64_t)> vertex;         // handle -> point
  std::function<Vector(const Vector&)> project;       // exact Euclidean projection, when available
  std::function<bool(const Vector&, double)> contains;
  std::shared_ptr<const std::vector<Vector>> vertex_list;  // set for enumerated hulls
};

PolytopeOracle simplex_oracle(int k);
PolytopeOracle box01_oracle(int d);
PolytopeOracle hull_oracle(std::vector<Vector> points);
PolytopeOracle birkhoff_oracle(int d);

struct WeightedVertex {
  std::int64_t handle = -1;
  Vector point;
  double weight = 0.0;
};

// Convex combination of polytope vertices; weights are nonnegative and sum
// to one. The represented point is always recomputed from the items so the
// combination and the iterate cannot drift apart.
struct ActiveSet {
  std::vector<WeightedVertex> items;

  Vector combination(int dim) const;
  double weight_sum() const;
  void merge_duplicates();
};

struct FwObjective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double smoothness = 1.0;  // Lipschitz constant of the gradient
  // Resolve steps by root-finding on the directional derivative instead of
  // the smoothness-based short step; needed when the objective has flat
  // pieces (projection landing on a vertex) where short steps crawl.
  bool line_search = false;
};

struct FwOptions {
  double tol = 1e-8;
  int max_iters = 0;  // 0 -> 10 * dim^2, clamped to at least 200
};

struct FwResult {
  ActiveSet active;
  Vector x;
  double value = 0.0;
  double gap = kInf;  // <grad(x), x - lmo vertex>; certifies value - optimum <= gap
  int iters = 0;
  bool converged = false;
};

// Pairwise Frank-Wolfe over a vertex-described polytope. Keeps an explicit
// active set whose convex combination equals the iterate after every step.
FwResult frank_wolfe_min(const PolytopeOracle& oracle, const FwObjective& objective,
                         const FwOptions& opts = {}, const ActiveSet* warm_start = nullptr);

// Rewrites the combination over at most dim+1 vertices with the same
// weighted sum; dim is the affine-dimension bound supplied by the caller.
ActiveSet caratheodory_reduce(const ActiveSet& a, int dim);

Matrix project_ball(const Matrix& w, double radius);

struct ProjectionResult {
  Vector point;
  double gap = 0.0;
  bool converged = true;
};

// Euclidean projection via frank_wolfe_min on 0.5*||x - p||^2 unless the
// oracle provides an exact projection.
ProjectionResult project_polytope(const PolytopeOracle& oracle, const Vector& p,
                                  double tol = 1e-8, int max_iters = 0);

// Exact min-cost assignment on a square cost matrix; returns the permutation
// sigma with row i matched to column sigma[i].
std::vector<int> assignment_lmo(const Matrix& cost);

// Sort-based exact Euclidean projection onto the probability simplex.
Vector simplex_project(const Vector& v);

// Euclidean projection onto the convex hull of a small explicit vertex set,
// via the minimum-norm-point scheme (active affine least squares); resolves
// to machine precision, unlike the iterative solver path.
Vector hull_project(const std::vector<Vector>& points, const Vector& p);

}  // namespace ospred
