#include "ospred/polytopes.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace ospred {

std::int64_t factorial(int d) {
  if (d < 0 || d > 20) throw std::invalid_argument("factorial: d out of range");
  std::int64_t f = 1;
  for (int i = 2; i <= d; ++i) f *= i;
  return f;
}

std::int64_t perm_to_index(std::span<const int> perm) {
  const int d = static_cast<int>(perm.size());
  std::int64_t index = 0;
  for (int i = 0; i < d; ++i) {
    int smaller = 0;
    for (int j = i + 1; j < d; ++j)
      if (perm[j] < perm[i]) ++smaller;
    index += smaller * factorial(d - 1 - i);
  }
  return index;
}

std::vector<int> index_to_perm(std::int64_t index, int d) {
  if (index < 0 || index >= factorial(d)) throw std::invalid_argument("index_to_perm: bad index");
  std::vector<int> pool(d);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> perm(d);
  for (int i = 0; i < d; ++i) {
    const std::int64_t f = factorial(d - 1 - i);
    const int pos = static_cast<int>(index / f);
    index %= f;
    perm[i] = pool[pos];
    pool.erase(pool.begin() + pos);
  }
  return perm;
}

PolytopeOracle simplex_oracle(int k) {
  if (k < 1) throw std::invalid_argument("simplex_oracle: k < 1");
  PolytopeOracle o;
  o.dim = k;
  o.vertex_count = k;
  o.lmo = [k](const Vector& dir) {
    int best = 0;
    for (int i = 1; i < k; ++i)
      if (dir[i] < dir[best]) best = i;
    VertexHit hit;
    hit.handle = best;
    hit.point = Vector::Unit(k, best);
    hit.objective = dir[best];
    return hit;
  };
  o.vertex = [k](std::int64_t h) { return Vector(Vector::Unit(k, static_cast<int>(h))); };
  o.project = [](const Vector& p) { return simplex_project(p); };
  o.contains = [](const Vector& p, double tol) {
    return p.minCoeff() >= -tol && std::abs(p.sum() - 1.0) <= tol;
  };
  return o;
}

PolytopeOracle box01_oracle(int d) {
  if (d < 1) throw std::invalid_argument("box01_oracle: d < 1");
  if (d > 62) throw std::invalid_argument("box01_oracle: d too large for bitmask handles");
  PolytopeOracle o;
  o.dim = d;
  o.vertex_count = std::int64_t(1) << d;
  o.lmo = [d](const Vector& dir) {
    VertexHit hit;
    hit.point = Vector::Zero(d);
    std::int64_t mask = 0;
    double obj = 0.0;
    for (int i = 0; i < d; ++i) {
      if (dir[i] < 0.0) {
        hit.point[i] = 1.0;
        mask |= std::int64_t(1) << i;
        obj += dir[i];
      }
    }
    hit.handle = mask;
    hit.objective = obj;
    return hit;
  };
  o.vertex = [d](std::int64_t h) {
    Vector v = Vector::Zero(d);
    for (int i = 0; i < d; ++i)
      if ((h >> i) & 1) v[i] = 1.0;
    return v;
  };
  o.project = [d](const Vector& p) {
    Vector q(d);
    for (int i = 0; i < d; ++i) q[i] = clip01(p[i]);
    return q;
  };
  o.contains = [](const Vector& p, double tol) {
    return p.minCoeff() >= -tol && p.maxCoeff() <= 1.0 + tol;
  };
  return o;
}

PolytopeOracle hull_oracle(std::vector<Vector> points) {
  if (points.empty()) throw std::invalid_argument("hull_oracle: no points");
  const int d = static_cast<int>(points[0].size());
  auto pts = std::make_shared<const std::vector<Vector>>(std::move(points));
  PolytopeOracle o;
  o.dim = d;
  o.vertex_count = static_cast<std::int64_t>(pts->size());
  o.vertex_list = pts;
  o.lmo = [pts](const Vector& dir) {
    std::int64_t best = 0;
    double best_val = dir.dot((*pts)[0]);
    for (std::int64_t i = 1; i < static_cast<std::int64_t>(pts->size()); ++i) {
      const double v = dir.dot((*pts)[i]);
      if (v < best_val) {
        best_val = v;
        best = i;
      }
    }
    return VertexHit{best, (*pts)[best], best_val};
  };
  o.vertex = [pts](std::int64_t h) { return (*pts)[h]; };
  return o;
}

PolytopeOracle birkhoff_oracle(int d) {
  if (d < 1) throw std::invalid_argument("birkhoff_oracle: d < 1");
  PolytopeOracle o;
  o.dim = d * d;
  o.vertex_count = d <= 20 ? factorial(d) : 0;
  auto to_point = [d](const std::vector<int>& perm) {
    Vector v = Vector::Zero(d * d);
    for (int i = 0; i < d; ++i) v[i * d + perm[i]] = 1.0;
    return v;
  };
  o.lmo = [d, to_point](const Vector& dir) {
    Matrix cost(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) cost(i, j) = dir[i * d + j];
    const std::vector<int> perm = assignment_lmo(cost);
    VertexHit hit;
    hit.handle = perm_to_index(perm);
    hit.point = to_point(perm);
    hit.objective = dir.dot(hit.point);
    return hit;
  };
  o.vertex = [d, to_point](std::int64_t h) { return to_point(index_to_perm(h, d)); };
  o.contains = [d](const Vector& p, double tol) {
    if (p.minCoeff() < -tol) return false;
    for (int i = 0; i < d; ++i) {
      double row = 0.0, col = 0.0;
      for (int j = 0; j < d; ++j) {
        row += p[i * d + j];
        col += p[j * d + i];
      }
      if (std::abs(row - 1.0) > tol || std::abs(col - 1.0) > tol) return false;
    }
    return true;
  };
  return o;
}

Vector ActiveSet::combination(int dim) const {
  Vector x = Vector::Zero(dim);
  for (const auto& it : items) x += it.weight * it.point;
  return x;
}

double ActiveSet::weight_sum() const {
  double s = 0.0;
  for (const auto& it : items) s += it.weight;
  return s;
}

void ActiveSet::merge_duplicates() {
  std::vector<WeightedVertex> merged;
  for (const auto& it : items) {
    bool found = false;
    for (auto& m : merged) {
      if (m.handle == it.handle) {
        m.weight += it.weight;
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(it);
  }
  items = std::move(merged);
}

namespace {

int resolve_max_iters(int requested, int dim) {
  if (requested > 0) return requested;
  const long long by_dim = 10LL * dim * dim;
  return static_cast<int>(std::max(200LL, std::min(by_dim, 200000LL)));
}

// Minimizes the convex 1-D restriction t -> f(x + t d) on [0, gmax] by
// regula falsi (Illinois) on the monotone directional derivative. Returns a
// point with nonpositive slope so the step can never increase the objective.
double directional_step(const FwObjective& objective, const Vector& x, const Vector& dir,
                        double gmax, double deriv0) {
  double hi = gmax;
  double hip = objective.gradient(x + hi * dir).dot(dir);
  if (hip <= 0.0) return gmax;
  double lo = 0.0, lop = deriv0;
  int last_side = 0;
  for (int it = 0; it < 60; ++it) {
    double mid = lo + (hi - lo) * (-lop) / (hip - lop);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    const double midp = objective.gradient(x + mid * dir).dot(dir);
    if (midp == 0.0) return mid;  // exact root (the objective is often quadratic along dir)
    if (midp > 0.0) {
      hi = mid;
      hip = midp;
      if (last_side == +1) lop *= 0.5;
      last_side = +1;
    } else {
      lo = mid;
      lop = midp;
      if (last_side == -1) hip *= 0.5;
      last_side = -1;
    }
    if (hi - lo <= 1e-13 * std::max(1.0, gmax)) break;
  }
  return lo > 0.0 ? lo : 0.5 * hi;
}

}  // namespace

FwResult frank_wolfe_min(const PolytopeOracle& oracle, const FwObjective& objective,
                         const FwOptions& opts, const ActiveSet* warm_start) {
  FwResult res;
  ActiveSet& act = res.active;
  if (warm_start != nullptr && !warm_start->items.empty()) {
    act = *warm_start;
    act.merge_duplicates();
    const double s = act.weight_sum();
    if (s <= 0.0) throw std::invalid_argument("frank_wolfe_min: degenerate warm start");
    for (auto& it : act.items) it.weight /= s;
  } else {
    VertexHit v0 = oracle.lmo(Vector::Zero(oracle.dim));
    act.items.push_back({v0.handle, v0.point, 1.0});
  }
  Vector x = act.combination(oracle.dim);

  const int max_iters = resolve_max_iters(opts.max_iters, oracle.dim);
  const double lf = objective.smoothness > 0.0 ? objective.smoothness : 1.0;

  for (res.iters = 0; res.iters < max_iters; ++res.iters) {
    const Vector g = objective.gradient(x);
    if (!g.allFinite()) throw std::runtime_error("frank_wolfe_min: non-finite gradient");
    const VertexHit s = oracle.lmo(g);
    res.gap = g.dot(x) - s.objective;
    if (res.gap <= opts.tol) {
      res.converged = true;
      break;
    }

    // Away vertex: active-set maximizer of the linearized objective.
    std::size_t away = 0;
    double away_val = g.dot(act.items[0].point);
    for (std::size_t i = 1; i < act.items.size(); ++i) {
      const double v = g.dot(act.items[i].point);
      if (v > away_val) {
        away_val = v;
        away = i;
      }
    }

    const Vector dir = s.point - act.items[away].point;
    const double dn2 = dir.squaredNorm();
    if (dn2 < 1e-28) break;  // numerically stalled
    const double descent = -g.dot(dir);
    if (descent <= 0.0) break;
    const double gamma_max = act.items[away].weight;
    const double gamma = objective.line_search
                             ? directional_step(objective, x, dir, gamma_max, -descent)
                             : std::min(gamma_max, descent / (lf * dn2));

    act.items[away].weight -= gamma;
    bool merged = false;
    for (auto& it : act.items) {
      if (it.handle == s.handle) {
        it.weight += gamma;
        merged = true;
        break;
      }
    }
    if (!merged) act.items.push_back({s.handle, s.point, gamma});
    std::erase_if(act.items, [](const WeightedVertex& wv) { return wv.weight <= 1e-15; });

    x = act.combination(oracle.dim);
  }

  res.x = x;
  res.value = objective.value(x);
  if (!res.converged) {
    const Vector g = objective.gradient(x);
    const VertexHit s = oracle.lmo(g);
    res.gap = g.dot(x) - s.objective;
    res.converged = res.gap <= opts.tol;
  }
  return res;
}

ActiveSet caratheodory_reduce(const ActiveSet& a, int dim) {
  ActiveSet out = a;
  out.merge_duplicates();
  if (out.items.empty()) return out;
  const int ambient = static_cast<int>(out.items[0].point.size());

  while (static_cast<int>(out.items.size()) > dim + 1) {
    const int m = static_cast<int>(out.items.size());
    Matrix sys(ambient + 1, m);
    for (int i = 0; i < m; ++i) {
      sys.col(i).head(ambient) = out.items[i].point;
      sys(ambient, i) = 1.0;
    }
    Eigen::FullPivLU<Matrix> lu(sys);
    lu.setThreshold(1e-12);
    const Matrix kernel = lu.kernel();
    if (kernel.cols() == 0 || kernel.col(0).norm() < 1e-14) break;
    Vector c = kernel.col(0);
    if (c.maxCoeff() <= 0.0) c = -c;

    double t = kInf;
    int drop = -1;
    for (int i = 0; i < m; ++i) {
      if (c[i] > 1e-14) {
        const double r = out.items[i].weight / c[i];
        if (r < t) {
          t = r;
          drop = i;
        }
      }
    }
    if (drop < 0) break;
    for (int i = 0; i < m; ++i) out.items[i].weight -= t * c[i];
    out.items[drop].weight = 0.0;
    std::erase_if(out.items, [](const WeightedVertex& wv) { return wv.weight <= 1e-14; });
  }
  return out;
}

Matrix project_ball(const Matrix& w, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_ball: radius must be positive");
  const double n = w.norm();
  if (n <= radius) return w;
  return w * (radius / n);
}

ProjectionResult project_polytope(const PolytopeOracle& oracle, const Vector& p, double tol,
                                  int max_iters) {
  if (oracle.project) return {oracle.project(p), 0.0, true};
  FwObjective obj;
  obj.value = [&p](const Vector& x) { return 0.5 * (x - p).squaredNorm(); };
  obj.gradient = [&p](const Vector& x) { return Vector(x - p); };
  obj.smoothness = 1.0;
  FwOptions opts;
  opts.tol = tol;
  opts.max_iters = max_iters;
  FwResult r = frank_wolfe_min(oracle, obj, opts);
  return {r.x, r.gap, r.converged};
}

std::vector<int> assignment_lmo(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("assignment_lmo: matrix not square");
  if (!cost.allFinite()) throw std::invalid_argument("assignment_lmo: non-finite entries");
  const int n = static_cast<int>(cost.rows());

  // Augmenting-path assignment with row/column potentials; O(n^3).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> perm(n, -1);
  for (int j = 1; j <= n; ++j)
    if (match[j] != 0) perm[match[j] - 1] = j - 1;
  return perm;
}

namespace {

// Least-norm affine combination: minimize ||sum_i a_i s_i - p||^2 under
// sum_i a_i = 1, by the stationarity system.
Vector affine_min_weights(const std::vector<Vector>& s, const Vector& p) {
  const int m = static_cast<int>(s.size());
  Matrix sys = Matrix::Zero(m + 1, m + 1);
  Vector rhs = Vector::Zero(m + 1);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) sys(i, j) = s[i].dot(s[j]);
    sys(i, m) = 1.0;
    sys(m, i) = 1.0;
    rhs[i] = s[i].dot(p);
  }
  rhs[m] = 1.0;
  const Vector sol = Eigen::FullPivLU<Matrix>(sys).solve(rhs);
  return sol.head(m);
}

}  // namespace

Vector hull_project(const std::vector<Vector>& points, const Vector& p) {
  if (points.empty()) throw std::invalid_argument("hull_project: no points");
  const int n = static_cast<int>(points.size());

  int start = 0;
  double best = (points[0] - p).squaredNorm();
  for (int i = 1; i < n; ++i) {
    const double d2 = (points[i] - p).squaredNorm();
    if (d2 < best) {
      best = d2;
      start = i;
    }
  }
  std::vector<int> support = {start};
  std::vector<Vector> pts = {points[start]};
  std::vector<double> alpha = {1.0};
  Vector x = points[start];

  const double eps = 1e-12;
  const int max_major = 4 * n + 64;
  for (int major = 0; major < max_major; ++major) {
    const Vector g = x - p;
    int s = 0;
    double sval = g.dot(points[0]);
    for (int i = 1; i < n; ++i) {
      const double v = g.dot(points[i]);
      if (v < sval) {
        sval = v;
        s = i;
      }
    }
    if (g.dot(x) - sval <= eps * (1.0 + g.squaredNorm())) break;
    bool present = false;
    for (int idx : support)
      if (idx == s) present = true;
    if (present) break;  // numerically optimal on the current face
    support.push_back(s);
    pts.push_back(points[s]);
    alpha.push_back(0.0);

    for (int minor = 0; minor < n + 8; ++minor) {
      const Vector beta = affine_min_weights(pts, p);
      double bmin = beta.minCoeff();
      if (bmin > 1e-14) {
        for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = beta[i];
        break;
      }
      double t = 1.0;
      for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (beta[i] <= 1e-14 && alpha[i] - beta[i] > 0.0)
          t = std::min(t, alpha[i] / (alpha[i] - beta[i]));
      }
      for (std::size_t i = 0; i < alpha.size(); ++i)
        alpha[i] = alpha[i] + t * (beta[i] - alpha[i]);
      for (int i = static_cast<int>(alpha.size()) - 1; i >= 0; --i) {
        if (alpha[i] <= 1e-13) {
          alpha.erase(alpha.begin() + i);
          pts.erase(pts.begin() + i);
          support.erase(support.begin() + i);
        }
      }
      if (alpha.empty()) {  // degenerate; restart from the entering vertex
        support = {s};
        pts = {points[s]};
        alpha = {1.0};
        break;
      }
    }
    x.setZero();
    for (std::size_t i = 0; i < alpha.size(); ++i) x += alpha[i] * pts[i];
  }
  return x;
}

Vector simplex_project(const Vector& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> s(v.data(), v.data() + n);
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    cum += s[i];
    const double cand = (cum - 1.0) / (i + 1);
    if (s[i] - cand > 0.0) {
      rho = i + 1;
      tau = cand;
    }
  }
  (void)rho;
  Vector out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(0.0, v[i] - tau);
  return out;
}

}  // namespace ospred
