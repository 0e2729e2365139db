#include "ospred/surrogate.hpp"

#include <cmath>

namespace ospred {

namespace {

double logsumexp(const Vector& v) {
  const double m = v.maxCoeff();
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

Vector softmax(const Vector& v) {
  const double m = v.maxCoeff();
  Vector e(v.size());
  for (int i = 0; i < v.size(); ++i) e[i] = std::exp(v[i] - m);
  return e / e.sum();
}

struct Margins {
  double margin_true;  // theta_y - max over others
  int y_star;          // overall argmax, lowest index on ties
  int y_tilde;         // argmax excluding the true label, lowest index on ties
  double m_star;       // top margin: theta_{y*} - second max
};

Margins margins(const Vector& theta, LabelHandle y) {
  const int k = static_cast<int>(theta.size());
  const int yt = static_cast<int>(y);
  int y_star = 0;
  for (int i = 1; i < k; ++i)
    if (theta[i] > theta[y_star]) y_star = i;
  int y_tilde = yt == 0 ? 1 : 0;
  for (int i = 0; i < k; ++i)
    if (i != yt && theta[i] > theta[y_tilde]) y_tilde = i;
  double second = -kInf;
  for (int i = 0; i < k; ++i)
    if (i != y_star && theta[i] > second) second = theta[i];
  return {theta[yt] - theta[y_tilde], y_star, y_tilde, theta[y_star] - second};
}

}  // namespace

double Regularizer::omega(const Vector& mu) const {
  if (kind == Kind::QuadraticHull) return 0.5 * lambda * mu.squaredNorm();
  double s = 0.0;
  for (int i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0) s += mu[i] * std::log(mu[i]);
  return s;
}

Regularizer::Conjugate Regularizer::conjugate(const Vector& xi) const {
  if (kind == Kind::NegEntropySimplex) {
    return {logsumexp(xi), softmax(xi)};
  }
  Vector mu;
  if (domain.project) {
    mu = domain.project(xi / lambda);
  } else if (domain.vertex_list) {
    mu = hull_project(*domain.vertex_list, xi / lambda);
  } else {
    mu = project_polytope(domain, xi / lambda, proj_tol).point;
  }
  return {xi.dot(mu) - 0.5 * lambda * mu.squaredNorm(), mu};
}

Regularizer quadratic_regularizer(PolytopeOracle domain, double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("quadratic_regularizer: lambda must be positive");
  Regularizer r;
  r.kind = Regularizer::Kind::QuadraticHull;
  r.lambda = lambda;
  r.domain = std::move(domain);
  return r;
}

Regularizer entropy_regularizer(int k) {
  Regularizer r;
  r.kind = Regularizer::Kind::NegEntropySimplex;
  r.lambda = 1.0;
  r.domain = simplex_oracle(k);
  return r;
}

ConvFySolver::ConvFySolver(std::shared_ptr<const LossDecomposition> decomp, Regularizer reg,
                           FwOptions opts)
    : decomp_(std::move(decomp)), reg_(std::move(reg)), opts_(opts) {
  if (!decomp_->pred_space)
    throw std::domain_error(decomp_->kind + ": no prediction-side polytope for this loss");
}

const ConvFySolver::Solution& ConvFySolver::solve(const Vector& theta) {
  if (has_cache_ && cached_theta_.size() == theta.size() &&
      (cached_theta_.array() == theta.array()).all())
    return cached_;

  const PredictionSpace& ps = *decomp_->pred_space;
  FwObjective obj;
  obj.value = [&](const Vector& z) { return reg_.conjugate(theta + ps.to_score(z)).value; };
  obj.gradient = [&](const Vector& z) {
    return ps.adjoint(reg_.conjugate(theta + ps.to_score(z)).argmax);
  };
  obj.smoothness = ps.op_norm * ps.op_norm / reg_.lambda;
  obj.line_search = true;

  const ActiveSet* warm = warm_.items.empty() ? nullptr : &warm_;
  FwResult fw = frank_wolfe_min(ps.polytope, obj, opts_, warm);
  if (!fw.converged) {
    throw std::runtime_error(decomp_->kind +
                             ": prediction-side solve did not reach tolerance (gap " +
                             std::to_string(fw.gap) + ")");
  }
  warm_ = fw.active;

  Solution sol;
  sol.active = caratheodory_reduce(fw.active, ps.reduce_dim);
  sol.nu = ps.to_score(sol.active.combination(ps.polytope.dim));
  sol.xi = theta + sol.nu;
  const Regularizer::Conjugate conj = reg_.conjugate(sol.xi);
  sol.conj_value = conj.value;
  sol.conj_grad = conj.argmax;
  sol.gap = fw.gap;
  sol.iters = fw.iters;

  cached_theta_ = theta;
  cached_ = std::move(sol);
  has_cache_ = true;
  return cached_;
}

SurrogateLoss SurrogateLoss::smooth_hinge(LossDecomposition decomp) {
  if (decomp.label_count != decomp.dim)
    throw std::domain_error("smooth_hinge: needs a multiclass-style instance");
  SurrogateLoss s;
  s.kind_ = Kind::SmoothHinge;
  s.decomp_ = std::make_shared<const LossDecomposition>(std::move(decomp));
  return s;
}

SurrogateLoss SurrogateLoss::logistic(LossDecomposition decomp, double base) {
  if (decomp.label_count != decomp.dim)
    throw std::domain_error("logistic: needs a multiclass-style instance");
  SurrogateLoss s;
  s.kind_ = Kind::Logistic;
  s.scale_ = base > 0.0 ? 1.0 / std::log(base) : 1.0;
  s.decomp_ = std::make_shared<const LossDecomposition>(std::move(decomp));
  return s;
}

SurrogateLoss SurrogateLoss::sparsemap(LossDecomposition decomp) {
  if (!decomp.label_hull.lmo && !decomp.label_hull.project)
    throw std::domain_error("sparsemap: instance has no label hull");
  SurrogateLoss s;
  s.kind_ = Kind::SparseMap;
  s.decomp_ = std::make_shared<const LossDecomposition>(std::move(decomp));
  s.reg_ = std::make_shared<Regularizer>(quadratic_regularizer(s.decomp_->label_hull, 1.0));
  return s;
}

SurrogateLoss SurrogateLoss::fenchel_young(LossDecomposition decomp, Regularizer reg) {
  SurrogateLoss s;
  s.kind_ = Kind::FenchelYoung;
  s.decomp_ = std::make_shared<const LossDecomposition>(std::move(decomp));
  s.reg_ = std::make_shared<Regularizer>(std::move(reg));
  return s;
}

SurrogateLoss SurrogateLoss::conv_fenchel_young(LossDecomposition decomp, Regularizer reg,
                                                FwOptions opts) {
  SurrogateLoss s;
  s.kind_ = Kind::ConvFenchelYoung;
  s.decomp_ = std::make_shared<const LossDecomposition>(std::move(decomp));
  s.reg_ = std::make_shared<Regularizer>(std::move(reg));
  s.solver_ = std::make_shared<ConvFySolver>(s.decomp_, *s.reg_, opts);
  return s;
}

SurrogateLoss SurrogateLoss::plain_hinge(LossDecomposition decomp, double kappa) {
  if (kappa < 0.0 || kappa > 1.0) throw std::domain_error("plain_hinge: kappa must be in [0, 1]");
  if (decomp.label_count != decomp.dim)
    throw std::domain_error("plain_hinge: needs a multiclass-style instance");
  SurrogateLoss s;
  s.kind_ = Kind::PlainHinge;
  s.kappa_ = kappa;
  s.decomp_ = std::make_shared<const LossDecomposition>(std::move(decomp));
  return s;
}

std::string SurrogateLoss::name() const {
  switch (kind_) {
    case Kind::SmoothHinge: return "smooth-hinge";
    case Kind::Logistic: return scale_ == 1.0 ? "logistic" : "logistic-scaled";
    case Kind::SparseMap: return "sparsemap";
    case Kind::FenchelYoung: return "fenchel-young";
    case Kind::ConvFenchelYoung: return "conv-fenchel-young";
    case Kind::PlainHinge: return "plain-hinge";
  }
  return "?";
}

double SurrogateLoss::lambda() const { return reg_ ? reg_->lambda : 0.0; }

double SurrogateLoss::value(const Vector& theta, LabelHandle y) const {
  if (!theta.allFinite()) throw std::runtime_error("surrogate value: non-finite scores");
  decomp_->check_label(y);
  switch (kind_) {
    case Kind::SmoothHinge: {
      const double m = margins(theta, y).margin_true;
      if (m <= 0.0) return 1.0 - 2.0 * m;
      const double h = std::max(1.0 - m, 0.0);
      return h * h;
    }
    case Kind::Logistic:
      return scale_ * (logsumexp(theta) - theta[static_cast<int>(y)]);
    case Kind::SparseMap:
    case Kind::FenchelYoung: {
      const Vector r = decomp_->rho(y);
      const Regularizer::Conjugate conj = reg_->conjugate(theta);
      return conj.value + reg_->omega(r) - theta.dot(r);
    }
    case Kind::ConvFenchelYoung: {
      const Vector r = decomp_->rho(y);
      const ConvFySolver::Solution& sol = solver_->solve(theta);
      return sol.conj_value + reg_->omega(r) + tau(*decomp_, r).value - theta.dot(r);
    }
    case Kind::PlainHinge: {
      const Margins mg = margins(theta, y);
      if (mg.y_star != static_cast<int>(y) || mg.m_star <= kappa_)
        return std::max(1.0 - mg.margin_true, 0.0);
      return 0.0;
    }
  }
  throw std::logic_error("unreachable");
}

Vector SurrogateLoss::subgradient(const Vector& theta, LabelHandle y) const {
  if (!theta.allFinite()) throw std::runtime_error("surrogate subgradient: non-finite scores");
  decomp_->check_label(y);
  const int k = static_cast<int>(theta.size());
  switch (kind_) {
    case Kind::SmoothHinge: {
      const Margins mg = margins(theta, y);
      Vector g = Vector::Zero(k);
      if (mg.y_star != static_cast<int>(y)) {
        g[mg.y_tilde] = 2.0;
        g[static_cast<int>(y)] -= 2.0;
      } else if (mg.m_star < 1.0) {
        const double f = 2.0 * (1.0 - mg.m_star);
        g[mg.y_tilde] = f;
        g[static_cast<int>(y)] -= f;
      }
      return g;
    }
    case Kind::Logistic: {
      Vector g = softmax(theta);
      g[static_cast<int>(y)] -= 1.0;
      return Vector(scale_ * g);
    }
    case Kind::SparseMap:
    case Kind::FenchelYoung:
      return reg_->conjugate(theta).argmax - decomp_->rho(y);
    case Kind::ConvFenchelYoung:
      return solver_->solve(theta).conj_grad - decomp_->rho(y);
    case Kind::PlainHinge: {
      const Margins mg = margins(theta, y);
      Vector g = Vector::Zero(k);
      if (mg.y_star != static_cast<int>(y) || mg.m_star <= kappa_) {
        g[mg.y_tilde] = 1.0;
        g[static_cast<int>(y)] -= 1.0;
      }
      return g;
    }
  }
  throw std::logic_error("unreachable");
}

Matrix SurrogateLoss::gradient_estimator(const Matrix& w, const Vector& x, LabelHandle y) const {
  return subgradient(w * x, y) * x.transpose();
}

double SurrogateLoss::self_bounding_constant() const {
  switch (kind_) {
    case Kind::SmoothHinge: return 4.0;
    case Kind::Logistic: return scale_;
    case Kind::SparseMap: return 1.0;
    case Kind::FenchelYoung:
    case Kind::ConvFenchelYoung: return 1.0 / reg_->lambda;
    case Kind::PlainHinge:
      if (kappa_ >= 1.0)
        throw std::domain_error("plain hinge with kappa = 1 is not self-bounding");
      return 1.0 / (1.0 - kappa_);
  }
  throw std::logic_error("unreachable");
}

}  // namespace ospred
