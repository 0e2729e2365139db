#include "ospred/envs.hpp"

#include <cmath>

#include "ospred/polytopes.hpp"

namespace ospred {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Scales a vector so its Euclidean norm is <= 1 in floating point.
void force_unit_ball(Vector& x) {
  double n = x.norm();
  if (n <= 0.0) {
    x.setZero();
    x[0] = 1.0;
    return;
  }
  x /= n;
  while (x.norm() > 1.0) x *= (1.0 - 1e-16);
}

Vector unit_sphere(CounterRng& rng, int dim) {
  Vector x(dim);
  for (int i = 0; i < dim; ++i) x[i] = rng.normal();
  force_unit_ball(x);
  return x;
}

}  // namespace

FlipBinaryEnv::FlipBinaryEnv(std::int64_t horizon, int flips, std::uint64_t seed, double margin)
    : flips_(flips), margin_(margin), seed_(seed) {
  if (horizon <= 0) throw std::domain_error("flip env: horizon must be positive");
  if (flips < 0) throw std::domain_error("flip env: flips must be nonnegative");
  if (flips >= horizon) throw std::domain_error("flip env: flips must be below the horizon");
  if (margin < 0.0 || margin >= 1.0) throw std::domain_error("flip env: margin must be in [0, 1)");
  horizon_ = horizon;
  input_dim_ = 2;
  kind_ = margin > 0.0 ? "segmented-separable" : "flip-binary";
  u_ = Vector(2);
  u_ << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
}

int FlipBinaryEnv::segment(std::int64_t t) const {
  return static_cast<int>((t * (flips_ + 1)) / horizon_);
}

int FlipBinaryEnv::segment_sign(std::int64_t t) const { return segment(t) % 2 == 0 ? +1 : -1; }

EnvRound FlipBinaryEnv::round(std::int64_t t) const {
  CounterRng rng(mix_seed(seed_, static_cast<std::uint64_t>(t)));
  Vector x(2);
  for (;;) {
    const double angle = kTwoPi * rng.next_double();
    x << std::cos(angle), std::sin(angle);
    force_unit_ball(x);
    if (margin_ <= 0.0 || std::abs(u_.dot(x)) >= margin_) break;
  }
  const int base = u_.dot(x) >= 0.0 ? +1 : -1;  // ties resolve to +1
  return {x, binary_label(segment_sign(t) * base)};
}

LowerBoundEnv::LowerBoundEnv(std::int64_t horizon, std::uint64_t seed) : seed_(seed) {
  if (horizon <= 0 || horizon % 2 != 0)
    throw std::domain_error("lower-bound env: horizon must be positive and even");
  horizon_ = horizon;
  input_dim_ = 2;
  kind_ = "lower-bound";
}

int LowerBoundEnv::label_sign(std::int64_t t) const {
  CounterRng rng(mix_seed(seed_, static_cast<std::uint64_t>(t)));
  return rng.next_double() < 0.5 ? +1 : -1;
}

EnvRound LowerBoundEnv::round(std::int64_t t) const {
  Vector x(2);
  x << 1.0, 0.0;
  return {x, binary_label(label_sign(t))};
}

RankingEnv::RankingEnv(std::int64_t horizon, int d, int k, double drift, std::uint64_t seed)
    : d_(d), k_(k), drift_(drift), seed_(seed) {
  if (horizon <= 0) throw std::domain_error("ranking env: horizon must be positive");
  if (d < 1 || d > 6) throw std::domain_error("ranking env: d must be in [1, 6]");
  if (k < 1) throw std::domain_error("ranking env: k must be positive");
  horizon_ = horizon;
  input_dim_ = d;
  kind_ = "ranking-synthetic";
  base_a_ = Matrix(d, d);
  base_b_ = Matrix(d, d);
  for (int i = 0; i < d; ++i) {
    CounterRng ra(mix_seed(seed, 0x0a00 + i));
    CounterRng rb(mix_seed(seed, 0x0b00 + i));
    Vector rowa = unit_sphere(ra, d), rowb = unit_sphere(rb, d);
    base_a_.row(i) = rowa.transpose();
    base_b_.row(i) = rowb.transpose();
  }
}

Matrix RankingEnv::model_matrix(std::int64_t t) const {
  const double phi = drift_ * kTwoPi * static_cast<double>(t) / static_cast<double>(horizon_);
  return std::cos(phi) * base_a_ + std::sin(phi) * base_b_;
}

EnvRound RankingEnv::round(std::int64_t t) const {
  CounterRng rng(mix_seed(seed_, static_cast<std::uint64_t>(t)));
  const Vector x = unit_sphere(rng, d_);
  const Vector raw = model_matrix(t) * x;
  std::vector<int> grades(d_);
  for (int i = 0; i < d_; ++i) {
    const double s = 1.0 / (1.0 + std::exp(-3.0 * raw[i]));
    grades[i] = 1 + std::min(k_ - 1, static_cast<int>(std::floor(s * k_)));
  }
  return {x, ndcg_label_handle(grades, k_)};
}

MulticlassDriftEnv::MulticlassDriftEnv(std::int64_t horizon, int classes, int input_dim,
                                       int segments, std::uint64_t seed)
    : k_(classes), segments_(segments), seed_(seed) {
  if (horizon <= 0) throw std::domain_error("multiclass env: horizon must be positive");
  if (classes < 2) throw std::domain_error("multiclass env: needs at least two classes");
  if (input_dim < 2) throw std::domain_error("multiclass env: input dim must be at least 2");
  if (segments < 1 || segments > horizon)
    throw std::domain_error("multiclass env: bad segment count");
  horizon_ = horizon;
  input_dim_ = input_dim;
  kind_ = "multiclass-drift";
  prototypes_ = Matrix(classes, input_dim);
  for (int j = 0; j < classes; ++j) {
    CounterRng r(mix_seed(seed, 0xc1a5 + j));
    prototypes_.row(j) = unit_sphere(r, input_dim).transpose();
  }
}

int MulticlassDriftEnv::segment(std::int64_t t) const {
  return static_cast<int>((t * segments_) / horizon_);
}

Matrix MulticlassDriftEnv::segment_model(int segment) const {
  Matrix m(k_, prototypes_.cols());
  for (int j = 0; j < k_; ++j) m.row(j) = prototypes_.row((j + segment) % k_);
  return m;
}

EnvRound MulticlassDriftEnv::round(std::int64_t t) const {
  CounterRng rng(mix_seed(seed_, static_cast<std::uint64_t>(t)));
  const Vector x = unit_sphere(rng, input_dim_);
  const Vector scores = segment_model(segment(t)) * x;
  int best = 0;
  for (int j = 1; j < k_; ++j)
    if (scores[j] > scores[best]) best = j;
  return {x, best};
}

Matrix ComparatorSequence::at(std::int64_t t) const {
  if (per_round) return per_round(t);
  const Matrix* cur = nullptr;
  for (const auto& [start, u] : runs) {
    if (start <= t) cur = &u;
    else break;
  }
  if (cur == nullptr) throw std::domain_error("comparator sequence: round before first run");
  return *cur;
}

double ComparatorSequence::path_length() const {
  if (per_round) {
    double p = 0.0;
    Matrix prev = per_round(0);
    for (std::int64_t t = 1; t < horizon; ++t) {
      Matrix cur = per_round(t);
      p += (cur - prev).norm();
      prev = std::move(cur);
    }
    return p;
  }
  double p = 0.0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].first <= runs[i - 1].first || runs[i].first >= horizon) continue;
    p += (runs[i].second - runs[i - 1].second).norm();
  }
  return p;
}

double cumulative_surrogate(const ComparatorSequence& seq, const Environment& env,
                            const SurrogateLoss& loss) {
  double f = 0.0;
  for (std::int64_t t = 0; t < env.horizon(); ++t) {
    const EnvRound r = env.round(t);
    f += loss.value(seq.at(t) * r.x, r.y);
  }
  return f;
}

ComparatorReport comparators_tracking(const FlipBinaryEnv& env, double scale,
                                      const SurrogateLoss& loss, double diameter) {
  if (scale > diameter / 2.0) throw std::domain_error("comparators_tracking: scale exceeds D/2");
  Matrix base(2, 2);
  base.row(0) = env.reference().transpose();
  base.row(1) = -env.reference().transpose();
  if (scale * base.norm() > diameter / 2.0 + 1e-12)
    throw std::domain_error("comparators_tracking: comparator leaves the domain ball");

  ComparatorSequence seq;
  seq.horizon = env.horizon();
  int prev_sign = 0;
  for (std::int64_t t = 0; t < env.horizon(); ++t) {
    const int s = env.segment_sign(t);
    if (s != prev_sign) {
      seq.runs.emplace_back(t, Matrix(s * scale * base));
      prev_sign = s;
    }
  }
  ComparatorReport rep;
  rep.p_t = seq.path_length();
  rep.f_t = cumulative_surrogate(seq, env, loss);
  rep.seq = std::move(seq);
  return rep;
}

ComparatorReport comparators_lower_bound(const LowerBoundEnv& env, int which_case,
                                         const SurrogateLoss& loss, double diameter) {
  if (which_case != 1 && which_case != 2)
    throw std::domain_error("comparators_lower_bound: case must be 1 or 2");
  if (diameter < 2.0) throw std::domain_error("comparators_lower_bound: needs D >= 2");
  ComparatorSequence seq;
  seq.horizon = env.horizon();
  if (which_case == 1) {
    seq.per_round = [&env](std::int64_t t) {
      const double y = env.label_sign(t);
      Matrix u(2, 2);
      u << 0.5 * y, 0.5, -0.5 * y, 0.5;
      return u;
    };
  } else {
    Matrix u(2, 2);
    u << 0.5, 0.5, -0.5, 0.5;
    seq.runs.emplace_back(0, u);
  }
  ComparatorReport rep;
  rep.p_t = seq.path_length();
  rep.f_t = cumulative_surrogate(seq, env, loss);
  rep.seq = std::move(seq);
  return rep;
}

ComparatorReport comparators_multiclass_drift(const MulticlassDriftEnv& env, double scale,
                                              const SurrogateLoss& loss, double diameter) {
  ComparatorSequence seq;
  seq.horizon = env.horizon();
  int prev = -1;
  for (std::int64_t t = 0; t < env.horizon(); ++t) {
    const int s = env.segment(t);
    if (s != prev) {
      Matrix u = scale * env.segment_model(s);
      if (u.norm() > diameter / 2.0 + 1e-12)
        throw std::domain_error("comparators_multiclass_drift: comparator leaves the domain ball");
      seq.runs.emplace_back(t, std::move(u));
      prev = s;
    }
  }
  ComparatorReport rep;
  rep.p_t = seq.path_length();
  rep.f_t = cumulative_surrogate(seq, env, loss);
  rep.seq = std::move(seq);
  return rep;
}

Matrix offline_best_fixed(const Environment& env, const SurrogateLoss& loss, double diameter,
                          int epochs) {
  const int d = loss.decomposition().dim;
  Matrix w = Matrix::Zero(d, env.input_dim());
  Matrix avg = Matrix::Zero(d, env.input_dim());
  long steps = 0;
  for (int e = 0; e < epochs; ++e) {
    for (std::int64_t t = 0; t < env.horizon(); ++t) {
      const EnvRound r = env.round(t);
      const Matrix g = loss.gradient_estimator(w, r.x, r.y);
      ++steps;
      const double eta = (diameter / 2.0) / std::sqrt(static_cast<double>(steps));
      w = project_ball(w - eta * g, diameter / 2.0);
      avg += (w - avg) / static_cast<double>(steps);
    }
  }
  return project_ball(avg, diameter / 2.0);
}

}  // namespace ospred
