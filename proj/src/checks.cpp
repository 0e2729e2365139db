#include "ospred/checks.hpp"

#include <cmath>
#include <sstream>

#include "ospred/decode.hpp"
#include "ospred/loss_decomp.hpp"
#include "ospred/polytopes.hpp"
#include "ospred/surrogate.hpp"

namespace ospred {

namespace {

Vector random_vector(CounterRng& rng, int d, double scale) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * rng.normal();
  return v;
}

Vector random_unit_ball(CounterRng& rng, int d) {
  Vector v = random_vector(rng, d, 1.0);
  const double n = v.norm();
  if (n > 0.0) v *= rng.next_double() / n;
  return v;
}

Matrix random_ball_matrix(CounterRng& rng, int rows, int cols, double radius) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  const double n = m.norm();
  if (n > 0.0) m *= radius * rng.next_double() / n;
  return m;
}

double direct_loss_multiclass(PredHandle p, LabelHandle y) { return p == y ? 0.0 : 1.0; }

double direct_loss_ndcg(PredHandle p, LabelHandle y, int d, int k, const Vector& w) {
  const std::vector<int> grades = ndcg_grades(y, d, k);
  const std::vector<int> perm = index_to_perm(p, d);
  double gain = 0.0;
  for (int i = 0; i < d; ++i) gain += grades[i] * w[perm[i]];
  return 1.0 - gain / ndcg_normalizer(grades, w);
}

struct ConvFyInstance {
  std::string label;
  LossDecomposition decomp;
  SurrogateLoss conv;
  SurrogateLoss plain_fy;
  double lambda;
  std::function<double(PredHandle, LabelHandle)> direct;
};

std::vector<ConvFyInstance> convfy_instances(double fw_tol) {
  FwOptions opts;
  opts.tol = fw_tol;
  std::vector<ConvFyInstance> out;
  for (int k : {2, 3, 5}) {
    LossDecomposition d = make_multiclass(k);
    Regularizer reg = quadratic_regularizer(d.label_hull, 1.0);
    ConvFyInstance inst{"multiclass-K" + std::to_string(k),
                        d,
                        SurrogateLoss::conv_fenchel_young(d, reg, opts),
                        SurrogateLoss::fenchel_young(d, reg),
                        1.0,
                        direct_loss_multiclass};
    out.push_back(std::move(inst));
  }
  struct NdcgSpec { int d; int k; };
  for (const NdcgSpec spec : {NdcgSpec{2, 3}, NdcgSpec{3, 3}, NdcgSpec{4, 2}}) {
    Vector w(spec.d);
    for (int i = 0; i < spec.d; ++i) w[i] = 1.0 / (1.0 + i);
    LossDecomposition d = make_ndcg(spec.d, w, spec.k);
    Regularizer reg = quadratic_regularizer(d.label_hull, 1.0);
    const int dd = spec.d, kk = spec.k;
    ConvFyInstance inst{"ndcg-d" + std::to_string(spec.d),
                        d,
                        SurrogateLoss::conv_fenchel_young(d, reg, opts),
                        SurrogateLoss::fenchel_young(d, reg),
                        1.0,
                        [dd, kk, w](PredHandle p, LabelHandle y) {
                          return direct_loss_ndcg(p, y, dd, kk, w);
                        }};
    out.push_back(std::move(inst));
  }
  return out;
}

// Brute-force inner conjugate value over the prediction hull for K <= 3
// multiclass instances: grid over the vertex-weight simplex with local
// refinement around the best point.
double grid_conj_min(const LossDecomposition& decomp, const Regularizer& reg,
                     const Vector& theta) {
  const int k = static_cast<int>(decomp.prediction_count);
  std::vector<Vector> verts;
  for (PredHandle p = 0; p < k; ++p) verts.push_back(decomp.ell_rho(p));
  auto eval = [&](const std::vector<double>& wts) {
    Vector nu = Vector::Zero(decomp.dim);
    for (int i = 0; i < k; ++i) nu += wts[i] * verts[i];
    return reg.conjugate(theta + nu).value;
  };
  if (k == 2) {
    double best = kInf;
    double lo = 0.0, hi = 1.0;
    for (int level = 0; level < 4; ++level) {
      const int n = 400;
      double best_a = lo;
      for (int i = 0; i <= n; ++i) {
        const double a = lo + (hi - lo) * i / n;
        const double v = eval({a, 1.0 - a});
        if (v < best) {
          best = v;
          best_a = a;
        }
      }
      const double span = (hi - lo) / n * 4.0;
      lo = std::max(0.0, best_a - span);
      hi = std::min(1.0, best_a + span);
    }
    return best;
  }
  // k == 3: grid over two free weights, refined.
  double best = kInf;
  double alo = 0.0, ahi = 1.0, blo = 0.0, bhi = 1.0;
  double best_a = 0.0, best_b = 0.0;
  for (int level = 0; level < 5; ++level) {
    const int n = 60;
    for (int i = 0; i <= n; ++i) {
      const double a = alo + (ahi - alo) * i / n;
      for (int j = 0; j <= n; ++j) {
        const double b = blo + (bhi - blo) * j / n;
        if (a + b > 1.0) continue;
        const double v = eval({a, b, 1.0 - a - b});
        if (v < best) {
          best = v;
          best_a = a;
          best_b = b;
        }
      }
    }
    const double spana = (ahi - alo) / n * 4.0;
    const double spanb = (bhi - blo) / n * 4.0;
    alo = std::max(0.0, best_a - spana);
    ahi = std::min(1.0, best_a + spana);
    blo = std::max(0.0, best_b - spanb);
    bhi = std::min(1.0, best_b + spanb);
  }
  return best;
}

CheckResult summarize(const std::string& name, bool pass, double worst,
                      const std::string& detail = "") {
  return {name, pass, worst, detail};
}

}  // namespace

std::vector<CheckResult> identity_checks(std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto instances = convfy_instances(1e-9);

  for (auto& inst : instances) {
    CounterRng rng(mix_seed(seed, std::hash<std::string>{}(inst.label)));
    double worst_l1 = 0.0, worst_l2 = -kInf, worst_feas = -kInf;
    for (int rep = 0; rep < 100; ++rep) {
      const Vector theta = random_vector(rng, inst.decomp.dim, 2.0);
      const LabelHandle y =
          static_cast<LabelHandle>(rng.next_below(static_cast<std::uint64_t>(inst.decomp.label_count)));
      ConvFySolver& solver = *inst.conv.solver();
      const ConvFySolver::Solution& sol = solver.solve(theta);

      double expected = 0.0;
      for (const auto& item : sol.active.items)
        expected += item.weight * inst.direct(item.handle, y);
      const double conv_value = inst.conv.value(theta, y);
      const double fy_at_xi = inst.plain_fy.value(sol.xi, y);
      worst_l1 = std::max(worst_l1, std::abs(expected - (conv_value - fy_at_xi)));

      const double grad_sq = inst.conv.subgradient(theta, y).squaredNorm();
      worst_l2 = std::max(worst_l2, 0.5 * inst.lambda * grad_sq - fy_at_xi);
      worst_feas = std::max(worst_feas, 0.5 * inst.lambda * grad_sq - (conv_value - expected));
    }
    out.push_back(summarize("target-surrogate identity [" + inst.label + "]", worst_l1 <= 1e-5,
                            worst_l1, "max |lhs - rhs|"));
    out.push_back(summarize("quadratic lower bound [" + inst.label + "]", worst_l2 <= 1e-7,
                            worst_l2, "max (lambda/2)|grad|^2 - fy(xi)"));
    out.push_back(summarize("rate-range feasibility [" + inst.label + "]", worst_feas <= 1e-7,
                            worst_feas, "max (lambda/2)|grad|^2 - (L - E)"));
  }

  // Worked two-class example: theta = 0 gives the uniform decoding, loss 3/4,
  // gradient (-1/2, 1/2), and both sides of the lower bound equal to 1/4.
  {
    LossDecomposition d2 = make_multiclass(2);
    Regularizer reg = quadratic_regularizer(d2.label_hull, 1.0);
    FwOptions opts;
    opts.tol = 1e-12;
    SurrogateLoss conv = SurrogateLoss::conv_fenchel_young(d2, reg, opts);
    SurrogateLoss fy = SurrogateLoss::fenchel_young(d2, reg);
    const Vector theta = Vector::Zero(2);
    const ConvFySolver::Solution& sol = conv.solver()->solve(theta);
    const double value = conv.value(theta, 0);
    const Vector grad = conv.subgradient(theta, 0);
    const double lhs = fy.value(sol.xi, 0);
    const double rhs = 0.5 * grad.squaredNorm();
    const double err = std::max({std::abs(value - 0.75), std::abs(lhs - 0.25),
                                 std::abs(rhs - 0.25), std::abs(grad[0] + 0.5),
                                 std::abs(grad[1] - 0.5)});
    out.push_back(summarize("worked two-class example (value 3/4, both bounds 1/4)", err <= 1e-8,
                            err, "max deviation from the closed form"));
  }

  // Inner-minimization value against a refined grid oracle (K = 2, 3).
  for (int k : {2, 3}) {
    LossDecomposition d = make_multiclass(k);
    Regularizer reg = quadratic_regularizer(d.label_hull, 1.0);
    FwOptions opts;
    opts.tol = 1e-12;
    SurrogateLoss conv = SurrogateLoss::conv_fenchel_young(d, reg, opts);
    CounterRng rng(mix_seed(seed, 0xabc0 + k));
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const Vector theta = random_vector(rng, k, 2.0);
      const ConvFySolver::Solution& sol = conv.solver()->solve(theta);
      const double grid = grid_conj_min(d, reg, theta);
      worst = std::max(worst, std::abs(sol.conj_value - grid));
    }
    out.push_back(summarize("inner conjugate vs grid oracle [K=" + std::to_string(k) + "]",
                            worst <= 1e-6, worst, "max |solver - grid|"));
  }
  return out;
}

std::vector<CheckResult> certificate_checks(std::uint64_t seed) {
  (void)seed;
  std::vector<CheckResult> out;
  LossDecomposition d2 = make_multiclass(2);
  SurrogateLoss hinge = SurrogateLoss::smooth_hinge(d2);
  const std::vector<Vector> grid = margin_grid(-2.0, 2.0, 0.1);
  const Decoder clip = [](const Vector& t) { return binary_clip_decoder(t); };
  const Decoder argmax = [](const Vector& t) { return argmax_decoder(t); };

  const GapReport pass_half = gap_certificate(clip, hinge, d2, 0.5, grid);
  out.push_back(summarize("clip decoder certificate at alpha=1/2", pass_half.ok(),
                          pass_half.worst_slack, "worst slack over the margin grid"));

  const GapReport fail_argmax = gap_certificate(argmax, hinge, d2, 0.5, grid);
  out.push_back(summarize("argmax decoder violates alpha=1/2 (counterexample)",
                          !fail_argmax.ok(), static_cast<double>(fail_argmax.violations.size()),
                          "violations found"));

  const GapReport fail_overclaim = gap_certificate(clip, hinge, d2, 0.9, grid);
  out.push_back(summarize("clip decoder rejects overstated alpha=0.9 (counterexample)",
                          !fail_overclaim.ok(),
                          static_cast<double>(fail_overclaim.violations.size()),
                          "violations found"));

  const GapReport pass_zero = gap_certificate(clip, hinge, d2, 0.0, grid);
  out.push_back(summarize("clip decoder certificate at alpha=0", pass_zero.ok(),
                          pass_zero.worst_slack, "worst slack over the margin grid"));
  return out;
}

std::vector<CheckResult> self_bounding_checks(std::uint64_t seed) {
  std::vector<CheckResult> out;
  struct Case {
    std::string label;
    SurrogateLoss loss;
    int samples;
  };
  std::vector<Case> cases;
  {
    LossDecomposition d3 = make_multiclass(3);
    cases.push_back({"smooth-hinge", SurrogateLoss::smooth_hinge(d3), 1000});
    cases.push_back({"logistic", SurrogateLoss::logistic(d3), 1000});
    cases.push_back({"logistic-base2", SurrogateLoss::logistic(d3, 2.0), 1000});
    cases.push_back({"sparsemap", SurrogateLoss::sparsemap(d3), 1000});
  }
  {
    LossDecomposition ml = make_multilabel(4);
    cases.push_back({"sparsemap-multilabel", SurrogateLoss::sparsemap(ml), 1000});
  }
  {
    LossDecomposition d2 = make_multiclass(2);
    Regularizer reg = quadratic_regularizer(d2.label_hull, 1.0);
    cases.push_back({"conv-fy", SurrogateLoss::conv_fenchel_young(d2, reg), 1000});
  }

  for (auto& c : cases) {
    CounterRng rng(mix_seed(seed, std::hash<std::string>{}(c.label)));
    const LossDecomposition& decomp = c.loss.decomposition();
    const double m = c.loss.self_bounding_constant();
    double worst = -kInf;
    for (int rep = 0; rep < c.samples; ++rep) {
      const int p = 3;
      const Matrix w = random_ball_matrix(rng, decomp.dim, p, 10.0);
      const Vector x = random_unit_ball(rng, p);
      const LabelHandle y =
          static_cast<LabelHandle>(rng.next_below(static_cast<std::uint64_t>(decomp.label_count)));
      const Vector theta = w * x;
      const double value = c.loss.value(theta, y);
      const double grad_sq = c.loss.subgradient(theta, y).squaredNorm() * x.squaredNorm();
      worst = std::max(worst, grad_sq - 2.0 * m * value);
    }
    out.push_back(summarize("self-bounding [" + c.label + "] (M=" + std::to_string(m) + ")",
                            worst <= 1e-9, worst, "max |G|^2 - 2 M L"));
  }

  // Plain hinge at kappa = 1: a witness with vanishing loss but unit-order
  // gradient, so no moderate M can satisfy the inequality.
  {
    LossDecomposition d2 = make_multiclass(2);
    SurrogateLoss ph = SurrogateLoss::plain_hinge(d2, 1.0);
    Vector theta(2);
    theta << 0.995, 0.0;
    Vector x(2);
    x << 1.0, 0.0;
    const double value = ph.value(theta, 0);
    const double grad_sq = ph.subgradient(theta, 0).squaredNorm() * x.squaredNorm();
    const bool witness = value < 0.01 && std::abs(grad_sq - 2.0) < 1e-12;
    bool throws = false;
    try {
      (void)ph.self_bounding_constant();
    } catch (const std::domain_error&) {
      throws = true;
    }
    out.push_back(summarize("plain hinge kappa=1 not self-bounding (witness found)",
                            witness && throws, grad_sq / std::max(2.0 * value, 1e-300),
                            "|G|^2 / (2L) at the witness"));
  }

  // Plain hinge below kappa = 1: jump of at least 1 - kappa across the gate.
  {
    LossDecomposition d2 = make_multiclass(2);
    SurrogateLoss ph = SurrogateLoss::plain_hinge(d2, 0.5);
    Vector lo(2), hi(2);
    lo << 0.5, 0.0;
    hi << 0.5 + 1e-9, 0.0;
    const double jump = ph.value(lo, 0) - ph.value(hi, 0);
    out.push_back(summarize("plain hinge kappa=0.5 discontinuity (jump >= 1-kappa)",
                            jump >= 0.5 - 1e-6, jump, "loss jump across the margin gate"));
  }
  return out;
}

std::vector<CheckResult> gradient_checks(std::uint64_t seed) {
  std::vector<CheckResult> out;
  const double h = 1e-5;

  struct Case {
    std::string label;
    SurrogateLoss loss;
    bool margin_kind;  // skip near argmax ties and piece boundaries
  };
  std::vector<Case> cases;
  {
    LossDecomposition d3 = make_multiclass(3);
    cases.push_back({"smooth-hinge", SurrogateLoss::smooth_hinge(d3), true});
    cases.push_back({"logistic", SurrogateLoss::logistic(d3), false});
    cases.push_back({"sparsemap", SurrogateLoss::sparsemap(d3), false});
    Regularizer reg = quadratic_regularizer(d3.label_hull, 1.0);
    FwOptions opts;
    opts.tol = 1e-12;
    cases.push_back({"conv-fy", SurrogateLoss::conv_fenchel_young(d3, reg, opts), false});
    cases.push_back({"plain-hinge", SurrogateLoss::plain_hinge(d3, 0.5), true});
  }

  for (auto& c : cases) {
    CounterRng rng(mix_seed(seed, std::hash<std::string>{}(c.label)));
    const LossDecomposition& decomp = c.loss.decomposition();
    double worst = 0.0;
    int accepted = 0;
    while (accepted < 100) {
      const Vector theta = random_vector(rng, decomp.dim, 1.5);
      const LabelHandle y =
          static_cast<LabelHandle>(rng.next_below(static_cast<std::uint64_t>(decomp.label_count)));
      if (c.margin_kind) {
        bool near_tie = false;
        for (int i = 0; i < theta.size() && !near_tie; ++i)
          for (int j = i + 1; j < theta.size(); ++j)
            if (std::abs(theta[i] - theta[j]) < 1e-3) {
              near_tie = true;
              break;
            }
        double top = -kInf, second = -kInf;
        for (int i = 0; i < theta.size(); ++i) {
          if (theta[i] > top) {
            second = top;
            top = theta[i];
          } else if (theta[i] > second) {
            second = theta[i];
          }
        }
        const double mstar = top - second;
        if (near_tie || std::abs(mstar - 1.0) < 1e-3 || std::abs(mstar - 0.5) < 1e-3) continue;
      }
      ++accepted;
      const Vector g = c.loss.subgradient(theta, y);
      for (int i = 0; i < theta.size(); ++i) {
        Vector tp = theta, tm = theta;
        tp[i] += h;
        tm[i] -= h;
        const double fd = (c.loss.value(tp, y) - c.loss.value(tm, y)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - g[i]));
      }
    }
    out.push_back(summarize("finite-difference gradient [" + c.label + "]", worst <= 1e-4, worst,
                            "max |fd - grad| over 100 smooth points"));
  }

  // Midpoint convexity per kind; the plain hinge below kappa = 1 must violate it.
  for (auto& c : cases) {
    if (c.label == "plain-hinge") continue;
    CounterRng rng(mix_seed(seed, 0xc0 + std::hash<std::string>{}(c.label)));
    const LossDecomposition& decomp = c.loss.decomposition();
    double worst = -kInf;
    for (int rep = 0; rep < 200; ++rep) {
      const Vector a = random_vector(rng, decomp.dim, 2.0);
      const Vector b = random_vector(rng, decomp.dim, 2.0);
      const LabelHandle y =
          static_cast<LabelHandle>(rng.next_below(static_cast<std::uint64_t>(decomp.label_count)));
      const double mid = c.loss.value(0.5 * (a + b), y);
      const double avg = 0.5 * (c.loss.value(a, y) + c.loss.value(b, y));
      worst = std::max(worst, mid - avg);
    }
    out.push_back(summarize("midpoint convexity [" + c.label + "]", worst <= 1e-9, worst,
                            "max L(mid) - avg"));
  }
  {
    LossDecomposition d2 = make_multiclass(2);
    SurrogateLoss ph = SurrogateLoss::plain_hinge(d2, 0.5);
    Vector a(2), b(2);
    a << 0.9, 0.0;
    b << 0.1, 0.0;
    const double mid = ph.value(Vector(0.5 * (a + b)), 0);
    const double avg = 0.5 * (ph.value(a, 0) + ph.value(b, 0));
    out.push_back(summarize("plain hinge kappa=0.5 violates convexity (counterexample)",
                            mid > avg + 1e-9, mid - avg, "L(mid) - avg at the frozen pair"));
  }

  // Nonnegativity and the zero-at-alignment property of the conjugate-based losses.
  {
    LossDecomposition d3 = make_multiclass(3);
    SurrogateLoss sm = SurrogateLoss::sparsemap(d3);
    CounterRng rng(mix_seed(seed, 0xfee1));
    double min_val = kInf;
    for (int rep = 0; rep < 300; ++rep) {
      const Vector theta = random_vector(rng, 3, 3.0);
      const LabelHandle y = static_cast<LabelHandle>(rng.next_below(3));
      min_val = std::min(min_val, sm.value(theta, y));
    }
    const double at_vertex = sm.value(Vector(Vector::Unit(3, 1)), 1);
    out.push_back(summarize("fenchel-young nonnegativity and zero at alignment",
                            min_val >= -1e-10 && at_vertex <= 1e-8,
                            std::min(min_val, 1e-8 - at_vertex), "min value / vertex value"));
  }
  {
    LossDecomposition d2 = make_multiclass(2);
    Regularizer reg = quadratic_regularizer(d2.label_hull, 1.0);
    SurrogateLoss conv = SurrogateLoss::conv_fenchel_young(d2, reg);
    Vector theta(2);
    theta << 5.0, -5.0;
    const double v = conv.value(theta, 0);
    out.push_back(summarize("conv-fy zero at strong alignment", v <= 1e-8 && v >= -1e-10, v,
                            "value at theta = (5, -5), label 0"));
  }
  return out;
}

std::vector<CheckResult> all_identity_suites(std::uint64_t seed) {
  std::vector<CheckResult> out;
  for (auto&& part : {identity_checks(seed), certificate_checks(seed),
                      self_bounding_checks(seed), gradient_checks(seed)})
    out.insert(out.end(), part.begin(), part.end());
  return out;
}

}  // namespace ospred
