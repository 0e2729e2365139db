#include "ospred/runner.hpp"

#include <cmath>
#include <cstdio>
#include <future>

#include "ospred/loss_decomp.hpp"

namespace ospred {

double LrSpec::constant_rate() const {
  return explicit_eta > 0.0 ? explicit_eta : lr_constant(alpha, m);
}

double LrSpec::floor() const { return floor_override > 0.0 ? floor_override : alpha / m; }

std::string LrSpec::name() const {
  switch (kind) {
    case LrKind::Constant: return "constant";
    case LrKind::AdaGrad: return "adagrad";
    case LrKind::Polyak: return bound_strict ? "polyak-strict" : "polyak";
  }
  return "?";
}

TrialResult run_trial(const TrialSetup& setup, int trial_index, bool keep_trace) {
  SurrogateLoss loss = setup.make_loss();
  Decoder decode = setup.make_decoder(loss);
  const LossDecomposition& decomp = loss.decomposition();
  const Environment& env = *setup.env;

  LearnerState st = make_learner(decomp.dim, env.input_dim(), setup.diameter);
  std::mt19937_64 rng(mix_seed(setup.seed, 0x7d1a1ULL + static_cast<std::uint64_t>(trial_index)));

  TrialResult out;
  if (keep_trace) out.trace.reserve(static_cast<std::size_t>(env.horizon()));
  double cum_target = 0.0, cum_expected = 0.0, cum_surrogate = 0.0;

  for (std::int64_t t = 0; t < env.horizon(); ++t) {
    const EnvRound r = env.round(t);
    const Vector theta = st.w * r.x;
    const SparseDistribution dist = decode(theta);
    const PredHandle pred = sample(dist, rng);
    const double realized = target_loss(decomp, pred, r.y);
    const double expected = expected_target_loss(dist, decomp, r.y);
    const double surrogate = loss.value(theta, r.y);
    const Vector g = loss.subgradient(theta, r.y);
    const double grad_sq = g.squaredNorm() * r.x.squaredNorm();
    st.cum_grad_sq += grad_sq;

    EtaDecision ed;
    switch (setup.lr.kind) {
      case LrKind::Constant:
        ed = {true, setup.lr.constant_rate()};
        break;
      case LrKind::AdaGrad:
        ed = lr_adagrad(setup.diameter, st.cum_grad_sq);
        break;
      case LrKind::Polyak:
        ed = lr_polyak(surrogate, expected, grad_sq, st.eta_prev, setup.lr.floor(),
                       setup.lr.bound_strict);
        break;
    }

    cum_target += realized;
    cum_expected += expected;
    cum_surrogate += surrogate;
    if (keep_trace) {
      RoundRecord rec;
      rec.t = t + 1;
      rec.target = realized;
      rec.expected_target = expected;
      rec.surrogate = surrogate;
      rec.eta = ed.update ? ed.eta : st.eta_prev;
      rec.grad_sq = grad_sq;
      rec.cum_target = cum_target;
      rec.cum_expected = cum_expected;
      rec.cum_surrogate = cum_surrogate;
      rec.updated = ed.update;
      out.trace.push_back(rec);
    }

    if (ed.update) ogd_step(st, g * r.x.transpose(), ed);
    else ++st.t;
  }

  out.final_cum_target = cum_target;
  out.final_cum_expected = cum_expected;
  out.final_cum_surrogate = cum_surrogate;
  return out;
}

ExperimentResult run_experiment(const TrialSetup& setup, int trials, bool keep_traces) {
  if (trials < 1) throw std::domain_error("run_experiment: trials must be at least 1");
  ExperimentResult res;
  res.trials.resize(trials);

  std::vector<std::future<TrialResult>> futs;
  futs.reserve(trials);
  for (int k = 0; k < trials; ++k) {
    futs.push_back(std::async(std::launch::async,
                              [&setup, k, keep_traces] { return run_trial(setup, k, keep_traces); }));
  }
  for (int k = 0; k < trials; ++k) res.trials[k] = futs[k].get();

  double mean = 0.0;
  for (const auto& tr : res.trials) mean += tr.final_cum_target;
  mean /= trials;
  double var = 0.0;
  for (const auto& tr : res.trials) {
    const double d = tr.final_cum_target - mean;
    var += d * d;
  }
  var = trials > 1 ? var / (trials - 1) : 0.0;
  res.mean_final_target = mean;
  res.ci95_halfwidth = 1.96 * std::sqrt(var / trials);
  return res;
}

void write_trace_csv(const std::string& path, const std::vector<RoundRecord>& trace) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot open output file " + path);
  std::fprintf(f, "t,target,expected_target,surrogate,eta,grad_sq,cum_target,cum_expected,cum_surrogate\n");
  for (const RoundRecord& r : trace) {
    std::fprintf(f, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                 static_cast<long long>(r.t), r.target, r.expected_target, r.surrogate, r.eta,
                 r.grad_sq, r.cum_target, r.cum_expected, r.cum_surrogate);
  }
  std::fclose(f);
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot open output file " + path);
  std::fprintf(f, "lr,trials,mean_final_cum_target,ci95_halfwidth\n");
  for (const SummaryRow& r : rows) {
    std::fprintf(f, "%s,%d,%.17g,%.17g\n", r.label.c_str(), r.trials, r.mean_final_target,
                 r.ci95_halfwidth);
  }
  std::fclose(f);
}

}  // namespace ospred
