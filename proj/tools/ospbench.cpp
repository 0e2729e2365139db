#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "ospred/checks.hpp"
#include "ospred/config.hpp"
#include "ospred/decode.hpp"
#include "ospred/envs.hpp"
#include "ospred/loss_decomp.hpp"
#include "ospred/runner.hpp"

namespace {

using namespace ospred;

struct CliArgs {
  std::string command;
  std::string config_path;
  std::string out;
  std::int64_t seed = -1;
  int trials = -1;
};

CliArgs parse_args(int argc, char** argv) {
  CliArgs args;
  if (argc < 2) throw std::runtime_error("usage: ospbench <run|verify-bounds|verify-lower|verify-identities> [--config F] [--seed N] [--out F] [--trials N]");
  args.command = argv[1];
  for (int i = 2; i < argc; ++i) {
    const std::string flag = argv[i];
    auto need_value = [&]() -> std::string {
      if (i + 1 >= argc) throw std::runtime_error("missing value for " + flag);
      return argv[++i];
    };
    if (flag == "--config") args.config_path = need_value();
    else if (flag == "--seed") args.seed = std::stoll(need_value());
    else if (flag == "--out") args.out = need_value();
    else if (flag == "--trials") args.trials = std::stoi(need_value());
    else throw std::runtime_error("unknown flag " + flag);
  }
  return args;
}

struct Problem {
  std::shared_ptr<const Environment> env;
  LossDecomposition decomp;
  std::function<SurrogateLoss()> make_loss;
  std::function<Decoder(SurrogateLoss&)> make_decoder;
  double lambda = 0.0;  // set for conjugate-based surrogates
  std::string surrogate_name;
};

Problem build_problem(const Config& cfg, std::uint64_t seed) {
  Problem pb;
  const std::string env_kind = cfg.get_str("env", "flip-binary");
  const std::int64_t horizon = cfg.get_int("T", 10000);
  if (env_kind == "flip-binary") {
    pb.env = std::make_shared<FlipBinaryEnv>(horizon, static_cast<int>(cfg.get_int("flips", 10)), seed);
  } else if (env_kind == "segmented-separable" || env_kind == "segmented") {
    pb.env = std::make_shared<FlipBinaryEnv>(horizon, static_cast<int>(cfg.get_int("flips", 10)),
                                             seed, cfg.get_double("margin", 0.1));
  } else if (env_kind == "lower-bound") {
    pb.env = std::make_shared<LowerBoundEnv>(horizon, seed);
  } else if (env_kind == "ranking") {
    pb.env = std::make_shared<RankingEnv>(horizon, static_cast<int>(cfg.get_int("docs", 3)),
                                          static_cast<int>(cfg.get_int("grades", 3)),
                                          cfg.get_double("drift", 1.0), seed);
  } else if (env_kind == "multiclass-drift") {
    pb.env = std::make_shared<MulticlassDriftEnv>(
        horizon, static_cast<int>(cfg.get_int("classes", 3)),
        static_cast<int>(cfg.get_int("input_dim", 3)),
        static_cast<int>(cfg.get_int("segments", 4)), seed);
  } else {
    throw std::runtime_error("unknown env kind: " + env_kind);
  }

  if (env_kind == "ranking") {
    const int d = static_cast<int>(cfg.get_int("docs", 3));
    const int k = static_cast<int>(cfg.get_int("grades", 3));
    Vector w(d);
    const auto wlist = cfg.get_list("weights", "");
    if (!wlist.empty()) {
      if (static_cast<int>(wlist.size()) != d) throw std::runtime_error("weights length != docs");
      for (int i = 0; i < d; ++i) w[i] = std::stod(wlist[i]);
    } else {
      for (int i = 0; i < d; ++i) w[i] = 1.0 / (1.0 + i);
    }
    pb.decomp = make_ndcg(d, w, k);
  } else if (env_kind == "multiclass-drift") {
    pb.decomp = make_multiclass(static_cast<int>(cfg.get_int("classes", 3)));
  } else {
    pb.decomp = make_multiclass(2);
  }

  const std::string surrogate = cfg.get_str("surrogate", "smooth-hinge");
  const std::string reg_kind = cfg.get_str("regularizer", "quadratic");
  const double lambda = cfg.get_double("lambda", 1.0);
  pb.surrogate_name = surrogate;
  const LossDecomposition decomp = pb.decomp;
  if (surrogate == "smooth-hinge") {
    pb.make_loss = [decomp] { return SurrogateLoss::smooth_hinge(decomp); };
  } else if (surrogate == "logistic") {
    pb.make_loss = [decomp] { return SurrogateLoss::logistic(decomp); };
  } else if (surrogate == "logistic-base2") {
    pb.make_loss = [decomp] { return SurrogateLoss::logistic(decomp, 2.0); };
  } else if (surrogate == "sparsemap") {
    pb.make_loss = [decomp] { return SurrogateLoss::sparsemap(decomp); };
  } else if (surrogate == "conv-fy") {
    pb.lambda = lambda;
    const bool entropic = reg_kind == "entropy";
    pb.make_loss = [decomp, lambda, entropic] {
      Regularizer reg = entropic ? entropy_regularizer(decomp.dim)
                                 : quadratic_regularizer(decomp.label_hull, lambda);
      return SurrogateLoss::conv_fenchel_young(decomp, reg);
    };
  } else {
    throw std::runtime_error("unknown surrogate: " + surrogate);
  }

  const std::string decoder = cfg.get_str("decoder", surrogate == "conv-fy" ? "conv-fy" : "clip");
  if (decoder == "clip") {
    pb.make_decoder = [](SurrogateLoss&) {
      return Decoder([](const Vector& t) { return binary_clip_decoder(t); });
    };
  } else if (decoder == "argmax") {
    pb.make_decoder = [](SurrogateLoss&) {
      return Decoder([](const Vector& t) { return argmax_decoder(t); });
    };
  } else if (decoder == "conv-fy") {
    pb.make_decoder = [](SurrogateLoss& loss) {
      ConvFySolver* solver = loss.solver();
      if (solver == nullptr) throw std::runtime_error("conv-fy decoder needs the conv-fy surrogate");
      return Decoder([solver](const Vector& t) { return convfy_decoder(*solver, t); });
    };
  } else {
    throw std::runtime_error("unknown decoder: " + decoder);
  }
  return pb;
}

LrSpec build_lr(const Config& cfg, const std::string& name, const Problem& pb) {
  LrSpec lr;
  lr.alpha = cfg.get_double("alpha", 0.5);
  if (cfg.get_str("M", "auto") == "auto") {
    SurrogateLoss probe = pb.make_loss();
    lr.m = probe.self_bounding_constant();
  } else {
    lr.m = cfg.get_double("M", 4.0);
  }
  lr.explicit_eta = cfg.get_double("eta", 0.0);
  if (name == "constant") lr.kind = LrKind::Constant;
  else if (name == "adagrad") lr.kind = LrKind::AdaGrad;
  else if (name == "polyak") lr.kind = LrKind::Polyak;
  else if (name == "polyak-strict") {
    lr.kind = LrKind::Polyak;
    lr.bound_strict = true;
    if (pb.lambda > 0.0) lr.floor_override = pb.lambda;
  } else {
    throw std::runtime_error("unknown lr policy: " + name);
  }
  return lr;
}

int cmd_run(const CliArgs& args) {
  Config cfg = args.config_path.empty() ? Config{} : Config::parse_file(args.config_path);
  const std::uint64_t seed = args.seed >= 0 ? static_cast<std::uint64_t>(args.seed)
                                            : static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const int trials = args.trials > 0 ? args.trials : static_cast<int>(cfg.get_int("trials", 10));
  const std::string out = !args.out.empty() ? args.out : cfg.get_str("out", "run");

  Problem pb = build_problem(cfg, seed);
  std::vector<SummaryRow> summary;
  for (const std::string& lr_name : cfg.get_list("lr", "polyak")) {
    TrialSetup setup;
    setup.env = pb.env;
    setup.make_loss = pb.make_loss;
    setup.make_decoder = pb.make_decoder;
    setup.lr = build_lr(cfg, lr_name, pb);
    setup.diameter = cfg.get_double("D", 20.0);
    setup.seed = seed;
    ExperimentResult res = run_experiment(setup, trials, /*keep_traces=*/true);
    for (int k = 0; k < trials; ++k) {
      write_trace_csv(out + "_" + lr_name + "_trial" + std::to_string(k) + ".csv",
                      res.trials[k].trace);
    }
    summary.push_back({lr_name, trials, res.mean_final_target, res.ci95_halfwidth});
    std::printf("%-14s trials=%d mean final mistakes = %.3f (ci95 +/- %.3f)\n", lr_name.c_str(),
                trials, res.mean_final_target, res.ci95_halfwidth);
  }
  write_summary_csv(out + "_summary.csv", summary);
  std::printf("summary written to %s_summary.csv\n", out.c_str());
  return 0;
}

int cmd_verify_bounds(const CliArgs& args) {
  Config cfg = args.config_path.empty() ? Config{} : Config::parse_file(args.config_path);
  const std::uint64_t seed = args.seed >= 0 ? static_cast<std::uint64_t>(args.seed)
                                            : static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  Problem pb = build_problem(cfg, seed);
  const double diameter = cfg.get_double("D", 20.0);
  const double alpha = cfg.get_double("alpha", 0.5);
  SurrogateLoss probe = pb.make_loss();
  const double m = cfg.get_str("M", "auto") == "auto" ? probe.self_bounding_constant()
                                                      : cfg.get_double("M", 4.0);

  // Comparators and the bound ratio.
  ComparatorReport comp;
  const std::string comparator = cfg.get_str("comparator", "tracking");
  if (comparator == "tracking") {
    const auto* flip = dynamic_cast<const FlipBinaryEnv*>(pb.env.get());
    if (flip == nullptr) throw std::runtime_error("tracking comparators need a flip environment");
    comp = comparators_tracking(*flip, cfg.get_double("scale", 5.0), probe, diameter);
  } else if (comparator == "multiclass-drift") {
    const auto* mc = dynamic_cast<const MulticlassDriftEnv*>(pb.env.get());
    if (mc == nullptr) throw std::runtime_error("multiclass comparators need the multiclass env");
    comp = comparators_multiclass_drift(*mc, cfg.get_double("scale", 2.0), probe, diameter);
  } else if (comparator == "ranking-segments") {
    const auto* re = dynamic_cast<const RankingEnv*>(pb.env.get());
    if (re == nullptr) throw std::runtime_error("ranking comparators need the ranking env");
    const int segments = static_cast<int>(cfg.get_int("comparator_segments", 4));
    const double scale = cfg.get_double("scale", 2.0);
    ComparatorSequence seq;
    seq.horizon = re->horizon();
    for (int s = 0; s < segments; ++s) {
      const std::int64_t start = s * re->horizon() / segments;
      const std::int64_t mid = start + re->horizon() / (2 * segments);
      Matrix u = scale * re->model_matrix(mid);
      if (u.norm() > diameter / 2.0) u *= (diameter / 2.0) / u.norm();
      seq.runs.emplace_back(start, std::move(u));
    }
    comp.p_t = seq.path_length();
    comp.f_t = cumulative_surrogate(seq, *pb.env, probe);
    comp.seq = std::move(seq);
  } else if (comparator == "best-fixed") {
    Matrix u = offline_best_fixed(*pb.env, probe, diameter,
                                  static_cast<int>(cfg.get_int("epochs", 2)));
    ComparatorSequence seq;
    seq.horizon = pb.env->horizon();
    seq.runs.emplace_back(0, std::move(u));
    comp.p_t = seq.path_length();
    comp.f_t = cumulative_surrogate(seq, *pb.env, probe);
    comp.seq = std::move(seq);
  } else {
    throw std::runtime_error("unknown comparator: " + comparator);
  }

  // One bound-strict trial; expected losses are deterministic.
  TrialSetup setup;
  setup.env = pb.env;
  setup.make_loss = pb.make_loss;
  setup.make_decoder = pb.make_decoder;
  setup.lr = build_lr(cfg, "polyak-strict", pb);
  setup.lr.alpha = alpha;
  setup.lr.m = m;
  setup.diameter = diameter;
  setup.seed = seed;
  const TrialResult trial = run_trial(setup, 0, /*keep_trace=*/false);

  const double ratio = pb.lambda > 0.0 ? 1.0 / pb.lambda : m / alpha;
  const double bound = theorem_bound(comp.f_t, comp.p_t, diameter, ratio);
  const double lhs = trial.final_cum_expected;
  const double slack = bound + 1e-6 - lhs;
  std::printf("cumulative expected target loss = %.6f\n", lhs);
  std::printf("F_T = %.6f  P_T = %.6f  ratio = %.6f  D = %.3f\n", comp.f_t, comp.p_t, ratio,
              diameter);
  std::printf("bound = %.6f  slack = %.6f -> %s\n", bound, slack, slack >= 0.0 ? "OK" : "VIOLATED");
  return slack >= 0.0 ? 0 : 1;
}

int cmd_verify_lower(const CliArgs& args) {
  Config cfg = args.config_path.empty() ? Config{} : Config::parse_file(args.config_path);
  const std::uint64_t seed = args.seed >= 0 ? static_cast<std::uint64_t>(args.seed)
                                            : static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const std::int64_t horizon = cfg.get_int("T", 10000);
  const int trials = args.trials > 0 ? args.trials : static_cast<int>(cfg.get_int("trials", 20));

  auto env = std::make_shared<LowerBoundEnv>(horizon, seed);
  const LossDecomposition decomp = make_multiclass(2);
  SurrogateLoss hinge = SurrogateLoss::smooth_hinge(decomp);
  bool ok = true;

  for (const char* lr_name : {"constant", "adagrad", "polyak"}) {
    TrialSetup setup;
    setup.env = env;
    setup.make_loss = [decomp] { return SurrogateLoss::smooth_hinge(decomp); };
    setup.make_decoder = [](SurrogateLoss&) {
      return Decoder([](const Vector& t) { return binary_clip_decoder(t); });
    };
    setup.lr.alpha = 0.5;
    setup.lr.m = 4.0;
    setup.lr.kind = std::string(lr_name) == "constant"
                        ? LrKind::Constant
                        : (std::string(lr_name) == "adagrad" ? LrKind::AdaGrad : LrKind::Polyak);
    setup.diameter = cfg.get_double("D", 20.0);
    setup.seed = seed;
    ExperimentResult res = run_experiment(setup, trials, /*keep_traces=*/false);
    const double frac = res.mean_final_target / static_cast<double>(horizon);
    std::printf("%-10s mean mistakes = %.1f (%.4f of T, ci95 +/- %.1f)\n", lr_name,
                res.mean_final_target, frac, res.ci95_halfwidth);
    if (frac < 0.45) ok = false;
  }

  const ComparatorReport c1 = comparators_lower_bound(*env, 1, hinge, cfg.get_double("D", 20.0));
  const ComparatorReport c2 = comparators_lower_bound(*env, 2, hinge, cfg.get_double("D", 20.0));
  const double sqrt2 = std::sqrt(2.0);
  std::printf("case 1: F_T = %.12g (expect 0), P_T = %.6f (cap %.6f)\n", c1.f_t, c1.p_t,
              sqrt2 * (horizon - 1));
  std::printf("case 2: P_T = %.12g (expect 0), F_T = %.6f (cap %.6f)\n", c2.p_t, c2.f_t,
              3.0 * horizon);
  if (c1.f_t != 0.0 || c1.p_t > sqrt2 * (horizon - 1) + 1e-9) ok = false;
  if (c2.p_t != 0.0 || c2.f_t > 3.0 * horizon + 1e-9) ok = false;
  std::printf("%s\n", ok ? "lower-bound instance checks OK" : "lower-bound instance checks FAILED");
  return ok ? 0 : 1;
}

int cmd_verify_identities(const CliArgs& args) {
  const std::uint64_t seed = args.seed >= 0 ? static_cast<std::uint64_t>(args.seed) : 1;
  const std::vector<CheckResult> results = all_identity_suites(seed);
  bool ok = true;
  for (const CheckResult& r : results) {
    std::printf("[%s] %-58s worst=%.3e %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.worst,
                r.detail.c_str());
    ok = ok && r.pass;
  }
  std::printf("%d checks, %s\n", static_cast<int>(results.size()), ok ? "all passed" : "FAILURES");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const CliArgs args = parse_args(argc, argv);
    if (args.command == "run") return cmd_run(args);
    if (args.command == "verify-bounds") return cmd_verify_bounds(args);
    if (args.command == "verify-lower") return cmd_verify_lower(args);
    if (args.command == "verify-identities") return cmd_verify_identities(args);
    std::fprintf(stderr, "unknown command: %s\n", args.command.c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
