#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ospred/common.hpp"
#include "ospred/decode.hpp"
#include "ospred/envs.hpp"
#include "ospred/ogd.hpp"
#include "ospred/surrogate.hpp"

namespace ospred {

struct RoundRecord {
  std::int64_t t = 0;            // 1-based round index
  double target = 0.0;           // realized loss of the sampled prediction
  double expected_target = 0.0;  // exact expectation over the decoding support
  double surrogate = 0.0;
  double eta = 0.0;              // learning-rate state after the round
  double grad_sq = 0.0;
  double cum_target = 0.0;
  double cum_expected = 0.0;
  double cum_surrogate = 0.0;
  bool updated = true;  // false on no-update rounds (not serialized)
};

enum class LrKind { Constant, AdaGrad, Polyak };

struct LrSpec {
  LrKind kind = LrKind::Polyak;
  double alpha = 0.5;
  double m = 4.0;
  double explicit_eta = 0.0;   // > 0 overrides alpha/m for the constant policy
  bool bound_strict = false;
  double floor_override = 0.0; // > 0 overrides alpha/m as the strict floor

  double constant_rate() const;
  double floor() const;
  std::string name() const;
};

struct TrialSetup {
  std::shared_ptr<const Environment> env;
  std::function<SurrogateLoss()> make_loss;               // fresh per trial (owns caches)
  std::function<Decoder(SurrogateLoss&)> make_decoder;
  LrSpec lr;
  double diameter = 20.0;
  std::uint64_t seed = 1;
};

struct TrialResult {
  std::vector<RoundRecord> trace;  // empty unless traces were requested
  double final_cum_target = 0.0;
  double final_cum_expected = 0.0;
  double final_cum_surrogate = 0.0;
};

TrialResult run_trial(const TrialSetup& setup, int trial_index, bool keep_trace = true);

struct ExperimentResult {
  std::vector<TrialResult> trials;
  double mean_final_target = 0.0;
  double ci95_halfwidth = 0.0;
};

// Runs `trials` independent trials concurrently (each owns its learner state,
// RNG, and record buffer) and aggregates final cumulative target losses.
ExperimentResult run_experiment(const TrialSetup& setup, int trials, bool keep_traces);

void write_trace_csv(const std::string& path, const std::vector<RoundRecord>& trace);

struct SummaryRow {
  std::string label;
  int trials = 0;
  double mean_final_target = 0.0;
  double ci95_halfwidth = 0.0;
};

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

}  // namespace ospred
