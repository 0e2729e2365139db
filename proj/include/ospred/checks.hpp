#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ospred/common.hpp"

namespace ospred {

struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // worst slack or error observed by the check
  std::string detail;
};

// Target-surrogate identity and the quadratic lower bound on the
// prediction-side losses, on small enumerable instances.
std::vector<CheckResult> identity_checks(std::uint64_t seed);

// Surrogate-gap certificates for the shipped decoders, including the
// counterexamples (argmax decoding, overstated gap parameter).
std::vector<CheckResult> certificate_checks(std::uint64_t seed);

// Sampled self-bounding inequalities per loss kind, plus the plain-hinge
// counterexamples (non-self-bounding at kappa = 1, discontinuity below 1).
std::vector<CheckResult> self_bounding_checks(std::uint64_t seed);

// Finite-difference subgradient agreement and midpoint-convexity probes.
std::vector<CheckResult> gradient_checks(std::uint64_t seed);

// Everything above, in order; the verify-identities command prints these.
std::vector<CheckResult> all_identity_suites(std::uint64_t seed);

}  // namespace ospred
