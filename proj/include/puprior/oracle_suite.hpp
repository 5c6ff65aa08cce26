#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace puprior {

// Randomized self-checks of the discrete-measure algebra. Each trial draws
// measures on at most `atoms` atoms and exercises:
//   - amax by atom ratio vs. exhaustive subset enumeration,
//   - canonical round trip on mutually irreducible constructions,
//   - the inverse identities of the correction map,
//   - the feasibility boundary of decompose,
//   - existence of multiple feasible proportion pairs (unidentifiability).
struct OracleSuiteConfig {
  int atoms = 12;
  int trials = 1000;
  std::uint64_t seed = 1;
};

struct OracleSuiteResult {
  int trials_run = 0;
  int amax_mismatches = 0;
  int roundtrip_failures = 0;
  int correction_failures = 0;
  int boundary_mismatches = 0;
  int witness_failures = 0;
  std::vector<std::string> failure_notes;  // first few failures, for reports

  bool ok() const {
    return amax_mismatches == 0 && roundtrip_failures == 0 &&
           correction_failures == 0 && boundary_mismatches == 0 &&
           witness_failures == 0;
  }
};

OracleSuiteResult run_oracle_suite(const OracleSuiteConfig& config);

}  // namespace puprior
