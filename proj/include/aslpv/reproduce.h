#pragma once

// End-to-end runs of the three built-in examples with pass/fail checks.

#include <cstdint>
#include <string>
#include <vector>

#include "aslpv/io.h"
#include "aslpv/simulation.h"

namespace aslpv {

struct ReproduceOptions {
  int T = 100000;
  CompareSeeds seeds{42, 43};
  int burn_in = kDefaultBurnIn;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ReproduceReport {
  int example = 0;
  std::vector<CheckResult> checks;
  Json details;
  double seconds = 0.0;

  bool passed() const;
};

/// Output-comparison noise floor: relative mean-square gap of two
/// realizations of one output process driven by a shared path.
inline constexpr double kNoiseFloorRelativeMse = 1e-9;
/// Psi_y preservation tolerance for |w| <= 6 (relative to max(1, |Psi|)).
inline constexpr double kPsiPreservationTolerance = 1e-6;
inline constexpr int kPsiPreservationLength = 6;

/// Largest scaled gap of Psi_y over 1 <= |w| <= max_length.
double psi_gap(const AsLpvSsa& s1, const AsLpvSsa& s2,
               const SchedulingSpec& spec, int max_length);

ReproduceReport reproduce_example(int example, const ReproduceOptions& options);

Json comparison_to_json(const OutputComparison& c);

}  // namespace aslpv
