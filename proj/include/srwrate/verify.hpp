#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace srwrate {

enum class VerifySuite { Lemmas, Metric, Oracle, All };

/// "lemmas", "metric", "oracle" or "all".
VerifySuite parse_suite(const std::string& name);

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;  // worst observed value, or the exception message
};

/// Runs the invariant checks of a suite on small seeded random instances.
/// A check that throws is recorded as failed; nothing propagates.
std::vector<CheckResult> run_verify(VerifySuite suite, std::uint64_t seed = 1);

}  // namespace srwrate
