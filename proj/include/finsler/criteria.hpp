#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "finsler/report.hpp"

namespace finsler {

struct CriteriaOptions {
  std::uint64_t seed = 42;
};

// Runs the built-in verification corpus: ten numbered criterion groups
// (C1..C10) covering tensor-oracle equivalence, Riemannian reduction,
// curvature-route agreement, the Berwald and Douglas criteria with their
// group examples, conformal invariants, admissibility, and determinism of
// this very report. Record names are "C<k>/<check...>".
CheckReport run_criteria(const CriteriaOptions& opts);

struct CriterionSummary {
  std::string id;  // "C1".."C10"
  int checks = 0;
  int failed = 0;
  bool pass() const { return failed == 0; }
};

std::vector<CriterionSummary> summarize_criteria(const CheckReport& report);

}  // namespace finsler
