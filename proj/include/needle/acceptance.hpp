#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace needle {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // measured values against their pinned bounds
  double seconds = 0.0;
};

/// The end-to-end acceptance checks, numbered 1-9. `only` empty runs all.
/// Errors thrown inside a criterion turn into a failed result.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed, const std::vector<int>& only = {});

/// "PASS  3 monge-optimality (1.2 s): ..." per criterion.
std::string format_result(const CriterionResult& r);

}  // namespace needle
