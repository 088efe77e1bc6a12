#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rkhs {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest observed error
  double tolerance = 0.0;
};

// Fast self-checks: gradient finite differences, reproducing-property probes,
// quadrature exactness, endpoint/limit constraints, natural gradient identity.
std::vector<CheckResult> run_checks(std::uint64_t seed = 1);

}  // namespace rkhs
