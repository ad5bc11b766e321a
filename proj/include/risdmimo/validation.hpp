// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace risdmimo {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick self-checks of the model and solver invariants on seeded random
/// instances. `drops` controls the size of the AO monotonicity check.
std::vector<CheckResult> run_invariant_suite(std::uint64_t seed = 1, std::size_t drops = 10);

}  // namespace risdmimo
