#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cfurllc {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<SelftestCheck> checks;
  bool ok() const;
};

// Brute-force grid oracle on random two-variable GPs, finite-difference
// gradient checks on random expression DAGs, and the tangent-bound property
// suites. A sample normalized problem is written to `dump` when non-null.
SelftestReport run_gp_selftest(std::uint64_t seed, std::ostream* dump = nullptr);

}  // namespace cfurllc
