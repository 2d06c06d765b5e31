#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mcprod {

struct CheckResult {
  std::string suite;
  std::string name;
  double tolerance = 0.0;
  /// Worst observed discrepancy, in the same units as the tolerance.
  double observed = 0.0;
  bool passed = false;
};

struct VerifyOptions {
  std::uint64_t seed = 20240101;
  /// Mutation check: negate the recursive TCI decomposition before comparing.
  bool flip_tci_decomposition = false;
};

/// Suites: product, covariation, quadrature, conditional, bml, or all.
std::vector<std::string> verify_suites();
std::vector<CheckResult> run_verify(const std::string& suite, const VerifyOptions& options = {});
void print_checks(std::ostream& out, const std::vector<CheckResult>& checks);

}  // namespace mcprod
