#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lyapvec::harness {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // worst observed value
  double threshold = 0.0;  // pass bound
};

/// Short-run invariant checks: BLV orthonormality, QR reconstruction, exact triangularity of the
/// backward coefficients, principal-angle basis invariance, Jacobian vs central differences and
/// byte-exact determinism.
std::vector<CheckResult> run_invariant_suite(std::uint64_t seed);

}  // namespace lyapvec::harness
