#pragma once
// Built-in invariant checks runnable from the CLI: propagator unitarity,
// conserved components in each two-level subspace, gamma independence of
// powdered transfer schedules, nominal composite efficiency, the pulse
// phase-advance identity, quadrature moments and rf-node normalization.

#include <string>
#include <vector>

namespace combsim {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;  // worst-case defect observed
  double bound = 0.0;     // tolerance the defect is held against
  std::string detail;
};

std::vector<CheckResult> run_selftest();
bool all_pass(const std::vector<CheckResult>& results);

}  // namespace combsim
