#pragma once

// End-to-end verification battery. Each criterion builds its own instance,
// computes an independent reference (closed form, brute-force linear algebra,
// or a finer discretization), and reports a measured value against a pinned
// bound. Criteria are deterministic given the seed.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sdwave {

struct CriterionResult {
  std::string name;
  bool pass = false;
  double measured = 0;  // worst observed value, count, or fitted quantity
  double bound = 0;     // the pinned acceptance threshold it is held against
  std::string detail;   // instance sizes and the numbers behind the verdict
  double seconds = 0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20260815;
  // Desk scale shrinks sample counts for quick runs; every inequality and
  // tolerance stays identical to the full-scale battery.
  bool full_scale = true;
  // "" or "none" runs clean; "perturb_lyapunov" injects a deliberate defect
  // into the Lyapunov construction so the residual criterion must fail.
  std::string fault;
};

// Runs all criteria in order; on_result (if set) is invoked after each one so
// callers can stream progress. Returns the full table.
std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& opt,
    const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace sdwave
