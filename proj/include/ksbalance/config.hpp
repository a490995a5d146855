#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ksbalance {

/// Central numerical tolerances. Every threshold used by the library lives
/// here so callers (and the CLI's --tol) can override them in one place.
struct Tolerances {
  double hermitian = 1e-12;          // |A(i,j) - conj(A(j,i))|
  double psd = 1e-9;                 // smallest eigenvalue must be >= -psd
  double jacobi_relative = 1e-13;    // off-diagonal Frobenius / total Frobenius
  int jacobi_max_sweeps = 100;
  double sherman_morrison_denominator = 1e-14;
  double potential_gap = 1e-14;      // Phi^a(T) - Phi^{a'}(T) must exceed this
  double frame = 1e-9;               // frame validation (norms, Parseval)
  double rescale = 1e-6;             // max norm deviation that may be rescaled away
  double projection = 1e-9;          // P^2 = P, diagonal = 1/N
  double feasibility_slack = 1e-9;   // accept U <= 1 + slack
  double potential_slack = 1e-10;    // Phi^{a'}(T + vv) <= Phi^a(T) + slack
  double monotonic_slack = 1e-9;     // Phi nonincreasing along a run
  double certificate_relative = 1e-9;  // recorded vs recomputed certificate values
  std::size_t max_vectors = 100000;  // cap on m = kN for generated frames
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

/// Thrown when an operation's precondition does not hold (bad dimensions,
/// out-of-range parameters, barrier violated).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine fails (non-convergence, singular update,
/// a proven inequality breached beyond tolerance).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One named check inside a ValidationReport.
struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool ok = true;
  std::string detail;
};

/// Result of a validator. Validators never throw on bad input; they list
/// what failed.
struct ValidationReport {
  std::vector<Check> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.ok) return false;
    return true;
  }

  void add(std::string name, double value, double limit, bool ok, std::string detail = {}) {
    checks.push_back(Check{std::move(name), value, limit, ok, std::move(detail)});
  }

  std::vector<Check> failures() const {
    std::vector<Check> out;
    for (const auto& c : checks)
      if (!c.ok) out.push_back(c);
    return out;
  }
};

}  // namespace ksbalance
