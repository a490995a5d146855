// Builds a harmonic frame, selects half of its vectors and checks the result.

#include <cstdio>

#include "ksbalance/ksbalance.hpp"

int main() {
  using namespace ksbalance;
  const FrameFamily frame = harmonic_frame(4, 16);  // 64 vectors in C^4, each of norm 1/4
  const std::size_t n = frame.m() / 2;

  BarrierSelector sel(frame, n);
  while (!sel.done()) {
    const StepRecord s = sel.step();
    if (s.j % 8 == 0)
      std::printf("step %3zu: picked v_%zu  U=%.4f  lambda_max=%.4f  barrier=%.4f\n", s.j, s.index + 1, s.U,
                  s.lambda_max, sel.schedule()[s.j]);
  }
  const SelectionCertificate cert = sel.certificate();
  std::printf("|S| = %zu, lambda_max = %.6f < a_n = %.6f\n", cert.indices.size(), cert.lambda_max(), cert.bound);

  const ComplementBound comp = complement_lower_bound(frame, cert);
  std::printf("complement: lambda_min = %.6f >= 1 - a_n = %.6f\n", comp.lambda_min, comp.bound);

  const ValidationReport rep = verify_certificate(frame, cert);
  std::printf("certificate %s\n", rep.passed() ? "verified" : "rejected");

  const DichotomyReport katz = dichotomy_check(build_katz(4));
  std::printf("Katz N=4: %llu subsets, %zu violations\n", static_cast<unsigned long long>(katz.subsets_checked),
              katz.violations.size());
  return rep.passed() && katz.passed() ? 0 : 1;
}
