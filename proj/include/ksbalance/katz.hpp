#pragma once

// The set system X of all N-element subsets of a 2N-element ground set,
// with indicator weights f_i(A) = 1/N if i ∈ A and 0 otherwise. Every
// partial sum Σ_{i∈S} f_i(A) is an integer number of 1/N units, so all
// checks here are exact.
//
// Ground elements are 0-based bit positions 0..2N-1 in the C++ API; the
// CLI and JSON report use 1-based element labels.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "ksbalance/config.hpp"

namespace ksbalance {

using SubsetMask = std::uint32_t;

/// units / N, kept as an integer count of 1/N units.
struct NthFraction {
  std::int64_t units = 0;
  int N = 1;

  double value() const { return static_cast<double>(units) / N; }
  std::string str() const { return std::to_string(units) + "/" + std::to_string(N); }
  friend bool operator==(const NthFraction& a, const NthFraction& b) { return a.units * b.N == b.units * a.N; }
};

inline std::uint64_t binomial(unsigned n, unsigned r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t c = 1;
  for (unsigned i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

struct KatzLimits {
  std::uint64_t max_family = 200000;  // |X| = C(2N, N) cap, N <= 10
  int max_exhaustive_N = 6;           // 2^{2N} subsets S
  std::uint64_t default_trials = 100000;
};

class KatzSystem {
 public:
  int N() const { return N_; }
  unsigned ground_size() const { return 2u * static_cast<unsigned>(N_); }
  const std::vector<SubsetMask>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }

  bool contains(SubsetMask a) const { return lookup_.contains(a); }

  /// f_i(A) in units of 1/N.
  static int f_units(unsigned i, SubsetMask a) { return (a >> i) & 1u; }

  /// Σ_{i∈S} f_i(A) = |S ∩ A| / N.
  NthFraction subset_sum(SubsetMask s, SubsetMask a) const {
    return {std::popcount(s & a), N_};
  }

  friend KatzSystem build_katz(int N, const KatzLimits& limits);

 private:
  int N_ = 0;
  std::vector<SubsetMask> members_;
  std::unordered_set<SubsetMask> lookup_;
};

/// Enumerates X in lexicographic order of the sorted element lists.
inline KatzSystem build_katz(int N, const KatzLimits& limits = {}) {
  if (N < 1) throw PreconditionError("katz: N must be positive");
  if (N > 15 || binomial(2u * static_cast<unsigned>(N), static_cast<unsigned>(N)) > limits.max_family)
    throw PreconditionError("katz: C(2N, N) exceeds the configured cap of " + std::to_string(limits.max_family));
  KatzSystem sys;
  sys.N_ = N;
  const unsigned n = 2u * static_cast<unsigned>(N);
  const unsigned r = static_cast<unsigned>(N);
  std::vector<unsigned> idx(r);
  for (unsigned i = 0; i < r; ++i) idx[i] = i;
  sys.members_.reserve(binomial(n, r));
  for (;;) {
    SubsetMask m = 0;
    for (unsigned e : idx) m |= SubsetMask{1} << e;
    sys.members_.push_back(m);
    int p = static_cast<int>(r) - 1;
    while (p >= 0 && idx[static_cast<unsigned>(p)] == n - r + static_cast<unsigned>(p)) --p;
    if (p < 0) break;
    ++idx[static_cast<unsigned>(p)];
    for (unsigned q = static_cast<unsigned>(p) + 1; q < r; ++q) idx[q] = idx[q - 1] + 1;
  }
  sys.lookup_.insert(sys.members_.begin(), sys.members_.end());
  return sys;
}

struct SumRange {
  NthFraction min;
  NthFraction max;
};

inline SubsetMask mask_from_indices(const KatzSystem& sys, const std::vector<std::size_t>& indices) {
  SubsetMask s = 0;
  for (std::size_t i : indices) {
    if (i >= sys.ground_size()) throw PreconditionError("katz: element out of range");
    s |= SubsetMask{1} << i;
  }
  return s;
}

/// min and max over A ∈ X of Σ_{i∈S} f_i(A), by enumeration of X.
inline SumRange subset_sum_range(const KatzSystem& sys, SubsetMask s) {
  if (sys.ground_size() < 32 && (s >> sys.ground_size()) != 0) throw PreconditionError("katz: element out of range");
  int lo = sys.N(), hi = 0;
  for (SubsetMask a : sys.members()) {
    const int c = std::popcount(s & a);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return {{lo, sys.N()}, {hi, sys.N()}};
}

inline SumRange subset_sum_range(const KatzSystem& sys, const std::vector<std::size_t>& indices) {
  return subset_sum_range(sys, mask_from_indices(sys, indices));
}

/// (max(0, |S| - N)/N, min(|S|, N)/N).
inline SumRange closed_form_range(int N, int subset_size) {
  return {{std::max(0, subset_size - N), N}, {std::min(subset_size, N), N}};
}

namespace detail {

// Range of |S ∩ A| from the intersection-size distribution
// #{A : |S ∩ A| = t} = C(s, t) C(2N - s, N - t). Returns false if the
// distribution does not account for all of X.
inline bool counted_range(const KatzSystem& sys, int s, SumRange& out) {
  const unsigned n = sys.ground_size();
  const unsigned r = static_cast<unsigned>(sys.N());
  std::uint64_t total = 0;
  int lo = -1, hi = -1;
  for (unsigned t = 0; t <= r; ++t) {
    const std::uint64_t c = binomial(static_cast<unsigned>(s), t) * binomial(n - static_cast<unsigned>(s), r - t);
    total += c;
    if (c > 0) {
      if (lo < 0) lo = static_cast<int>(t);
      hi = static_cast<int>(t);
    }
  }
  out = {{lo, sys.N()}, {hi, sys.N()}};
  return total == sys.size();
}

// The lowest `count` elements of `from`.
inline SubsetMask lowest_elements(SubsetMask from, int count) {
  SubsetMask out = 0;
  for (int c = 0; c < count && from != 0; ++c) {
    const SubsetMask bit = from & (~from + 1);
    out |= bit;
    from ^= bit;
  }
  return out;
}

}  // namespace detail

struct DichotomyViolation {
  SubsetMask subset = 0;
  int size = 0;
  NthFraction min;
  NthFraction max;
  std::string reason;
};

struct DichotomyReport {
  int N = 0;
  bool sampled = false;
  std::uint64_t seed = 0;
  std::size_t family_size = 0;
  std::uint64_t subsets_checked = 0;
  std::uint64_t below_half = 0;  // |S| < N
  std::uint64_t at_half = 0;     // |S| = N
  std::uint64_t above_half = 0;  // |S| > N
  std::vector<DichotomyViolation> violations;

  bool passed() const { return violations.empty(); }
};

struct DichotomyOptions {
  bool sampled = false;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  KatzLimits limits{};
};

/// For every S (exhaustive) or for seeded uniform random S (sampled):
/// |S| <= N forces a zero sum somewhere on X, |S| >= N forces a sum of 1.
///
/// Exhaustive mode visits S in increasing order of its bitmask and takes
/// min/max by enumerating X; it must agree with the closed form. Sampled
/// mode draws S = engine() & (2^{2N} - 1) from std::mt19937_64(seed), takes
/// min/max from the intersection-size distribution, and confirms the
/// dichotomy with explicit members of X (the lowest N elements outside S,
/// or the lowest N elements of S).
inline DichotomyReport dichotomy_check(const KatzSystem& sys, const DichotomyOptions& opts = {}) {
  DichotomyReport rep;
  rep.N = sys.N();
  rep.sampled = opts.sampled;
  rep.seed = opts.sampled ? opts.seed : 0;
  rep.family_size = sys.size();
  const int N = sys.N();
  const unsigned n = sys.ground_size();
  const SubsetMask full = n >= 32 ? ~SubsetMask{0} : ((SubsetMask{1} << n) - 1);

  auto record = [&](SubsetMask s, const SumRange& range, std::string reason) {
    rep.violations.push_back({s, std::popcount(s), range.min, range.max, std::move(reason)});
  };

  auto check = [&](SubsetMask s, const SumRange& range) {
    const int size = std::popcount(s);
    ++rep.subsets_checked;
    (size < N ? rep.below_half : size == N ? rep.at_half : rep.above_half)++;
    const SumRange closed = closed_form_range(N, size);
    if (!(range.min == closed.min) || !(range.max == closed.max)) record(s, range, "range differs from closed form");
    if (size <= N && range.min.units != 0) record(s, range, "|S| <= N but no zero sum");
    if (size >= N && range.max.units != N) record(s, range, "|S| >= N but no sum equal to 1");
  };

  if (!opts.sampled) {
    if (N > opts.limits.max_exhaustive_N)
      throw PreconditionError("katz: exhaustive check limited to N <= " + std::to_string(opts.limits.max_exhaustive_N) +
                              "; use sampled mode");
    for (std::uint64_t s = 0; s <= full; ++s) check(static_cast<SubsetMask>(s), subset_sum_range(sys, static_cast<SubsetMask>(s)));
    return rep;
  }

  std::mt19937_64 engine(opts.seed);
  for (std::uint64_t t = 0; t < opts.trials; ++t) {
    const SubsetMask s = static_cast<SubsetMask>(engine()) & full;
    const int size = std::popcount(s);
    SumRange range;
    if (!detail::counted_range(sys, size, range)) record(s, range, "intersection counts do not sum to |X|");
    check(s, range);
    if (size <= N) {
      const SubsetMask a = detail::lowest_elements(full & ~s, N);
      if (!sys.contains(a) || (a & s) != 0) record(s, range, "no disjoint member of X found");
    }
    if (size >= N) {
      const SubsetMask a = detail::lowest_elements(s, N);
      if (!sys.contains(a) || (a & s) != a) record(s, range, "no member of X inside S found");
    }
  }
  return rep;
}

}  // namespace ksbalance
