#pragma once

// Greedy subset selection under a receding upper barrier.
//
// Starting from T_0 = 0, step j+1 adds one unused frame vector v so that
// T_{j+1} = T_j + v ⊗ v stays strictly below the barrier a_{j+1} and the
// upper potential Φ^a(T) = Tr((aI - T)^{-1}) does not increase. A vector
// qualifies when its feasibility value U(v) is at most one; the averaging
// argument guarantees Σ_{unused} U(v_i) <= (number unused), so one always
// exists for an exact equal-norm Parseval frame.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ksbalance/config.hpp"
#include "ksbalance/frames.hpp"
#include "ksbalance/hermitian.hpp"

namespace ksbalance {

/// Bounds a_j = 1/√N + (1 + 1/(√N - 1)) · j/m for j = 0..n.
struct BarrierSchedule {
  int N = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> values;

  double operator[](std::size_t j) const { return values.at(j); }
  double final_bound() const { return values.back(); }

  /// The closed-form value of a_j.
  static double formula(int N, std::size_t m, std::size_t j) {
    const double root = std::sqrt(static_cast<double>(N));
    return 1.0 / root + (1.0 + 1.0 / (root - 1.0)) * (static_cast<double>(j) / static_cast<double>(m));
  }

  /// a_{j+1} - a_j.
  static double step(int N, std::size_t m) {
    const double root = std::sqrt(static_cast<double>(N));
    return (1.0 + 1.0 / (root - 1.0)) / static_cast<double>(m);
  }

  friend bool operator==(const BarrierSchedule&, const BarrierSchedule&) = default;
};

inline BarrierSchedule barrier_schedule(int N, std::size_t m, std::size_t n) {
  if (N < 2) throw PreconditionError("barrier_schedule: N must be at least 2");
  if (n >= m) throw PreconditionError("barrier_schedule: n must be smaller than m");
  BarrierSchedule s{N, m, n, {}};
  s.values.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) s.values[j] = BarrierSchedule::formula(N, m, j);
  return s;
}

/// Φ^a(T) = Σ_d 1/(a - λ_d).
inline double upper_potential(const EigenSystem& eig, double a) {
  if (!(a > eig.max_eigenvalue())) throw PreconditionError("upper_potential: barrier violated (a <= lambda_max)");
  double s = 0.0;
  for (double lambda : eig.values) s += 1.0 / (a - lambda);
  return s;
}

inline double upper_potential(const HermitianOperator& t, double a, const Tolerances& tol = default_tolerances()) {
  return upper_potential(eigh(t, tol), a);
}

/// Everything needed to evaluate U(v) for many v against one (T, a, a_next):
/// the eigensystem of T and the potential gap Φ^a(T) - Φ^{a_next}(T).
class FeasibilityContext {
 public:
  FeasibilityContext(EigenSystem eig, double a, double a_next, const Tolerances& tol = default_tolerances())
      : eig_(std::move(eig)), a_(a), a_next_(a_next) {
    if (!(a > eig_.max_eigenvalue())) throw PreconditionError("feasibility: barrier violated (a <= lambda_max)");
    if (!(a_next > a)) throw PreconditionError("feasibility: a_next must exceed a");
    gap_ = upper_potential(eig_, a) - upper_potential(eig_, a_next);
    if (!(gap_ > tol.potential_gap))
      throw PreconditionError("feasibility: potential gap " + std::to_string(gap_) + " is not positive");
  }

  double value(std::span<const Complex> v) const {
    if (v.size() != eig_.dim()) throw PreconditionError("feasibility: dimension mismatch");
    const CVector w = eig_.coordinates(v);
    const double second = resolvent_form_from_coordinates(eig_.values, a_next_, w, 2);
    const double first = resolvent_form_from_coordinates(eig_.values, a_next_, w, 1);
    return second / gap_ + first;
  }

  const EigenSystem& eigen() const { return eig_; }
  double gap() const { return gap_; }
  double a() const { return a_; }
  double a_next() const { return a_next_; }

 private:
  EigenSystem eig_;
  double a_;
  double a_next_;
  double gap_ = 0.0;
};

/// U(v) = <(a'I - T)^{-2} v, v> / (Φ^a(T) - Φ^{a'}(T)) + <(a'I - T)^{-1} v, v>.
inline double feasibility_value(const HermitianOperator& t, std::span<const Complex> v, double a, double a_next,
                                const Tolerances& tol = default_tolerances()) {
  if (v.size() != t.dim()) throw PreconditionError("feasibility_value: dimension mismatch");
  return FeasibilityContext(eigh(t, tol), a, a_next, tol).value(v);
}

struct PushCheck {
  bool norm_ok = false;          // λ_max(T + v ⊗ v) < a_next
  bool potential_ok = false;     // Φ^{a_next}(T + v ⊗ v) <= Φ^a(T) + slack
  double potential_before = 0.0; // Φ^a(T)
  double potential_after = 0.0;  // Φ^{a_next}(T + v ⊗ v)
  double norm_margin = 0.0;      // a_next - λ_max(T + v ⊗ v)
};

/// Applies one rank-one push and confirms both conclusions that U(v) <= 1
/// guarantees. A breach means the tolerances were exceeded and is thrown as
/// NumericalError with the margins in the message.
inline PushCheck barrier_push_check(const HermitianOperator& t, std::span<const Complex> v, double a, double a_next,
                                    const Tolerances& tol = default_tolerances()) {
  const EigenSystem before = eigh(t, tol);
  const FeasibilityContext ctx(before, a, a_next, tol);
  const double u = ctx.value(v);
  if (u > 1.0 + tol.feasibility_slack)
    throw PreconditionError("barrier_push_check: U(v) = " + std::to_string(u) + " exceeds 1");

  const EigenSystem after = eigh(outer_product_accumulate(t, v), tol);
  PushCheck r;
  r.potential_before = upper_potential(before, a);
  r.norm_margin = a_next - after.max_eigenvalue();
  r.norm_ok = r.norm_margin > 0.0;
  if (r.norm_ok) {
    r.potential_after = upper_potential(after, a_next);
    r.potential_ok = r.potential_after <= r.potential_before + tol.potential_slack;
  }
  if (!r.norm_ok || !r.potential_ok) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "barrier_push_check: tolerance breach (U = " << u << ", norm margin = " << r.norm_margin
        << ", potential before = " << r.potential_before << ", after = " << r.potential_after << ")";
    throw NumericalError(msg.str());
  }
  return r;
}

/// One greedy step. Values describe the state after the step: phi is
/// Φ^{a_j}(T_j) and lambda_max is λ_max(T_j). U is the feasibility value of
/// the chosen vector when it was picked (against T_{j-1}, a_{j-1}, a_j).
struct StepRecord {
  std::size_t j = 0;
  std::size_t index = 0;  // 0-based
  double U = 0.0;
  double phi = 0.0;
  double lambda_max = 0.0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct SelectionCertificate {
  BarrierSchedule schedule;
  std::size_t k = 0;
  std::uint64_t frame_fingerprint = 0;
  double norm_deviation = 0.0;  // max_i |‖v_i‖² - 1/N| of the input frame
  double phi0 = 0.0;            // Φ^{a_0}(T_0) = k√N
  std::vector<StepRecord> steps;
  std::vector<std::size_t> indices;  // S, sorted, 0-based
  std::vector<double> eigenvalues;   // spectrum of T_n, ascending
  double bound = 0.0;                // a_n

  double lambda_max() const { return eigenvalues.empty() ? 0.0 : eigenvalues.back(); }
  double margin() const { return bound - lambda_max(); }

  friend bool operator==(const SelectionCertificate&, const SelectionCertificate&) = default;
};

/// Raised when no unused vector has U <= 1 + slack. Carries U for every
/// remaining candidate (0-based index, value).
class SelectionFailure : public NumericalError {
 public:
  SelectionFailure(const std::string& what, std::size_t step, std::vector<std::pair<std::size_t, double>> profile)
      : NumericalError(what), step_(step), profile_(std::move(profile)) {}

  std::size_t step() const { return step_; }
  const std::vector<std::pair<std::size_t, double>>& profile() const { return profile_; }

 private:
  std::size_t step_;
  std::vector<std::pair<std::size_t, double>> profile_;
};

struct SelectorOptions {
  Tolerances tol{};
  unsigned threads = 1;
};

/// Mid-run state: the chosen vectors in order, the unused index set S'
/// (ascending) and T_j with its eigensystem.
struct SelectionState {
  const FrameFamily* frame = nullptr;
  std::vector<std::size_t> chosen;
  std::vector<std::size_t> remaining;
  HermitianOperator T;
  EigenSystem eig;

  std::size_t step() const { return chosen.size(); }
};

/// U(v_i) for every i in state.remaining, in that order. Candidates are
/// split into contiguous blocks across threads; each value depends only on
/// its own vector, so the result does not depend on the thread count.
inline std::vector<double> candidate_values(const SelectionState& state, const BarrierSchedule& schedule,
                                            unsigned threads = 1, const Tolerances& tol = default_tolerances()) {
  const std::size_t j = state.step();
  if (j >= schedule.n) throw PreconditionError("candidate_values: selection already complete");
  const FeasibilityContext ctx(state.eig, schedule[j], schedule[j + 1], tol);
  const auto& rem = state.remaining;
  std::vector<double> u(rem.size());
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) u[t] = ctx.value((*state.frame)[rem[t]]);
  };
  const std::size_t nthreads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, rem.size()));
  if (nthreads == 1) {
    work(0, rem.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (rem.size() + nthreads - 1) / nthreads;
    for (std::size_t lo = 0; lo < rem.size(); lo += chunk) pool.emplace_back(work, lo, std::min(rem.size(), lo + chunk));
  }
  return u;
}

struct AveragingCheck {
  double sum_U = 0.0;            // Σ_{i in S'} U(v_i)
  std::size_t count = 0;         // |S'| = m - j
  double trace_identity = 0.0;   // N · Tr(I - T_j), equal to m - j for exact frames
};

inline AveragingCheck averaging_identity_check(const SelectionState& state, const BarrierSchedule& schedule,
                                               const Tolerances& tol = default_tolerances()) {
  AveragingCheck r;
  const std::vector<double> u = candidate_values(state, schedule, 1, tol);
  for (double x : u) r.sum_U += x;
  r.count = state.remaining.size();
  const double k = static_cast<double>(state.T.dim());
  r.trace_identity = static_cast<double>(schedule.N) * (k - state.T.trace());
  return r;
}

/// Step-by-step driver. select_subset runs it to completion; tests and
/// diagnostics can inspect the state between steps.
class BarrierSelector {
 public:
  BarrierSelector(const FrameFamily& frame, std::size_t n, SelectorOptions opts = {})
      : opts_(std::move(opts)) {
    const ValidationReport rep = validate_frame(frame, opts_.tol.rescale);
    if (!rep.passed()) {
      std::string why = "select: frame is not an equal-norm Parseval frame:";
      for (const auto& c : rep.failures()) why += " " + c.name + " (" + std::to_string(c.value) + ")";
      throw PreconditionError(why);
    }
    if (n < 1) throw PreconditionError("select: n must be at least 1");
    if (n >= frame.m()) throw PreconditionError("select: n must be smaller than m");
    schedule_ = barrier_schedule(frame.N(), frame.m(), n);

    state_.frame = &frame;
    state_.remaining.resize(frame.m());
    std::iota(state_.remaining.begin(), state_.remaining.end(), std::size_t{0});
    state_.T = HermitianOperator::zero(frame.k());
    state_.eig = eigh(state_.T, opts_.tol);

    cert_.schedule = schedule_;
    cert_.k = frame.k();
    cert_.frame_fingerprint = frame_fingerprint(frame);
    cert_.norm_deviation = max_norm_deviation(frame);
    cert_.phi0 = upper_potential(state_.eig, schedule_[0]);
  }

  const SelectionState& state() const { return state_; }
  const BarrierSchedule& schedule() const { return schedule_; }
  bool done() const { return state_.step() == schedule_.n; }

  /// Picks the unused vector with the smallest U (ties: smallest index),
  /// adds it and returns the step record.
  StepRecord step() {
    if (done()) throw PreconditionError("select: selection already complete");
    const std::size_t j = state_.step();
    const std::vector<double> u = candidate_values(state_, schedule_, opts_.threads, opts_.tol);

    std::size_t best = 0;
    for (std::size_t t = 1; t < u.size(); ++t)
      if (u[t] < u[best]) best = t;  // strict: earlier (smaller) index wins ties
    if (!(u[best] <= 1.0 + opts_.tol.feasibility_slack)) {
      std::vector<std::pair<std::size_t, double>> profile;
      for (std::size_t t = 0; t < u.size(); ++t) profile.emplace_back(state_.remaining[t], u[t]);
      throw SelectionFailure("select: no unused vector satisfies U <= 1 at step " + std::to_string(j + 1) +
                                 " (smallest U = " + std::to_string(u[best]) + ")",
                             j + 1, std::move(profile));
    }

    const std::size_t index = state_.remaining[best];
    state_.remaining.erase(state_.remaining.begin() + static_cast<std::ptrdiff_t>(best));
    state_.chosen.push_back(index);
    state_.T = outer_product_accumulate(state_.T, (*state_.frame)[index]);
    state_.eig = eigh(state_.T, opts_.tol);

    const double bound = schedule_[j + 1];
    if (!(state_.eig.max_eigenvalue() < bound))
      throw NumericalError("select: lambda_max(T_" + std::to_string(j + 1) + ") reached the barrier");

    StepRecord rec{j + 1, index, u[best], upper_potential(state_.eig, bound), state_.eig.max_eigenvalue()};
    cert_.steps.push_back(rec);
    return rec;
  }

  SelectionCertificate certificate() const {
    if (!done()) throw PreconditionError("select: certificate requested before completion");
    SelectionCertificate c = cert_;
    c.indices = state_.chosen;
    std::sort(c.indices.begin(), c.indices.end());
    c.eigenvalues = state_.eig.values;
    c.bound = schedule_.final_bound();
    return c;
  }

 private:
  SelectorOptions opts_;
  BarrierSchedule schedule_;
  SelectionState state_;
  SelectionCertificate cert_;
};

/// Selects n of the m frame vectors with ‖Σ_{i in S} v_i ⊗ v_i‖ < a_n.
inline SelectionCertificate select_subset(const FrameFamily& frame, std::size_t n, const SelectorOptions& opts = {}) {
  BarrierSelector sel(frame, n, opts);
  while (!sel.done()) sel.step();
  return sel.certificate();
}

struct ComplementBound {
  double lambda_min = 0.0;  // λ_min(Σ_{i not in S} v_i ⊗ v_i)
  double bound = 0.0;       // 1 - a_n
  std::size_t count = 0;    // m - n
};

namespace detail {

inline bool certificate_matches(const FrameFamily& f, const SelectionCertificate& c) {
  return c.k == f.k() && c.schedule.N == f.N() && c.schedule.m == f.m() &&
         c.frame_fingerprint == frame_fingerprint(f);
}

}  // namespace detail

/// Lower bound carried over to the complement: I - T_n = Σ_{i not in S} v_i ⊗ v_i
/// is at least (1 - a_n) I.
inline ComplementBound complement_lower_bound(const FrameFamily& f, const SelectionCertificate& cert,
                                              const Tolerances& tol = default_tolerances()) {
  if (!detail::certificate_matches(f, cert)) throw PreconditionError("complement: frame/certificate mismatch");
  std::vector<bool> in_s(f.m(), false);
  for (std::size_t i : cert.indices) {
    if (i >= f.m()) throw PreconditionError("complement: index out of range");
    in_s[i] = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < f.m(); ++i)
    if (!in_s[i]) rest.push_back(i);
  ComplementBound r;
  r.count = rest.size();
  r.lambda_min = eigh(f.partial_sum(rest), tol).min_eigenvalue();
  r.bound = 1.0 - cert.bound;
  return r;
}

namespace detail {

inline bool close(double recorded, double recomputed, double rel) {
  return std::abs(recorded - recomputed) <= rel * std::max(1.0, std::abs(recomputed));
}

}  // namespace detail

/// Recomputes every claim in a certificate from the frame alone: T_j from
/// scratch at each step, the barrier, U of each choice, Φ monotonicity, and
/// the final spectrum and bound.
inline ValidationReport verify_certificate(const FrameFamily& f, const SelectionCertificate& cert,
                                           const Tolerances& tol = default_tolerances()) {
  ValidationReport rep;
  if (!detail::certificate_matches(f, cert)) {
    rep.add("frame/certificate mismatch", 0, 0, false, "k, N, m or frame fingerprint differ");
    return rep;
  }
  const auto& sch = cert.schedule;
  const std::size_t n = sch.n;
  rep.add("n < m", static_cast<double>(n), static_cast<double>(f.m()), n >= 1 && n < f.m());
  if (!(n >= 1 && n < f.m())) return rep;

  bool schedule_ok = sch.values.size() == n + 1;
  for (std::size_t j = 0; schedule_ok && j <= n; ++j)
    schedule_ok = detail::close(sch.values[j], BarrierSchedule::formula(sch.N, sch.m, j), 1e-12);
  rep.add("schedule", 0, 0, schedule_ok, "a_j matches the closed form");

  const bool count_ok = cert.steps.size() == n && cert.indices.size() == n;
  rep.add("|S| = n", static_cast<double>(cert.indices.size()), static_cast<double>(n), count_ok);
  if (!count_ok || !schedule_ok) return rep;

  std::vector<std::size_t> chosen;
  bool index_ok = true;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& s = cert.steps[j];
    index_ok = index_ok && s.j == j + 1 && s.index < f.m();
    chosen.push_back(s.index);
  }
  std::vector<std::size_t> sorted = chosen;
  std::sort(sorted.begin(), sorted.end());
  index_ok = index_ok && std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end() && sorted == cert.indices;
  rep.add("indices", 0, 0, index_ok, "steps numbered 1..n, distinct in-range indices, final S matches steps");
  if (!index_ok) return rep;

  const double phi0 = static_cast<double>(f.k()) * std::sqrt(static_cast<double>(f.N()));
  rep.add("phi_0 = k sqrt(N)", cert.phi0, phi0, detail::close(cert.phi0, phi0, tol.certificate_relative));

  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_u = 0.0;
  double worst_rise = -std::numeric_limits<double>::infinity();
  bool barrier_ok = true, u_ok = true, phi_ok = true, records_ok = true;
  double phi_prev = phi0;
  EigenSystem prev = eigh(HermitianOperator::zero(f.k()), tol);
  for (std::size_t j = 1; j <= n; ++j) {
    const auto& s = cert.steps[j - 1];
    const double u = FeasibilityContext(prev, sch[j - 1], sch[j], tol).value(f[s.index]);
    worst_u = std::max(worst_u, u);
    u_ok = u_ok && u <= 1.0 + tol.feasibility_slack;
    records_ok = records_ok && detail::close(s.U, u, tol.certificate_relative);

    const std::vector<std::size_t> prefix(chosen.begin(), chosen.begin() + static_cast<std::ptrdiff_t>(j));
    const EigenSystem eig = eigh(f.partial_sum(prefix), tol);
    const double margin = sch[j] - eig.max_eigenvalue();
    worst_margin = std::min(worst_margin, margin);
    if (!(margin > 0.0)) {
      barrier_ok = false;
      break;
    }
    const double phi = upper_potential(eig, sch[j]);
    worst_rise = std::max(worst_rise, phi - phi_prev);
    phi_ok = phi_ok && phi <= phi_prev + tol.monotonic_slack;
    records_ok = records_ok && detail::close(s.phi, phi, tol.certificate_relative) &&
                 detail::close(s.lambda_max, eig.max_eigenvalue(), tol.certificate_relative);
    phi_prev = phi;
    prev = eig;
  }
  rep.add("lambda_max(T_j) < a_j", worst_margin, 0.0, barrier_ok, "smallest a_j - lambda_max(T_j)");
  rep.add("U <= 1", worst_u, 1.0 + tol.feasibility_slack, u_ok, "largest U of a recorded choice");
  rep.add("phi nonincreasing", worst_rise, tol.monotonic_slack, phi_ok, "largest Φ^{a_j}(T_j) - Φ^{a_{j-1}}(T_{j-1})");
  rep.add("recorded step values", 0, tol.certificate_relative, records_ok, "U, phi, lambda_max match recomputation");
  if (!barrier_ok) return rep;

  bool final_ok = cert.eigenvalues.size() == prev.dim() &&
                  detail::close(cert.bound, sch.final_bound(), 1e-12);
  for (std::size_t d = 0; final_ok && d < prev.dim(); ++d)
    final_ok = detail::close(cert.eigenvalues[d], prev.values[d], tol.certificate_relative);
  rep.add("final spectrum and bound", prev.max_eigenvalue(), sch.final_bound(),
          final_ok && prev.max_eigenvalue() < sch.final_bound());
  return rep;
}

/// Counts of values per equal-width bin over [lo, hi]; values outside the
/// range go to the first or last bin.
inline std::vector<std::size_t> eigenvalue_histogram(std::span<const double> values, std::size_t bins, double lo,
                                                     double hi) {
  if (bins == 0 || !(hi > lo)) throw PreconditionError("eigenvalue_histogram: empty range");
  std::vector<std::size_t> h(bins, 0);
  for (double x : values) {
    const double t = (x - lo) / (hi - lo) * static_cast<double>(bins);
    const auto b = static_cast<std::ptrdiff_t>(std::floor(t));
    h[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1))]++;
  }
  return h;
}

}  // namespace ksbalance
