#pragma once

// Equal-norm Parseval frames and their Gram projections.
//
// Indices are 0-based in the C++ API. File formats and the CLI use 1-based
// indices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ksbalance/config.hpp"
#include "ksbalance/hermitian.hpp"

namespace ksbalance {

/// m vectors in C^k, each expected to have squared norm 1/N and to sum
/// (as rank-one operators) to the identity. The constructor only checks
/// shape; use validate_frame for the Parseval and equal-norm conditions.
class FrameFamily {
 public:
  FrameFamily() = default;

  FrameFamily(std::size_t k, int N, std::vector<CVector> vectors) : k_(k), N_(N), vectors_(std::move(vectors)) {
    if (k_ == 0) throw PreconditionError("FrameFamily: dimension k must be positive");
    if (N_ < 2) throw PreconditionError("FrameFamily: N must be at least 2");
    for (const auto& v : vectors_) {
      if (v.size() != k_) throw PreconditionError("FrameFamily: vector length differs from k");
      if (!all_finite(v)) throw PreconditionError("FrameFamily: non-finite entry");
    }
  }

  std::size_t k() const { return k_; }
  int N() const { return N_; }
  std::size_t m() const { return vectors_.size(); }
  const std::vector<CVector>& vectors() const { return vectors_; }
  const CVector& operator[](std::size_t i) const { return vectors_[i]; }

  /// Σ_{i in indices} v_i ⊗ v_i.
  template <class Indices>
  HermitianOperator partial_sum(const Indices& indices) const {
    ComplexMatrix acc(k_, k_);
    for (std::size_t i : indices) {
      const CVector& v = vectors_.at(i);
      for (std::size_t r = 0; r < k_; ++r)
        for (std::size_t c = 0; c < k_; ++c) acc(r, c) += v[r] * std::conj(v[c]);
    }
    return HermitianOperator(std::move(acc));
  }

  HermitianOperator frame_operator() const {
    std::vector<std::size_t> all(m());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return partial_sum(all);
  }

  /// k x m matrix whose columns are the frame vectors.
  ComplexMatrix synthesis() const {
    ComplexMatrix s(k_, m());
    for (std::size_t i = 0; i < m(); ++i)
      for (std::size_t d = 0; d < k_; ++d) s(d, i) = vectors_[i][d];
    return s;
  }

  friend bool operator==(const FrameFamily&, const FrameFamily&) = default;

 private:
  std::size_t k_ = 0;
  int N_ = 0;
  std::vector<CVector> vectors_;
};

/// m x m Hermitian projection (P^2 = P).
class ProjectionMatrix {
 public:
  ProjectionMatrix() = default;

  explicit ProjectionMatrix(HermitianOperator p, const Tolerances& tol = default_tolerances()) : p_(std::move(p)) {
    const std::size_t m = p_.dim();
    for (std::size_t i = 0; i < m; ++i) {
      const double d = p_(i, i).real();
      if (d < -tol.projection || d > 1.0 + tol.projection)
        throw PreconditionError("ProjectionMatrix: diagonal entry outside [0,1]");
    }
    const ComplexMatrix sq = p_.matrix() * p_.matrix();
    const double defect = (sq - p_.matrix()).frobenius_norm();
    if (defect > tol.projection)
      throw PreconditionError("ProjectionMatrix: P^2 != P (defect " + std::to_string(defect) + ")");
  }

  std::size_t m() const { return p_.dim(); }
  const HermitianOperator& op() const { return p_; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return p_(i, j); }

 private:
  HermitianOperator p_;
};

/// Diagonal projection Q onto the coordinates in `indices`.
class DiagonalSelector {
 public:
  DiagonalSelector(std::size_t m, std::vector<std::size_t> indices) : m_(m), indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
      throw PreconditionError("DiagonalSelector: duplicate index");
    if (!indices_.empty() && indices_.back() >= m_) throw PreconditionError("DiagonalSelector: index out of range");
  }

  std::size_t m() const { return m_; }
  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t trace() const { return indices_.size(); }

 private:
  std::size_t m_;
  std::vector<std::size_t> indices_;
};

namespace detail {

inline std::size_t checked_vector_count(std::size_t k, int N, const Tolerances& tol) {
  if (k == 0) throw PreconditionError("frame: k must be positive");
  if (N < 2) throw PreconditionError("frame: N must be at least 2");
  const std::size_t m = k * static_cast<std::size_t>(N);
  if (m / k != static_cast<std::size_t>(N) || m > tol.max_vectors)
    throw PreconditionError("frame: m = kN exceeds the configured cap of " + std::to_string(tol.max_vectors));
  return m;
}

// Row r of the unitary m-point DFT evaluated at column i: exp(2πi·(i·r mod m)/m)/√m.
// Reducing the exponent modulo m first keeps the angle in [0, 2π).
inline Complex dft_entry(std::size_t i, std::size_t r, std::size_t m) {
  const std::size_t e = static_cast<std::size_t>((static_cast<unsigned __int128>(i) * r) % m);
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(m);
  return std::polar(1.0 / std::sqrt(static_cast<double>(m)), angle);
}

}  // namespace detail

/// The first k rows of the unitary m-point DFT matrix, read column by
/// column: v_i[d] = ω^{i·d}/√m with ω = exp(2πi/m), m = kN.
inline FrameFamily harmonic_frame(std::size_t k, int N, const Tolerances& tol = default_tolerances()) {
  const std::size_t m = detail::checked_vector_count(k, N, tol);
  std::vector<CVector> vs(m, CVector(k));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t d = 0; d < k; ++d) vs[i][d] = detail::dft_entry(i, d, m);
  return FrameFamily(k, N, std::move(vs));
}

/// Harmonic frame on a seeded random set of k DFT rows, with every vector
/// multiplied by a seeded random unit phase.
///
/// Generator (fixed; changing it changes every seeded artifact):
///   engine = std::mt19937_64(seed)
///   rows:   partial Fisher-Yates over 0..m-1; step t swaps slot t with
///           slot t + engine() % (m - t); the first k slots, sorted ascending.
///   phases: for i = 0..m-1, θ_i = 2π · (engine() >> 11) · 2^-53.
inline FrameFamily modulated_harmonic_frame(std::size_t k, int N, std::uint64_t seed,
                                            const Tolerances& tol = default_tolerances()) {
  const std::size_t m = detail::checked_vector_count(k, N, tol);
  std::mt19937_64 engine(seed);
  std::vector<std::size_t> pool(m);
  for (std::size_t i = 0; i < m; ++i) pool[i] = i;
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t j = t + static_cast<std::size_t>(engine() % (m - t));
    std::swap(pool[t], pool[j]);
  }
  std::vector<std::size_t> rows(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(rows.begin(), rows.end());

  std::vector<CVector> vs(m, CVector(k));
  for (std::size_t i = 0; i < m; ++i) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(engine() >> 11) * 0x1.0p-53;
    const Complex phase = std::polar(1.0, theta);
    for (std::size_t d = 0; d < k; ++d) vs[i][d] = phase * detail::dft_entry(i, rows[d], m);
  }
  return FrameFamily(k, N, std::move(vs));
}

/// Checks m = kN, ‖v_i‖² = 1/N and Σ v_i ⊗ v_i = I, each within `tol`.
inline ValidationReport validate_frame(const FrameFamily& f, double tol) {
  ValidationReport r;
  const double target = 1.0 / f.N();
  const bool count_ok = f.m() > 0 && f.m() == f.k() * static_cast<std::size_t>(f.N());
  r.add("m = kN", static_cast<double>(f.m()), static_cast<double>(f.k() * static_cast<std::size_t>(f.N())), count_ok);

  double norm_dev = 0.0;
  for (const auto& v : f.vectors()) norm_dev = std::max(norm_dev, std::abs(norm_squared(v) - target));
  r.add("equal norms", norm_dev, tol, norm_dev <= tol, "max_i |‖v_i‖² - 1/N|");

  const ComplexMatrix s = f.frame_operator().matrix();
  const double parseval_dev = (s - ComplexMatrix::identity(f.k())).frobenius_norm();
  r.add("parseval", parseval_dev, tol, parseval_dev <= tol, "‖Σ v_i ⊗ v_i - I‖_F");
  return r;
}

inline double max_norm_deviation(const FrameFamily& f) {
  double dev = 0.0;
  for (const auto& v : f.vectors()) dev = std::max(dev, std::abs(norm_squared(v) - 1.0 / f.N()));
  return dev;
}

/// Rescales every vector to norm exactly 1/√N when the largest squared-norm
/// deviation is within tol.rescale. Returns the rescaled frame and the
/// deviation it removed.
inline std::pair<FrameFamily, double> equalize_norms(const FrameFamily& f,
                                                     const Tolerances& tol = default_tolerances()) {
  const double dev = max_norm_deviation(f);
  if (dev > tol.rescale)
    throw PreconditionError("equalize_norms: norm deviation " + std::to_string(dev) + " exceeds rescale limit");
  std::vector<CVector> vs = f.vectors();
  const double target = 1.0 / std::sqrt(static_cast<double>(f.N()));
  for (auto& v : vs) {
    const double len = std::sqrt(norm_squared(v));
    if (len == 0.0) throw PreconditionError("equalize_norms: zero vector");
    for (auto& z : v) z *= target / len;
  }
  return {FrameFamily(f.k(), f.N(), std::move(vs)), dev};
}

/// Gram matrix G[i][j] = <v_j, v_i>. For a Parseval frame this is a rank-k
/// projection with diagonal 1/N.
inline ProjectionMatrix frame_to_projection(const FrameFamily& f, const Tolerances& tol = default_tolerances()) {
  const ValidationReport rep = validate_frame(f, tol.frame);
  if (!rep.passed()) throw PreconditionError("frame_to_projection: invalid frame");
  const std::size_t m = f.m();
  ComplexMatrix g(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) g(i, j) = inner(f[j], f[i]);
  return ProjectionMatrix(HermitianOperator(std::move(g), tol), tol);
}

/// The vectors P e_i written in an orthonormal basis of range(P). The basis
/// is the set of eigenvectors of P with eigenvalue above 1/2.
inline FrameFamily projection_to_frame(const ProjectionMatrix& p, int N, const Tolerances& tol = default_tolerances()) {
  if (N < 2) throw PreconditionError("projection_to_frame: N must be at least 2");
  const std::size_t m = p.m();
  for (std::size_t i = 0; i < m; ++i)
    if (std::abs(p(i, i).real() - 1.0 / N) > tol.projection)
      throw PreconditionError("projection_to_frame: diagonal entries are not all 1/N");

  const EigenSystem eig = eigh(p.op(), tol);
  std::vector<std::size_t> range;
  for (std::size_t d = 0; d < m; ++d) {
    if (eig.values[d] > 0.5) range.push_back(d);
  }
  const std::size_t k = range.size();
  if (k == 0 || k * static_cast<std::size_t>(N) != m)
    throw PreconditionError("projection_to_frame: rank(P)·N = " + std::to_string(k * static_cast<std::size_t>(N)) +
                            " differs from m = " + std::to_string(m));

  // P e_i = Σ_d conj(u_d[i]) u_d, so its coordinates are conj(U[i][d]).
  std::vector<CVector> vs(m, CVector(k));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t d = 0; d < k; ++d) vs[i][d] = std::conj(eig.vectors(i, range[d]));
  return FrameFamily(k, N, std::move(vs));
}

/// The |S| x |S| compression of P to the rows and columns in S. Its largest
/// eigenvalue is ‖QPQ‖.
inline HermitianOperator compressed_gram(const ProjectionMatrix& p, const DiagonalSelector& q) {
  if (q.m() != p.m()) throw PreconditionError("compressed_gram: selector size differs from projection size");
  const auto& idx = q.indices();
  ComplexMatrix sub(idx.size(), idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c) sub(r, c) = p(idx[r], idx[c]);
  return HermitianOperator(std::move(sub));
}

/// FNV-1a over k, N and the raw bytes of every entry; ties a certificate to
/// the exact frame it was computed from.
inline std::uint64_t frame_fingerprint(const FrameFamily& f) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t k = f.k(), N = static_cast<std::uint64_t>(f.N()), m = f.m();
  mix(&k, sizeof k);
  mix(&N, sizeof N);
  mix(&m, sizeof m);
  for (const auto& v : f.vectors())
    for (const auto& z : v) {
      const double re = z.real(), im = z.imag();
      mix(&re, sizeof re);
      mix(&im, sizeof im);
    }
  return h;
}

}  // namespace ksbalance
