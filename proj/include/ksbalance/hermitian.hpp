#pragma once

// Dense complex Hermitian linear algebra for small ambient dimensions
// (k up to a few hundred): rank-one accumulation, a cyclic Jacobi
// eigensolver, resolvent quadratic forms, and Sherman-Morrison updates.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ksbalance/config.hpp"

namespace ksbalance {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

/// <u, v> = sum_i u[i] * conj(v[i]), linear in the first argument.
inline Complex inner(std::span<const Complex> u, std::span<const Complex> v) {
  if (u.size() != v.size()) throw PreconditionError("inner: length mismatch");
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * std::conj(v[i]);
  return s;
}

inline double norm_squared(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

inline bool all_finite(std::span<const Complex> v) {
  return std::all_of(v.begin(), v.end(),
                     [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

/// Row-major dense complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const Complex> data() const { return data_; }
  std::span<Complex> data() { return data_; }

  CVector column(std::size_t j) const {
    CVector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix a(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) a(j, i) = std::conj((*this)(i, j));
    return a;
  }

  double frobenius_norm() const { return std::sqrt(norm_squared(data_)); }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw PreconditionError("matrix product: inner dimension mismatch");
    ComplexMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t l = 0; l < a.cols_; ++l) {
        const Complex x = a(i, l);
        if (x == Complex{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += x * b(l, j);
      }
    return c;
  }

  friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw PreconditionError("matrix difference: shape mismatch");
    ComplexMatrix c = a;
    for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
    return c;
  }

  friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw PreconditionError("matrix sum: shape mismatch");
    ComplexMatrix c = a;
    for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] += b.data_[i];
    return c;
  }

  CVector apply(std::span<const Complex> v) const {
    if (v.size() != cols_) throw PreconditionError("matrix-vector product: length mismatch");
    CVector out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      Complex s{};
      for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
      out[i] = s;
    }
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Largest |A(i,j) - conj(A(j,i))| over all entries (0 for Hermitian A).
inline double hermitian_defect(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j) - std::conj(a(j, i))));
  return worst;
}

/// A k x k complex Hermitian matrix. Construction from a general matrix
/// checks Hermiticity; the stored entries are then made exactly Hermitian.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  explicit HermitianOperator(ComplexMatrix m, const Tolerances& tol = default_tolerances()) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw PreconditionError("HermitianOperator: matrix is not square");
    if (!all_finite(m_.data())) throw PreconditionError("HermitianOperator: non-finite entry");
    const double defect = hermitian_defect(m_);
    if (defect > tol.hermitian)
      throw PreconditionError("HermitianOperator: not Hermitian (defect " + std::to_string(defect) + ")");
    symmetrize();
  }

  static HermitianOperator zero(std::size_t k) { return HermitianOperator(ComplexMatrix(k, k)); }
  static HermitianOperator identity(std::size_t k) { return HermitianOperator(ComplexMatrix::identity(k)); }

  static HermitianOperator scaled_identity(std::size_t k, double a) {
    ComplexMatrix m(k, k);
    for (std::size_t i = 0; i < k; ++i) m(i, i) = a;
    return HermitianOperator(std::move(m));
  }

  static HermitianOperator diagonal(std::span<const double> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return HermitianOperator(std::move(m));
  }

  std::size_t dim() const { return m_.rows(); }
  const Complex& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const ComplexMatrix& matrix() const { return m_; }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) t += m_(i, i).real();
    return t;
  }

  /// Returns this + s * (v ⊗ v), where (v ⊗ v)[i][j] = v[i] * conj(v[j]).
  HermitianOperator plus_outer(std::span<const Complex> v, double s = 1.0) const {
    if (v.size() != dim()) throw PreconditionError("outer product: dimension mismatch");
    HermitianOperator out = *this;
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = 0; j < dim(); ++j) out.m_(i, j) += s * v[i] * std::conj(v[j]);
    out.symmetrize();
    return out;
  }

 private:
  void symmetrize() {
    for (std::size_t i = 0; i < dim(); ++i) {
      m_(i, i) = Complex(m_(i, i).real(), 0.0);
      for (std::size_t j = i + 1; j < dim(); ++j) {
        const Complex avg = 0.5 * (m_(i, j) + std::conj(m_(j, i)));
        m_(i, j) = avg;
        m_(j, i) = std::conj(avg);
      }
    }
  }

  ComplexMatrix m_;
};

/// T + v ⊗ v.
inline HermitianOperator outer_product_accumulate(const HermitianOperator& t, std::span<const Complex> v) {
  return t.plus_outer(v, 1.0);
}

/// Ascending eigenvalues with orthonormal eigenvectors stored as the
/// columns of `vectors` (so T = U diag(λ) U*).
struct EigenSystem {
  std::vector<double> values;
  ComplexMatrix vectors;

  std::size_t dim() const { return values.size(); }
  double max_eigenvalue() const { return values.empty() ? 0.0 : values.back(); }
  double min_eigenvalue() const { return values.empty() ? 0.0 : values.front(); }

  /// w = U* v, the coordinates of v in the eigenbasis.
  CVector coordinates(std::span<const Complex> v) const {
    if (v.size() != dim()) throw PreconditionError("eigen coordinates: dimension mismatch");
    const std::size_t k = dim();
    CVector w(k);
    for (std::size_t d = 0; d < k; ++d) {
      Complex s{};
      for (std::size_t i = 0; i < k; ++i) s += std::conj(vectors(i, d)) * v[i];
      w[d] = s;
    }
    return w;
  }

  ComplexMatrix reconstruct() const {
    const std::size_t k = dim();
    ComplexMatrix out(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        Complex s{};
        for (std::size_t d = 0; d < k; ++d) s += vectors(i, d) * values[d] * std::conj(vectors(j, d));
        out(i, j) = s;
      }
    return out;
  }
};

/// Cyclic Jacobi eigensolver for complex Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot A(p,q) with a diagonal
/// unitary, then applies the real symmetric Jacobi rotation. Sweeps stop once
/// the off-diagonal Frobenius norm drops below `jacobi_relative` times the
/// Frobenius norm of the input.
inline EigenSystem eigh(const HermitianOperator& t, const Tolerances& tol = default_tolerances()) {
  const std::size_t k = t.dim();
  ComplexMatrix a = t.matrix();
  ComplexMatrix v = ComplexMatrix::identity(k);
  const double scale = a.frobenius_norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  bool converged = scale == 0.0 || k <= 1;
  for (int sweep = 0; !converged && sweep < tol.jacobi_max_sweeps; ++sweep) {
    if (off_norm() <= tol.jacobi_relative * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag == 0.0) continue;
        const Complex phase = a(p, q) / mag;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        double tn;
        if (std::abs(theta) > 1e150) {
          tn = 0.5 / theta;
        } else {
          tn = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(tn * tn + 1.0);
        const double s = tn * c;

        // J restricted to (p,q): [[c, s], [-s*conj(e), c*conj(e)]].
        const Complex jpp = c;
        const Complex jpq = s;
        const Complex jqp = -s * std::conj(phase);
        const Complex jqq = c * std::conj(phase);

        for (std::size_t r = 0; r < k; ++r) {  // A <- A J
          const Complex x = a(r, p), y = a(r, q);
          a(r, p) = x * jpp + y * jqp;
          a(r, q) = x * jpq + y * jqq;
        }
        for (std::size_t r = 0; r < k; ++r) {  // A <- J* A
          const Complex x = a(p, r), y = a(q, r);
          a(p, r) = std::conj(jpp) * x + std::conj(jqp) * y;
          a(q, r) = std::conj(jpq) * x + std::conj(jqq) * y;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t r = 0; r < k; ++r) {  // V <- V J
          const Complex x = v(r, p), y = v(r, q);
          v(r, p) = x * jpp + y * jqp;
          v(r, q) = x * jpq + y * jqq;
        }
      }
    }
  }
  if (!converged && off_norm() > tol.jacobi_relative * scale)
    throw NumericalError("eigh: Jacobi iteration did not converge within " +
                         std::to_string(tol.jacobi_max_sweeps) + " sweeps");

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });

  EigenSystem out;
  out.values.resize(k);
  out.vectors = ComplexMatrix(k, k);
  for (std::size_t d = 0; d < k; ++d) {
    out.values[d] = a(order[d], order[d]).real();
    for (std::size_t i = 0; i < k; ++i) out.vectors(i, d) = v(i, order[d]);
  }
  return out;
}

/// Σ_d |w_d|^2 / (a - λ_d)^power for eigen-coordinates w of some vector.
inline double resolvent_form_from_coordinates(std::span<const double> eigenvalues, double a,
                                              std::span<const Complex> w, int power) {
  double s = 0.0;
  for (std::size_t d = 0; d < eigenvalues.size(); ++d) {
    const double inv = 1.0 / (a - eigenvalues[d]);
    s += std::norm(w[d]) * (power == 1 ? inv : inv * inv);
  }
  return s;
}

/// <(aI - T)^{-power} v, v> evaluated through the eigenbasis of T.
inline double resolvent_quadratic_form(const EigenSystem& eig, double a, std::span<const Complex> v, int power) {
  if (power != 1 && power != 2) throw PreconditionError("resolvent_quadratic_form: power must be 1 or 2");
  if (v.size() != eig.dim()) throw PreconditionError("resolvent_quadratic_form: dimension mismatch");
  if (!(a > eig.max_eigenvalue()))
    throw PreconditionError("resolvent_quadratic_form: barrier violated (a <= lambda_max)");
  const CVector w = eig.coordinates(v);
  return resolvent_form_from_coordinates(eig.values, a, w, power);
}

namespace detail {

// (R + sign * v v*)^{-1} from Rinv = R^{-1}.
inline HermitianOperator rank_one_inverse_update(const HermitianOperator& rinv, std::span<const Complex> v,
                                                 double sign, const Tolerances& tol) {
  if (v.size() != rinv.dim()) throw PreconditionError("Sherman-Morrison: dimension mismatch");
  const CVector w = rinv.matrix().apply(v);
  const double denom = 1.0 + sign * inner(w, v).real();
  if (!(denom > tol.sherman_morrison_denominator))
    throw NumericalError("Sherman-Morrison: numerically singular update (denominator " + std::to_string(denom) +
                         ")");
  return rinv.plus_outer(w, -sign / denom);
}

}  // namespace detail

/// (R + v ⊗ v)^{-1} = Rinv - (Rinv v)(Rinv v)* / (1 + <Rinv v, v>).
inline HermitianOperator sherman_morrison_resolvent_update(const HermitianOperator& rinv,
                                                           std::span<const Complex> v,
                                                           const Tolerances& tol = default_tolerances()) {
  return detail::rank_one_inverse_update(rinv, v, +1.0, tol);
}

/// Barrier-resolvent update: given (aI - T)^{-1}, returns (aI - T - v ⊗ v)^{-1}.
/// Adding v ⊗ v to T subtracts it from aI - T, so the rank-one term enters
/// with a negated sign.
inline HermitianOperator barrier_resolvent_after_addition(const HermitianOperator& resolvent,
                                                          std::span<const Complex> v,
                                                          const Tolerances& tol = default_tolerances()) {
  return detail::rank_one_inverse_update(resolvent, v, -1.0, tol);
}

struct SumBound {
  double lhs = 0.0;  // Σ a_i b_i
  double rhs = 0.0;  // (1/k) Σ a_i Σ b_i
};

/// Chebyshev-type sum inequality for oppositely ordered positive sequences:
/// Σ a_i b_i <= (1/k) Σ a_i Σ b_i when a is nondecreasing and b nonincreasing.
inline SumBound chebyshev_sum_bound(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("chebyshev_sum_bound: length mismatch");
  if (a.empty()) throw PreconditionError("chebyshev_sum_bound: empty sequences");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0) || !(b[i] > 0.0)) throw PreconditionError("chebyshev_sum_bound: entries must be positive");
    if (i > 0 && a[i] < a[i - 1]) throw PreconditionError("chebyshev_sum_bound: a is not nondecreasing");
    if (i > 0 && b[i] > b[i - 1]) throw PreconditionError("chebyshev_sum_bound: b is not nonincreasing");
  }
  SumBound r;
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    r.lhs += a[i] * b[i];
    sa += a[i];
    sb += b[i];
  }
  r.rhs = sa * sb / static_cast<double>(a.size());
  return r;
}

}  // namespace ksbalance
