#pragma once

// Test-only reference computations. Nothing here goes through the
// eigensolver or the resolvent code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "ksbalance/hermitian.hpp"

namespace ksbalance::oracle {

/// Gauss-Jordan inverse with partial pivoting.
inline ComplexMatrix dense_inverse(const ComplexMatrix& a) {
  const std::size_t n = a.rows();
  ComplexMatrix w = a;
  ComplexMatrix inv = ComplexMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(w(r, col)) > std::abs(w(piv, col))) piv = r;
    if (std::abs(w(piv, col)) == 0.0) throw std::runtime_error("dense_inverse: singular matrix");
    for (std::size_t c = 0; c < n; ++c) {
      std::swap(w(col, c), w(piv, c));
      std::swap(inv(col, c), inv(piv, c));
    }
    const Complex d = w(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      w(col, c) /= d;
      inv(col, c) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const Complex f = w(r, col);
      if (f == Complex{}) continue;
      for (std::size_t c = 0; c < n; ++c) {
        w(r, c) -= f * w(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

/// a·I - T as a plain matrix.
inline ComplexMatrix shifted(const HermitianOperator& t, double a) {
  ComplexMatrix m = ComplexMatrix::identity(t.dim());
  for (std::size_t i = 0; i < t.dim(); ++i)
    for (std::size_t j = 0; j < t.dim(); ++j) m(i, j) = (i == j ? a : 0.0) - t(i, j);
  return m;
}

inline double trace_real(const ComplexMatrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, i).real();
  return s;
}

/// <M v, v>.
inline double quadratic_form(const ComplexMatrix& m, const CVector& v) { return inner(m.apply(v), v).real(); }

/// Determinant by cofactor expansion along the first row.
inline Complex determinant(const ComplexMatrix& a) {
  const std::size_t n = a.rows();
  if (n == 1) return a(0, 0);
  if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  Complex det{};
  for (std::size_t c = 0; c < n; ++c) {
    ComplexMatrix minor(n - 1, n - 1);
    for (std::size_t r = 1; r < n; ++r) {
      std::size_t cc = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == c) continue;
        minor(r - 1, cc++) = a(r, k);
      }
    }
    const double sign = (c % 2 == 0) ? 1.0 : -1.0;
    det += sign * a(0, c) * determinant(minor);
  }
  return det;
}

/// Real roots of det(λI - T) for Hermitian T, found by scanning the
/// Gershgorin interval for sign changes and bisecting. Assumes simple roots.
inline std::vector<double> characteristic_roots(const HermitianOperator& t, std::size_t grid = 20000) {
  const std::size_t n = t.dim();
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) radius += std::abs(t(i, j));
    lo = std::min(lo, t(i, i).real() - radius);
    hi = std::max(hi, t(i, i).real() + radius);
  }
  lo -= 1.0;
  hi += 1.0;
  auto p = [&](double x) { return determinant(shifted(t, x)).real(); };
  std::vector<double> roots;
  double x0 = lo, p0 = p(lo);
  for (std::size_t s = 1; s <= grid; ++s) {
    const double x1 = lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(grid);
    const double p1 = p(x1);
    if (p0 == 0.0) roots.push_back(x0);
    else if ((p0 < 0.0) != (p1 < 0.0)) {
      double a = x0, b = x1, pa = p0;
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double mid = 0.5 * (a + b);
        const double pm = p(mid);
        if ((pm < 0.0) == (pa < 0.0)) {
          a = mid;
          pa = pm;
        } else {
          b = mid;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    x0 = x1;
    p0 = p1;
  }
  return roots;
}

inline CVector random_vector(std::size_t k, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  CVector v(k);
  for (auto& z : v) z = Complex(g(rng), g(rng));
  return v;
}

inline HermitianOperator random_hermitian(std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    m(i, i) = g(rng);
    for (std::size_t j = i + 1; j < k; ++j) {
      m(i, j) = Complex(g(rng), g(rng));
      m(j, i) = std::conj(m(i, j));
    }
  }
  return HermitianOperator(std::move(m));
}

/// B B* / k for Gaussian B: positive semidefinite, generically definite.
inline HermitianOperator random_psd(std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix b(k, k);
  for (auto& z : b.data()) z = Complex(g(rng), g(rng));
  ComplexMatrix p = b * b.adjoint();
  for (auto& z : p.data()) z /= static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) p(j, i) = std::conj(p(i, j));
  return HermitianOperator(std::move(p), Tolerances{.hermitian = 1e-9});
}

/// Calls fn(subset) for every n-element subset of {0..m-1}, lexicographically.
inline void for_each_subset(std::size_t m, std::size_t n, const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (n > m) return;
  for (;;) {
    fn(idx);
    std::ptrdiff_t p = static_cast<std::ptrdiff_t>(n) - 1;
    while (p >= 0 && idx[static_cast<std::size_t>(p)] == m - n + static_cast<std::size_t>(p)) --p;
    if (p < 0) return;
    ++idx[static_cast<std::size_t>(p)];
    for (std::size_t q = static_cast<std::size_t>(p) + 1; q < n; ++q) idx[q] = idx[q - 1] + 1;
  }
}

/// Largest eigenvalue of a 2x2 Hermitian matrix in closed form.
inline double max_eigenvalue_2x2(const HermitianOperator& t) {
  const double a = t(0, 0).real(), d = t(1, 1).real();
  return 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + std::norm(t(0, 1)));
}

}  // namespace ksbalance::oracle
