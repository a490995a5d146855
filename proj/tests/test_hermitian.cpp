#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ksbalance/hermitian.hpp"
#include "oracles.hpp"

using namespace ksbalance;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1e-300, std::abs(want)); }

double max_hermitian_defect(const HermitianOperator& t) { return hermitian_defect(t.matrix()); }

}  // namespace

TEST(OuterProduct, StandardBasis) {
  const auto t = outer_product_accumulate(HermitianOperator::zero(2), CVector{1.0, 0.0});
  EXPECT_EQ(t(0, 0), Complex(1.0));
  EXPECT_EQ(t(0, 1), Complex(0.0));
  EXPECT_EQ(t(1, 0), Complex(0.0));
  EXPECT_EQ(t(1, 1), Complex(0.0));
}

TEST(OuterProduct, ScalarCase) {
  const Complex c = std::polar(0.5, 0.7);  // |c|^2 = 1/4
  const auto t = outer_product_accumulate(HermitianOperator::identity(1), CVector{c});
  EXPECT_NEAR(t(0, 0).real(), 1.25, 1e-15);
  EXPECT_EQ(t(0, 0).imag(), 0.0);
}

TEST(OuterProduct, MatchesEntrywiseOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = oracle::random_psd(3, rng);
    const auto v = oracle::random_vector(3, rng);
    const auto out = outer_product_accumulate(t, v);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) EXPECT_LT(std::abs(out(i, j) - (t(i, j) + v[i] * std::conj(v[j]))), 1e-14);
    EXPECT_LE(max_hermitian_defect(out), 1e-12);
  }
}

TEST(OuterProduct, DimensionMismatch) {
  EXPECT_THROW(outer_product_accumulate(HermitianOperator::zero(2), CVector{1.0}), PreconditionError);
}

TEST(HermitianOperatorType, RejectsNonHermitian) {
  ComplexMatrix m(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(HermitianOperator{m}, PreconditionError);
  m(1, 0) = Complex(1.0, 1e-6);
  EXPECT_THROW(HermitianOperator{m}, PreconditionError);
  m(1, 0) = 1.0;
  EXPECT_NO_THROW(HermitianOperator{m});
}

TEST(Eigh, Diagonal) {
  const std::vector<double> d{3.0, 1.0, 2.0};
  const auto eig = eigh(HermitianOperator::diagonal(d));
  ASSERT_EQ(eig.values.size(), 3u);
  EXPECT_DOUBLE_EQ(eig.values[0], 1.0);
  EXPECT_DOUBLE_EQ(eig.values[1], 2.0);
  EXPECT_DOUBLE_EQ(eig.values[2], 3.0);
}

TEST(Eigh, Swap) {
  ComplexMatrix m(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  const auto eig = eigh(HermitianOperator(m));
  EXPECT_NEAR(eig.values[0], -1.0, 1e-14);
  EXPECT_NEAR(eig.values[1], 1.0, 1e-14);
}

TEST(Eigh, MatchesCharacteristicPolynomialRoots) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = oracle::random_hermitian(4, rng);
    const auto roots = oracle::characteristic_roots(t);
    ASSERT_EQ(roots.size(), 4u) << "trial " << trial;
    const auto eig = eigh(t);
    for (std::size_t d = 0; d < 4; ++d) EXPECT_NEAR(eig.values[d], roots[d], 1e-8) << "trial " << trial;
  }
}

TEST(Eigh, ReconstructionAndOrthonormality) {
  std::mt19937_64 rng(5);
  for (std::size_t k : {1u, 2u, 5u, 12u, 40u}) {
    const auto t = oracle::random_hermitian(k, rng);
    const auto eig = eigh(t);
    const double scale = std::max(1.0, t.matrix().frobenius_norm());
    EXPECT_LE((eig.reconstruct() - t.matrix()).frobenius_norm(), 1e-9 * scale) << "k=" << k;
    const auto gram = eig.vectors.adjoint() * eig.vectors;
    EXPECT_LE((gram - ComplexMatrix::identity(k)).frobenius_norm(), 1e-10) << "k=" << k;
    EXPECT_TRUE(std::is_sorted(eig.values.begin(), eig.values.end()));
  }
}

TEST(Eigh, ZeroAndRepeatedEigenvalues) {
  const auto eig0 = eigh(HermitianOperator::zero(3));
  for (double x : eig0.values) EXPECT_EQ(x, 0.0);
  const auto eig1 = eigh(HermitianOperator::scaled_identity(4, 2.5));
  for (double x : eig1.values) EXPECT_EQ(x, 2.5);
}

TEST(Eigh, NonConvergenceIsReported) {
  std::mt19937_64 rng(3);
  const auto t = oracle::random_hermitian(6, rng);
  Tolerances tol;
  tol.jacobi_max_sweeps = 1;
  EXPECT_THROW(eigh(t, tol), NumericalError);
}

TEST(ResolventForm, ScalarExamples) {
  const auto eig = eigh(HermitianOperator::zero(1));
  EXPECT_DOUBLE_EQ(resolvent_quadratic_form(eig, 1.0, CVector{1.0}, 1), 1.0);
  EXPECT_DOUBLE_EQ(resolvent_quadratic_form(eig, 0.5, CVector{1.0}, 2), 4.0);
}

TEST(ResolventForm, MatchesDenseInverse) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + trial % 7;
    const auto t = oracle::random_psd(k, rng);
    const auto eig = eigh(t);
    const double a = eig.max_eigenvalue() + 1.0;
    const auto v = oracle::random_vector(k, rng);
    const auto inv = oracle::dense_inverse(oracle::shifted(t, a));
    const double want1 = oracle::quadratic_form(inv, v);
    const double want2 = oracle::quadratic_form(inv * inv, v);
    const double got1 = resolvent_quadratic_form(eig, a, v, 1);
    const double got2 = resolvent_quadratic_form(eig, a, v, 2);
    EXPECT_LT(rel_err(got1, want1), 1e-8);
    EXPECT_LT(rel_err(got2, want2), 1e-8);
    EXPECT_GT(got1, 0.0);

    // power 2 = Σ |w_d|^2/(a-λ_d)^2 with w = U* v.
    const auto w = eig.coordinates(v);
    double s = 0.0;
    for (std::size_t d = 0; d < k; ++d) s += std::norm(w[d]) / ((a - eig.values[d]) * (a - eig.values[d]));
    EXPECT_LT(rel_err(got2, s), 1e-12);
  }
}

TEST(ResolventForm, BarrierViolated) {
  const auto eig = eigh(HermitianOperator::diagonal(std::vector<double>{0.5}));
  EXPECT_THROW(resolvent_quadratic_form(eig, 0.5, CVector{1.0}, 1), PreconditionError);
  EXPECT_THROW(resolvent_quadratic_form(eig, 0.4, CVector{1.0}, 1), PreconditionError);
  EXPECT_THROW(resolvent_quadratic_form(eig, 1.0, CVector{1.0}, 3), PreconditionError);
}

TEST(ShermanMorrison, ScalarAndZeroUpdate) {
  const auto r = sherman_morrison_resolvent_update(HermitianOperator::identity(1), CVector{1.0});
  EXPECT_DOUBLE_EQ(r(0, 0).real(), 0.5);
  const auto z = sherman_morrison_resolvent_update(HermitianOperator::identity(2), CVector{0.0, 0.0});
  EXPECT_EQ((z.matrix() - ComplexMatrix::identity(2)).frobenius_norm(), 0.0);
}

TEST(ShermanMorrison, MatchesDirectInversion) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + trial % 6;
    auto r = oracle::random_psd(k, rng);
    r = HermitianOperator(r.matrix() + ComplexMatrix::identity(k));
    const auto v = oracle::random_vector(k, rng);
    const HermitianOperator rinv(oracle::dense_inverse(r.matrix()), Tolerances{.hermitian = 1e-9});
    const auto got = sherman_morrison_resolvent_update(rinv, v);
    const auto want = oracle::dense_inverse(outer_product_accumulate(r, v).matrix());
    EXPECT_LE((got.matrix() - want).frobenius_norm(), 1e-8 * want.frobenius_norm());
    EXPECT_LE(max_hermitian_defect(got), 1e-12);
  }
}

TEST(ShermanMorrison, SingularUpdateRejected) {
  // (I - v v*) with |v| = 1 is singular.
  EXPECT_THROW(barrier_resolvent_after_addition(HermitianOperator::identity(1), CVector{1.0}), NumericalError);
}

TEST(ShermanMorrison, ComposedBarrierUpdatesMatchDirectInverse) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 + trial % 5;
    const double a = 10.0;
    auto resolvent = HermitianOperator::scaled_identity(k, 1.0 / a);
    auto t = HermitianOperator::zero(k);
    for (int step = 0; step < 6; ++step) {
      const auto v = oracle::random_vector(k, rng, 0.25);
      resolvent = barrier_resolvent_after_addition(resolvent, v);
      t = outer_product_accumulate(t, v);
    }
    const auto want = oracle::dense_inverse(oracle::shifted(t, a));
    EXPECT_LE((resolvent.matrix() - want).frobenius_norm(), 1e-8 * want.frobenius_norm());
  }
}

TEST(ChebyshevSum, Examples) {
  const std::vector<double> a{1.0, 2.0}, b{2.0, 1.0};
  const auto r = chebyshev_sum_bound(a, b);
  EXPECT_DOUBLE_EQ(r.lhs, 4.0);
  EXPECT_DOUBLE_EQ(r.rhs, 4.5);

  const double c = 0.7, d = 1.3;
  const std::vector<double> cs(3, c), ds(3, d);
  const auto e = chebyshev_sum_bound(cs, ds);
  EXPECT_NEAR(e.lhs, 3 * c * d, 1e-15);
  EXPECT_NEAR(e.rhs, 3 * c * d, 1e-15);
}

TEST(ChebyshevSum, Errors) {
  const std::vector<double> up{1.0, 2.0}, down{2.0, 1.0}, one{1.0};
  EXPECT_THROW(chebyshev_sum_bound(down, down), PreconditionError);
  EXPECT_THROW(chebyshev_sum_bound(up, up), PreconditionError);
  EXPECT_THROW(chebyshev_sum_bound(up, one), PreconditionError);
  EXPECT_THROW(chebyshev_sum_bound(std::vector<double>{-1.0, 2.0}, down), PreconditionError);
  EXPECT_THROW(chebyshev_sum_bound(std::vector<double>{}, std::vector<double>{}), PreconditionError);
}

TEST(ChebyshevSum, EqualityOnlyForConstantSequences) {
  const std::vector<double> constant(5, 2.0);
  std::vector<double> b{5.0, 4.0, 3.0, 2.0, 1.0};
  const auto base = chebyshev_sum_bound(constant, b);
  EXPECT_NEAR(base.lhs - base.rhs, 0.0, 1e-13);
  std::vector<double> perturbed = constant;
  perturbed.back() += 0.5;  // still nondecreasing, no longer constant
  const auto r = chebyshev_sum_bound(perturbed, b);
  EXPECT_LT(r.lhs - r.rhs, base.lhs - base.rhs);
}
