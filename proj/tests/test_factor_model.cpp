#include <gtest/gtest.h>

#include "cadence/factor_model.hpp"

#include <algorithm>
#include <random>
#include <vector>

using cadence::DenseTensor3;
using cadence::FactorModel;
using cadence::Index;
using cadence::Matrix;
using cadence::Vector;

namespace {

FactorModel random_model(Index i, Index j, Index k, Index r, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FactorModel m;
  m.users.resize(i, r);
  m.days.resize(j, r);
  m.weeks.resize(k, r);
  for (auto* mat : {&m.users, &m.days, &m.weeks})
    for (Index c = 0; c < r; ++c)
      for (Index row = 0; row < mat->rows(); ++row) (*mat)(row, c) = u(rng);
  return m;
}

// Naive rank-one summation, the reference for reconstruct.
DenseTensor3 naive_reconstruct(const FactorModel& m) {
  DenseTensor3 t(m.users.rows(), m.days.rows(), m.weeks.rows());
  for (Index i = 0; i < m.users.rows(); ++i)
    for (Index j = 0; j < m.days.rows(); ++j)
      for (Index k = 0; k < m.weeks.rows(); ++k) {
        double s = 0.0;
        for (Index r = 0; r < m.rank(); ++r) {
          const double w = m.weights.size() ? m.weights(r) : 1.0;
          s += w * m.users(i, r) * m.days(j, r) * m.weeks(k, r);
        }
        t(i, j, k) = s;
      }
  return t;
}

double max_abs_diff(const DenseTensor3& a, const DenseTensor3& b) {
  double d = 0.0;
  for (std::size_t n = 0; n < a.data().size(); ++n)
    d = std::max(d, std::abs(a.data()[n] - b.data()[n]));
  return d;
}

}  // namespace

TEST(Reconstruct, SingleOuterProduct) {
  FactorModel m;
  m.users = Matrix(2, 1);
  m.users << 1, 2;
  m.days = Matrix(2, 1);
  m.days << 1, 1;
  m.weeks = Matrix(1, 1);
  m.weeks << 1;
  const DenseTensor3 t = reconstruct(m);
  ASSERT_EQ(t.dim0(), 2);
  ASSERT_EQ(t.dim1(), 2);
  ASSERT_EQ(t.dim2(), 1);
  EXPECT_EQ(t(0, 0, 0), 1);
  EXPECT_EQ(t(0, 1, 0), 1);
  EXPECT_EQ(t(1, 0, 0), 2);
  EXPECT_EQ(t(1, 1, 0), 2);
}

TEST(Reconstruct, ZeroColumnContributesNothing) {
  const FactorModel m = random_model(3, 4, 5, 2, 1);
  FactorModel extended = m;
  extended.users.conservativeResize(3, 3);
  extended.days.conservativeResize(4, 3);
  extended.weeks.conservativeResize(5, 3);
  extended.users.col(2).setZero();
  extended.days.col(2).setRandom();
  extended.days.col(2) = extended.days.col(2).cwiseAbs();
  extended.weeks.col(2).setOnes();
  EXPECT_LT(max_abs_diff(reconstruct(m), reconstruct(extended)), 1e-14);
}

TEST(Reconstruct, MatchesNaiveSummation) {
  const FactorModel m = random_model(4, 7, 6, 3, 5);
  EXPECT_LT(max_abs_diff(reconstruct(m), naive_reconstruct(m)), 1e-12);
}

TEST(Reconstruct, RankMismatchThrows) {
  FactorModel m = random_model(3, 3, 3, 2, 2);
  m.days.conservativeResize(3, 3);
  EXPECT_THROW(reconstruct(m), std::invalid_argument);
}

TEST(Reconstruct, ScaleGaugeInvariance) {
  const FactorModel m = random_model(4, 5, 6, 3, 7);
  FactorModel scaled = m;
  const double alpha = 3.7;
  scaled.users.col(1) *= alpha;
  scaled.weeks.col(1) /= alpha;
  EXPECT_LT(max_abs_diff(reconstruct(m), reconstruct(scaled)), 1e-12);
}

TEST(RelativeError, ExactModelIsZero) {
  const FactorModel m = random_model(4, 5, 6, 2, 9);
  EXPECT_LT(relative_error(reconstruct(m), m), 1e-12);
}

TEST(RelativeError, ZeroModelAgainstTensorIsOne) {
  const FactorModel m = random_model(3, 4, 5, 2, 10);
  const DenseTensor3 t = reconstruct(m);
  FactorModel zero = m;
  zero.users.setZero();
  EXPECT_NEAR(relative_error(t, zero), 1.0, 1e-12);
}

TEST(RelativeError, HandBuiltPerturbation) {
  // t = reconstruct(m) + e on a 2x2x1 grid; ||e|| and ||t|| by hand.
  FactorModel m;
  m.users = Matrix(2, 1);
  m.users << 1, 2;
  m.days = Matrix(2, 1);
  m.days << 1, 1;
  m.weeks = Matrix(1, 1);
  m.weeks << 1;
  DenseTensor3 t = reconstruct(m);  // [[1,1],[2,2]]
  t(0, 0, 0) += 0.3;
  t(1, 1, 0) -= 0.4;
  const double num = std::sqrt(0.3 * 0.3 + 0.4 * 0.4);
  const double den = std::sqrt(1.3 * 1.3 + 1.0 + 4.0 + 1.6 * 1.6);
  EXPECT_NEAR(relative_error(t, m), num / den, 1e-12);
}

TEST(RelativeError, ZeroTensorConvention) {
  FactorModel zero;
  zero.users = Matrix::Zero(2, 1);
  zero.days = Matrix::Zero(3, 1);
  zero.weeks = Matrix::Zero(4, 1);
  EXPECT_EQ(relative_error(DenseTensor3(2, 3, 4), zero), 0.0);
}

TEST(RelativeError, ShapeMismatchThrows) {
  const FactorModel m = random_model(3, 4, 5, 2, 11);
  EXPECT_THROW(relative_error(DenseTensor3(3, 4, 6), m), std::invalid_argument);
}

TEST(Normalize, AlreadyNormalizedIsUnchanged) {
  FactorModel m = random_model(4, 5, 6, 2, 12);
  for (Index c = 0; c < 2; ++c) {
    m.days.col(c) /= m.days.col(c).norm();
    m.weeks.col(c) /= m.weeks.col(c).norm();
  }
  const FactorModel n = normalize_components(m);
  EXPECT_LT((n.days - m.days).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((n.weeks - m.weeks).cwiseAbs().maxCoeff(), 1e-12);
  ASSERT_EQ(n.weights.size(), 2);
  EXPECT_NEAR(n.weights(0), 1.0, 1e-12);
  EXPECT_NEAR(n.weights(1), 1.0, 1e-12);
}

TEST(Normalize, ScalingInvariance) {
  const FactorModel m = random_model(4, 5, 6, 2, 13);
  FactorModel scaled = m;
  scaled.days.col(0) *= 4.0;
  scaled.weeks.col(0) *= 0.25;
  const FactorModel a = normalize_components(m);
  const FactorModel b = normalize_components(scaled);
  EXPECT_LT((a.days - b.days).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((a.weeks - b.weeks).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((a.weights - b.weights).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Normalize, PreservesReconstruction) {
  const FactorModel m = random_model(5, 7, 6, 3, 14);
  const FactorModel n = normalize_components(m);
  EXPECT_LT(max_abs_diff(reconstruct(m), reconstruct(n)), 1e-10);
  for (Index c = 0; c < 3; ++c) {
    EXPECT_NEAR(n.days.col(c).norm(), 1.0, 1e-12);
    EXPECT_NEAR(n.weeks.col(c).norm(), 1.0, 1e-12);
  }
}

TEST(Normalize, ZeroColumnGetsZeroWeight) {
  FactorModel m = random_model(4, 5, 6, 2, 15);
  m.days.col(1).setZero();
  const FactorModel n = normalize_components(m);
  EXPECT_EQ(n.weights(1), 0.0);
  EXPECT_TRUE((n.days.col(1).array() == 0.0).all());
}

TEST(MembershipShares, RowsSumToOneAndZeroRowsFlagged) {
  Matrix a(3, 2);
  a << 1, 3, 0, 0, 2, 2;
  const cadence::MembershipShares s = cadence::membership_shares(a);
  EXPECT_NEAR(s.shares.row(0).sum(), 1.0, 1e-15);
  EXPECT_NEAR(s.shares(0, 0), 0.25, 1e-15);
  EXPECT_EQ(s.shares(1, 0), 0.5);
  EXPECT_EQ(s.shares(1, 1), 0.5);
  ASSERT_EQ(s.zero_rows.size(), 1u);
  EXPECT_EQ(s.zero_rows[0], 1);
}

TEST(Align, ReversedComponentsRecovered) {
  const FactorModel m = random_model(4, 5, 6, 3, 16);
  FactorModel reversed = m;
  for (Index c = 0; c < 3; ++c) {
    reversed.users.col(c) = m.users.col(2 - c);
    reversed.days.col(c) = m.days.col(2 - c);
    reversed.weeks.col(c) = m.weeks.col(2 - c);
  }
  const cadence::Alignment al = align(m, reversed);
  EXPECT_EQ(al.permutation, (std::vector<int>{2, 1, 0}));
  for (double c : al.congruence) EXPECT_NEAR(c, 1.0, 1e-12);
}

TEST(Align, ScaleInvariant) {
  const FactorModel m = random_model(4, 5, 6, 2, 17);
  FactorModel scaled = m;
  scaled.users.col(0) *= 3.0;
  const cadence::Alignment al = align(m, scaled);
  EXPECT_EQ(al.permutation, (std::vector<int>{0, 1}));
  EXPECT_NEAR(al.congruence[0], 1.0, 1e-12);
}

TEST(Align, MatchesExhaustivePermutationSearch) {
  const FactorModel a = random_model(5, 6, 7, 3, 18);
  const FactorModel b = random_model(5, 6, 7, 3, 19);
  const cadence::Alignment al = align(a, b);

  std::vector<int> perm = {0, 1, 2};
  double best = -1.0;
  do {
    double s = 0.0;
    for (int r = 0; r < 3; ++r)
      s += cadence::component_congruence(a, r, b, perm[static_cast<std::size_t>(r)]);
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  EXPECT_NEAR(al.total, best, 1e-12);
}

TEST(Align, RankMismatchThrows) {
  const FactorModel a = random_model(3, 3, 3, 2, 20);
  const FactorModel b = random_model(3, 3, 3, 3, 21);
  EXPECT_THROW(align(a, b), std::invalid_argument);
}
