#pragma once

#include "cadence/tensor.hpp"

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadence {

/// Rank-R multilinear model: the tensor is approximated by
///   sum_r w_r * users.col(r) o days.col(r) o weeks.col(r)
/// with all factors non-negative. `weights` is empty (all ones) until
/// normalize_components absorbs the day/week column magnitudes into it.
struct FactorModel {
  Matrix users;    // dim0 x R, per-user component memberships
  Matrix days;     // dim1 x R, intra-week activity profiles
  Matrix weeks;    // dim2 x R, inter-week activity profiles
  Vector weights;  // length R, or empty

  Index rank() const { return users.cols(); }
};

namespace detail {

inline void check_equal_rank(const FactorModel& m, const char* where) {
  if (m.users.cols() != m.days.cols() || m.users.cols() != m.weeks.cols())
    throw std::invalid_argument(std::string(where) +
                                ": factor column counts differ");
  if (m.weights.size() != 0 && m.weights.size() != m.users.cols())
    throw std::invalid_argument(std::string(where) +
                                ": weights length does not match rank");
}

inline Matrix weighted_users(const FactorModel& m) {
  if (m.weights.size() == 0) return m.users;
  return m.users * m.weights.asDiagonal();
}

}  // namespace detail

inline DenseTensor3 reconstruct(const FactorModel& m) {
  detail::check_equal_rank(m, "reconstruct");
  const Index I = m.users.rows(), J = m.days.rows(), K = m.weeks.rows();
  Matrix mode1 = detail::weighted_users(m) * khatri_rao(m.weeks, m.days).transpose();
  return fold(mode1, 1, I, J, K);
}

/// ||t - reconstruct(m)||_F / ||t||_F. A zero tensor matched by a zero model
/// gives 0; a zero tensor against a non-zero model gives +inf.
inline double relative_error(const DenseTensor3& t, const FactorModel& m) {
  detail::check_equal_rank(m, "relative_error");
  if (m.users.rows() != t.dim0() || m.days.rows() != t.dim1() ||
      m.weeks.rows() != t.dim2())
    throw std::invalid_argument("relative_error: tensor and model shapes differ");
  DenseTensor3 hat = reconstruct(m);
  double num = 0.0, den = 0.0;
  const auto& a = t.data();
  const auto& b = hat.data();
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double d = a[n] - b[n];
    num += d * d;
    den += a[n] * a[n];
  }
  if (den == 0.0)
    return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num) / std::sqrt(den);
}

/// Rescales every day and week column to unit Euclidean norm and moves the
/// magnitude into `weights`, so user memberships are comparable across
/// components. Zero columns keep weight 0. The reconstruction is unchanged.
inline FactorModel normalize_components(const FactorModel& m) {
  detail::check_equal_rank(m, "normalize_components");
  FactorModel out = m;
  const Index r = m.rank();
  Vector w = m.weights.size() ? m.weights : Vector::Ones(r);
  for (Index c = 0; c < r; ++c) {
    const double nb = out.days.col(c).norm();
    const double nc = out.weeks.col(c).norm();
    if (nb > 0.0) out.days.col(c) /= nb;
    if (nc > 0.0) out.weeks.col(c) /= nc;
    w(c) *= nb * nc;
  }
  out.weights = w;
  return out;
}

/// Per-user component shares: each row of `memberships` divided by its sum.
/// Rows summing to zero get the uniform share vector and are reported.
struct MembershipShares {
  Matrix shares;
  std::vector<Index> zero_rows;
};

inline MembershipShares membership_shares(const Matrix& memberships) {
  MembershipShares out;
  out.shares = memberships;
  const Index r = memberships.cols();
  if (r < 1) throw std::invalid_argument("membership_shares: no components");
  for (Index i = 0; i < memberships.rows(); ++i) {
    const double s = memberships.row(i).sum();
    if (s > 0.0)
      out.shares.row(i) /= s;
    else {
      out.shares.row(i).setConstant(1.0 / static_cast<double>(r));
      out.zero_rows.push_back(i);
    }
  }
  return out;
}

/// Component matching between two models of equal rank. The score of a pair
/// is the product over the three modes of the cosine similarity of the
/// corresponding columns, so it is invariant to positive rescaling.
struct Alignment {
  std::vector<int> permutation;    // reference component r <-> other component permutation[r]
  std::vector<double> congruence;  // per reference component, in [0, 1] for non-negative factors
  double total = 0.0;
};

inline double component_congruence(const FactorModel& a, Index ra,
                                   const FactorModel& b, Index rb) {
  return cosine_similarity(a.users.col(ra), b.users.col(rb)) *
         cosine_similarity(a.days.col(ra), b.days.col(rb)) *
         cosine_similarity(a.weeks.col(ra), b.weeks.col(rb));
}

/// Finds the permutation of `other`'s components maximizing the summed
/// congruence, exactly, by dynamic programming over assignment subsets.
/// Exact ties resolve to the lexicographically smallest permutation.
inline Alignment align(const FactorModel& reference, const FactorModel& other) {
  detail::check_equal_rank(reference, "align");
  detail::check_equal_rank(other, "align");
  const Index r = reference.rank();
  if (r != other.rank())
    throw std::invalid_argument("align: models have different ranks");
  if (r > 20) throw std::invalid_argument("align: rank too large");

  Matrix score(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j)
      score(i, j) = component_congruence(reference, i, other, j);

  // best[mask] = max sum assigning reference components popcount(mask).. to
  // the columns outside mask.
  const std::size_t full = (std::size_t{1} << r) - 1;
  std::vector<double> best(full + 1, 0.0);
  for (std::size_t mask = full; mask-- > 0;) {
    const int row = __builtin_popcountll(mask);
    double b = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < r; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      const double v = score(row, j) + best[mask | (std::size_t{1} << j)];
      if (v > b) b = v;
    }
    best[mask] = b;
  }

  Alignment out;
  out.permutation.resize(static_cast<std::size_t>(r));
  out.congruence.resize(static_cast<std::size_t>(r));
  std::size_t mask = 0;
  for (Index row = 0; row < r; ++row) {
    for (Index j = 0; j < r; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      if (score(row, j) + best[mask | (std::size_t{1} << j)] == best[mask]) {
        out.permutation[row] = static_cast<int>(j);
        out.congruence[row] = score(row, j);
        out.total += score(row, j);
        mask |= std::size_t{1} << j;
        break;
      }
    }
  }
  return out;
}

}  // namespace cadence
