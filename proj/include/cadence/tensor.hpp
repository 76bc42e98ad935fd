#pragma once

#include "cadence/linalg.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cadence {

/// Dense 3-way tensor with shape (dim0, dim1, dim2), stored contiguously with
/// the first index varying fastest. In the transaction pipeline the axes are
/// (user, day-of-week, week) and every entry is a non-negative count.
class DenseTensor3 {
 public:
  DenseTensor3() = default;

  DenseTensor3(Index d0, Index d1, Index d2, double fill = 0.0)
      : d0_(d0), d1_(d1), d2_(d2) {
    if (d0 < 1 || d1 < 1 || d2 < 1)
      throw std::invalid_argument("DenseTensor3: shape components must be >= 1");
    values_.assign(static_cast<std::size_t>(d0 * d1 * d2), fill);
  }

  Index dim0() const { return d0_; }
  Index dim1() const { return d1_; }
  Index dim2() const { return d2_; }
  Index size() const { return d0_ * d1_ * d2_; }

  double operator()(Index i, Index j, Index k) const {
    assert(in_range(i, j, k));
    return values_[flat(i, j, k)];
  }
  double& operator()(Index i, Index j, Index k) {
    assert(in_range(i, j, k));
    return values_[flat(i, j, k)];
  }

  const std::vector<double>& data() const { return values_; }
  std::vector<double>& data() { return values_; }

  bool is_nonnegative() const {
    for (double v : values_)
      if (v < 0.0) return false;
    return true;
  }

 private:
  std::size_t flat(Index i, Index j, Index k) const {
    return static_cast<std::size_t>(i + d0_ * (j + d1_ * k));
  }
  bool in_range(Index i, Index j, Index k) const {
    return i >= 0 && i < d0_ && j >= 0 && j < d1_ && k >= 0 && k < d2_;
  }

  Index d0_ = 0, d1_ = 0, d2_ = 0;
  std::vector<double> values_;
};

inline double frobenius_norm(const DenseTensor3& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

inline double squared_frobenius_norm(const DenseTensor3& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return s;
}

/// Mode-n matricization, modes numbered 1..3. Entry (i,j,k) lands at
///   mode 1: row i, column j + dim1*k      (dim0 x dim1*dim2)
///   mode 2: row j, column i + dim0*k      (dim1 x dim0*dim2)
///   mode 3: row k, column i + dim0*j      (dim2 x dim0*dim1)
/// i.e. the lower-numbered remaining axis always varies fastest along columns.
inline Matrix unfold(const DenseTensor3& t, int mode) {
  const Index I = t.dim0(), J = t.dim1(), K = t.dim2();
  switch (mode) {
    case 1: {
      Matrix m(I, J * K);
      for (Index k = 0; k < K; ++k)
        for (Index j = 0; j < J; ++j)
          for (Index i = 0; i < I; ++i) m(i, j + J * k) = t(i, j, k);
      return m;
    }
    case 2: {
      Matrix m(J, I * K);
      for (Index k = 0; k < K; ++k)
        for (Index j = 0; j < J; ++j)
          for (Index i = 0; i < I; ++i) m(j, i + I * k) = t(i, j, k);
      return m;
    }
    case 3: {
      Matrix m(K, I * J);
      for (Index k = 0; k < K; ++k)
        for (Index j = 0; j < J; ++j)
          for (Index i = 0; i < I; ++i) m(k, i + I * j) = t(i, j, k);
      return m;
    }
    default:
      throw std::invalid_argument("unfold: mode must be 1, 2 or 3 (got " +
                                  std::to_string(mode) + ")");
  }
}

/// Inverse of unfold for the given target shape.
inline DenseTensor3 fold(const Matrix& m, int mode, Index d0, Index d1,
                         Index d2) {
  DenseTensor3 t(d0, d1, d2);
  const auto expect = [&](Index rows, Index cols) {
    if (m.rows() != rows || m.cols() != cols)
      throw std::invalid_argument("fold: matrix is " + std::to_string(m.rows()) +
                                  "x" + std::to_string(m.cols()) +
                                  ", expected " + std::to_string(rows) + "x" +
                                  std::to_string(cols));
  };
  switch (mode) {
    case 1:
      expect(d0, d1 * d2);
      for (Index k = 0; k < d2; ++k)
        for (Index j = 0; j < d1; ++j)
          for (Index i = 0; i < d0; ++i) t(i, j, k) = m(i, j + d1 * k);
      return t;
    case 2:
      expect(d1, d0 * d2);
      for (Index k = 0; k < d2; ++k)
        for (Index j = 0; j < d1; ++j)
          for (Index i = 0; i < d0; ++i) t(i, j, k) = m(j, i + d0 * k);
      return t;
    case 3:
      expect(d2, d0 * d1);
      for (Index k = 0; k < d2; ++k)
        for (Index j = 0; j < d1; ++j)
          for (Index i = 0; i < d0; ++i) t(i, j, k) = m(k, i + d0 * j);
      return t;
    default:
      throw std::invalid_argument("fold: mode must be 1, 2 or 3");
  }
}

/// Mode-n product: contracts the given mode of t with the columns of m.
/// m must have as many columns as the contracted mode is long; the result
/// replaces that mode's extent with m.rows().
inline DenseTensor3 ttm(const DenseTensor3& t, const Matrix& m, int mode) {
  Index dims[3] = {t.dim0(), t.dim1(), t.dim2()};
  if (mode < 1 || mode > 3)
    throw std::invalid_argument("ttm: mode must be 1, 2 or 3");
  if (m.cols() != dims[mode - 1])
    throw std::invalid_argument("ttm: matrix has " + std::to_string(m.cols()) +
                                " columns, mode extent is " +
                                std::to_string(dims[mode - 1]));
  dims[mode - 1] = m.rows();
  Matrix prod = m * unfold(t, mode);
  return fold(prod, mode, dims[0], dims[1], dims[2]);
}

}  // namespace cadence
