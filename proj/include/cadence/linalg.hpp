#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace cadence {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Column-wise Kronecker product of two matrices with equal column counts.
/// Column r of the result is kron(p.col(r), q.col(r)), so the entry at row
/// ip * q.rows() + iq equals p(ip, r) * q(iq, r).
inline Matrix khatri_rao(const Matrix& p, const Matrix& q) {
  if (p.cols() != q.cols())
    throw std::invalid_argument("khatri_rao: column counts differ (" +
                                std::to_string(p.cols()) + " vs " +
                                std::to_string(q.cols()) + ")");
  Matrix out(p.rows() * q.rows(), p.cols());
  for (Index r = 0; r < p.cols(); ++r)
    for (Index i = 0; i < p.rows(); ++i)
      out.col(r).segment(i * q.rows(), q.rows()) = p(i, r) * q.col(r);
  return out;
}

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// rel_tol * sigma_max are treated as zero; *rank_deficient reports whether
/// any were dropped.
inline Matrix pseudo_inverse(const Matrix& m, double rel_tol = 1e-12,
                             bool* rank_deficient = nullptr) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rel_tol * sv(0) : 0.0;
  Vector inv = Vector::Zero(sv.size());
  bool dropped = false;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0)
      inv(i) = 1.0 / sv(i);
    else
      dropped = true;
  }
  if (rank_deficient) *rank_deficient = dropped;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

inline double cosine_similarity(const Vector& u, const Vector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return u.dot(v) / (nu * nv);
}

}  // namespace cadence
