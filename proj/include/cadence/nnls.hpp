#pragma once

#include "cadence/linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cadence {

/// Multi-column non-negative least squares in normal-equation form:
/// minimize 0.5 x' gram x - x' rhs.col(n) over x >= 0, for every column.
/// gram is q x q symmetric PSD (G'G), rhs is q x n (G'Y).
struct NnlsProblem {
  Matrix gram;
  Matrix rhs;
};

struct NnlsOptions {
  double kkt_tol = 1e-10;        // relative to the largest diagonal of gram
  int max_exchange_factor = 5;   // exchange cap per column: factor * q
};

struct NnlsSolution {
  Matrix x;                      // q x n, entries >= 0 exactly
  std::vector<char> converged;   // per column
  std::vector<int> iterations;   // exchanges per column
  bool ridged = false;           // a singular gram was regularized
};

namespace detail {

inline void check_gram(const Matrix& gram, const Matrix& rhs) {
  if (gram.rows() != gram.cols())
    throw std::invalid_argument("nnls: gram matrix is not square");
  if (rhs.rows() != gram.rows())
    throw std::invalid_argument("nnls: rhs row count does not match gram");
  const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("nnls: gram matrix is not symmetric");
}

// Solve gram(F,F) x_F = rhs(F) by a dense symmetric factorization. Falls back
// to a ridged solve when the passive block is numerically singular.
inline Vector passive_solve(const Matrix& gram, const Vector& f,
                            const std::vector<Index>& passive, bool* ridged) {
  const Index p = static_cast<Index>(passive.size());
  Matrix h(p, p);
  Vector b(p);
  for (Index a = 0; a < p; ++a) {
    b(a) = f(passive[static_cast<std::size_t>(a)]);
    for (Index c = 0; c < p; ++c)
      h(a, c) = gram(passive[static_cast<std::size_t>(a)],
                     passive[static_cast<std::size_t>(c)]);
  }
  Vector sol = h.ldlt().solve(b);
  if (!sol.allFinite()) {
    const double tr = h.trace();
    const double ridge = tr > 0.0 ? 1e-12 * tr / static_cast<double>(p) : 1e-12;
    h.diagonal().array() += ridge;
    sol = h.ldlt().solve(b);
    *ridged = true;
  }
  return sol;
}

}  // namespace detail

/// Block principal pivoting. Starts from the all-bound partition and swaps
/// infeasible variables between the bound and passive sets, full blocks at a
/// time. When the infeasible count stops improving the exchange set is halved
/// each round; at size one a single variable (the one with the largest index)
/// is exchanged, which guarantees finite termination. Columns that still hit
/// the exchange cap are returned clamped and flagged non-converged.
inline NnlsSolution nnls_solve(const NnlsProblem& problem,
                               const NnlsOptions& opt = {}) {
  detail::check_gram(problem.gram, problem.rhs);
  const Index q = problem.gram.rows();
  const Index n = problem.rhs.cols();

  Matrix gram = problem.gram;
  NnlsSolution out;
  out.x = Matrix::Zero(q, n);
  out.converged.assign(static_cast<std::size_t>(n), 0);
  out.iterations.assign(static_cast<std::size_t>(n), 0);

  // A zero diagonal entry means an upstream factor column vanished; a small
  // ridge keeps the solve defined and is reported to the caller.
  const double max_diag = gram.diagonal().maxCoeff();
  const double min_diag = gram.diagonal().minCoeff();
  if (max_diag <= 0.0 || min_diag <= 1e-14 * max_diag) {
    const double tr = gram.trace();
    const double ridge = tr > 0.0 ? 1e-12 * tr / static_cast<double>(q) : 1e-12;
    gram.diagonal().array() += ridge;
    out.ridged = true;
  }
  const double eps = opt.kkt_tol * gram.diagonal().maxCoeff();
  const int max_exchanges = opt.max_exchange_factor * static_cast<int>(q);

  for (Index col = 0; col < n; ++col) {
    const Vector f = problem.rhs.col(col);
    std::vector<char> passive(static_cast<std::size_t>(q), 0);
    Vector x = Vector::Zero(q);
    int best_infeasible = static_cast<int>(q) + 1;
    int cap = -1;  // -1 = full exchange
    bool done = false;
    int iters = 0;

    while (iters < max_exchanges) {
      std::vector<Index> pidx;
      for (Index i = 0; i < q; ++i)
        if (passive[static_cast<std::size_t>(i)]) pidx.push_back(i);
      x.setZero();
      if (!pidx.empty()) {
        Vector sol = detail::passive_solve(gram, f, pidx, &out.ridged);
        for (std::size_t a = 0; a < pidx.size(); ++a)
          x(pidx[a]) = sol(static_cast<Index>(a));
      }
      Vector g = gram * x - f;

      std::vector<Index> infeasible;
      for (Index i = 0; i < q; ++i) {
        if (passive[static_cast<std::size_t>(i)] ? x(i) < -eps : g(i) < -eps)
          infeasible.push_back(i);
      }
      if (infeasible.empty()) {
        done = true;
        break;
      }

      const int ninf = static_cast<int>(infeasible.size());
      std::size_t take;
      if (ninf < best_infeasible) {
        best_infeasible = ninf;
        cap = -1;
        take = infeasible.size();
      } else {
        cap = (cap == -1) ? std::max(1, ninf / 2) : std::max(1, cap / 2);
        take = static_cast<std::size_t>(std::min(cap, ninf));
      }
      // Deterministic backup: exchange the largest-index infeasible variables.
      for (std::size_t a = 0; a < take; ++a) {
        const Index i = infeasible[infeasible.size() - 1 - a];
        passive[static_cast<std::size_t>(i)] ^= 1;
      }
      ++iters;
    }

    out.x.col(col) = x.cwiseMax(0.0);
    out.converged[static_cast<std::size_t>(col)] = done ? 1 : 0;
    out.iterations[static_cast<std::size_t>(col)] = iters;
  }
  return out;
}

}  // namespace cadence
