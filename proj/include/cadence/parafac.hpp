#pragma once

#include "cadence/factor_model.hpp"
#include "cadence/nnls.hpp"
#include "cadence/parallel.hpp"
#include "cadence/tensor.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadence {

struct FitConfig {
  int rank = 1;
  int max_iterations = 500;
  double tolerance = 1e-8;  // relative decrease of the squared residual
  std::uint64_t seed = 0;
};

struct FitResult {
  FactorModel model;
  std::vector<double> objective_trace;  // squared residual after each sweep
  double relative_error = 0.0;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline void fill_uniform_open(Matrix& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r) m(r, c) = 1.0 - u(rng);  // (0, 1]
}

inline Matrix symmetric_part(const Matrix& m) {
  return 0.5 * (m + m.transpose());
}

inline void add_warning(std::vector<std::string>& warnings,
                        const std::string& w) {
  if (std::find(warnings.begin(), warnings.end(), w) == warnings.end())
    warnings.push_back(w);
}

inline Index min_unfolding_rank(const Matrix& x1, const Matrix& x2,
                                const Matrix& x3) {
  Eigen::ColPivHouseholderQR<Matrix> q1(x1), q2(x2), q3(x3);
  return std::min({q1.rank(), q2.rank(), q3.rank()});
}

}  // namespace detail

/// Alternating non-negative least squares over the three modes. Per sweep,
/// each factor is the exact non-negative LS update given the other two,
/// solved by block principal pivoting on the normal equations: the Gram
/// matrix is the Hadamard product of the other factors' Grams, the right-hand
/// side the unfolding times the Khatri-Rao product. The squared residual is
/// therefore non-increasing sweep to sweep.
inline FitResult fit_parafac(const DenseTensor3& t, const FitConfig& cfg) {
  if (cfg.rank < 1) throw std::invalid_argument("fit_parafac: rank must be >= 1");
  if (cfg.max_iterations < 1)
    throw std::invalid_argument("fit_parafac: max_iterations must be >= 1");
  if (!(cfg.tolerance > 0.0))
    throw std::invalid_argument("fit_parafac: tolerance must be > 0");
  if (!t.is_nonnegative())
    throw std::invalid_argument("fit_parafac: tensor has negative entries");

  const Index I = t.dim0(), J = t.dim1(), K = t.dim2();
  const Index R = cfg.rank;

  FitResult res;
  res.seed = cfg.seed;

  const double norm_x2 = squared_frobenius_norm(t);
  if (norm_x2 == 0.0) {
    res.model.users = Matrix::Zero(I, R);
    res.model.days = Matrix::Zero(J, R);
    res.model.weeks = Matrix::Zero(K, R);
    res.objective_trace = {0.0};
    res.iterations = 1;
    res.converged = true;
    res.relative_error = 0.0;
    return res;
  }

  const Matrix x1 = unfold(t, 1);
  const Matrix x2 = unfold(t, 2);
  const Matrix x3 = unfold(t, 3);

  const Index min_rank = detail::min_unfolding_rank(x1, x2, x3);
  if (R > min_rank)
    res.warnings.push_back("requested rank " + std::to_string(R) +
                           " exceeds the smallest unfolding rank " +
                           std::to_string(min_rank));

  std::mt19937_64 rng(cfg.seed);
  FactorModel m;
  m.users.resize(I, R);
  m.days.resize(J, R);
  m.weeks.resize(K, R);
  detail::fill_uniform_open(m.users, rng);
  detail::fill_uniform_open(m.days, rng);
  detail::fill_uniform_open(m.weeks, rng);

  std::vector<int> reseeded(static_cast<std::size_t>(R), 0);
  std::vector<char> dead(static_cast<std::size_t>(R), 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double prev = -1.0;
  bool saw_ridge = false, saw_nnls_cap = false;

  for (int sweep = 0; sweep < cfg.max_iterations; ++sweep) {
    const auto update = [&](Matrix& target, const Matrix& p, const Matrix& q,
                            const Matrix& unfolding) {
      NnlsProblem prob;
      prob.gram = detail::symmetric_part(
          (p.transpose() * p).cwiseProduct(q.transpose() * q));
      prob.rhs = khatri_rao(p, q).transpose() * unfolding.transpose();
      NnlsSolution sol = nnls_solve(prob);
      if (sol.ridged) saw_ridge = true;
      for (char c : sol.converged)
        if (!c) saw_nnls_cap = true;
      target = sol.x.transpose();
      return prob;
    };

    update(m.users, m.weeks, m.days, x1);
    update(m.days, m.weeks, m.users, x2);
    // Keep the final mode's normal equations for the cheap objective below.
    NnlsProblem last = update(m.weeks, m.days, m.users, x3);

    // ||X - model||^2 = ||X||^2 - 2 <C, rhs'> + <C'C, gram> with C the
    // freshly solved week factor. Clamped at zero against cancellation noise.
    double sq = norm_x2 -
                2.0 * m.weeks.cwiseProduct(last.rhs.transpose()).sum() +
                (m.weeks.transpose() * m.weeks).cwiseProduct(last.gram).sum();
    sq = std::max(sq, 0.0);
    res.objective_trace.push_back(sq);

    if (prev >= 0.0) {
      if (prev == 0.0 || (prev - sq) < cfg.tolerance * prev) {
        res.converged = true;
        break;
      }
    }
    prev = sq;

    // Revive collapsed components once: fresh day/week noise with a zeroed
    // user column leaves the reconstruction (and the trace) unchanged, and
    // the next sweep's user update can regrow the component.
    for (Index r = 0; r < R; ++r) {
      if (dead[static_cast<std::size_t>(r)]) continue;
      const bool collapsed = m.users.col(r).lpNorm<Eigen::Infinity>() == 0.0 ||
                             m.days.col(r).lpNorm<Eigen::Infinity>() == 0.0 ||
                             m.weeks.col(r).lpNorm<Eigen::Infinity>() == 0.0;
      if (!collapsed) continue;
      if (reseeded[static_cast<std::size_t>(r)] == 0) {
        reseeded[static_cast<std::size_t>(r)] = 1;
        for (Index j = 0; j < J; ++j) m.days(j, r) = 1.0 - unit(rng);
        for (Index k = 0; k < K; ++k) m.weeks(k, r) = 1.0 - unit(rng);
        m.users.col(r).setZero();
      } else {
        dead[static_cast<std::size_t>(r)] = 1;
        m.users.col(r).setZero();
        m.days.col(r).setZero();
        m.weeks.col(r).setZero();
        detail::add_warning(res.warnings,
                            "component " + std::to_string(r) +
                                " collapsed twice and was left at zero");
      }
    }
  }

  // Canonical form for dead components: zero in every mode.
  for (Index r = 0; r < R; ++r) {
    if (m.users.col(r).lpNorm<Eigen::Infinity>() == 0.0 ||
        m.days.col(r).lpNorm<Eigen::Infinity>() == 0.0 ||
        m.weeks.col(r).lpNorm<Eigen::Infinity>() == 0.0) {
      m.users.col(r).setZero();
      m.days.col(r).setZero();
      m.weeks.col(r).setZero();
    }
  }

  if (saw_ridge)
    detail::add_warning(res.warnings,
                        "singular normal equations were ridge-regularized");
  if (saw_nnls_cap)
    detail::add_warning(res.warnings,
                        "an inner nnls column hit its exchange cap");

  res.model = std::move(m);
  res.iterations = static_cast<int>(res.objective_trace.size());
  res.relative_error = relative_error(t, res.model);
  return res;
}

struct MultiFitResult {
  FitResult best;
  std::vector<double> objectives;  // final squared residual per run
};

/// Runs fit_parafac with seeds cfg.seed, cfg.seed + 1, ... and keeps the run
/// with the lowest final objective (ties: lowest seed). Runs are independent,
/// so the outcome does not depend on the thread count.
inline MultiFitResult fit_parafac_multi(const DenseTensor3& t,
                                        const FitConfig& cfg, int n_runs,
                                        int threads = 1) {
  if (n_runs < 1)
    throw std::invalid_argument("fit_parafac_multi: n_runs must be >= 1");
  std::vector<FitResult> runs(static_cast<std::size_t>(n_runs));
  parallel_for(n_runs, threads, [&](int i) {
    FitConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(i);
    runs[static_cast<std::size_t>(i)] = fit_parafac(t, run_cfg);
  });

  MultiFitResult out;
  out.objectives.reserve(runs.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    out.objectives.push_back(runs[i].objective_trace.back());
    if (out.objectives[i] < out.objectives[best]) best = i;
  }
  out.best = std::move(runs[best]);
  return out;
}

}  // namespace cadence
