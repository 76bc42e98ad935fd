#pragma once

#include "cadence/factor_model.hpp"
#include "cadence/parafac.hpp"
#include "cadence/special_functions.hpp"
#include "cadence/tensor.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadence {

/// Least-squares Tucker3 core for fixed factor matrices, together with the
/// superdiagonal target it is scored against.
struct CoreTensor {
  DenseTensor3 g;       // R x R x R
  DenseTensor3 target;  // superdiagonal of ones
  bool rank_deficient = false;
};

inline DenseTensor3 superdiagonal_tensor(Index r) {
  DenseTensor3 t(r, r, r);
  for (Index i = 0; i < r; ++i) t(i, i, i) = 1.0;
  return t;
}

/// Solves min_g || t - g x1 users x2 days x3 weeks ||_F by applying the
/// factor pseudoinverses mode-wise, which equals the full vectorized LS
/// solution whenever the factors have full column rank. Model weights, when
/// present, are folded into the user factors so an exact model yields the
/// identity core. A zero (or numerically dependent) factor column is
/// reported through rank_deficient.
inline CoreTensor compute_core(const DenseTensor3& t, const FactorModel& m) {
  detail::check_equal_rank(m, "compute_core");
  if (m.users.rows() != t.dim0() || m.days.rows() != t.dim1() ||
      m.weeks.rows() != t.dim2())
    throw std::invalid_argument("compute_core: tensor and model shapes differ");
  const Index r = m.rank();
  if (r < 1) throw std::invalid_argument("compute_core: model has no components");

  bool rd_users = false, rd_days = false, rd_weeks = false;
  const Matrix pinv_users =
      pseudo_inverse(detail::weighted_users(m), 1e-12, &rd_users);
  const Matrix pinv_days = pseudo_inverse(m.days, 1e-12, &rd_days);
  const Matrix pinv_weeks = pseudo_inverse(m.weeks, 1e-12, &rd_weeks);

  CoreTensor out;
  out.g = ttm(ttm(ttm(t, pinv_users, 1), pinv_days, 2), pinv_weeks, 3);
  out.target = superdiagonal_tensor(r);
  out.rank_deficient = rd_users || rd_days || rd_weeks;
  return out;
}

/// 100 * (1 - ||g - target||_F^2 / R). 100 means a perfectly superdiagonal
/// core; values fall (and may go negative) when component interactions grow.
inline double core_consistency_from_core(const DenseTensor3& g) {
  if (g.dim0() != g.dim1() || g.dim0() != g.dim2())
    throw std::invalid_argument("core_consistency_from_core: core must be cubic");
  const Index r = g.dim0();
  double ss = 0.0;
  for (Index p = 0; p < r; ++p)
    for (Index mn = 0; mn < r; ++mn)
      for (Index n = 0; n < r; ++n) {
        const double lambda = (n == mn && mn == p) ? 1.0 : 0.0;
        const double d = g(n, mn, p) - lambda;
        ss += d * d;
      }
  return 100.0 * (1.0 - ss / static_cast<double>(r));
}

inline double core_consistency(const DenseTensor3& t, const FactorModel& m) {
  return core_consistency_from_core(compute_core(t, m).g);
}

struct CcRankStats {
  int rank = 0;
  std::vector<double> values;  // one consistency score per run, NaN = failed
  double mean = std::numeric_limits<double>::quiet_NaN();
  double ci_half_width = std::numeric_limits<double>::quiet_NaN();
  bool selected = false;
  int failed_runs = 0;
};

struct CcReport {
  std::vector<CcRankStats> per_rank;
  double threshold = 85.0;
  int n_runs = 0;
  std::uint64_t base_seed = 0;
  int selected_rank = -1;  // -1: no rank reached the threshold
};

/// Rank-selection protocol: for every candidate rank, fit n_runs models with
/// seeds base_cfg.seed + run and score each against the tensor; report the
/// per-rank mean with a Student-t 95% confidence half-width, and select the
/// largest rank whose mean clears the threshold.
inline CcReport cc_scan(const DenseTensor3& t, const std::vector<int>& ranks,
                        int n_runs, const FitConfig& base_cfg,
                        double threshold = 85.0, int threads = 1) {
  if (ranks.empty()) throw std::invalid_argument("cc_scan: no ranks given");
  if (n_runs < 1) throw std::invalid_argument("cc_scan: n_runs must be >= 1");

  CcReport report;
  report.threshold = threshold;
  report.n_runs = n_runs;
  report.base_seed = base_cfg.seed;
  report.per_rank.resize(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    report.per_rank[i].rank = ranks[i];
    report.per_rank[i].values.assign(
        static_cast<std::size_t>(n_runs),
        std::numeric_limits<double>::quiet_NaN());
  }

  const int jobs = static_cast<int>(ranks.size()) * n_runs;
  parallel_for(jobs, threads, [&](int job) {
    const std::size_t ri = static_cast<std::size_t>(job / n_runs);
    const int run = job % n_runs;
    FitConfig cfg = base_cfg;
    cfg.rank = ranks[ri];
    cfg.seed = base_cfg.seed + static_cast<std::uint64_t>(run);
    try {
      const FitResult fit = fit_parafac(t, cfg);
      report.per_rank[ri].values[static_cast<std::size_t>(run)] =
          core_consistency(t, fit.model);
    } catch (const std::exception&) {
      // Reported as a failed run below.
    }
  });

  for (auto& stats : report.per_rank) {
    double sum = 0.0;
    int n = 0;
    for (double v : stats.values) {
      if (std::isnan(v)) {
        ++stats.failed_runs;
        continue;
      }
      sum += v;
      ++n;
    }
    if (n == 0) continue;  // rank reported with no consistency value
    stats.mean = sum / n;
    if (n >= 2) {
      double ss = 0.0;
      for (double v : stats.values)
        if (!std::isnan(v)) ss += (v - stats.mean) * (v - stats.mean);
      const double sd = std::sqrt(ss / (n - 1));
      stats.ci_half_width =
          student_t_quantile(0.975, n - 1) * sd / std::sqrt(static_cast<double>(n));
    }
  }

  for (auto& stats : report.per_rank) {
    if (!std::isnan(stats.mean) && stats.mean >= threshold &&
        stats.rank > report.selected_rank)
      report.selected_rank = stats.rank;
  }
  for (auto& stats : report.per_rank)
    stats.selected = (stats.rank == report.selected_rank);

  return report;
}

}  // namespace cadence
