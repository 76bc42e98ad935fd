#pragma once

#include "cadence/linalg.hpp"
#include "cadence/parallel.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cadence {

struct ClusteringResult {
  std::vector<int> labels;            // per point, 0..k-1
  std::vector<Index> medoid_indices;  // k-medoids only
  Matrix centers;                     // k x d (medoid coordinates or centroids)
  double total_cost = 0.0;            // sum of point-to-center Euclidean distances
  std::vector<double> objective_trace;  // per-iteration method objective
  std::string method;
  std::uint64_t seed = 0;
};

namespace detail {

inline void check_points(const Matrix& points, int k) {
  if (points.rows() < 1) throw std::invalid_argument("clustering: no points");
  if (!points.allFinite())
    throw std::invalid_argument("clustering: points must be finite");
  if (k < 1 || k > points.rows())
    throw std::invalid_argument("clustering: k must be in [1, n] (k=" +
                                std::to_string(k) + ", n=" +
                                std::to_string(points.rows()) + ")");
}

inline std::vector<Index> sample_distinct(Index n, int k, std::mt19937_64& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

inline double point_distance(const Matrix& points, Index a, Index b) {
  return (points.row(a) - points.row(b)).norm();
}

}  // namespace detail

/// PAM-style k-medoids: points are assigned to their nearest medoid and
/// (medoid, non-medoid) swaps are applied greedily, best first, until no swap
/// reduces the total cost. Every accepted swap strictly decreases the cost,
/// so the loop terminates. Ties in assignment go to the lowest cluster id,
/// except that a medoid always belongs to its own cluster.
inline ClusteringResult kmedoids(const Matrix& points, int k,
                                 std::uint64_t seed) {
  detail::check_points(points, k);
  const Index n = points.rows();
  std::mt19937_64 rng(seed);
  std::vector<Index> medoids = detail::sample_distinct(n, k, rng);

  ClusteringResult res;
  res.method = "kmedoids";
  res.seed = seed;
  res.labels.assign(static_cast<std::size_t>(n), 0);

  std::vector<char> is_medoid(static_cast<std::size_t>(n), 0);
  std::vector<double> d1(static_cast<std::size_t>(n)), d2(static_cast<std::size_t>(n));
  std::vector<int> c1(static_cast<std::size_t>(n));

  const auto refresh = [&] {
    std::fill(is_medoid.begin(), is_medoid.end(), 0);
    for (int c = 0; c < k; ++c)
      is_medoid[static_cast<std::size_t>(medoids[static_cast<std::size_t>(c)])] = 1;
    double cost = 0.0;
    for (Index p = 0; p < n; ++p) {
      double best = std::numeric_limits<double>::infinity();
      double second = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        const double d = detail::point_distance(
            points, p, medoids[static_cast<std::size_t>(c)]);
        if (d < best) {
          second = best;
          best = d;
          best_c = c;
        } else if (d < second) {
          second = d;
        }
      }
      d1[static_cast<std::size_t>(p)] = best;
      d2[static_cast<std::size_t>(p)] = second;
      c1[static_cast<std::size_t>(p)] = best_c;
      cost += best;
    }
    return cost;
  };

  double cost = refresh();
  res.objective_trace.push_back(cost);

  for (long round = 0; round < 100000; ++round) {
    // Best strictly improving swap; candidate cost via the cached nearest and
    // second-nearest distances, O(n) per candidate.
    double best_cost = cost;
    int best_slot = -1;
    Index best_point = -1;
    for (int c = 0; c < k; ++c) {
      for (Index x = 0; x < n; ++x) {
        if (is_medoid[static_cast<std::size_t>(x)]) continue;
        double cand = 0.0;
        for (Index p = 0; p < n; ++p) {
          const double keep = c1[static_cast<std::size_t>(p)] == c
                                  ? d2[static_cast<std::size_t>(p)]
                                  : d1[static_cast<std::size_t>(p)];
          cand += std::min(keep, detail::point_distance(points, p, x));
        }
        if (cand < best_cost) {
          best_cost = cand;
          best_slot = c;
          best_point = x;
        }
      }
    }
    if (best_slot < 0) break;
    medoids[static_cast<std::size_t>(best_slot)] = best_point;
    cost = refresh();
    res.objective_trace.push_back(cost);
  }

  for (Index p = 0; p < n; ++p)
    res.labels[static_cast<std::size_t>(p)] = c1[static_cast<std::size_t>(p)];
  for (int c = 0; c < k; ++c)
    res.labels[static_cast<std::size_t>(medoids[static_cast<std::size_t>(c)])] = c;

  res.medoid_indices = medoids;
  res.centers.resize(k, points.cols());
  for (int c = 0; c < k; ++c)
    res.centers.row(c) = points.row(medoids[static_cast<std::size_t>(c)]);
  res.total_cost = cost;
  return res;
}

/// Lloyd's algorithm from k seeded points. An emptied cluster is reseeded to
/// the point farthest from its current center. objective_trace records the
/// within-cluster *squared* distance cost; total_cost reports the plain
/// distance sum for comparability with k-medoids.
inline ClusteringResult kmeans(const Matrix& points, int k, std::uint64_t seed,
                               int max_iterations = 500) {
  detail::check_points(points, k);
  const Index n = points.rows();
  std::mt19937_64 rng(seed);
  const std::vector<Index> init = detail::sample_distinct(n, k, rng);

  ClusteringResult res;
  res.method = "kmeans";
  res.seed = seed;
  res.labels.assign(static_cast<std::size_t>(n), -1);
  res.centers.resize(k, points.cols());
  for (int c = 0; c < k; ++c)
    res.centers.row(c) = points.row(init[static_cast<std::size_t>(c)]);

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool any_change = false;
    for (Index p = 0; p < n; ++p) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points.row(p) - res.centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (res.labels[static_cast<std::size_t>(p)] != best) {
        res.labels[static_cast<std::size_t>(p)] = best;
        any_change = true;
      }
    }

    // Repair empty clusters before recomputing means.
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (int lab : res.labels) ++counts[static_cast<std::size_t>(lab)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Index far = 0;
      double far_d = -1.0;
      for (Index p = 0; p < n; ++p) {
        if (counts[static_cast<std::size_t>(
                res.labels[static_cast<std::size_t>(p)])] <= 1)
          continue;  // do not empty another cluster
        const double d =
            (points.row(p) -
             res.centers.row(res.labels[static_cast<std::size_t>(p)]))
                .squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = p;
        }
      }
      --counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(far)])];
      res.labels[static_cast<std::size_t>(far)] = c;
      ++counts[static_cast<std::size_t>(c)];
      any_change = true;
    }

    for (int c = 0; c < k; ++c) res.centers.row(c).setZero();
    for (Index p = 0; p < n; ++p)
      res.centers.row(res.labels[static_cast<std::size_t>(p)]) += points.row(p);
    for (int c = 0; c < k; ++c)
      res.centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

    double sq_cost = 0.0;
    for (Index p = 0; p < n; ++p)
      sq_cost += (points.row(p) -
                  res.centers.row(res.labels[static_cast<std::size_t>(p)]))
                     .squaredNorm();
    res.objective_trace.push_back(sq_cost);
    if (!any_change) break;
  }

  res.total_cost = 0.0;
  for (Index p = 0; p < n; ++p)
    res.total_cost +=
        (points.row(p) - res.centers.row(res.labels[static_cast<std::size_t>(p)]))
            .norm();
  return res;
}

struct SilhouetteResult {
  std::vector<double> coefficients;  // per point, in [-1, 1]
  double mean = 0.0;
};

/// Standard silhouette: s = (b - a) / max(a, b) with a the mean distance to
/// the point's own cluster (excluding itself) and b the smallest mean
/// distance to any other cluster. Singleton points score 0.
inline SilhouetteResult silhouette(const Matrix& points,
                                   const std::vector<int>& labels) {
  const Index n = points.rows();
  if (static_cast<Index>(labels.size()) != n)
    throw std::invalid_argument("silhouette: label count does not match points");
  int k = 0;
  for (int lab : labels) {
    if (lab < 0) throw std::invalid_argument("silhouette: negative label");
    k = std::max(k, lab + 1);
  }
  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (int lab : labels) ++counts[static_cast<std::size_t>(lab)];
  if (k < 2) throw std::invalid_argument("silhouette: need at least 2 clusters");
  for (Index c : counts)
    if (c == 0) throw std::invalid_argument("silhouette: empty cluster id");

  SilhouetteResult res;
  res.coefficients.assign(static_cast<std::size_t>(n), 0.0);
  for (Index p = 0; p < n; ++p) {
    std::vector<double> mean_d(static_cast<std::size_t>(k), 0.0);
    for (Index q = 0; q < n; ++q) {
      if (q == p) continue;
      mean_d[static_cast<std::size_t>(labels[static_cast<std::size_t>(q)])] +=
          detail::point_distance(points, p, q);
    }
    const int own = labels[static_cast<std::size_t>(p)];
    double a = 0.0;
    bool singleton = counts[static_cast<std::size_t>(own)] == 1;
    if (!singleton)
      a = mean_d[static_cast<std::size_t>(own)] /
          static_cast<double>(counts[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own) continue;
      b = std::min(b, mean_d[static_cast<std::size_t>(c)] /
                          static_cast<double>(counts[static_cast<std::size_t>(c)]));
    }
    double s = 0.0;
    if (!singleton && std::max(a, b) > 0.0) s = (b - a) / std::max(a, b);
    res.coefficients[static_cast<std::size_t>(p)] = s;
    res.mean += s;
  }
  res.mean /= static_cast<double>(n);
  return res;
}

/// k-medoids cost per candidate k, best of `restarts` seeded runs each.
/// Local optima mean the curve is not guaranteed monotone; it is reported
/// as computed. Runs are independent, so the thread count never changes
/// the table.
inline std::vector<std::pair<int, double>> elbow_curve(
    const Matrix& points, const std::vector<int>& k_values, std::uint64_t seed,
    int restarts = 1, int threads = 1) {
  if (restarts < 1) throw std::invalid_argument("elbow_curve: restarts must be >= 1");
  std::vector<double> costs(k_values.size() * static_cast<std::size_t>(restarts));
  parallel_for(static_cast<int>(costs.size()), threads, [&](int job) {
    const int k = k_values[static_cast<std::size_t>(job / restarts)];
    const int r = job % restarts;
    costs[static_cast<std::size_t>(job)] =
        kmedoids(points, k, seed + static_cast<std::uint64_t>(r)).total_cost;
  });
  std::vector<std::pair<int, double>> curve;
  curve.reserve(k_values.size());
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r)
      best = std::min(best, costs[i * static_cast<std::size_t>(restarts) +
                                  static_cast<std::size_t>(r)]);
    curve.emplace_back(k_values[i], best);
  }
  return curve;
}

}  // namespace cadence
