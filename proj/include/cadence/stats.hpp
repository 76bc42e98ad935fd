#pragma once

#include "cadence/demographics.hpp"
#include "cadence/factor_model.hpp"
#include "cadence/linalg.hpp"
#include "cadence/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadence {

enum class NullModel {
  PopulationShares,  // expected = cluster size * population category share
  RowColumnProduct   // expected = row total * column total / grand total
};

struct ContingencyTable {
  Matrix observed;  // categories x clusters
  Matrix expected;
  Attribute attribute = Attribute::Gender;
  NullModel null_model = NullModel::PopulationShares;
  std::vector<int> cluster_ids;  // column meaning
  int excluded_users = 0;        // labeled users without demographics
};

struct ChiSquaredResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int cells_dropped = 0;         // expected count exactly zero
  int cells_small_expected = 0;  // 0 < expected < 5
};

namespace detail {

struct LabeledCategories {
  std::vector<int> categories;  // per kept user
  std::vector<int> labels;
  std::vector<int> cluster_ids;  // sorted distinct labels
  int excluded = 0;
};

inline LabeledCategories gather_categories(
    const std::vector<std::string>& user_ids, const std::vector<int>& labels,
    const DemographicTable& demo, Attribute attribute) {
  if (user_ids.size() != labels.size())
    throw std::invalid_argument("contingency: user/label count mismatch");
  LabeledCategories out;
  std::set<int> ids;
  for (std::size_t i = 0; i < user_ids.size(); ++i) {
    if (labels[i] < 0)
      throw std::invalid_argument("contingency: negative cluster label");
    const DemographicRecord* rec = demo.find(user_ids[i]);
    if (!rec) {
      ++out.excluded;
      continue;
    }
    out.categories.push_back(category_of(*rec, attribute));
    out.labels.push_back(labels[i]);
    ids.insert(labels[i]);
  }
  out.cluster_ids.assign(ids.begin(), ids.end());
  if (out.cluster_ids.empty())
    throw std::invalid_argument("contingency: no users with demographics");
  return out;
}

}  // namespace detail

/// Observed counts per (category, cluster) with expected counts under the
/// whole-population null: every cluster is expected to mirror the population
/// category shares.
inline ContingencyTable contingency(const std::vector<std::string>& user_ids,
                                    const std::vector<int>& labels,
                                    const DemographicTable& demo,
                                    Attribute attribute) {
  const auto data = detail::gather_categories(user_ids, labels, demo, attribute);
  const int n_cat = category_count(attribute);
  const int n_clu = static_cast<int>(data.cluster_ids.size());

  ContingencyTable table;
  table.attribute = attribute;
  table.null_model = NullModel::PopulationShares;
  table.cluster_ids = data.cluster_ids;
  table.excluded_users = data.excluded;
  table.observed = Matrix::Zero(n_cat, n_clu);

  std::vector<double> pop(static_cast<std::size_t>(n_cat), 0.0);
  for (std::size_t i = 0; i < data.categories.size(); ++i) {
    const auto col = std::lower_bound(data.cluster_ids.begin(),
                                      data.cluster_ids.end(), data.labels[i]) -
                     data.cluster_ids.begin();
    table.observed(data.categories[i], col) += 1.0;
    pop[static_cast<std::size_t>(data.categories[i])] += 1.0;
  }
  const double total = static_cast<double>(data.categories.size());
  table.expected = Matrix::Zero(n_cat, n_clu);
  for (int c = 0; c < n_clu; ++c) {
    const double cluster_size = table.observed.col(c).sum();
    for (int l = 0; l < n_cat; ++l)
      table.expected(l, c) = cluster_size * pop[static_cast<std::size_t>(l)] / total;
  }
  return table;
}

/// Two-cluster table with the usual independence expectations
/// (row total x column total / grand total).
inline ContingencyTable contingency_pair(const std::vector<std::string>& user_ids,
                                         const std::vector<int>& labels,
                                         const DemographicTable& demo,
                                         Attribute attribute, int cluster_x,
                                         int cluster_y) {
  if (cluster_x == cluster_y)
    throw std::invalid_argument("contingency_pair: clusters must differ");
  const auto data = detail::gather_categories(user_ids, labels, demo, attribute);
  const int n_cat = category_count(attribute);

  ContingencyTable table;
  table.attribute = attribute;
  table.null_model = NullModel::RowColumnProduct;
  table.cluster_ids = {cluster_x, cluster_y};
  table.excluded_users = data.excluded;
  table.observed = Matrix::Zero(n_cat, 2);
  for (std::size_t i = 0; i < data.categories.size(); ++i) {
    if (data.labels[i] == cluster_x)
      table.observed(data.categories[i], 0) += 1.0;
    else if (data.labels[i] == cluster_y)
      table.observed(data.categories[i], 1) += 1.0;
  }
  const double total = table.observed.sum();
  if (total <= 0.0)
    throw std::invalid_argument("contingency_pair: both clusters are empty");
  table.expected = Matrix::Zero(n_cat, 2);
  for (int l = 0; l < n_cat; ++l)
    for (int c = 0; c < 2; ++c)
      table.expected(l, c) =
          table.observed.row(l).sum() * table.observed.col(c).sum() / total;
  return table;
}

/// Pearson statistic over all cells with a positive expected count. Cells
/// with expected count exactly zero are dropped and reported; cells below 5
/// are counted as a small-sample warning but kept. Degrees of freedom use the
/// rows that survive dropping: (rows-1)(cols-1) for independence tables,
/// (rows-1)*cols for the fixed-population null.
inline ChiSquaredResult chi_squared_test(const ContingencyTable& table) {
  ChiSquaredResult res;
  const Index rows = table.observed.rows(), cols = table.observed.cols();
  int rows_kept = 0;
  for (Index l = 0; l < rows; ++l) {
    if (table.expected.row(l).sum() > 0.0) ++rows_kept;
    for (Index c = 0; c < cols; ++c) {
      const double e = table.expected(l, c);
      const double d = table.observed(l, c);
      if (e == 0.0) {
        ++res.cells_dropped;
        continue;
      }
      if (e < 5.0) ++res.cells_small_expected;
      res.statistic += (d - e) * (d - e) / e;
    }
  }
  if (res.cells_dropped == rows * cols)
    throw std::domain_error("chi_squared_test: every cell has expected count 0");
  res.dof = table.null_model == NullModel::RowColumnProduct
                ? (rows_kept - 1) * (static_cast<int>(cols) - 1)
                : (rows_kept - 1) * static_cast<int>(cols);
  if (res.dof < 1) {
    res.dof = 0;
    res.p_value = 1.0;
  } else {
    res.p_value = chi_squared_sf(res.statistic, res.dof);
  }
  return res;
}

inline std::string significance_stars(double corrected_p,
                                      const std::vector<double>& levels = {
                                          0.1, 0.05, 0.01, 0.001}) {
  std::string stars;
  for (double level : levels)
    if (corrected_p < level) stars += '*';
  return stars;
}

struct PairwiseTest {
  int cluster_x = 0;
  int cluster_y = 0;
  ChiSquaredResult test;
  double corrected_p = 1.0;  // Bonferroni: p * number of pairs, capped at 1
  std::string significance;
};

/// One independence test per unordered cluster pair; the Bonferroni factor is
/// the number of pairs tested for this attribute.
inline std::vector<PairwiseTest> pairwise_tests(
    const std::vector<std::string>& user_ids, const std::vector<int>& labels,
    const DemographicTable& demo, Attribute attribute,
    const std::vector<double>& alpha_levels = {0.1, 0.05, 0.01, 0.001}) {
  const auto data = detail::gather_categories(user_ids, labels, demo, attribute);
  if (data.cluster_ids.size() < 2)
    throw std::invalid_argument("pairwise_tests: need at least 2 clusters");
  const std::size_t n = data.cluster_ids.size();
  const double n_tests = static_cast<double>(n * (n - 1) / 2);

  std::vector<PairwiseTest> out;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      PairwiseTest pt;
      pt.cluster_x = data.cluster_ids[a];
      pt.cluster_y = data.cluster_ids[b];
      pt.test = chi_squared_test(contingency_pair(
          user_ids, labels, demo, attribute, pt.cluster_x, pt.cluster_y));
      pt.corrected_p = std::min(1.0, pt.test.p_value * n_tests);
      pt.significance = significance_stars(pt.corrected_p, alpha_levels);
      out.push_back(std::move(pt));
    }
  }
  return out;
}

/// Per-component groups of the most attached users: user i joins group r when
/// its membership share reaches the group threshold h_r, the smallest share
/// still inside the top `fraction` of users (ties kept by the >= rule).
struct RepresentativeGroups {
  double fraction = 0.10;
  std::vector<double> thresholds;        // h_r per component
  std::vector<std::vector<Index>> members;  // ascending user rows
};

inline RepresentativeGroups representative_groups(const Matrix& memberships,
                                                  double fraction = 0.10) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("representative_groups: fraction must be in (0, 1)");
  const MembershipShares shares = membership_shares(memberships);
  const Index n = shares.shares.rows();
  const Index r = shares.shares.cols();

  RepresentativeGroups out;
  out.fraction = fraction;
  out.thresholds.resize(static_cast<std::size_t>(r));
  out.members.resize(static_cast<std::size_t>(r));
  const Index top = std::min<Index>(
      n, static_cast<Index>(
             std::ceil(fraction * static_cast<double>(n) - 1e-9)));
  for (Index c = 0; c < r; ++c) {
    std::vector<double> column(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
      column[static_cast<std::size_t>(i)] = shares.shares(i, c);
    std::nth_element(column.begin(), column.begin() + (top - 1), column.end(),
                     std::greater<double>());
    const double h = column[static_cast<std::size_t>(top - 1)];
    out.thresholds[static_cast<std::size_t>(c)] = h;
    for (Index i = 0; i < n; ++i)
      if (shares.shares(i, c) >= h)
        out.members[static_cast<std::size_t>(c)].push_back(i);
  }
  return out;
}

/// Pairwise Jaccard index |Gr n Gs| / |Gr u Gs| of the representative groups.
/// Two empty groups overlap by convention 0.
inline Matrix jaccard_overlap(const RepresentativeGroups& groups) {
  const Index r = static_cast<Index>(groups.members.size());
  Matrix j = Matrix::Zero(r, r);
  for (Index a = 0; a < r; ++a) {
    for (Index b = a; b < r; ++b) {
      const auto& ga = groups.members[static_cast<std::size_t>(a)];
      const auto& gb = groups.members[static_cast<std::size_t>(b)];
      std::vector<Index> inter;
      std::set_intersection(ga.begin(), ga.end(), gb.begin(), gb.end(),
                            std::back_inserter(inter));
      const std::size_t uni = ga.size() + gb.size() - inter.size();
      const double v = uni == 0 ? 0.0
                                : static_cast<double>(inter.size()) /
                                      static_cast<double>(uni);
      j(a, b) = v;
      j(b, a) = v;
    }
  }
  return j;
}

}  // namespace cadence
