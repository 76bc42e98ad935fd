#pragma once

#include "cadence/demographics.hpp"
#include "cadence/factor_model.hpp"
#include "cadence/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadence {

enum class DayTemplate { Weekdays, Saturday, Sunday };
enum class NoiseKind { None, Poisson, Gaussian };

/// Generator recipe for a population with planted intra-week and inter-week
/// components, group structure in the memberships, and demographics coupled
/// to the planted groups. Everything is driven by one seed.
struct SyntheticSpec {
  Index users = 100;
  Index weeks = 42;
  int rank = 3;
  std::vector<DayTemplate> day_templates;  // empty: Weekdays/Saturday/Sunday cycle
  std::vector<double> weekly_levels;       // empty: built-in level pattern
  int groups = 0;                          // 0: one group per component
  double membership_noise = 0.08;
  double activity_scale = 30.0;
  double demographic_coupling = 0.6;  // probability a user takes the group's category
  NoiseKind noise = NoiseKind::None;
  double noise_level = 0.0;  // Poisson: target relative error; Gaussian: sigma / rms
  std::uint64_t seed = 0;
};

struct SyntheticData {
  DenseTensor3 tensor;
  FactorModel truth;
  DemographicTable demographics;
  std::vector<int> labels;  // planted group per tensor row
  std::vector<std::string> user_ids;
  double poisson_intensity = 0.0;  // counts were sampled as Poisson(s*mean)/s
};

inline Vector day_template_profile(DayTemplate t) {
  Vector v(7);
  switch (t) {
    case DayTemplate::Weekdays:
      v << 0.19, 0.19, 0.19, 0.19, 0.19, 0.025, 0.025;
      break;
    case DayTemplate::Saturday:
      v << 0.02, 0.02, 0.02, 0.02, 0.02, 0.85, 0.05;
      break;
    case DayTemplate::Sunday:
      v << 0.02, 0.02, 0.02, 0.02, 0.02, 0.05, 0.85;
      break;
  }
  return v;
}

/// Intensity s such that cell counts drawn as Poisson(s * mean) / s have an
/// expected relative reconstruction error of `target_rel_error`.
inline double poisson_intensity_for_target(const DenseTensor3& clean,
                                           double target_rel_error) {
  if (!(target_rel_error > 0.0))
    throw std::invalid_argument("poisson_intensity_for_target: target must be > 0");
  double mass = 0.0, sq = 0.0;
  for (double v : clean.data()) {
    mass += v;
    sq += v * v;
  }
  if (sq == 0.0)
    throw std::invalid_argument("poisson_intensity_for_target: zero tensor");
  return mass / (target_rel_error * target_rel_error * sq);
}

namespace detail {

// Group archetypes over R components: one-hots first, then midpoints of
// adjacent pairs (e.g. five groups over three components).
inline std::vector<Vector> group_archetypes(int rank, int groups) {
  if (groups > 2 * rank - 1)
    throw std::invalid_argument("generate_synthetic: at most 2R-1 groups");
  std::vector<Vector> arch;
  for (int g = 0; g < groups; ++g) {
    Vector v = Vector::Zero(rank);
    if (g < rank) {
      v(g) = 1.0;
    } else {
      v(g - rank) = 0.5;
      v(g - rank + 1) = 0.5;
    }
    arch.push_back(v);
  }
  return arch;
}

}  // namespace detail

inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.users < 1 || spec.weeks < 1 || spec.rank < 1)
    throw std::invalid_argument("generate_synthetic: users, weeks, rank must be >= 1");
  if (spec.membership_noise < 0.0 || spec.activity_scale <= 0.0)
    throw std::invalid_argument("generate_synthetic: bad membership_noise/activity_scale");
  if (!(spec.demographic_coupling >= 0.0 && spec.demographic_coupling <= 1.0))
    throw std::invalid_argument("generate_synthetic: coupling must be in [0, 1]");

  const Index I = spec.users, K = spec.weeks;
  const int R = spec.rank;
  const int G = spec.groups > 0 ? spec.groups : R;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticData out;

  // Day profiles: template shapes, blended toward uniform on repeat cycles so
  // every column stays distinct.
  std::vector<DayTemplate> templates = spec.day_templates;
  if (templates.empty())
    templates = {DayTemplate::Weekdays, DayTemplate::Saturday,
                 DayTemplate::Sunday};
  Matrix days(7, R);
  for (int r = 0; r < R; ++r) {
    const Vector base = day_template_profile(templates[r % templates.size()]);
    const int cycle = r / static_cast<int>(templates.size());
    const double w = std::min(0.15 * cycle, 0.5);
    days.col(r) = (1.0 - w) * base + w * Vector::Constant(7, 1.0 / 7.0);
  }

  // Weekly profiles: distinct levels with slow seasonal swings plus jitter.
  std::vector<double> levels = spec.weekly_levels;
  if (levels.empty()) {
    const double base_levels[3] = {1.0, 1.5, 0.8};
    for (int r = 0; r < R; ++r)
      levels.push_back(base_levels[r % 3] + 0.1 * (r / 3));
  }
  if (static_cast<int>(levels.size()) != R)
    throw std::invalid_argument("generate_synthetic: weekly_levels size != rank");
  Matrix weeks(K, R);
  const double period = std::max(8.0, static_cast<double>(K) / 3.0);
  for (int r = 0; r < R; ++r) {
    const double phase = 2.0 * M_PI * r / R;
    for (Index k = 0; k < K; ++k) {
      const double swing =
          1.0 + 0.35 * std::sin(2.0 * M_PI * static_cast<double>(k) / period + phase);
      const double jitter = 0.95 + 0.1 * unit(rng);
      weeks(k, r) = std::max(0.05, swing) * levels[static_cast<std::size_t>(r)] * jitter;
    }
  }

  // Balanced group assignment, shuffled.
  out.labels.resize(static_cast<std::size_t>(I));
  for (Index i = 0; i < I; ++i)
    out.labels[static_cast<std::size_t>(i)] = static_cast<int>(i) % G;
  for (Index i = I - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(out.labels[static_cast<std::size_t>(i)],
              out.labels[static_cast<std::size_t>(pick(rng))]);
  }

  const std::vector<Vector> archetypes = detail::group_archetypes(R, G);
  Matrix users(I, R);
  for (Index i = 0; i < I; ++i) {
    const Vector& arch = archetypes[static_cast<std::size_t>(
        out.labels[static_cast<std::size_t>(i)])];
    const double activity = spec.activity_scale * (0.5 + unit(rng));
    for (int r = 0; r < R; ++r)
      users(i, r) = activity * (arch(r) + spec.membership_noise * unit(rng));
  }

  out.truth.users = std::move(users);
  out.truth.days = std::move(days);
  out.truth.weeks = std::move(weeks);

  const DenseTensor3 clean = reconstruct(out.truth);
  out.tensor = clean;
  if (spec.noise == NoiseKind::Poisson && spec.noise_level > 0.0) {
    const double s = poisson_intensity_for_target(clean, spec.noise_level);
    out.poisson_intensity = s;
    for (double& v : out.tensor.data()) {
      if (v <= 0.0) {
        v = 0.0;
        continue;
      }
      std::poisson_distribution<long> pois(s * v);
      v = static_cast<double>(pois(rng)) / s;
    }
  } else if (spec.noise == NoiseKind::Gaussian && spec.noise_level > 0.0) {
    const double rms =
        std::sqrt(squared_frobenius_norm(clean) / static_cast<double>(clean.size()));
    const double sigma = spec.noise_level * rms;
    std::normal_distribution<double> gauss(0.0, sigma);
    for (double& v : out.tensor.data()) v = std::max(0.0, v + gauss(rng));
  }

  // Demographics: with probability `coupling` a user takes its group's
  // planted category, otherwise a draw from population-like base shares.
  const double base_gender[2] = {0.72, 0.28};
  const double base_age[6] = {0.026, 0.263, 0.314, 0.256, 0.126, 0.052};
  const double base_marital[2] = {0.62, 0.38};
  const double base_child[2] = {0.51, 0.49};
  const auto draw_base = [&](const double* shares, int n) {
    double u = unit(rng);
    for (int c = 0; c < n; ++c) {
      if (u < shares[c] || c == n - 1) return c;
      u -= shares[c];
    }
    return n - 1;
  };
  out.user_ids.resize(static_cast<std::size_t>(I));
  for (Index i = 0; i < I; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "u%06ld", static_cast<long>(i));
    out.user_ids[static_cast<std::size_t>(i)] = buf;
    const int g = out.labels[static_cast<std::size_t>(i)];
    DemographicRecord rec;
    rec.user_id = buf;
    rec.gender = unit(rng) < spec.demographic_coupling ? g % 2
                                                       : draw_base(base_gender, 2);
    rec.age_cohort = unit(rng) < spec.demographic_coupling
                         ? (g + 1) % 6
                         : draw_base(base_age, 6);
    rec.marital = unit(rng) < spec.demographic_coupling ? (g + 1) % 2
                                                        : draw_base(base_marital, 2);
    rec.child = unit(rng) < spec.demographic_coupling ? g % 2
                                                      : draw_base(base_child, 2);
    out.demographics.add(std::move(rec));
  }
  return out;
}

}  // namespace cadence
