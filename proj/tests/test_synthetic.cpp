#include <gtest/gtest.h>

#include "cadence/synthetic.hpp"

#include <cmath>

using cadence::DayTemplate;
using cadence::Index;
using cadence::NoiseKind;
using cadence::SyntheticData;
using cadence::SyntheticSpec;

TEST(Synthetic, ZeroNoiseEqualsReconstruction) {
  SyntheticSpec spec;
  spec.users = 20;
  spec.weeks = 10;
  spec.rank = 3;
  spec.seed = 1;
  const SyntheticData data = generate_synthetic(spec);
  const cadence::DenseTensor3 clean = reconstruct(data.truth);
  for (std::size_t i = 0; i < clean.data().size(); ++i)
    EXPECT_EQ(data.tensor.data()[i], clean.data()[i]);
}

TEST(Synthetic, WeekdayTemplateMassConcentrated) {
  const cadence::Vector profile = day_template_profile(DayTemplate::Weekdays);
  EXPECT_GE(profile.head(5).sum(), 0.9 * profile.sum());
  const cadence::Vector sat = day_template_profile(DayTemplate::Saturday);
  EXPECT_GE(sat(5), 0.8 * sat.sum());
  const cadence::Vector sun = day_template_profile(DayTemplate::Sunday);
  EXPECT_GE(sun(6), 0.8 * sun.sum());
}

TEST(Synthetic, SameSeedIsBitIdentical) {
  SyntheticSpec spec;
  spec.users = 15;
  spec.weeks = 8;
  spec.rank = 2;
  spec.noise = NoiseKind::Poisson;
  spec.noise_level = 0.2;
  spec.seed = 99;
  const SyntheticData a = generate_synthetic(spec);
  const SyntheticData b = generate_synthetic(spec);
  EXPECT_EQ(a.tensor.data(), b.tensor.data());
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.truth.users, b.truth.users);
  for (std::size_t i = 0; i < a.demographics.size(); ++i) {
    EXPECT_EQ(a.demographics.records()[i].gender, b.demographics.records()[i].gender);
    EXPECT_EQ(a.demographics.records()[i].age_cohort,
              b.demographics.records()[i].age_cohort);
  }
}

TEST(Synthetic, PoissonNoiseHitsTargetRoughly) {
  SyntheticSpec spec;
  spec.users = 60;
  spec.weeks = 30;
  spec.rank = 3;
  spec.noise = NoiseKind::Poisson;
  spec.noise_level = 0.10;
  spec.seed = 7;
  const SyntheticData data = generate_synthetic(spec);
  EXPECT_GT(data.poisson_intensity, 0.0);
  const double err = relative_error(data.tensor, data.truth);
  EXPECT_GT(err, 0.05);
  EXPECT_LT(err, 0.2);
}

TEST(Synthetic, GaussianNoiseStaysNonNegative) {
  SyntheticSpec spec;
  spec.users = 20;
  spec.weeks = 10;
  spec.noise = NoiseKind::Gaussian;
  spec.noise_level = 0.5;
  spec.seed = 3;
  const SyntheticData data = generate_synthetic(spec);
  EXPECT_TRUE(data.tensor.is_nonnegative());
}

TEST(Synthetic, FiveGroupsOverThreeComponents) {
  SyntheticSpec spec;
  spec.users = 50;
  spec.weeks = 8;
  spec.rank = 3;
  spec.groups = 5;
  spec.seed = 13;
  const SyntheticData data = generate_synthetic(spec);
  int counts[5] = {};
  for (int g : data.labels) {
    ASSERT_GE(g, 0);
    ASSERT_LT(g, 5);
    ++counts[g];
  }
  for (int c : counts) EXPECT_GE(c, 8);  // balanced assignment
}

TEST(Synthetic, DemographicCouplingBiasesGroups) {
  SyntheticSpec spec;
  spec.users = 600;
  spec.weeks = 6;
  spec.rank = 2;
  spec.demographic_coupling = 0.9;
  spec.seed = 21;
  const SyntheticData data = generate_synthetic(spec);
  // Group 0 plants gender 0; with theta = 0.9 the share must be high.
  int n0 = 0, female0 = 0;
  for (Index i = 0; i < spec.users; ++i) {
    if (data.labels[static_cast<std::size_t>(i)] != 0) continue;
    ++n0;
    female0 += data.demographics.records()[static_cast<std::size_t>(i)].gender == 0;
  }
  ASSERT_GT(n0, 100);
  EXPECT_GT(static_cast<double>(female0) / n0, 0.85);
}

TEST(Synthetic, TooManyGroupsRejected) {
  SyntheticSpec spec;
  spec.rank = 2;
  spec.groups = 4;  // over the 2R-1 archetype budget
  EXPECT_THROW(generate_synthetic(spec), std::invalid_argument);
}

TEST(Synthetic, IntensityFormula) {
  cadence::DenseTensor3 t(2, 2, 1);
  t(0, 0, 0) = 2.0;
  t(1, 0, 0) = 4.0;
  t(0, 1, 0) = 1.0;
  t(1, 1, 0) = 3.0;
  // s = sum(m) / (eps^2 * sum(m^2)) = 10 / (0.01 * 30)
  EXPECT_NEAR(cadence::poisson_intensity_for_target(t, 0.1), 10.0 / 0.3, 1e-12);
  EXPECT_THROW(cadence::poisson_intensity_for_target(t, 0.0),
               std::invalid_argument);
}
