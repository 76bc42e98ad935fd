#include <gtest/gtest.h>

#include "cadence/special_functions.hpp"

#include <cmath>

namespace {

// Upper-tail oracle by adaptive-step Simpson integration of the chi-squared
// density on [x, x + span], span wide enough for the mass to be negligible
// beyond it.
double chi2_tail_by_integration(double x, int dof) {
  const double k = dof;
  const double log_norm = -(k / 2.0) * std::log(2.0) - std::lgamma(k / 2.0);
  const auto pdf = [&](double t) {
    if (t <= 0.0) return 0.0;
    return std::exp(log_norm + (k / 2.0 - 1.0) * std::log(t) - t / 2.0);
  };
  const double hi = x + 60.0 + 12.0 * k;
  const int steps = 400000;  // even
  const double h = (hi - x) / steps;
  double sum = pdf(x) + pdf(hi);
  for (int i = 1; i < steps; ++i)
    sum += pdf(x + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Student-t density integral against the implementation's CDF.
double t_cdf_by_integration(double t, int dof) {
  const double nu = dof;
  const double log_norm = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
                          0.5 * std::log(nu * M_PI);
  const auto pdf = [&](double v) {
    return std::exp(log_norm - (nu + 1.0) / 2.0 * std::log1p(v * v / nu));
  };
  const int steps = 200000;
  const double h = t / steps;
  double sum = pdf(0.0) + pdf(t);
  for (int i = 1; i < steps; ++i) sum += pdf(i * h) * (i % 2 ? 4.0 : 2.0);
  return 0.5 + sum * h / 3.0;
}

}  // namespace

TEST(Gamma, ComplementIdentity) {
  for (double a : {0.5, 1.0, 2.5, 7.0})
    for (double x : {0.1, 1.0, 3.0, 12.0})
      EXPECT_NEAR(cadence::regularized_gamma_p(a, x) +
                      cadence::regularized_gamma_q(a, x),
                  1.0, 1e-12);
}

TEST(ChiSquared, ClosedFormForEvenDof) {
  // For even dof, sf(x, 2m) = exp(-x/2) * sum_{j<m} (x/2)^j / j!.
  for (int dof : {2, 4, 8, 12}) {
    for (double x : {0.5, 2.0, 5.0, 11.3, 25.0}) {
      double sum = 0.0, term = 1.0;
      for (int j = 0; j < dof / 2; ++j) {
        if (j > 0) term *= (x / 2.0) / j;
        sum += term;
      }
      const double closed = std::exp(-x / 2.0) * sum;
      EXPECT_NEAR(cadence::chi_squared_sf(x, dof), closed, 1e-10 * closed + 1e-14)
          << "dof=" << dof << " x=" << x;
    }
  }
}

TEST(ChiSquared, CriticalValueNearFivePercent) {
  const double p = cadence::chi_squared_sf(3.841, 1);
  EXPECT_NEAR(p, 0.05, 1e-3);
  EXPECT_NEAR(p, chi2_tail_by_integration(3.841, 1), 1e-6);
}

TEST(ChiSquared, MatchesIntegrationOracle) {
  const struct {
    double x;
    int dof;
  } cases[] = {{0.7937, 1}, {2.0, 3}, {10.0, 5}, {4.5, 2}, {30.0, 9}};
  for (const auto& c : cases)
    EXPECT_NEAR(cadence::chi_squared_sf(c.x, c.dof),
                chi2_tail_by_integration(c.x, c.dof), 1e-8)
        << "x=" << c.x << " dof=" << c.dof;
}

TEST(ChiSquared, MonotoneDecreasingInStatistic) {
  double prev = 1.1;
  for (double x = 0.0; x < 20.0; x += 0.5) {
    const double p = cadence::chi_squared_sf(x, 4);
    EXPECT_LE(p, prev + 1e-15);
    prev = p;
  }
}

TEST(ChiSquared, EdgeCases) {
  EXPECT_EQ(cadence::chi_squared_sf(0.0, 3), 1.0);
  EXPECT_EQ(cadence::chi_squared_sf(-1.0, 3), 1.0);
  EXPECT_THROW(cadence::chi_squared_sf(1.0, 0), std::invalid_argument);
}

TEST(StudentT, CdfMatchesIntegration) {
  for (int dof : {1, 5, 19}) {
    for (double t : {0.5, 1.0, 2.1}) {
      EXPECT_NEAR(cadence::student_t_cdf(t, dof), t_cdf_by_integration(t, dof),
                  1e-7)
          << "dof=" << dof << " t=" << t;
    }
  }
}

TEST(StudentT, QuantileInvertsCdf) {
  for (int dof : {1, 2, 5, 19, 60}) {
    const double q = cadence::student_t_quantile(0.975, dof);
    EXPECT_NEAR(cadence::student_t_cdf(q, dof), 0.975, 1e-10) << "dof=" << dof;
    EXPECT_GT(q, 0.0);
  }
  // Symmetry and the median.
  EXPECT_EQ(cadence::student_t_quantile(0.5, 7), 0.0);
  EXPECT_NEAR(cadence::student_t_quantile(0.025, 7),
              -cadence::student_t_quantile(0.975, 7), 1e-10);
}

TEST(StudentT, KnownTwoSidedCriticalValues) {
  // Classic 95% two-sided table values.
  EXPECT_NEAR(cadence::student_t_quantile(0.975, 1), 12.7062, 2e-4);
  EXPECT_NEAR(cadence::student_t_quantile(0.975, 5), 2.5706, 2e-4);
  EXPECT_NEAR(cadence::student_t_quantile(0.975, 19), 2.0930, 2e-4);
}

TEST(StudentT, ValidatesArguments) {
  EXPECT_THROW(cadence::student_t_quantile(0.0, 3), std::invalid_argument);
  EXPECT_THROW(cadence::student_t_quantile(1.0, 3), std::invalid_argument);
  EXPECT_THROW(cadence::student_t_quantile(0.9, 0), std::invalid_argument);
}
