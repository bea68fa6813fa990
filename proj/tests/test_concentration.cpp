#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "concentration.hpp"
#include "error.hpp"
#include "model.hpp"
#include "rng.hpp"

using namespace drp;

TEST(SampleSizeBound, Examples) {
  EXPECT_EQ(sample_size_bound(5, 0.5, 0.1, 0.25), 443);
  EXPECT_EQ(sample_size_bound(1, 0.5, 2.0 / std::exp(1.0), 0.25), 32);
  EXPECT_EQ(sample_size_bound(50, 0.5, 0.1, 0.25), 5637);
}

TEST(SampleSizeBound, Monotone) {
  long prev = sample_size_bound(3, 0.05, 0.1);
  for (double eps = 0.06; eps <= 0.5; eps += 0.01) {
    const long cur = sample_size_bound(3, eps, 0.1);
    EXPECT_LE(cur, prev);
    prev = cur;
  }
  prev = 0;
  for (long r = 1; r < 200; ++r) {
    const long cur = sample_size_bound(r, 0.3, 0.05);
    EXPECT_GE(cur, prev);
    prev = cur;
  }
}

TEST(SampleSizeBound, ExactCeiling) {
  for (long r = 1; r < 100; r += 7) {
    for (double eps : {0.1, 0.25, 0.5}) {
      const long double exact =
          (r + 1.0L) * std::log(2.0L * r / 0.1L) / (0.25L * (long double)eps * eps);
      const long got = sample_size_bound(r, eps, 0.1);
      EXPECT_GE(got, exact - 1e-9L);
      EXPECT_LT(got - exact, 1.0L);
    }
  }
}

TEST(SampleSizeBound, RejectsOutOfRange) {
  EXPECT_THROW(sample_size_bound(0, 0.5, 0.1), InvalidArgument);
  EXPECT_THROW(sample_size_bound(1, 0.6, 0.1), InvalidArgument);
  EXPECT_THROW(sample_size_bound(1, 0.0, 0.1), InvalidArgument);
  EXPECT_THROW(sample_size_bound(1, 0.5, 1.0), InvalidArgument);
  EXPECT_THROW(sample_size_bound(1, 0.5, 0.1, 0.0), InvalidArgument);
}

TEST(FullRankSampleBound, Examples) {
  const std::vector<double> zeros(5, 0.0);
  EXPECT_EQ(full_rank_sample_bound(zeros, 1.0, 1.0, 0.5, 0.1, 5), 0);
  const std::vector<double> one = {1.0};
  EXPECT_EQ(full_rank_sample_bound(one, 1.0, 1.0, 1.0, 2.0 / std::exp(1.0), 1, 1.0), 1);

  std::vector<double> decay(100);
  for (int i = 0; i < 100; ++i) decay[i] = 1.0 / (i + 1);
  const long full = full_rank_sample_bound(decay, 1.0, 1.0, 0.5, 0.1, 100, 0.25);
  EXPECT_LT(full * 10, sample_size_bound(100, 0.5, 0.1));
  EXPECT_THROW(full_rank_sample_bound(one, 1.0, 1.0, 1.5, 0.1, 1), InvalidArgument);
}

TEST(FullRankSampleBound, ExactCeiling) {
  const std::vector<double> s = {3.0, 1.0, 0.1};
  const long double rbar = 9.0L / 10 + 1.0L / 2 + 0.01L / 1.01L;
  const long double exact = rbar * 9.0L / (kFullRankConstant * 0.25L * 10.0L) * std::log(2.0L * 3 / 0.1L);
  const long got = full_rank_sample_bound(s, 1.0, 1.0, 0.5, 0.1, 3);
  EXPECT_GE(got, exact - 1e-9L);
  EXPECT_LT(got - exact, 1.0L);
}

TEST(SpectralDeviation, LargeSampleIsSmall) {
  EXPECT_LE(spectral_deviation(2, 200000, 1), 0.02);
}

TEST(SpectralDeviation, ScalarCase) {
  NormalSampler rng(3, Stream::kDeviation);
  const Eigen::MatrixXd a = rng.matrix(1, 40);
  EXPECT_NEAR(spectral_deviation(1, 40, 3), std::abs(a.squaredNorm() / 40.0 - 1.0), 1e-14);
  EXPECT_EQ(spectral_deviation(4, 30, 9), spectral_deviation(4, 30, 9));
}

TEST(SpectralDeviation, InvariantUnderRowPermutation) {
  NormalSampler rng(4, Stream::kDeviation);
  const Eigen::MatrixXd a = rng.matrix(6, 50);
  Eigen::VectorXi perm(6);
  perm << 3, 0, 5, 1, 4, 2;
  const Eigen::PermutationMatrix<Eigen::Dynamic> p(perm);
  const Eigen::MatrixXd pa = p * a;
  EXPECT_NEAR(spectral_deviation(a), spectral_deviation(pa), 1e-13);
}

TEST(SpectralDeviation, BoundHoldsAtRankFifty) {
  const long m = sample_size_bound(50, 0.5, 0.1, 0.25);
  int ok = 0;
  for (int s = 0; s < 20; ++s) ok += spectral_deviation(50, m, 500 + s) <= 0.5;
  EXPECT_GE(ok, 18);
}

TEST(ConcentrationTrials, FailureRateWithinSlack) {
  const double eps = 0.5;
  const double delta = 0.1;
  const long m = sample_size_bound(5, eps, delta);
  const auto report = concentration_trials(5, m, eps, delta, 100, 42);
  EXPECT_TRUE(report.passed);
  EXPECT_EQ(report.trials, 100);
  EXPECT_EQ(report.deviations.size(), 100u);
  int failures = 0;
  for (double d : report.deviations) failures += d > eps;
  EXPECT_EQ(failures, report.failures);
  EXPECT_EQ(report.deviation, *std::max_element(report.deviations.begin(), report.deviations.end()));
}

TEST(EmpiricalSampleSize, BelowAnalyticBound) {
  const long m = empirical_sample_size(5, 0.5, 40, 1);
  EXPECT_LE(m, sample_size_bound(5, 0.5, 0.05));
  EXPECT_GE(m, 5);
}

TEST(RidgeIdentityDeviation, ExactCases) {
  const auto data = make_decaying_spectrum(6, 9, 1.0, 1);
  const auto [lo, hi] = ridge_identity_deviation(data.features(), 2.0,
                                                 std::sqrt(6.0) * Eigen::MatrixXd::Identity(6, 6));
  EXPECT_NEAR(lo, 1.0, 1e-12);
  EXPECT_NEAR(hi, 1.0, 1e-12);
  const auto [zl, zh] = ridge_identity_deviation(Eigen::MatrixXd::Zero(6, 9), 2.0, 5, 3);
  EXPECT_NEAR(zl, 1.0, 1e-14);
  EXPECT_NEAR(zh, 1.0, 1e-14);
  EXPECT_THROW(ridge_identity_deviation(data.features(), 0.0, 5, 3), InvalidArgument);
}

TEST(RidgeIdentityDeviation, DecayOneSpectrumWithinHalf) {
  const auto data = make_decaying_spectrum(100, 80, 1.0, 2);
  const auto s = spectrum(data).singular_values;
  const long m = full_rank_sample_bound(as_span(s), 1.0, 1.0, 0.5, 0.1, 100);
  int ok = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const auto [lo, hi] = ridge_identity_deviation(data.features(), 1.0, m, seed);
    ok += lo >= 0.5 && hi <= 1.5;
  }
  EXPECT_GE(ok, 18);
}
