#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "longmem/distributions.hpp"

using namespace longmem;

namespace {

RandomStream stream_for(std::uint64_t seed) { return RandomStream(StreamId{seed, 11, 0}); }

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double median_of(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

double excess_kurtosis_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = (x - m) * (x - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= v.size();
  m4 /= v.size();
  return m4 / (m2 * m2) - 3.0;
}

}  // namespace

TEST(DistributionSpec, DefaultsMatchStudyParameters) {
  const auto gamma = DistributionSpec::make(DistributionKind::gamma);
  EXPECT_DOUBLE_EQ(gamma.shape, 4.0);
  EXPECT_DOUBLE_EQ(gamma.scale, 0.25);
  EXPECT_DOUBLE_EQ(gamma.shift, 1.0);
  EXPECT_DOUBLE_EQ(DistributionSpec::make(DistributionKind::log_t).degrees_of_freedom, 5.0);
  EXPECT_DOUBLE_EQ(DistributionSpec::make(DistributionKind::laplace).std_dev, 1.0);
  for (auto kind : {DistributionKind::log_normal, DistributionKind::log_t, DistributionKind::log_laplace,
                    DistributionKind::gamma, DistributionKind::inv_gamma})
    EXPECT_DOUBLE_EQ(DistributionSpec::make(kind).shift, 1.0) << to_string(kind);
  for (auto kind : {DistributionKind::normal, DistributionKind::cauchy, DistributionKind::laplace})
    EXPECT_DOUBLE_EQ(DistributionSpec::make(kind).shift, 0.0) << to_string(kind);
}

TEST(DistributionSpec, NamesRoundTrip) {
  for (auto kind : kAllDistributions) EXPECT_EQ(parse_distribution_kind(to_string(kind)), kind);
  EXPECT_FALSE(parse_distribution_kind("student"));
}

TEST(DistributionSpec, RejectsNonPositiveParameters) {
  auto gamma = DistributionSpec::make(DistributionKind::gamma);
  gamma.shape = 0.0;
  EXPECT_THROW(gamma.validate(), ParameterError);
  gamma = DistributionSpec::make(DistributionKind::inv_gamma);
  gamma.scale = -1.0;
  EXPECT_THROW(gamma.validate(), ParameterError);
  auto t = DistributionSpec::make(DistributionKind::log_t);
  t.degrees_of_freedom = 0.0;
  auto stream = stream_for(1);
  EXPECT_THROW(sample(t, 10, stream), ParameterError);
  auto laplace = DistributionSpec::make(DistributionKind::laplace);
  laplace.std_dev = -0.5;
  EXPECT_THROW(laplace.validate(), ParameterError);
}

TEST(Sample, RejectsEmptyRequest) {
  auto stream = stream_for(1);
  EXPECT_THROW(sample(DistributionSpec::make(DistributionKind::normal), 0, stream), InputError);
}

TEST(Sample, IsDeterministicInStreamIdentity) {
  for (auto kind : kAllDistributions) {
    auto a = stream_for(42), b = stream_for(42);
    const auto spec = DistributionSpec::make(kind);
    EXPECT_EQ(sample(spec, 10, a), sample(spec, 10, b)) << to_string(kind);
  }
}

TEST(Sample, ShiftIsSubtractedElementwise) {
  for (auto kind : kAllDistributions) {
    auto shifted = DistributionSpec::make(kind);
    shifted.shift = 1.0;
    auto unshifted = shifted;
    unshifted.shift = 0.0;
    auto a = stream_for(5), b = stream_for(5);
    const auto x = sample(shifted, 200, a);
    const auto y = sample(unshifted, 200, b);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i], y[i] - 1.0) << to_string(kind);
  }
}

TEST(Sample, PositiveFamiliesStayAboveMinusShift) {
  for (auto kind : {DistributionKind::log_normal, DistributionKind::log_t, DistributionKind::log_laplace,
                    DistributionKind::gamma, DistributionKind::inv_gamma}) {
    auto stream = stream_for(9);
    const auto spec = DistributionSpec::make(kind);
    for (double x : sample(spec, 100000, stream)) ASSERT_GT(x, -spec.shift) << to_string(kind);
  }
}

TEST(Sample, GammaMeanIsZeroAfterShift) {
  // k theta - 1 = 0; sd 0.5, so the mean of 1e6 draws has SE 5e-4.
  auto stream = stream_for(101);
  const auto draws = sample(DistributionSpec::make(DistributionKind::gamma), 1'000'000, stream);
  EXPECT_NEAR(mean_of(draws), 0.0, 4.0 * 0.5 / 1000.0);
}

TEST(Sample, GammaSkewnessAndKurtosisMatchClosedForm) {
  auto stream = stream_for(102);
  const auto draws = sample(DistributionSpec::make(DistributionKind::gamma), 1'000'000, stream);
  EXPECT_NEAR(excess_kurtosis_of(draws), 1.5, 0.1);
}

TEST(Sample, GammaSmallShapeBoostIsUnbiased) {
  auto spec = DistributionSpec::make(DistributionKind::gamma);
  spec.shape = 0.5;
  spec.scale = 2.0;
  spec.shift = 0.0;
  auto stream = stream_for(103);
  const auto draws = sample(spec, 400'000, stream);
  // mean 1, sd sqrt(0.5 * 4) = 1.41
  EXPECT_NEAR(mean_of(draws), 1.0, 4.0 * std::sqrt(2.0) / std::sqrt(400'000.0));
  for (double x : draws) ASSERT_GT(x, 0.0);
}

TEST(Sample, InverseGammaMeanMatchesClosedForm) {
  // 1/X, X ~ gamma(4, 0.25): mean 4/3, sd 4/(3 sqrt 2); shifted mean 1/3.
  auto stream = stream_for(104);
  const auto draws = sample(DistributionSpec::make(DistributionKind::inv_gamma), 1'000'000, stream);
  EXPECT_NEAR(mean_of(draws), 1.0 / 3.0, 4.0 * 0.943 / 1000.0);
}

TEST(Sample, LaplaceHasUnitVarianceAndExcessKurtosisThree) {
  auto stream = stream_for(105);
  const auto draws = sample(DistributionSpec::make(DistributionKind::laplace), 1'000'000, stream);
  double var = 0.0;
  for (double x : draws) var += x * x;
  EXPECT_NEAR(var / draws.size(), 1.0, 0.01);
  EXPECT_NEAR(excess_kurtosis_of(draws), 3.0, 0.2);
}

TEST(Sample, NormalHasUnitVariance) {
  auto stream = stream_for(106);
  const auto draws = sample(DistributionSpec::make(DistributionKind::normal), 1'000'000, stream);
  double var = 0.0;
  for (double x : draws) var += x * x;
  EXPECT_NEAR(var / draws.size(), 1.0, 0.006);
  EXPECT_NEAR(excess_kurtosis_of(draws), 0.0, 0.03);
}

TEST(Sample, SymmetricKindsHaveZeroMedian) {
  // Median SE is 1 / (2 f(0) sqrt(n)); f(0) >= 0.318 for all three kinds.
  const double tol = 5.0 / (2.0 * 0.318 * 1000.0);
  for (auto kind : {DistributionKind::normal, DistributionKind::cauchy, DistributionKind::laplace}) {
    auto stream = stream_for(107);
    EXPECT_NEAR(median_of(sample(DistributionSpec::make(kind), 1'000'000, stream)), 0.0, tol) << to_string(kind);
  }
}

TEST(Sample, CauchyHasUnitScale) {
  // P(|X| < 1) = 1/2 for the scale-1 Cauchy law.
  auto stream = stream_for(108);
  const auto draws = sample(DistributionSpec::make(DistributionKind::cauchy), 1'000'000, stream);
  const auto inside = std::count_if(draws.begin(), draws.end(), [](double x) { return std::fabs(x) < 1.0; });
  EXPECT_NEAR(static_cast<double>(inside) / draws.size(), 0.5, 0.0025);
}

TEST(Sample, LogTUnderlyingVariateHasStudentTails) {
  // log(Y) ~ t_5, whose two-sided 10% critical value is 2.015048.
  auto stream = stream_for(109);
  const auto spec = DistributionSpec::make(DistributionKind::log_t);
  const auto draws = sample(spec, 1'000'000, stream);
  std::size_t outside = 0;
  for (double y : draws)
    if (std::fabs(std::log(y + spec.shift)) > 2.015048) ++outside;
  EXPECT_NEAR(static_cast<double>(outside) / draws.size(), 0.10, 0.0015);
}

TEST(Sample, LogNormalUnderlyingVariateIsStandardNormal) {
  auto stream = stream_for(110);
  const auto spec = DistributionSpec::make(DistributionKind::log_normal);
  const auto draws = sample(spec, 200'000, stream);
  double sum = 0.0, sq = 0.0;
  for (double y : draws) {
    const double z = std::log(y + spec.shift);
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / draws.size(), 0.0, 0.01);
  EXPECT_NEAR(sq / draws.size(), 1.0, 0.015);
}

TEST(TheoreticalMoments, Normal) {
  const auto m = theoretical_moments(DistributionSpec::make(DistributionKind::normal));
  EXPECT_EQ(m.mean, Moment::finite(0.0));
  EXPECT_EQ(m.std_dev, Moment::finite(1.0));
  EXPECT_EQ(m.skewness, Moment::finite(0.0));
  EXPECT_EQ(m.excess_kurtosis, Moment::finite(0.0));
}

TEST(TheoreticalMoments, GammaShifted) {
  const auto m = theoretical_moments(DistributionSpec::make(DistributionKind::gamma));
  EXPECT_NEAR(m.mean.value, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.std_dev.value, 0.5);
  EXPECT_DOUBLE_EQ(m.skewness.value, 1.0);
  EXPECT_DOUBLE_EQ(m.excess_kurtosis.value, 1.5);
}

TEST(TheoreticalMoments, InverseGammaKurtosisUndefinedAtShapeFour) {
  const auto m = theoretical_moments(DistributionSpec::make(DistributionKind::inv_gamma));
  EXPECT_NEAR(m.mean.value, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.std_dev.value, 4.0 / (3.0 * std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(m.skewness.value, 4.0 * std::sqrt(2.0), 1e-14);
  EXPECT_EQ(m.excess_kurtosis.state, Moment::State::undefined);

  auto wide = DistributionSpec::make(DistributionKind::inv_gamma);
  wide.shape = 6.0;
  EXPECT_NEAR(theoretical_moments(wide).excess_kurtosis.value, (30.0 * 6 - 66) / (3.0 * 2.0), 1e-12);
}

TEST(TheoreticalMoments, LogNormalAgreesWithTextbookForms) {
  const double e = std::numbers::e;
  const auto m = theoretical_moments(DistributionSpec::make(DistributionKind::log_normal));
  EXPECT_NEAR(m.mean.value, std::sqrt(e) - 1.0, 1e-14);
  EXPECT_NEAR(m.std_dev.value, std::sqrt((e - 1.0) * e), 1e-12);
  EXPECT_NEAR(m.skewness.value, (e + 2.0) * std::sqrt(e - 1.0), 1e-10);
  EXPECT_NEAR(m.excess_kurtosis.value, std::pow(e, 4) + 2 * std::pow(e, 3) + 3 * e * e - 6.0, 1e-8);
}

TEST(TheoreticalMoments, HeavyTailFlags) {
  const auto cauchy = theoretical_moments(DistributionSpec::make(DistributionKind::cauchy));
  EXPECT_EQ(cauchy.mean.state, Moment::State::undefined);
  EXPECT_EQ(cauchy.std_dev.state, Moment::State::infinite);

  const auto log_t = theoretical_moments(DistributionSpec::make(DistributionKind::log_t));
  EXPECT_EQ(log_t.mean.state, Moment::State::infinite);
  EXPECT_EQ(log_t.std_dev.state, Moment::State::infinite);

  // Laplace scale 1/sqrt(2): E[e^X] = 2 exists, E[e^{2X}] does not.
  const auto log_laplace = theoretical_moments(DistributionSpec::make(DistributionKind::log_laplace));
  EXPECT_NEAR(log_laplace.mean.value, 1.0, 1e-15);
  EXPECT_EQ(log_laplace.std_dev.state, Moment::State::infinite);
  EXPECT_FALSE(log_laplace.skewness.is_finite());

  const auto laplace = theoretical_moments(DistributionSpec::make(DistributionKind::laplace));
  EXPECT_EQ(laplace.excess_kurtosis, Moment::finite(3.0));
}

TEST(TheoreticalMoments, FlagsAndValuesAreExclusive) {
  for (auto kind : kAllDistributions) {
    const auto m = theoretical_moments(DistributionSpec::make(kind));
    for (const auto& moment : {m.mean, m.std_dev, m.skewness, m.excess_kurtosis})
      if (!moment.is_finite()) {
        EXPECT_EQ(moment.value, 0.0) << to_string(kind);
      }
    if (m.std_dev.is_finite()) {
      EXPECT_GE(m.std_dev.value, 0.0);
    }
  }
}
