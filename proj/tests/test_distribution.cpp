#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lognlogs/distribution.hpp"
#include "test_support.hpp"

using namespace lognlogs;

using testing_support::parameter_sets;

TEST(BrokenPareto, RejectsInvalidParameters) {
  EXPECT_THROW(BrokenParetoParams({}, {}), DomainError);
  EXPECT_THROW(BrokenParetoParams({1.0}, {1.0, 2.0}), DomainError);
  EXPECT_THROW(BrokenParetoParams({-1.0}, {1.0}), DomainError);
  EXPECT_THROW(BrokenParetoParams({1.0}, {0.0}), DomainError);
  EXPECT_THROW(BrokenParetoParams({1.0, 2.0}, {2.0, 1.0}), DomainError);
  EXPECT_THROW(BrokenParetoParams({1.0, 1.0}, {1.0, 2.0}), DomainError);
  EXPECT_NO_THROW(BrokenParetoParams::from_estimate({1.0, 1.0}, {1.0, 2.0}));
}

TEST(BrokenPareto, SurvivalIsOneBelowFirstBreak) {
  for (const auto& p : parameter_sets()) {
    EXPECT_EQ(p.survival(0.5 * p.tau()[0]), 1.0);
    EXPECT_EQ(p.survival(p.tau()[0]), 1.0);
    EXPECT_EQ(p.pdf(0.5 * p.tau()[0]), 0.0);
  }
}

TEST(BrokenPareto, SurvivalContinuousAtBreaks) {
  for (const auto& p : parameter_sets()) {
    for (std::size_t j = 1; j < p.pieces(); ++j) {
      const double t = p.tau()[j];
      EXPECT_NEAR(p.survival(std::nextafter(t, 0.0)), p.survival(t), 1e-14);
    }
  }
}

TEST(BrokenPareto, SingleSegmentIsTextbookPareto) {
  const BrokenParetoParams p({1.7}, {2.0});
  for (double x : {2.0, 3.0, 10.0, 1e4}) {
    EXPECT_NEAR(p.survival(x), std::pow(2.0 / x, 1.7), 1e-15);
    EXPECT_NEAR(p.pdf(x), 1.7 * std::pow(2.0, 1.7) / std::pow(x, 2.7), 1e-14 * p.pdf(x));
  }
}

TEST(BrokenPareto, QuantileRoundTrip) {
  for (const auto& p : parameter_sets()) {
    for (int k = 1; k < 1000; ++k) {
      const double u = k / 1000.0;
      const double x = p.quantile(u);
      EXPECT_NEAR(p.cdf(x), u, 1e-12 * u);
      EXPECT_NEAR(p.quantile(p.cdf(x)), x, 1e-12 * x);
    }
  }
  EXPECT_THROW(parameter_sets()[0].quantile(0.0), DomainError);
  EXPECT_THROW(parameter_sets()[0].quantile(1.0), DomainError);
}

TEST(BrokenPareto, CdfMonotone) {
  for (const auto& p : parameter_sets()) {
    double prev = 0.0;
    for (int k = 0; k < 400; ++k) {
      const double x = p.tau()[0] * std::pow(10.0, k / 100.0);
      const double c = p.cdf(x);
      EXPECT_GE(c, prev);
      prev = c;
    }
  }
}

TEST(BrokenPareto, PdfIntegratesToOne) {
  for (const auto& p : parameter_sets()) {
    EXPECT_NEAR(testing_support::pdf_mass(p), 1.0, 1e-8);
  }
}

TEST(BrokenPareto, PdfIsDerivativeOfCdf) {
  for (const auto& p : parameter_sets()) {
    for (double u : {0.1, 0.4, 0.8, 0.95}) {
      const double x = p.quantile(u);
      const double h = 1e-6 * x;
      const double fd = (p.cdf(x + h) - p.cdf(x - h)) / (2 * h);
      EXPECT_NEAR(fd, p.pdf(x), 1e-5 * p.pdf(x));
    }
  }
}

TEST(BrokenPareto, SamplerMatchesCdf) {
  std::uint64_t seed = 11;
  for (const auto& p : parameter_sets()) {
    Rng rng = make_rng(seed++);
    const auto xs = sample(100000, p, rng);
    EXPECT_LT(testing_support::ks_distance(xs, [&](double x) { return p.cdf(x); }), 0.01);
    EXPECT_GE(*std::min_element(xs.begin(), xs.end()), p.tau()[0]);
  }
}

TEST(BrokenPareto, SamplerDeterministicPerSeed) {
  const auto p = parameter_sets()[1];
  Rng a = make_rng(5), b = make_rng(5), c = make_rng(6);
  EXPECT_EQ(sample(100, p, a), sample(100, p, b));
  EXPECT_NE(sample(100, p, a), sample(100, p, c));
}

TEST(BrokenPareto, SampleLoglikSumsLogPdf) {
  const auto p = parameter_sets()[2];
  Rng rng = make_rng(3);
  const auto xs = sample(50, p, rng);
  double acc = 0.0;
  for (double x : xs) acc += p.log_pdf(x);
  EXPECT_NEAR(sample_loglik(xs, p), acc, 1e-9 * std::fabs(acc));
}
