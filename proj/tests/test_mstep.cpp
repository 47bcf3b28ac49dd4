#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lognlogs/distribution.hpp"
#include "test_support.hpp"

using namespace lognlogs;

using testing_support::numeric_beta;

TEST(Mstep, SegmentCountsTabulation) {
  const std::vector<double> xs{1.0, 1.5, 2.0, 2.5, 4.0, 9.0};
  const std::vector<double> tau{1.0, 2.0, 5.0};
  const auto c = segment_counts(xs, tau);
  EXPECT_EQ(c.m, (std::vector<std::size_t>{2, 3, 1}));
  EXPECT_EQ(c.n, (std::vector<std::size_t>{6, 4, 1}));
  EXPECT_NEAR(c.segment_logsums[2], std::log(9.0), 1e-15);
  const SortedSample sorted(xs);
  const auto c2 = sorted.counts(tau);
  EXPECT_EQ(c2.m, c.m);
  EXPECT_EQ(c2.n, c.n);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(c2.segment_logsums[j], c.segment_logsums[j], 1e-12);
}

TEST(Mstep, SlopesMatchNumericMaximisation) {
  Rng rng = make_rng(2024);
  for (int inst = 0; inst < 30; ++inst) {
    const std::size_t b = 1 + inst % 3;
    std::vector<double> beta(b), tau(b);
    double t = 1.0 + uniform_open(rng);
    for (std::size_t j = 0; j < b; ++j) {
      beta[j] = 0.3 + 3.0 * uniform_open(rng);
      tau[j] = t;
      t *= 1.5 + 3.0 * uniform_open(rng);
    }
    const auto truth = BrokenParetoParams::from_estimate(beta, tau);
    const auto xs = sample(300, truth, rng);
    std::vector<double> est;
    try {
      est = beta_given_tau(segment_counts(xs, tau), tau);
    } catch (const EmptySegmentError&) {
      continue;
    }
    for (std::size_t j = 0; j < b; ++j) {
      EXPECT_NEAR(est[j], numeric_beta(xs, est, tau, j), 1e-8 * est[j]) << "instance " << inst << " j " << j;
    }
  }
}

TEST(Mstep, SingleSegmentIsTextbookMle) {
  Rng rng = make_rng(9);
  const auto xs = sample(500, BrokenParetoParams({1.3}, {2.0}), rng);
  const auto fit = complete_mle(xs, 1);
  double xmin = xs[0], sum = 0.0;
  for (double x : xs) xmin = std::min(xmin, x);
  for (double x : xs) sum += std::log(x / xmin);
  EXPECT_EQ(fit.tau()[0], xmin);
  EXPECT_NEAR(fit.beta()[0], static_cast<double>(xs.size()) / sum, 1e-12 * fit.beta()[0]);
}

TEST(Mstep, EmptySegmentRaises) {
  const std::vector<double> xs{1.0, 1.2, 1.4};
  const std::vector<double> tau{1.0, 5.0};
  EXPECT_THROW(beta_given_tau(segment_counts(xs, tau), tau), EmptySegmentError);
}

TEST(Mstep, BreakpointSearchBeatsGrid) {
  Rng rng = make_rng(77);
  const BrokenParetoParams truth({0.5, 3.0}, {1.0, 5.0});
  const auto xs = sample(400, truth, rng);
  const SortedSample sorted(xs);
  const auto fit = complete_mle(sorted, 2);
  EXPECT_EQ(fit.tau()[0], sorted.min());
  const double best = profile_loglik(sorted, fit.tau());

  // Exhaustive grid over tau_2 in log space.
  double grid_best = -kInf;
  for (int k = 1; k < 4000; ++k) {
    const double t2 = sorted.min() * std::exp(k * 4.0 / 4000.0);
    const std::vector<double> tau{sorted.min(), t2};
    grid_best = std::max(grid_best, profile_loglik(sorted, tau));
  }
  EXPECT_GE(best, grid_best - 1e-6);
  EXPECT_NEAR(fit.tau()[1], 5.0, 1.0);
  EXPECT_NEAR(fit.beta()[1], 3.0, 0.8);
}

TEST(Mstep, ProfileEqualsLoglikAtProfiledSlopes) {
  Rng rng = make_rng(5);
  const auto xs = sample(200, BrokenParetoParams({0.8, 2.0}, {1.0, 3.0}), rng);
  const SortedSample sorted(xs);
  const std::vector<double> tau{sorted.min(), 3.2};
  const auto beta = beta_given_tau(sorted.counts(tau), tau);
  const double direct = sample_loglik(xs, BrokenParetoParams::from_estimate(beta, tau));
  EXPECT_NEAR(profile_loglik(sorted, tau), direct, 1e-9 * std::fabs(direct));
}

TEST(Mstep, TooFewObservations) {
  const std::vector<double> xs{1.0, 2.0, 3.0};
  EXPECT_THROW(complete_mle(xs, 2), FitError);
}
