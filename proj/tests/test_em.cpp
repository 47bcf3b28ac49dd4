#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "lognlogs/closed_form.hpp"
#include "lognlogs/em.hpp"
#include "lognlogs/evidence.hpp"
#include "lognlogs/simulate.hpp"
#include "test_support.hpp"

using namespace lognlogs;

namespace {

// With b = 0 and one segment, S | Y at temperature t has density
// proportional to s^(t y - beta - 1) e^(-t a s) on s >= tau.
double tempered_posterior_cdf(double s, std::uint64_t y, double a, double beta, double tau, double t) {
  const double shape = t * static_cast<double>(y) - beta;
  const double q_tau = boost::math::gamma_q(shape, t * a * tau);
  const double q_s = boost::math::gamma_q(shape, t * a * s);
  return 1.0 - q_s / q_tau;
}

Dataset single_source(std::uint64_t y, double a) { return Dataset({{y, a, 0.0}}); }

}  // namespace

TEST(Poisson, LogPmfMatchesBoost) {
  for (double mu : {0.3, 4.0, 250.0}) {
    const boost::math::poisson_distribution<> d(mu);
    for (std::uint64_t y : {0ULL, 1ULL, 7ULL, 300ULL}) {
      const double pmf = boost::math::pdf(d, static_cast<double>(y));
      if (pmf < 1e-300) continue;
      EXPECT_NEAR(poisson_log_pmf(y, mu), std::log(boost::math::pdf(d, static_cast<double>(y))), 1e-10);
    }
  }
  EXPECT_TRUE(std::isfinite(poisson_log_pmf(10000, 1e4)));
}

TEST(Acceptance, ZeroCountNoBackground) {
  const ObservedSource src{0, 2.0, 0.0};
  EXPECT_NEAR(mh_log_acceptance(src, 1.0, 1.5), -2.0 * 0.5, 1e-15);
  EXPECT_EQ(mh_log_acceptance(src, 1.5, 1.0), 0.0);
  EXPECT_EQ(mh_log_acceptance(src, 1.0, 1.5, 0.0), 0.0);
}

TEST(Acceptance, LargeCountsStayFinite) {
  const ObservedSource src{10000, 1e19, 3.0};
  const double l = mh_log_acceptance(src, 1e-15, 2e-15);
  EXPECT_TRUE(std::isfinite(l));
  EXPECT_LE(l, 0.0);
}

TEST(FluxChain, ZeroTemperatureAcceptsEverything) {
  Rng rng = make_rng(3);
  const auto sim = generate(preset("setting2", 4));
  const BrokenParetoParams theta({0.5, 3.0}, {1e-17, 5e-17});
  FluxChain chain(sim.data, sim.data.naive_fluxes());
  chain.clamp_to_support(theta);
  for (int s = 0; s < 20; ++s) chain.sweep(theta, 0.0, rng);
  for (double r : chain.acceptance_rates()) EXPECT_EQ(r, 1.0);
}

TEST(FluxChain, UnitTemperatureMatchesSweepFunction) {
  const auto sim = generate(preset("setting1", 2));
  const BrokenParetoParams theta({1.0}, {5e-17});
  auto start = sim.data.naive_fluxes();
  for (auto& x : start) x = std::max(x, theta.lower_bound());
  Rng r1 = make_rng(8), r2 = make_rng(8);
  FluxChain chain(sim.data, start);
  chain.sweep(theta, 1.0, r1);
  EXPECT_EQ(chain.state(), mh_sweep_flux(start, theta, sim.data, r2));
}

TEST(FluxChain, CachedLikelihoodMatchesDirect) {
  const auto sim = generate(preset("setting2", 9));
  const BrokenParetoParams theta({0.5, 3.0}, {1e-17, 5e-17});
  Rng rng = make_rng(1);
  FluxChain chain(sim.data, sim.data.naive_fluxes());
  chain.clamp_to_support(theta);
  for (int s = 0; s < 5; ++s) {
    chain.sweep(theta, 0.7, rng);
    chain.local_sweep(theta, 0.7, rng);
  }
  double direct = 0.0;
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    const auto& src = sim.data[i];
    direct += poisson_log_pmf(src.y, src.a * chain.state()[i] + src.b);
  }
  EXPECT_NEAR(chain.log_likelihood(), direct, 1e-9 * std::fabs(direct));
}

struct KernelCase {
  std::uint64_t y;
  double a;
  double t;
  bool local;
};

void PrintTo(const KernelCase& c, std::ostream* os) {
  *os << "y=" << c.y << ",a=" << c.a << ",t=" << c.t << (c.local ? ",local" : "");
}

class PosteriorKernel : public ::testing::TestWithParam<KernelCase> {};

TEST_P(PosteriorKernel, StationaryDistributionIsTemperedPosterior) {
  const auto c = GetParam();
  const double beta = 1.2, tau = 5e-17;
  const BrokenParetoParams theta({beta}, {tau});
  const Dataset d = single_source(c.y, c.a);
  FluxChain chain(d, {std::max(static_cast<double>(c.y) / c.a, tau)});
  Rng rng = make_rng(c.y * 31 + static_cast<std::uint64_t>(c.t * 100));
  std::vector<double> xs;
  for (int s = 0; s < 200000; ++s) {
    chain.sweep(theta, c.t, rng);
    if (c.local) chain.local_sweep(theta, c.t, rng);
    if (s >= 1000 && s % 10 == 0) xs.push_back(chain.state()[0]);
  }
  const double ks = testing_support::ks_distance(
      xs, [&](double s) { return tempered_posterior_cdf(s, c.y, c.a, beta, tau, c.t); });
  EXPECT_LT(ks, 0.03);
}

INSTANTIATE_TEST_SUITE_P(Kernels, PosteriorKernel,
                         ::testing::Values(KernelCase{4, 1e17, 1.0, false}, KernelCase{30, 1e18, 1.0, false},
                                           KernelCase{30, 1e18, 0.3, false}, KernelCase{30, 1e18, 1.0, true},
                                           KernelCase{400, 1e19, 0.5, true}),
                         [](const ::testing::TestParamInfo<KernelCase>& info) {
                           const auto& c = info.param;
                           return "y" + std::to_string(c.y) + "_t" + std::to_string(static_cast<int>(c.t * 10)) +
                                  (c.local ? "_local" : "_prior") + "_" + std::to_string(info.index);
                         });

TEST(AncillaryChain, StationaryDistributionIsPosterior) {
  const double beta = 1.2, tau = 5e-17, a = 1e18;
  const std::uint64_t y = 25;
  const BrokenParetoParams theta({beta}, {tau});
  const Dataset d = single_source(y, a);
  AncillaryChain chain(d, {theta.log_survival(static_cast<double>(y) / a)});
  Rng rng = make_rng(17);
  std::vector<double> xs;
  for (int s = 0; s < 200000; ++s) {
    chain.sweep(theta, rng);
    if (s >= 1000 && s % 10 == 0) xs.push_back(theta.flux_from_log_survival(chain.state()[0]));
  }
  const double ks = testing_support::ks_distance(
      xs, [&](double s) { return tempered_posterior_cdf(s, y, a, beta, tau, 1.0); });
  EXPECT_LT(ks, 0.03);
}

TEST(Em, SaemAndIemShareFirstHalfStep) {
  const auto sim = generate(preset("setting2", 21));
  EmConfig cfg;
  cfg.n_sim = 200;
  cfg.n_burn = 50;
  cfg.n_limit = 2;
  cfg.seed = 99;
  const auto saem = saem_fit(sim.data, 2, cfg);
  const auto iem = iem_fit(sim.data, 2, cfg);
  ASSERT_GE(saem.trajectory.size(), 2u);
  ASSERT_GE(iem.half_steps.size(), 1u);
  EXPECT_EQ(saem.trajectory[0], iem.trajectory[0]);
  EXPECT_EQ(saem.trajectory[1], iem.half_steps[0]);
}

TEST(Em, DeterministicPerSeed) {
  const auto sim = generate(preset("setting1", 5));
  EmConfig cfg;
  cfg.n_sim = 200;
  cfg.n_burn = 50;
  cfg.n_limit = 5;
  for (auto algo : {EmAlgorithm::Saem, EmAlgorithm::Aaem, EmAlgorithm::Aem, EmAlgorithm::Iem}) {
    const auto a = em_fit(sim.data, 1, algo, cfg);
    const auto b = em_fit(sim.data, 1, algo, cfg);
    EXPECT_EQ(a.theta_hat, b.theta_hat) << to_string(algo);
    EXPECT_EQ(a.trajectory.size(), a.iterations + 1);
  }
}

TEST(Em, AemAlternatesAugmentations) {
  const auto sim = generate(preset("setting1", 6));
  EmConfig cfg;
  cfg.n_sim = 100;
  cfg.n_burn = 20;
  cfg.n_limit = 4;
  cfg.theta_tol = 1e-12;
  const auto r = aem_fit(sim.data, 1, cfg);
  ASSERT_EQ(r.step_kinds.size(), 4u);
  EXPECT_EQ(r.step_kinds[0], "saem");
  EXPECT_EQ(r.step_kinds[1], "aaem");
  EXPECT_EQ(r.step_kinds[2], "saem");
  EXPECT_EQ(r.step_kinds[3], "aaem");
}

TEST(Em, IemRecoversSettingTwoSlopes) {
  const auto sim = generate(preset("setting2", 7));
  EmConfig cfg;
  cfg.n_sim = 400;
  cfg.n_burn = 100;
  cfg.n_limit = 60;
  const auto r = iem_fit(sim.data, 2, cfg);
  EXPECT_NEAR(r.theta_hat.beta()[0], 0.5, 0.25 * 0.5);
  EXPECT_NEAR(r.theta_hat.beta()[1], 3.0, 0.25 * 3.0);
}

TEST(Em, FitsApproachClosedFormOptimum) {
  SimSetting s;
  s.params = BrokenParetoParams({1.0}, {5e-17});
  s.n = 100;
  s.b = {0.0};
  s.seed = 12;
  const auto sim = generate(s);
  auto nll = [&](std::span<const double> z) {
    std::vector<double> b, t;
    if (!from_unconstrained(z, b, t)) return kInf;
    return -closed_form_loglik_nobg(BrokenParetoParams::from_estimate(b, t), sim.data);
  };
  const auto z0 = to_unconstrained(s.params);
  SimplexConfig sc;
  sc.x_tol = 1e-10;
  sc.f_tol = 1e-12;
  const double best = nelder_mead(nll, z0, sc).value;
  EmConfig cfg;
  cfg.n_sim = 500;
  cfg.n_burn = 100;
  for (auto algo : {EmAlgorithm::Saem, EmAlgorithm::Iem}) {
    const auto r = em_fit(sim.data, 1, algo, cfg);
    EXPECT_LT(-closed_form_loglik_nobg(r.theta_hat, sim.data) - best, 0.5) << to_string(algo);
  }
}

TEST(Em, RefinedStartRaisesExactLikelihood) {
  SimSetting s;
  s.params = BrokenParetoParams({1.0}, {5e-17});
  s.n = 400;
  s.b = {0.0};
  s.seed = 41;
  const auto sim = generate(s);
  EmConfig cfg;
  cfg.n_sim = 20;
  cfg.n_burn = 5;
  cfg.n_limit = 1;
  const auto refined = saem_fit(sim.data, 1, cfg);
  cfg.refine_tau1 = false;
  const auto naive = saem_fit(sim.data, 1, cfg);
  const auto& r0 = refined.trajectory.front();
  const auto& n0 = naive.trajectory.front();
  EXPECT_EQ(r0.beta(), n0.beta());
  EXPECT_GT(exact_loglik(r0, sim.data), exact_loglik(n0, sim.data));
  EXPECT_LE(std::abs(std::log(r0.tau()[0] / n0.tau()[0])), std::log(2.0) + 1e-12);
  // Refinement starts the flux chain closer to the MLE.
  EXPECT_LT(std::abs(std::log(r0.tau()[0] / 5e-17)), std::abs(std::log(n0.tau()[0] / 5e-17)));
}

TEST(Em, RefinedStartKeepsBreakpointsOrdered) {
  const auto sim = generate(preset("setting2", 8));
  EmConfig cfg;
  cfg.n_sim = 20;
  cfg.n_burn = 5;
  cfg.n_limit = 1;
  const auto r = saem_fit(sim.data, 3, cfg);
  const auto& t = r.trajectory.front().tau();
  EXPECT_LT(t[0], t[1]);
  EXPECT_LT(t[1], t[2]);
}

TEST(Evidence, ExactLoglikSumsSources) {
  const auto sim = generate(preset("setting1", 2));
  const BrokenParetoParams theta({1.0}, {5e-17});
  double direct = 0.0;
  for (std::size_t i = 0; i < sim.data.size(); ++i) direct += source_log_tempered_evidence(theta, sim.data[i], 1.0);
  EXPECT_DOUBLE_EQ(exact_loglik(theta, sim.data), direct);
}

TEST(Em, ImputedMeansLieInSupport) {
  const auto sim = generate(preset("setting1", 3));
  const BrokenParetoParams theta({1.0}, {5e-17});
  const auto m = impute_fluxes(sim.data, theta, 200, 50, 1, ImputeMode::Mean);
  const auto d = impute_fluxes(sim.data, theta, 200, 50, 1, ImputeMode::Draw);
  ASSERT_EQ(m.size(), sim.data.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_GE(m[i], 5e-17);
    EXPECT_GE(d[i], 5e-17);
  }
}

TEST(Em, ConfigValidation) {
  const auto sim = generate(preset("setting1", 3));
  EmConfig cfg;
  cfg.n_burn = cfg.n_sim;
  EXPECT_THROW(iem_fit(sim.data, 1, cfg), DomainError);
  EmConfig wrong;
  wrong.init = BrokenParetoParams({1.0, 2.0}, {1e-17, 5e-17});
  EXPECT_THROW(iem_fit(sim.data, 1, wrong), DomainError);
}
