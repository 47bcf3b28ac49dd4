#ifndef LOGNLOGS_EM_HPP
#define LOGNLOGS_EM_HPP

// Monte-Carlo EM for the hierarchical Poisson / broken-Pareto model
//
//   Y_i | S_i ~ Poisson(A_i S_i + b_i),   S_i ~ Pareto_B(beta, tau),
//
// under two augmentations: the fluxes S themselves (sufficient, SAEM) and the
// uniforms U_i = F_B(S_i; theta) (ancillary, AAEM). AEM alternates whole
// iterations of the two; IEM interweaves them inside one iteration by
// mapping the SAEM draws through F_B at the half-step estimate.
//
// Internally the ancillary variable is carried as log(1 - U) = log S_B(S),
// which is uniform-equivalent and keeps full precision in the upper tail.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lognlogs/data.hpp"
#include "lognlogs/distribution.hpp"
#include "lognlogs/errors.hpp"
#include "lognlogs/evidence.hpp"
#include "lognlogs/numerics.hpp"
#include "lognlogs/rng.hpp"

namespace lognlogs {

/// log of the Metropolis-Hastings acceptance probability for replacing the
/// flux of one source, with the likelihood ratio tempered by t in [0, 1].
inline double mh_log_acceptance(const ObservedSource& src, double current, double proposal,
                                double t = 1.0) {
  const double mu_cur = src.a * current + src.b;
  const double mu_new = src.a * proposal + src.b;
  const double yd = static_cast<double>(src.y);
  const double log_ratio = (src.y == 0 ? 0.0 : yd * (std::log(mu_new) - std::log(mu_cur))) -
                           (mu_new - mu_cur);
  return std::min(0.0, t * log_ratio);
}

namespace detail {

// Per-source constants of the Poisson kernel. The log y! term is dropped:
// it cancels in every ratio and in every M-step objective.
struct PoissonKernel {
  std::vector<double> y, a, b, log_a;
  std::vector<double> log_fact;
  bool background_free = true;

  explicit PoissonKernel(const Dataset& d) {
    const std::size_t n = d.size();
    y.resize(n);
    a.resize(n);
    b.resize(n);
    log_a.resize(n);
    log_fact.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = d[i];
      y[i] = static_cast<double>(s.y);
      a[i] = s.a;
      b[i] = s.b;
      log_a[i] = std::log(s.a);
      log_fact[i] = std::lgamma(y[i] + 1.0);
      if (s.b != 0.0) background_free = false;
    }
  }

  std::size_t size() const noexcept { return y.size(); }

  // y log mu - mu, from the flux and its logarithm.
  double kernel(std::size_t i, double x, double log_x) const noexcept {
    const double mu = a[i] * x + b[i];
    if (y[i] == 0.0) return -mu;
    const double log_mu = b[i] == 0.0 ? log_a[i] + log_x : std::log(mu);
    return y[i] * log_mu - mu;
  }
};

}  // namespace detail

/// Independence Metropolis-Hastings chain over the fluxes, proposing from
/// Pareto_B(theta) and sweeping the sources in index order. The same kernel
/// serves the SAEM E-step (t = 1) and the tempered power-posterior chains.
class FluxChain {
public:
  FluxChain(const Dataset& data, std::vector<double> initial)
      : kernel_(data), s_(std::move(initial)), cached_(s_.size()), accepts_(s_.size(), 0) {
    if (s_.size() != data.size()) throw DomainError("FluxChain: state/data size mismatch");
    for (double x : s_) {
      if (!(x > 0.0)) throw DomainError("FluxChain: fluxes must be positive");
    }
    refresh();
  }

  const std::vector<double>& state() const noexcept { return s_; }
  std::size_t sweeps() const noexcept { return sweeps_; }

  /// Moves every flux below tau_1 up to tau_1 so the state lies in the support.
  void clamp_to_support(const BrokenParetoParams& theta) {
    const double lo = theta.lower_bound();
    for (auto& x : s_) x = std::max(x, lo);
    refresh();
  }

  /// Replaces the state (e.g. by a posterior mean for a warm start).
  void set_state(std::vector<double> s) {
    if (s.size() != s_.size()) throw DomainError("FluxChain: state size mismatch");
    s_ = std::move(s);
    refresh();
  }

  void reset_acceptance() {
    std::fill(accepts_.begin(), accepts_.end(), 0);
    sweeps_ = 0;
  }

  std::vector<double> acceptance_rates() const {
    std::vector<double> r(accepts_.size(), 0.0);
    if (sweeps_ == 0) return r;
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] = static_cast<double>(accepts_[i]) / static_cast<double>(sweeps_);
    }
    return r;
  }

  /// One systematic sweep i = 1..n at temperature t.
  void sweep(const BrokenParetoParams& theta, double t, Rng& rng) {
    sweep(theta, t, rng, [](std::size_t, double, double, double) {});
  }

  /// As above; `observe(i, alpha, l_proposal, l_current)` sees each
  /// source's acceptance probability and per-source log-likelihoods before
  /// the accept/reject decision.
  template <class Observer>
  void sweep(const BrokenParetoParams& theta, double t, Rng& rng, Observer&& observe) {
    const std::size_t n = s_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double log_x = theta.log_flux_from_log_survival(std::log(uniform_open(rng)));
      const double x = std::exp(log_x);
      const double k = kernel_.kernel(i, x, log_x);
      const double log_ratio = t * (k - cached_[i]);
      observe(i, log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio), k - kernel_.log_fact[i],
              cached_[i] - kernel_.log_fact[i]);
      const double log_u = std::log(uniform_open(rng));
      if (log_u < log_ratio) {
        s_[i] = x;
        cached_[i] = k;
        ++accepts_[i];
      }
    }
    ++sweeps_;
  }

  /// One random-walk Metropolis step per source in log S with scale
  /// 2.4 / sqrt(t y_i + 1), targeting the same tempered posterior as sweep().
  void local_sweep(const BrokenParetoParams& theta, double t, Rng& rng) {
    const std::size_t n = s_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double sd = 2.4 / std::sqrt(t * kernel_.y[i] + 1.0);
      const double log_x = std::log(s_[i]);
      const double log_prop = log_x + sd * standard_normal(rng);
      const double x = std::exp(log_prop);
      const double log_u = std::log(uniform_open(rng));
      if (x < theta.lower_bound()) continue;
      const double k = kernel_.kernel(i, x, log_prop);
      // Target in log S: t * kernel + log f(S) + log S.
      const double log_ratio = t * (k - cached_[i]) + theta.log_pdf(x) + log_prop -
                               theta.log_pdf(s_[i]) - log_x;
      if (log_u < log_ratio) {
        s_[i] = x;
        cached_[i] = k;
      }
    }
  }

  /// sum_i log g(Y_i; A_i S_i + b_i) at the current state, including log y!.
  double log_likelihood() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < s_.size(); ++i) acc += cached_[i] - kernel_.log_fact[i];
    return acc;
  }

  /// log g(Y_i; A_i S_i + b_i) for one source.
  double source_log_likelihood(std::size_t i) const { return cached_[i] - kernel_.log_fact[i]; }

private:
  void refresh() {
    for (std::size_t i = 0; i < s_.size(); ++i) cached_[i] = kernel_.kernel(i, s_[i], std::log(s_[i]));
  }

  detail::PoissonKernel kernel_;
  std::vector<double> s_;
  std::vector<double> cached_;
  std::vector<std::size_t> accepts_;
  std::size_t sweeps_ = 0;
};

/// One MH sweep over all sources (SAEM E-step kernel). `current` must lie in
/// the support of theta.
inline std::vector<double> mh_sweep_flux(std::vector<double> current, const BrokenParetoParams& theta,
                                         const Dataset& data, Rng& rng) {
  FluxChain chain(data, std::move(current));
  chain.sweep(theta, 1.0, rng);
  return chain.state();
}

/// Independence MH chain over the ancillary variables, carried as
/// v_i = log(1 - U_i); proposals are uniform in U.
class AncillaryChain {
public:
  AncillaryChain(const Dataset& data, std::vector<double> log_surv)
      : kernel_(data), v_(std::move(log_surv)), cached_(v_.size()), accepts_(v_.size(), 0) {
    if (v_.size() != data.size()) throw DomainError("AncillaryChain: state/data size mismatch");
  }

  const std::vector<double>& state() const noexcept { return v_; }

  void sweep(const BrokenParetoParams& theta, Rng& rng) {
    const std::size_t n = v_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double lx = theta.log_flux_from_log_survival(v_[i]);
      cached_[i] = kernel_.kernel(i, std::exp(lx), lx);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::log(uniform_open(rng));
      const double lx = theta.log_flux_from_log_survival(v);
      const double k = kernel_.kernel(i, std::exp(lx), lx);
      if (std::log(uniform_open(rng)) < k - cached_[i]) {
        v_[i] = v;
        cached_[i] = k;
        ++accepts_[i];
      }
    }
    ++sweeps_;
  }

  /// Random-walk Metropolis step per source in v, after sweep() at the
  /// same theta. The scale maps 2.4 / sqrt(y_i + 1) in log S through the
  /// local slope.
  void local_sweep(const BrokenParetoParams& theta, Rng& rng) {
    const std::size_t n = v_.size();
    const auto& breaks = theta.log_survival_at_breaks();
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = 0;
      while (j + 1 < breaks.size() && v_[i] <= breaks[j + 1]) ++j;
      const double sd = theta.beta()[j] * 2.4 / std::sqrt(kernel_.y[i] + 1.0);
      const double v = v_[i] + sd * standard_normal(rng);
      const double log_u = std::log(uniform_open(rng));
      if (!(v < 0.0)) continue;
      const double lx = theta.log_flux_from_log_survival(v);
      const double k = kernel_.kernel(i, std::exp(lx), lx);
      // Density of v = log(1 - U) is e^v on v < 0.
      if (log_u < k + v - cached_[i] - v_[i]) {
        v_[i] = v;
        cached_[i] = k;
      }
    }
  }

  std::vector<double> acceptance_rates() const {
    std::vector<double> r(accepts_.size(), 0.0);
    if (sweeps_ == 0) return r;
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] = static_cast<double>(accepts_[i]) / static_cast<double>(sweeps_);
    }
    return r;
  }

private:
  detail::PoissonKernel kernel_;
  std::vector<double> v_;
  std::vector<double> cached_;
  std::vector<std::size_t> accepts_;
  std::size_t sweeps_ = 0;
};

/// Retained Monte-Carlo draws of the latent fluxes, row-major
/// (draw s, source i).
struct FluxSample {
  std::size_t draws = 0;
  std::size_t sources = 0;
  std::vector<double> s;
  std::vector<double> accept_rate;

  double at(std::size_t draw, std::size_t source) const { return s[draw * sources + source]; }
};

enum class EmAlgorithm { Saem, Aaem, Aem, Iem };

inline const char* to_string(EmAlgorithm a) {
  switch (a) {
    case EmAlgorithm::Saem: return "saem";
    case EmAlgorithm::Aaem: return "aaem";
    case EmAlgorithm::Aem: return "aem";
    case EmAlgorithm::Iem: return "iem";
  }
  return "?";
}

inline EmAlgorithm parse_em_algorithm(const std::string& s) {
  if (s == "saem") return EmAlgorithm::Saem;
  if (s == "aaem") return EmAlgorithm::Aaem;
  if (s == "aem") return EmAlgorithm::Aem;
  if (s == "iem") return EmAlgorithm::Iem;
  throw DomainError("unknown EM algorithm '" + s + "'");
}

struct EmConfig {
  std::size_t n_sim = 1000;
  std::size_t n_burn = 200;
  std::size_t n_limit = 200;
  /// Stop once the relative parameter change, averaged over the last
  /// `conv_window` iterations, falls below this.
  double theta_tol = 1e-3;
  std::size_t conv_window = 3;
  std::uint64_t seed = 1;
  /// SAEM M-step (breakpoint search of the complete-data MLE).
  MleConfig mle{};
  /// AAEM M-step simplex over (log tau_1, log gaps, log beta).
  SimplexConfig aa_simplex{.max_iters = 1500, .x_tol = 1e-6, .f_tol = 1e-7, .initial_step = 0.1};
  /// IEM only: draw fresh U at the half-step estimate instead of mapping the
  /// SAEM draws through F_B.
  bool iem_resample_u = false;
  /// Follow every independence sweep of the E-step chains with a
  /// random-walk sweep (log S for fluxes, log(1 - U) for the ancillary chain).
  bool local_moves = false;
  /// Move the default start's tau_1 to the exact-likelihood maximizer within
  /// a factor of two, holding the other parameters fixed.
  bool refine_tau1 = true;
  /// Starting value; defaults to the complete-data MLE on the plug-in fluxes.
  std::optional<BrokenParetoParams> init;

  void validate() const {
    if (n_sim == 0 || n_burn >= n_sim) throw DomainError("EmConfig: need 0 <= n_burn < n_sim");
    if (n_limit == 0) throw DomainError("EmConfig: n_limit must be >= 1");
    if (!(theta_tol > 0.0)) throw DomainError("EmConfig: theta_tol must be positive");
    if (conv_window == 0) throw DomainError("EmConfig: conv_window must be >= 1");
    mle.simplex.validate();
    aa_simplex.validate();
  }
};

struct FitResult {
  BrokenParetoParams theta_hat;
  /// theta^(0), theta^(1), ...; size is iterations + 1.
  std::vector<BrokenParetoParams> trajectory;
  /// IEM only: theta^(k+0.5) for k = 0..iterations-1.
  std::vector<BrokenParetoParams> half_steps;
  /// Augmentation used for each iteration ("saem", "aaem" or "iem").
  std::vector<std::string> step_kinds;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> final_accept_rates;
  /// Flux chain state after the last E-step.
  std::vector<double> final_state;
  /// Adjacent-slope pairs (0-based j, j+1) closer than 1e-3 in theta_hat.
  std::vector<std::size_t> near_equal_slopes;
};

/// Max relative change over all 2B coordinates.
inline double relative_change(const BrokenParetoParams& prev, const BrokenParetoParams& next) {
  double r = 0.0;
  for (std::size_t j = 0; j < prev.pieces(); ++j) {
    r = std::max(r, std::fabs(next.beta()[j] - prev.beta()[j]) / std::fabs(prev.beta()[j]));
    r = std::max(r, std::fabs(next.tau()[j] - prev.tau()[j]) / std::fabs(prev.tau()[j]));
  }
  return r;
}

/// Monte-Carlo estimate of the AAEM Q-function,
/// (1/N) sum_s sum_i [Y_i log mu_is - mu_is], mu_is = A_i F_B^{-1}(U_is; theta) + b_i,
/// for U carried as log-survival values (row-major draw x source).
inline double ancillary_q(const BrokenParetoParams& theta, const Dataset& data,
                          std::span<const double> log_surv, std::size_t draws) {
  const detail::PoissonKernel k(data);
  const std::size_t n = k.size();
  double acc = 0.0;
  for (std::size_t s = 0; s < draws; ++s) {
    const double* row = log_surv.data() + s * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double lx = theta.log_flux_from_log_survival(row[i]);
      acc += k.kernel(i, std::exp(lx), lx);
    }
  }
  return acc / static_cast<double>(draws);
}

namespace detail {

inline BrokenParetoParams refine_lower_bound(const BrokenParetoParams& theta, const Dataset& data) {
  const auto& tau = theta.tau();
  const double l0 = std::log(tau[0]);
  double hi = l0 + std::log(2.0);
  if (tau.size() > 1) hi = std::min(hi, std::log(tau[1]) - 1e-9);
  auto at = [&](double lt) {
    std::vector<double> t = tau;
    t[0] = std::exp(lt);
    return BrokenParetoParams(theta.beta(), std::move(t));
  };
  auto nll = [&](double lt) {
    const double v = -exact_loglik(at(lt), data);
    return std::isfinite(v) ? v : kInf;
  };
  try {
    std::uintmax_t iters = 60;
    const auto r = boost::math::tools::brent_find_minima(nll, l0 - std::log(2.0), hi, 30, iters);
    if (r.second < nll(l0)) return at(r.first);
  } catch (const Error&) {
  }
  return theta;
}

class EmEngine {
public:
  EmEngine(const Dataset& data, std::size_t pieces, const EmConfig& cfg)
      : data_(data), kernel_(data), pieces_(pieces), cfg_(cfg), rng_(make_rng(cfg.seed)),
        chain_(data, data.naive_fluxes()) {
    cfg_.validate();
    if (pieces_ == 0) throw DomainError("EM: need at least one piece");
    if (data_.size() == 0) throw DomainError("EM: empty dataset");
    if (cfg_.init) {
      if (cfg_.init->pieces() != pieces_) throw DomainError("EM: initial value has wrong B");
      theta_ = *cfg_.init;
    } else {
      try {
        theta_ = complete_mle(data_.naive_fluxes(), pieces_, cfg_.mle);
        if (cfg_.refine_tau1) theta_ = refine_lower_bound(theta_, data_);
      } catch (const FitError& e) {
        throw FitError(std::string("EM initialisation failed: ") + e.what());
      }
    }
    chain_.clamp_to_support(theta_);
  }

  FitResult run(EmAlgorithm algo) {
    FitResult res;
    res.trajectory.push_back(theta_);
    std::vector<double> changes;
    for (std::size_t k = 0; k < cfg_.n_limit; ++k) {
      const BrokenParetoParams prev = theta_;
      try {
        switch (algo) {
          case EmAlgorithm::Saem: saem_step(); res.step_kinds.emplace_back("saem"); break;
          case EmAlgorithm::Aaem: aaem_step(); res.step_kinds.emplace_back("aaem"); break;
          case EmAlgorithm::Aem:
            if (k % 2 == 0) {
              saem_step();
              res.step_kinds.emplace_back("saem");
            } else {
              aaem_step();
              res.step_kinds.emplace_back("aaem");
            }
            break;
          case EmAlgorithm::Iem:
            iem_step(res.half_steps);
            res.step_kinds.emplace_back("iem");
            break;
        }
      } catch (const FitError& e) {
        throw FitError(std::string(to_string(algo)) + " iteration " + std::to_string(k + 1) +
                           ": " + e.what(),
                       prev.beta(), prev.tau());
      }
      res.trajectory.push_back(theta_);
      res.iterations = k + 1;
      changes.push_back(relative_change(prev, theta_));
      if (changes.size() >= cfg_.conv_window) {
        double mean = 0.0;
        for (std::size_t w = changes.size() - cfg_.conv_window; w < changes.size(); ++w) {
          mean += changes[w];
        }
        mean /= static_cast<double>(cfg_.conv_window);
        if (mean < cfg_.theta_tol) {
          res.converged = true;
          break;
        }
      }
    }
    res.theta_hat = theta_;
    res.final_accept_rates = last_accept_;
    res.final_state = chain_.state();
    res.near_equal_slopes = theta_.near_equal_adjacent_slopes();
    return res;
  }

private:
  std::size_t retained() const { return cfg_.n_sim - cfg_.n_burn; }

  // SAEM E-step: flux draws from p(S | Y; theta).
  void flux_estep() {
    const std::size_t n = data_.size();
    draws_.resize(retained() * n);
    chain_.clamp_to_support(theta_);
    chain_.reset_acceptance();
    for (std::size_t s = 0; s < cfg_.n_sim; ++s) {
      chain_.sweep(theta_, 1.0, rng_);
      if (cfg_.local_moves) chain_.local_sweep(theta_, 1.0, rng_);
      if (s >= cfg_.n_burn) {
        std::copy(chain_.state().begin(), chain_.state().end(),
                  draws_.begin() + static_cast<std::ptrdiff_t>((s - cfg_.n_burn) * n));
      }
    }
    last_accept_ = chain_.acceptance_rates();
  }

  // AAEM E-step at `theta`: draws of v = log(1 - U) from p(U | Y; theta).
  void ancillary_estep(const BrokenParetoParams& theta) {
    const std::size_t n = data_.size();
    chain_.clamp_to_support(theta);
    std::vector<double> v0(n);
    for (std::size_t i = 0; i < n; ++i) v0[i] = theta.log_survival(chain_.state()[i]);
    AncillaryChain chain(data_, std::move(v0));
    log_surv_.resize(retained() * n);
    for (std::size_t s = 0; s < cfg_.n_sim; ++s) {
      chain.sweep(theta, rng_);
      if (cfg_.local_moves) chain.local_sweep(theta, rng_);
      if (s >= cfg_.n_burn) {
        std::copy(chain.state().begin(), chain.state().end(),
                  log_surv_.begin() + static_cast<std::ptrdiff_t>((s - cfg_.n_burn) * n));
      }
    }
    last_accept_ = chain.acceptance_rates();
    std::vector<double> fluxes(n);
    for (std::size_t i = 0; i < n; ++i) fluxes[i] = theta.flux_from_log_survival(chain.state()[i]);
    chain_ = FluxChain(data_, std::move(fluxes));
  }

  BrokenParetoParams flux_mstep() const {
    return complete_mle(SortedSample(draws_), pieces_, cfg_.mle);
  }

  BrokenParetoParams ancillary_mstep(const BrokenParetoParams& start) const {
    // Retained chains repeat states whenever a proposal is rejected; runs of
    // equal values per source are collapsed to (value, multiplicity).
    const std::size_t n = data_.size();
    const std::size_t draws = retained();
    std::vector<std::size_t> offset(n + 1, 0);
    std::vector<double> vals;
    std::vector<double> mult;
    vals.reserve(draws);
    mult.reserve(draws);
    for (std::size_t i = 0; i < n; ++i) {
      offset[i] = vals.size();
      for (std::size_t s = 0; s < draws; ++s) {
        const double v = log_surv_[s * n + i];
        if (s > 0 && vals.size() > offset[i] && vals.back() == v) {
          mult.back() += 1.0;
        } else {
          vals.push_back(v);
          mult.push_back(1.0);
        }
      }
    }
    offset[n] = vals.size();

    const double inv = 1.0 / static_cast<double>(draws);
    std::vector<double> beta, tau;
    auto objective = [&](std::span<const double> z) {
      if (!from_unconstrained(z, beta, tau)) return kInf;
      const auto theta = BrokenParetoParams::from_estimate(beta, tau);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = offset[i]; r < offset[i + 1]; ++r) {
          const double lx = theta.log_flux_from_log_survival(vals[r]);
          acc += mult[r] * kernel_.kernel(i, std::exp(lx), lx);
        }
      }
      const double f = -acc * inv;
      return std::isfinite(f) ? f : kInf;
    };
    const auto z0 = to_unconstrained(start);
    const auto res = nelder_mead(objective, z0, cfg_.aa_simplex);
    if (!std::isfinite(res.value) || !from_unconstrained(res.argmin, beta, tau)) {
      throw FitError("ancillary M-step found no finite optimum");
    }
    return BrokenParetoParams::from_estimate(beta, tau);
  }

  void saem_step() {
    flux_estep();
    theta_ = flux_mstep();
  }

  void aaem_step() {
    ancillary_estep(theta_);
    theta_ = ancillary_mstep(theta_);
  }

  void iem_step(std::vector<BrokenParetoParams>& half_steps) {
    flux_estep();
    const BrokenParetoParams half = flux_mstep();
    half_steps.push_back(half);
    if (cfg_.iem_resample_u) {
      ancillary_estep(half);
    } else {
      // Same draws, mapped through F_B at the half-step estimate. Every draw
      // is >= the pooled minimum, which is the new tau_1.
      log_surv_.resize(draws_.size());
      for (std::size_t k = 0; k < draws_.size(); ++k) log_surv_[k] = half.log_survival(draws_[k]);
    }
    theta_ = ancillary_mstep(half);
  }

  const Dataset& data_;
  PoissonKernel kernel_;
  std::size_t pieces_;
  EmConfig cfg_;
  Rng rng_;
  FluxChain chain_;
  BrokenParetoParams theta_;
  std::vector<double> draws_;
  std::vector<double> log_surv_;
  std::vector<double> last_accept_;
};

}  // namespace detail

inline FitResult em_fit(const Dataset& data, std::size_t pieces, EmAlgorithm algo,
                        const EmConfig& cfg = {}) {
  detail::EmEngine engine(data, pieces, cfg);
  return engine.run(algo);
}

inline FitResult saem_fit(const Dataset& data, std::size_t pieces, const EmConfig& cfg = {}) {
  return em_fit(data, pieces, EmAlgorithm::Saem, cfg);
}
inline FitResult aaem_fit(const Dataset& data, std::size_t pieces, const EmConfig& cfg = {}) {
  return em_fit(data, pieces, EmAlgorithm::Aaem, cfg);
}
inline FitResult aem_fit(const Dataset& data, std::size_t pieces, const EmConfig& cfg = {}) {
  return em_fit(data, pieces, EmAlgorithm::Aem, cfg);
}
inline FitResult iem_fit(const Dataset& data, std::size_t pieces, const EmConfig& cfg = {}) {
  return em_fit(data, pieces, EmAlgorithm::Iem, cfg);
}

/// Draws from p(S | Y; theta) for plotting: the per-source posterior mean
/// over the retained draws, or the last draw.
enum class ImputeMode { Mean, Draw };

inline std::vector<double> impute_fluxes(const Dataset& data, const BrokenParetoParams& theta,
                                         std::size_t n_sim, std::size_t n_burn, std::uint64_t seed,
                                         ImputeMode mode) {
  if (n_burn >= n_sim) throw DomainError("impute_fluxes: need n_burn < n_sim");
  Rng rng = make_rng(seed);
  FluxChain chain(data, data.naive_fluxes());
  chain.clamp_to_support(theta);
  std::vector<double> mean(data.size(), 0.0);
  for (std::size_t s = 0; s < n_sim; ++s) {
    chain.sweep(theta, 1.0, rng);
    chain.local_sweep(theta, 1.0, rng);
    if (s >= n_burn) {
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += chain.state()[i];
    }
  }
  if (mode == ImputeMode::Draw) return chain.state();
  for (auto& m : mean) m /= static_cast<double>(n_sim - n_burn);
  return mean;
}

}  // namespace lognlogs

#endif  // LOGNLOGS_EM_HPP
