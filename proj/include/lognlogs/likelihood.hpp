#ifndef LOGNLOGS_LIKELIHOOD_HPP
#define LOGNLOGS_LIKELIHOOD_HPP

// Observed-data log-likelihood by the power-posterior (thermodynamic
// integration) identity
//
//   log p(Y) = int_0^1 E_t[ log p(Y | S) ] dt,
//   p_t(S | Y) ∝ p(Y | S)^t p(S; theta),
//
// estimated on the grid t_k = (k / n_grid)^c with tempered MH chains run
// rung by rung; each chain alternates prior-proposal sweeps with random-walk
// sweeps in log S.
//
// Given theta the tempered posterior factorizes over sources, so rung
// moments are accumulated per source. Two quadrature rules are offered:
//
//   Trapezoid   plain trapezoid over (t_k, l_k), k = 0..n_grid.
//   LogHermite  [0, t_1]: sum_i log E_0[exp(t_1 l_i)], each a one-dimensional
//               integral against the prior, by adaptive quadrature;
//               [t_1, 1]: cubic Hermite in log t using d/dt E_t[l] = Var_t[l].
//
// E_0[l] is infinite whenever the prior flux mean is (beta_1 <= 1), which
// makes the trapezoid unusable for bright sources; LogHermite is the default.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lognlogs/data.hpp"
#include "lognlogs/distribution.hpp"
#include "lognlogs/em.hpp"
#include "lognlogs/evidence.hpp"
#include "lognlogs/errors.hpp"
#include "lognlogs/numerics.hpp"
#include "lognlogs/rng.hpp"

namespace lognlogs {

enum class QuadratureRule { LogHermite, Trapezoid };

inline std::string to_string(QuadratureRule r) {
  return r == QuadratureRule::Trapezoid ? "trapezoid" : "log-hermite";
}

inline QuadratureRule parse_quadrature_rule(const std::string& s) {
  if (s == "trapezoid") return QuadratureRule::Trapezoid;
  if (s == "log-hermite" || s == "hermite") return QuadratureRule::LogHermite;
  throw DomainError("unknown quadrature rule '" + s + "' (expected log-hermite or trapezoid)");
}

struct PowerPosteriorConfig {
  std::size_t n_grid = 30;
  double c = 3.0;
  std::size_t n_sim = 2000;
  std::size_t n_burn = 500;
  std::uint64_t seed = 1;
  /// Batches for the batch-means standard errors.
  std::size_t batches = 10;
  QuadratureRule rule = QuadratureRule::LogHermite;
  /// Random-walk sweeps in log S after each prior-proposal sweep (t > 0).
  std::size_t local_steps = 3;

  void validate() const {
    if (n_grid < 2) throw DomainError("PowerPosteriorConfig: n_grid must be >= 2");
    if (!(c >= 1.0)) throw DomainError("PowerPosteriorConfig: c must be >= 1");
    if (n_burn >= n_sim) throw DomainError("PowerPosteriorConfig: need n_burn < n_sim");
    if (batches < 2 || (n_sim - n_burn) / batches < 2) {
      throw DomainError("PowerPosteriorConfig: need at least two retained draws per batch");
    }
  }

  /// t_k = (k / n_grid)^c, k = 0..n_grid; endpoints exactly 0 and 1.
  std::vector<double> grid() const {
    std::vector<double> t(n_grid + 1);
    for (std::size_t k = 0; k <= n_grid; ++k) {
      t[k] = std::pow(static_cast<double>(k) / static_cast<double>(n_grid), c);
    }
    t.front() = 0.0;
    t.back() = 1.0;
    return t;
  }
};

struct LoglikEstimate {
  double value = 0.0;
  std::vector<double> rung_ts;
  /// l_t: retained-draw mean of log p(Y | S) at each rung.
  std::vector<double> rung_means;
  /// Var_t[log p(Y | S)], summed over sources.
  std::vector<double> rung_vars;
  /// Batch-means standard error of each rung mean.
  std::vector<double> rung_se;
  /// Contribution of [0, t_1] (LogHermite only).
  double first_panel = 0.0;
  /// Batch-means errors propagated through the quadrature weights.
  double mc_se = 0.0;
};

/// One MH sweep targeting p(Y | S)^t p(S; theta).
inline std::vector<double> tempered_mh_sweep(std::vector<double> current,
                                             const BrokenParetoParams& theta, const Dataset& data,
                                             double t, Rng& rng) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("tempered_mh_sweep: t must lie in [0, 1]");
  FluxChain chain(data, std::move(current));
  chain.sweep(theta, t, rng);
  return chain.state();
}

namespace detail {

// Per-source, per-batch shifted moments of l_i.
class RungMoments {
public:
  RungMoments(std::size_t n, std::size_t batches)
      : n_(n), started_(n, 0), shift_(n, 0.0), s1_(n * batches, 0.0), s2_(n * batches, 0.0),
        count_(batches, 0) {}

  // Rao-Blackwellized over the accept/reject coin: the next state is the
  // proposal with probability alpha, otherwise the current state.
  void add(std::size_t batch, std::size_t i, double alpha, double l_prop, double l_cur) {
    if (i == 0) ++count_[batch];
    if (!started_[i]) {
      shift_[i] = l_cur;
      started_[i] = 1;
    }
    const std::size_t j = batch * n_ + i;
    const double dp = l_prop - shift_[i];
    const double dc = l_cur - shift_[i];
    s1_[j] += alpha * dp + (1.0 - alpha) * dc;
    s2_[j] += alpha * dp * dp + (1.0 - alpha) * dc * dc;
  }

  // Mean and variance of sum_i l_i over the given batch range.
  void moments(std::size_t b0, std::size_t b1, double& mean, double& var) const {
    double m = 0.0;
    double v = 0.0;
    double cnt = 0.0;
    for (std::size_t b = b0; b < b1; ++b) cnt += static_cast<double>(count_[b]);
    for (std::size_t i = 0; i < n_; ++i) {
      double a1 = 0.0;
      double a2 = 0.0;
      for (std::size_t b = b0; b < b1; ++b) {
        a1 += s1_[b * n_ + i];
        a2 += s2_[b * n_ + i];
      }
      const double mu = a1 / cnt;
      m += shift_[i] + mu;
      v += std::max(0.0, (a2 - cnt * mu * mu) / (cnt - 1.0));
    }
    mean = m;
    var = v;
  }

private:
  std::size_t n_;
  std::vector<char> started_;
  std::vector<double> shift_, s1_, s2_;
  std::vector<std::size_t> count_;
};

inline double batch_se(const std::vector<double>& xs) {
  const double k = static_cast<double>(xs.size());
  double m = 0.0;
  for (double x : xs) m += x;
  m /= k;
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return std::sqrt(v / (k - 1.0) / k);
}

// Per source, the candidate start (last state, rung mean or plug-in flux)
// with the highest tempered density t log g(Y | S) + log f(S; theta).
inline std::vector<double> warm_start(const BrokenParetoParams& theta, const Dataset& data, double t,
                                      const std::vector<double>& last, const std::vector<double>& mean) {
  const auto naive = data.naive_fluxes();
  std::vector<double> out(last.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& src = data[i];
    double best = -kInf;
    for (double x : {last[i], mean[i], std::max(naive[i], theta.lower_bound())}) {
      if (!(x >= theta.lower_bound()) || !std::isfinite(x)) continue;
      const double v = t * poisson_log_pmf(src.y, src.a * x + src.b) + theta.log_pdf(x);
      if (v > best) {
        best = v;
        out[i] = x;
      }
    }
  }
  return out;
}

}  // namespace detail

inline LoglikEstimate power_posterior_loglik(const BrokenParetoParams& theta, const Dataset& data,
                                             const PowerPosteriorConfig& cfg = {}) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed);
  FluxChain chain(data, data.naive_fluxes());
  chain.clamp_to_support(theta);

  const std::size_t n = data.size();
  const std::size_t retained = cfg.n_sim - cfg.n_burn;
  const std::size_t batch_len = retained / cfg.batches;
  const bool hermite = cfg.rule == QuadratureRule::LogHermite;

  LoglikEstimate est;
  est.rung_ts = cfg.grid();
  const std::size_t rungs = est.rung_ts.size();
  est.rung_means.resize(rungs);
  est.rung_vars.resize(rungs);
  est.rung_se.resize(rungs);

  std::vector<double> wv;
  std::vector<double> ws;
  if (hermite) {
    const auto hw = log_hermite_weights(std::span<const double>(est.rung_ts).subspan(1));
    wv.assign(rungs, 0.0);
    ws.assign(rungs, 0.0);
    std::copy(hw.value.begin(), hw.value.end(), wv.begin() + 1);
    std::copy(hw.slope.begin(), hw.slope.end(), ws.begin() + 1);
  } else {
    wv = trapezoid_weights(est.rung_ts);
    ws.assign(rungs, 0.0);
  }

  double var_total = 0.0;
  std::vector<double> mean_state(n);
  std::vector<double> per_batch(cfg.batches);
  std::vector<double> per_batch_q(cfg.batches);
  for (std::size_t k = 0; k < rungs; ++k) {
    const double t = est.rung_ts[k];
    detail::RungMoments mom(n, cfg.batches);
    std::fill(mean_state.begin(), mean_state.end(), 0.0);
    const std::size_t local = t > 0.0 ? cfg.local_steps : 0;
    for (std::size_t s = 0; s < cfg.n_sim; ++s) {
      if (s < cfg.n_burn) {
        chain.sweep(theta, t, rng);
        for (std::size_t q = 0; q < local; ++q) chain.local_sweep(theta, t, rng);
        continue;
      }
      const std::size_t batch = (s - cfg.n_burn) / batch_len;
      if (batch < cfg.batches) {
        chain.sweep(theta, t, rng, [&](std::size_t i, double alpha, double lp, double lc) {
          mom.add(batch, i, alpha, lp, lc);
        });
      } else {
        chain.sweep(theta, t, rng);
      }
      for (std::size_t q = 0; q < local; ++q) chain.local_sweep(theta, t, rng);
      for (std::size_t i = 0; i < n; ++i) mean_state[i] += chain.state()[i];
    }
    double mean = 0.0;
    double var = 0.0;
    mom.moments(0, cfg.batches, mean, var);
    if (!std::isfinite(mean) || !std::isfinite(var)) {
      throw NumericFailure("power_posterior_loglik: non-finite mean at rung " + std::to_string(k) +
                           " (t = " + std::to_string(t) + ")");
    }
    est.rung_means[k] = mean;
    est.rung_vars[k] = var;
    for (std::size_t b = 0; b < cfg.batches; ++b) {
      double bm = 0.0;
      double bv = 0.0;
      mom.moments(b, b + 1, bm, bv);
      per_batch[b] = bm;
      per_batch_q[b] = wv[k] * bm + ws[k] * bv;
    }
    est.rung_se[k] = detail::batch_se(per_batch);
    const double q_se = detail::batch_se(per_batch_q);
    var_total += q_se * q_se;

    for (auto& m : mean_state) m /= static_cast<double>(retained);
    if (k + 1 < rungs) chain.set_state(detail::warm_start(theta, data, est.rung_ts[k + 1], chain.state(), mean_state));
  }

  if (hermite) {
    for (std::size_t i = 0; i < n; ++i) {
      est.first_panel += source_log_tempered_evidence(theta, data[i], est.rung_ts[1]);
    }
  }
  double value = est.first_panel;
  for (std::size_t k = 0; k < rungs; ++k) {
    value += wv[k] * est.rung_means[k] + ws[k] * est.rung_vars[k];
  }
  est.value = value;
  est.mc_se = std::sqrt(var_total);
  return est;
}

}  // namespace lognlogs

#endif  // LOGNLOGS_LIKELIHOOD_HPP
