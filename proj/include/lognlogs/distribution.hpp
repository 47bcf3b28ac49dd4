#ifndef LOGNLOGS_DISTRIBUTION_HPP
#define LOGNLOGS_DISTRIBUTION_HPP

// The B-piece (broken) Pareto law
//
//   S_B(x) = prod_{k<j} (tau_k / tau_{k+1})^beta_k * (tau_j / x)^beta_j,
//            tau_j <= x < tau_{j+1},
//
// with S_B(x) = 1 below tau_1, together with the complete-data maximum
// likelihood machinery (slopes given breakpoints, the profile likelihood in
// the breakpoints and its Nelder-Mead maximisation).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lognlogs/errors.hpp"
#include "lognlogs/numerics.hpp"
#include "lognlogs/rng.hpp"

namespace lognlogs {

class BrokenParetoParams {
public:
  BrokenParetoParams() = default;

  /// User-facing constructor: validates every invariant of the parameter
  /// space, including distinct adjacent slopes.
  BrokenParetoParams(std::vector<double> beta, std::vector<double> tau)
      : beta_(std::move(beta)), tau_(std::move(tau)) {
    validate(true);
    build();
  }

  /// Constructor for estimator output. Adjacent slopes may coincide.
  static BrokenParetoParams from_estimate(std::vector<double> beta, std::vector<double> tau) {
    BrokenParetoParams p;
    p.beta_ = std::move(beta);
    p.tau_ = std::move(tau);
    p.validate(false);
    p.build();
    return p;
  }

  std::size_t pieces() const noexcept { return beta_.size(); }
  const std::vector<double>& beta() const noexcept { return beta_; }
  const std::vector<double>& tau() const noexcept { return tau_; }
  double lower_bound() const noexcept { return tau_.front(); }

  /// log S_B(tau_j) for 0-based segment j; element 0 is 0.
  const std::vector<double>& log_survival_at_breaks() const noexcept { return log_surv_; }

  /// 0-based segment containing x >= tau_1 (the last j with tau_j <= x).
  std::size_t segment_of(double x) const noexcept {
    std::size_t j = 0;
    while (j + 1 < tau_.size() && x >= tau_[j + 1]) ++j;
    return j;
  }

  double log_survival(double x) const {
    check_flux(x);
    if (x < tau_.front()) return 0.0;
    const std::size_t j = segment_of(x);
    return log_surv_[j] - beta_[j] * std::log(x / tau_[j]);
  }
  double survival(double x) const { return std::exp(log_survival(x)); }
  double cdf(double x) const { return -std::expm1(log_survival(x)); }

  double log_pdf(double x) const {
    check_flux(x);
    if (x < tau_.front()) return -kInf;
    const std::size_t j = segment_of(x);
    return std::log(beta_[j]) + log_surv_[j] - beta_[j] * std::log(x / tau_[j]) - std::log(x);
  }
  double pdf(double x) const {
    const double l = log_pdf(x);
    return l == -kInf ? 0.0 : std::exp(l);
  }

  /// Inverse survival in log space: the x >= tau_1 with log S_B(x) == ls,
  /// for ls <= 0. Returned as log x.
  double log_flux_from_log_survival(double ls) const noexcept {
    std::size_t j = 0;
    while (j + 1 < tau_.size() && ls <= log_surv_[j + 1]) ++j;
    return log_tau_[j] + (log_surv_[j] - ls) / beta_[j];
  }
  double flux_from_log_survival(double ls) const noexcept {
    std::size_t j = 0;
    while (j + 1 < tau_.size() && ls <= log_surv_[j + 1]) ++j;
    return tau_[j] * std::exp((log_surv_[j] - ls) / beta_[j]);
  }

  /// F_B^{-1}(u) for 0 < u < 1.
  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0, 1)");
    return flux_from_log_survival(std::log1p(-u));
  }

  /// Index pairs (j, j+1) whose slopes differ by less than `tol`.
  std::vector<std::size_t> near_equal_adjacent_slopes(double tol = 1e-3) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j + 1 < beta_.size(); ++j) {
      if (std::fabs(beta_[j] - beta_[j + 1]) < tol) out.push_back(j);
    }
    return out;
  }

  friend bool operator==(const BrokenParetoParams& a, const BrokenParetoParams& b) {
    return a.beta_ == b.beta_ && a.tau_ == b.tau_;
  }

private:
  void validate(bool require_distinct_slopes) const {
    if (beta_.empty() || beta_.size() != tau_.size()) {
      throw DomainError("BrokenParetoParams: beta and tau must be nonempty and of equal length");
    }
    for (std::size_t j = 0; j < beta_.size(); ++j) {
      if (!(beta_[j] > 0.0) || !std::isfinite(beta_[j])) {
        throw DomainError("BrokenParetoParams: slopes must be positive and finite");
      }
      if (!(tau_[j] > 0.0) || !std::isfinite(tau_[j])) {
        throw DomainError("BrokenParetoParams: breakpoints must be positive and finite");
      }
      if (j > 0 && !(tau_[j] > tau_[j - 1])) {
        throw DomainError("BrokenParetoParams: breakpoints must be strictly increasing");
      }
      if (require_distinct_slopes && j > 0 && beta_[j] == beta_[j - 1]) {
        throw DomainError("BrokenParetoParams: adjacent slopes must differ");
      }
    }
  }

  void build() {
    const std::size_t b = beta_.size();
    log_tau_.resize(b);
    log_surv_.assign(b, 0.0);
    for (std::size_t j = 0; j < b; ++j) log_tau_[j] = std::log(tau_[j]);
    for (std::size_t j = 1; j < b; ++j) {
      log_surv_[j] = log_surv_[j - 1] + beta_[j - 1] * (log_tau_[j - 1] - log_tau_[j]);
    }
  }

  static void check_flux(double x) {
    if (!(x > 0.0)) throw DomainError("broken Pareto: flux must be positive");
  }

  std::vector<double> beta_;
  std::vector<double> tau_;
  std::vector<double> log_tau_;
  std::vector<double> log_surv_;
};

inline double survival(double x, const BrokenParetoParams& p) { return p.survival(x); }
inline double cdf(double x, const BrokenParetoParams& p) { return p.cdf(x); }
inline double pdf(double x, const BrokenParetoParams& p) { return p.pdf(x); }
inline double quantile(double u, const BrokenParetoParams& p) { return p.quantile(u); }

/// n i.i.d. draws by inversion: x = S_B^{-1}(V) with V uniform on (0, 1),
/// which is F_B^{-1}(1 - V).
inline std::vector<double> sample(std::size_t n, const BrokenParetoParams& p, Rng& rng) {
  std::vector<double> out(n);
  for (auto& x : out) x = p.flux_from_log_survival(std::log(uniform_open(rng)));
  return out;
}

/// log-likelihood of an i.i.d. sample, sum_i log f_B(X_i).
inline double sample_loglik(std::span<const double> xs, const BrokenParetoParams& p) {
  double acc = 0.0;
  for (double x : xs) acc += p.log_pdf(x);
  return acc;
}

// ---------------------------------------------------------------------------
// Complete-data estimation
// ---------------------------------------------------------------------------

struct SegmentCounts {
  std::vector<std::size_t> n;              // #{i : X_i >= tau_j}
  std::vector<std::size_t> m;              // n_j - n_{j+1}, with n_{B+1} = 0
  std::vector<double> segment_logsums;     // sum of log X_i over tau_j <= X_i < tau_{j+1}
};

/// Direct O(N B) tabulation; X need not be sorted.
inline SegmentCounts segment_counts(std::span<const double> xs, std::span<const double> tau) {
  const std::size_t b = tau.size();
  SegmentCounts c{std::vector<std::size_t>(b, 0), std::vector<std::size_t>(b, 0),
                  std::vector<double>(b, 0.0)};
  for (double x : xs) {
    if (x < tau[0]) continue;
    std::size_t j = 0;
    while (j + 1 < b && x >= tau[j + 1]) ++j;
    c.m[j] += 1;
    c.segment_logsums[j] += std::log(x);
  }
  std::size_t acc = 0;
  for (std::size_t j = b; j-- > 0;) {
    acc += c.m[j];
    c.n[j] = acc;
  }
  return c;
}

/// Slopes maximising the complete-data likelihood at fixed breakpoints:
/// beta_j = m_j / (sum_{A_j} log X + n_{j+1} log tau_{j+1} - n_j log tau_j),
/// where the n_{B+1} log tau_{B+1} term is zero.
inline std::vector<double> beta_given_tau(const SegmentCounts& c, std::span<const double> tau) {
  const std::size_t b = tau.size();
  std::vector<double> beta(b);
  for (std::size_t j = 0; j < b; ++j) {
    if (c.m[j] == 0) {
      throw EmptySegmentError(j, "beta_given_tau: segment " + std::to_string(j + 1) + " is empty");
    }
    const double next = j + 1 < b ? static_cast<double>(c.n[j + 1]) * std::log(tau[j + 1]) : 0.0;
    const double denom = c.segment_logsums[j] + next - static_cast<double>(c.n[j]) * std::log(tau[j]);
    if (!(denom > 0.0)) {
      throw EmptySegmentError(j, "beta_given_tau: segment " + std::to_string(j + 1) +
                                     " is degenerate (all mass on its breakpoint)");
    }
    beta[j] = static_cast<double>(c.m[j]) / denom;
  }
  return beta;
}

/// A sorted copy of a flux sample with prefix sums of log X, so that the
/// segment statistics for any breakpoint vector cost O(B log N).
class SortedSample {
public:
  explicit SortedSample(std::vector<double> xs) : xs_(std::move(xs)) {
    if (xs_.empty()) throw DomainError("SortedSample: empty sample");
    std::sort(xs_.begin(), xs_.end());
    if (!(xs_.front() > 0.0)) throw DomainError("SortedSample: fluxes must be positive");
    prefix_.resize(xs_.size() + 1, 0.0);
    for (std::size_t i = 0; i < xs_.size(); ++i) prefix_[i + 1] = prefix_[i] + std::log(xs_[i]);
  }

  std::size_t size() const noexcept { return xs_.size(); }
  double min() const noexcept { return xs_.front(); }
  double sum_log() const noexcept { return prefix_.back(); }
  const std::vector<double>& values() const noexcept { return xs_; }

  SegmentCounts counts(std::span<const double> tau) const {
    const std::size_t b = tau.size();
    std::vector<std::size_t> first(b + 1);
    for (std::size_t j = 0; j < b; ++j) {
      first[j] = static_cast<std::size_t>(std::lower_bound(xs_.begin(), xs_.end(), tau[j]) -
                                          xs_.begin());
    }
    first[b] = xs_.size();
    SegmentCounts c{std::vector<std::size_t>(b), std::vector<std::size_t>(b),
                    std::vector<double>(b)};
    for (std::size_t j = 0; j < b; ++j) {
      const std::size_t hi = std::max(first[j], first[j + 1]);
      c.n[j] = xs_.size() - first[j];
      c.m[j] = hi - first[j];
      c.segment_logsums[j] = prefix_[hi] - prefix_[first[j]];
    }
    return c;
  }

private:
  std::vector<double> xs_;
  std::vector<double> prefix_;
};

/// The complete-data log-likelihood with slopes profiled out,
/// -N - sum log X + sum_j m_j log beta_j(tau); -inf when some segment is
/// empty or some X lies below tau_1.
inline double profile_loglik(const SortedSample& xs, std::span<const double> tau) {
  if (tau.empty()) throw DomainError("profile_loglik: empty breakpoint vector");
  for (std::size_t j = 1; j < tau.size(); ++j) {
    if (!(tau[j] > tau[j - 1])) return -kInf;
  }
  if (!(tau[0] > 0.0) || tau[0] > xs.min()) return -kInf;
  const SegmentCounts c = xs.counts(tau);
  std::vector<double> beta;
  try {
    beta = beta_given_tau(c, tau);
  } catch (const EmptySegmentError&) {
    return -kInf;
  }
  double acc = -static_cast<double>(xs.size()) - xs.sum_log();
  for (std::size_t j = 0; j < beta.size(); ++j) {
    acc += static_cast<double>(c.m[j]) * std::log(beta[j]);
  }
  return acc;
}

inline double profile_loglik(std::span<const double> xs, std::span<const double> tau) {
  return profile_loglik(SortedSample(std::vector<double>(xs.begin(), xs.end())), tau);
}

struct MleConfig {
  SimplexConfig simplex{.max_iters = 2000, .x_tol = 1e-7, .f_tol = 1e-9, .initial_step = 0.5};
  /// Perturbed restarts on top of the empirical-quantile start.
  std::size_t restarts = 4;
  double restart_scale = 1.0;
  std::uint64_t seed = 0x5eedULL;
};

namespace detail {

inline std::vector<double> tau_from_gaps(double tau1, std::span<const double> log_gaps) {
  std::vector<double> tau(log_gaps.size() + 1);
  tau[0] = tau1;
  for (std::size_t j = 0; j < log_gaps.size(); ++j) tau[j + 1] = tau[j] + std::exp(log_gaps[j]);
  return tau;
}

}  // namespace detail

/// Maximum-likelihood fit of a B-piece Pareto law to a fully observed
/// sample: tau_1 = min X, the remaining breakpoints maximise the profile
/// likelihood (Nelder-Mead over log gaps log(tau_{j+1} - tau_j) with restarts),
/// slopes follow from beta_given_tau.
inline BrokenParetoParams complete_mle(const SortedSample& xs, std::size_t pieces,
                                       const MleConfig& cfg = {}) {
  if (pieces == 0) throw DomainError("complete_mle: need at least one piece");
  if (xs.size() < 2 * pieces) {
    throw FitError("complete_mle: " + std::to_string(xs.size()) +
                   " observations cannot support " + std::to_string(pieces) + " pieces");
  }
  const double tau1 = xs.min();
  if (pieces == 1) {
    const double denom = xs.sum_log() - static_cast<double>(xs.size()) * std::log(tau1);
    if (!(denom > 0.0)) throw FitError("complete_mle: all observations coincide");
    return BrokenParetoParams::from_estimate({static_cast<double>(xs.size()) / denom}, {tau1});
  }

  const auto& v = xs.values();
  const std::size_t n = v.size();
  std::vector<double> start(pieces - 1);
  double prev = tau1;
  for (std::size_t j = 1; j < pieces; ++j) {
    double q = v[std::min(n - 1, n * j / pieces)];
    if (!(q > prev)) q = prev * (1.0 + 1e-6) + 1e-300;
    start[j - 1] = std::log(q - prev);
    prev = q;
  }

  auto objective = [&](std::span<const double> g) {
    const auto tau = detail::tau_from_gaps(tau1, g);
    for (double t : tau) {
      if (!std::isfinite(t)) return kInf;
    }
    return -profile_loglik(xs, tau);
  };

  Rng rng = make_rng(cfg.seed);
  std::vector<double> best_x;
  double best_f = kInf;
  for (std::size_t r = 0; r <= cfg.restarts; ++r) {
    std::vector<double> x0 = start;
    if (r > 0) {
      for (auto& g : x0) g += cfg.restart_scale * (2.0 * uniform_open(rng) - 1.0);
    }
    const auto res = nelder_mead(objective, x0, cfg.simplex);
    if (res.value < best_f) {
      best_f = res.value;
      best_x = res.argmin;
    }
  }
  if (!std::isfinite(best_f)) {
    throw FitError("complete_mle: no feasible breakpoint configuration found");
  }
  auto tau = detail::tau_from_gaps(tau1, best_x);
  auto beta = beta_given_tau(xs.counts(tau), tau);
  return BrokenParetoParams::from_estimate(std::move(beta), std::move(tau));
}

inline BrokenParetoParams complete_mle(std::span<const double> xs, std::size_t pieces,
                                       const MleConfig& cfg = {}) {
  return complete_mle(SortedSample(std::vector<double>(xs.begin(), xs.end())), pieces, cfg);
}

// ---------------------------------------------------------------------------
// Unconstrained coordinates (log tau_1, log gaps, log beta)
// ---------------------------------------------------------------------------

inline std::vector<double> to_unconstrained(const BrokenParetoParams& p) {
  const std::size_t b = p.pieces();
  std::vector<double> z(2 * b);
  z[0] = std::log(p.tau()[0]);
  for (std::size_t j = 1; j < b; ++j) z[j] = std::log(p.tau()[j] - p.tau()[j - 1]);
  for (std::size_t j = 0; j < b; ++j) z[b + j] = std::log(p.beta()[j]);
  return z;
}

/// Inverse of to_unconstrained; returns false when the point maps outside
/// the representable parameter space (overflow, collapsed gaps).
inline bool from_unconstrained(std::span<const double> z, std::vector<double>& beta,
                               std::vector<double>& tau) {
  const std::size_t b = z.size() / 2;
  beta.resize(b);
  tau.resize(b);
  tau[0] = std::exp(z[0]);
  for (std::size_t j = 1; j < b; ++j) tau[j] = tau[j - 1] + std::exp(z[j]);
  for (std::size_t j = 0; j < b; ++j) beta[j] = std::exp(z[b + j]);
  for (std::size_t j = 0; j < b; ++j) {
    if (!(tau[j] > 0.0) || !std::isfinite(tau[j]) || !(beta[j] > 0.0) || !std::isfinite(beta[j])) {
      return false;
    }
    if (j > 0 && !(tau[j] > tau[j - 1])) return false;
  }
  return true;
}

}  // namespace lognlogs

#endif  // LOGNLOGS_DISTRIBUTION_HPP
