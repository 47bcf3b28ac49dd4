#ifndef LOGNLOGS_CLOSED_FORM_HPP
#define LOGNLOGS_CLOSED_FORM_HPP

// Observed-data log-likelihood in closed form for background-free data.
// With b_i = 0 the marginal of each count is
//
//   p(Y) = sum_j S_B(tau_j) beta_j (A tau_j)^beta_j / Y!
//              * [Gamma(Y - beta_j, A tau_j) - Gamma(Y - beta_j, A tau_{j+1})],
//
// evaluated here term by term in log space and combined by log-sum-exp.
// Exercised for counts up to 1e4; larger counts should go through the
// power-posterior estimator instead.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lognlogs/data.hpp"
#include "lognlogs/distribution.hpp"
#include "lognlogs/numerics.hpp"

namespace lognlogs {

/// log p(Y = y) for one background-free source with effective area a.
inline double closed_form_source_loglik(const BrokenParetoParams& p, std::uint64_t y, double a) {
  const std::size_t b = p.pieces();
  const auto& beta = p.beta();
  const auto& tau = p.tau();
  const auto& log_surv = p.log_survival_at_breaks();
  const double yd = static_cast<double>(y);
  const double log_fact = std::lgamma(yd + 1.0);

  std::vector<double> terms(b);
  double peak = -kInf;
  for (std::size_t j = 0; j < b; ++j) {
    const double lo = a * tau[j];
    const double hi = j + 1 < b ? a * tau[j + 1] : kInf;
    const double shape = yd - beta[j];
    terms[j] = log_surv[j] + std::log(beta[j]) + beta[j] * std::log(lo) - log_fact +
               log_gamma_interval(shape, lo, hi);
    if (terms[j] > peak) peak = terms[j];
  }
  if (!std::isfinite(peak)) {
    throw NumericFailure("closed_form_loglik_nobg: non-finite segment term for count " +
                         std::to_string(y));
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  const double out = peak + std::log(acc);
  if (!std::isfinite(out)) {
    throw NumericFailure("closed_form_loglik_nobg: non-finite result for count " + std::to_string(y));
  }
  return out;
}

inline double closed_form_loglik_nobg(const BrokenParetoParams& p, std::span<const std::uint64_t> y,
                                      std::span<const double> a) {
  if (y.size() != a.size()) throw DomainError("closed_form_loglik_nobg: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += closed_form_source_loglik(p, y[i], a[i]);
  return acc;
}

/// Dataset overload; every background must be zero.
inline double closed_form_loglik_nobg(const BrokenParetoParams& p, const Dataset& data) {
  if (!data.background_free()) {
    throw DomainError("closed_form_loglik_nobg: dataset has nonzero backgrounds");
  }
  double acc = 0.0;
  for (const auto& s : data.sources()) acc += closed_form_source_loglik(p, s.y, s.a);
  return acc;
}

}  // namespace lognlogs

#endif  // LOGNLOGS_CLOSED_FORM_HPP
