#ifndef LOGNLOGS_EVIDENCE_HPP
#define LOGNLOGS_EVIDENCE_HPP

// Per-source marginal likelihood of the Poisson / broken-Pareto model by
// one-dimensional quadrature.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "lognlogs/data.hpp"
#include "lognlogs/distribution.hpp"
#include "lognlogs/errors.hpp"
#include "lognlogs/numerics.hpp"

namespace lognlogs {

/// log g(y; mu), the Poisson log pmf.
inline double poisson_log_pmf(std::uint64_t y, double mu) {
  if (y == 0) return -mu;
  return static_cast<double>(y) * std::log(mu) - mu - std::lgamma(static_cast<double>(y) + 1.0);
}

/// log int g(y; a S + b)^lambda f(S; theta) dS for one source, by adaptive
/// Gauss-Kronrod quadrature in log S on each segment, split at the mode.
/// With lambda = 1 this is the source's exact marginal log-likelihood.
inline double source_log_tempered_evidence(const BrokenParetoParams& theta, const ObservedSource& src,
                                           double lambda) {
  using boost::math::quadrature::gauss_kronrod;
  if (!(lambda > 0.0)) throw DomainError("source_log_tempered_evidence: lambda must be positive");
  auto log_f = [&](double u) {
    const double x = std::exp(u);
    if (x < theta.lower_bound()) return -kInf;
    return lambda * poisson_log_pmf(src.y, src.a * x + src.b) + theta.log_pdf(x) + u;
  };
  const double yb = static_cast<double>(src.y) + src.b;
  const double u_top = std::log((lambda * yb + 800.0) / (lambda * src.a)) + 1.0;
  const std::size_t b = theta.pieces();

  struct Piece {
    double lo, mode, hi, peak;
  };
  std::vector<Piece> pieces;
  double peak = -kInf;
  for (std::size_t j = 0; j < b; ++j) {
    // Nudged inside so exp(u) stays within segment j.
    const double lo = std::log(theta.tau()[j]) + 1e-13;
    const double hi = j + 1 < b ? std::log(theta.tau()[j + 1]) - 1e-13 : std::max(u_top, lo + 1.0);
    if (!(hi > lo)) continue;
    // The log-integrand has at most one interior maximum per segment; a
    // coarse scan keeps Brent away from the local minimum that a background
    // can create.
    constexpr int kScan = 64;
    int best_k = 0;
    double best = -kInf;
    for (int k = 0; k <= kScan; ++k) {
      const double v = log_f(lo + (hi - lo) * k / kScan);
      if (v > best) {
        best = v;
        best_k = k;
      }
    }
    const double step = (hi - lo) / kScan;
    const double a0 = std::max(lo, lo + (best_k - 1) * step);
    const double a1 = std::min(hi, lo + (best_k + 1) * step);
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::brent_find_minima([&](double u) { return -log_f(u); }, a0, a1, 52, iters);
    double mode = r.first;
    double top = -r.second;
    if (best > top) {
      mode = lo + best_k * step;
      top = best;
    }
    pieces.push_back({lo, mode, hi, top});
    peak = std::max(peak, top);
  }
  if (!std::isfinite(peak)) throw NumericFailure("source_log_tempered_evidence: integrand vanishes");

  double total = 0.0;
  auto f = [&](double u) { return std::exp(log_f(u) - peak); };
  for (const auto& p : pieces) {
    if (p.peak < peak - 745.0) continue;
    if (p.mode > p.lo) total += gauss_kronrod<double, 61>::integrate(f, p.lo, p.mode, 12, 1e-11);
    if (p.hi > p.mode) total += gauss_kronrod<double, 61>::integrate(f, p.mode, p.hi, 12, 1e-11);
  }
  const double out = peak + std::log(total);
  if (!std::isfinite(out)) throw NumericFailure("source_log_tempered_evidence: non-finite result");
  return out;
}

/// Exact marginal log-likelihood sum_i log p(y_i; theta).
inline double exact_loglik(const BrokenParetoParams& theta, const Dataset& data) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) s += source_log_tempered_evidence(theta, data[i], 1.0);
  return s;
}

}  // namespace lognlogs

#endif
