#ifndef LOGNLOGS_NUMERICS_HPP
#define LOGNLOGS_NUMERICS_HPP

// Numerical kernels: a Nelder-Mead simplex minimiser, the upper incomplete
// gamma function for real (including negative) first argument, and the
// trapezoid rule on a nonuniform grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "lognlogs/errors.hpp"

namespace lognlogs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Nelder-Mead
// ---------------------------------------------------------------------------

struct SimplexConfig {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  std::size_t max_iters = 2000;
  /// Converged once the simplex fits in an infinity-norm ball of this radius...
  double x_tol = 1e-8;
  /// ...or once the vertex values span less than this (absolute).
  double f_tol = 1e-10;
  /// Edge length of the initial right-angled simplex.
  double initial_step = 0.1;

  void validate() const {
    if (!(reflection > 0.0) || !(expansion > 1.0) || !(contraction > 0.0 && contraction < 1.0) ||
        !(shrink > 0.0 && shrink < 1.0)) {
      throw DomainError("SimplexConfig: coefficients outside the admissible ranges");
    }
    if (!(x_tol > 0.0) || !(f_tol > 0.0) || !(initial_step > 0.0) || max_iters == 0) {
      throw DomainError("SimplexConfig: tolerances, step and max_iters must be positive");
    }
  }
};

struct SimplexResult {
  std::vector<double> argmin;
  double value = kInf;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  /// Best vertex value after each iteration (index 0 is the initial simplex).
  std::vector<double> best_history;
};

/// Minimises `f` starting from `x0`. The objective may return +inf (or NaN,
/// treated as +inf) to mark infeasible points; such vertices always rank
/// worst, so a finite point is returned whenever one was ever evaluated.
template <typename F>
SimplexResult nelder_mead(F&& f, std::span<const double> x0, const SimplexConfig& cfg) {
  cfg.validate();
  const std::size_t dim = x0.size();
  if (dim == 0) throw DomainError("nelder_mead: empty starting point");
  for (double v : x0) {
    if (!std::isfinite(v)) throw DomainError("nelder_mead: non-finite starting point");
  }

  SimplexResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(std::span<const double>(x));
    return std::isnan(v) ? kInf : v;
  };

  std::vector<std::vector<double>> pts(dim + 1, std::vector<double>(x0.begin(), x0.end()));
  std::vector<double> vals(dim + 1);
  for (std::size_t i = 1; i <= dim; ++i) pts[i][i - 1] += cfg.initial_step;
  for (std::size_t i = 0; i <= dim; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(dim + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> p2(dim + 1);
    std::vector<double> v2(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) {
      p2[i] = std::move(pts[order[i]]);
      v2[i] = vals[order[i]];
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };
  sort_simplex();
  res.best_history.push_back(vals[0]);

  std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);
  auto affine = [&](std::vector<double>& out, double coef, const std::vector<double>& target) {
    // out = centroid + coef * (target - centroid)
    for (std::size_t k = 0; k < dim; ++k) out[k] = centroid[k] + coef * (target[k] - centroid[k]);
  };

  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    double diam = 0.0;
    for (std::size_t i = 1; i <= dim; ++i) {
      for (std::size_t k = 0; k < dim; ++k) diam = std::max(diam, std::fabs(pts[i][k] - pts[0][k]));
    }
    const double spread = vals[dim] - vals[0];
    if (diam < cfg.x_tol || (std::isfinite(spread) && spread < cfg.f_tol)) {
      res.converged = true;
      break;
    }
    ++res.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += pts[i][k];
    }
    for (auto& c : centroid) c /= static_cast<double>(dim);

    const auto& worst = pts[dim];
    affine(xr, -cfg.reflection, worst);
    const double fr = eval(xr);

    bool do_shrink = false;
    if (fr < vals[0]) {
      affine(xe, -cfg.reflection * cfg.expansion, worst);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[dim] = xe;
        vals[dim] = fe;
      } else {
        pts[dim] = xr;
        vals[dim] = fr;
      }
    } else if (fr < vals[dim - 1]) {
      pts[dim] = xr;
      vals[dim] = fr;
    } else if (fr < vals[dim]) {
      affine(xc, cfg.contraction, xr);
      const double fc = eval(xc);
      if (fc <= fr) {
        pts[dim] = xc;
        vals[dim] = fc;
      } else {
        do_shrink = true;
      }
    } else {
      affine(xc, cfg.contraction, worst);
      const double fc = eval(xc);
      if (fc < vals[dim]) {
        pts[dim] = xc;
        vals[dim] = fc;
      } else {
        do_shrink = true;
      }
    }
    if (do_shrink) {
      for (std::size_t i = 1; i <= dim; ++i) {
        for (std::size_t k = 0; k < dim; ++k) {
          pts[i][k] = pts[0][k] + cfg.shrink * (pts[i][k] - pts[0][k]);
        }
        vals[i] = eval(pts[i]);
      }
    }
    sort_simplex();
    res.best_history.push_back(vals[0]);
  }
  res.argmin = pts[0];
  res.value = vals[0];
  return res;
}

// ---------------------------------------------------------------------------
// Incomplete gamma
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kGammaEps = 1e-16;
inline constexpr int kGammaMaxIter = 200000;

// log of Gamma(a, x) by the Legendre continued fraction (modified Lentz).
// Valid for any real a once x > max(a + 1, 1).
inline double log_gamma_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kGammaEps) return -x + a * std::log(x) + std::log(h);
  }
  throw NumericFailure("incomplete gamma: continued fraction did not converge");
}

// log of the lower incomplete gamma gamma(a, x) by its power series, a > 0.
inline double log_lower_gamma_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 1; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kGammaEps) return a * std::log(x) - x + std::log(sum);
  }
  throw NumericFailure("incomplete gamma: series did not converge");
}

// Gamma(a0, x) for 0 <= a0 < 1 and small x, written so that the removable
// singularity at a0 = 0 causes no cancellation.
inline double upper_gamma_small_x(double a0, double x) {
  const double lx = std::log(x);
  double head;
  if (a0 == 0.0) {
    head = -0.57721566490153286061 - lx;
  } else {
    head = boost::math::tgamma1pm1(a0) / a0 - std::expm1(a0 * lx) / a0;
  }
  // - sum_{k>=1} (-1)^k x^{a0+k} / (k! (a0+k))
  double tail = 0.0;
  double term = 1.0;  // x^k / k!
  for (int k = 1; k < 500; ++k) {
    term *= x / k;
    const double t = ((k % 2) ? 1.0 : -1.0) * term / (a0 + k);
    tail += t;
    if (std::fabs(t) < 1e-18 * std::fabs(head + tail)) break;
  }
  return head + std::exp(a0 * lx) * tail;
}

// log(exp(la) - exp(lb)) for la >= lb.
inline double log_diff_exp(double la, double lb) {
  if (lb == -kInf) return la;
  return la + std::log1p(-std::exp(lb - la));
}

// Regularised log P(a, x) and log Q(a, x) for a >= 1.
inline std::pair<double, double> log_pq(double a, double x) {
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    const double lp = log_lower_gamma_series(a, x) - lg;
    return {lp, std::log1p(-std::exp(lp))};
  }
  const double lq = log_gamma_cf(a, x) - lg;
  return {std::log1p(-std::exp(lq)), lq};
}

}  // namespace detail

/// log Gamma(a, x) = log int_x^inf t^(a-1) e^(-t) dt for x > 0 and any real a.
inline double log_upper_incomplete_gamma(double a, double x) {
  if (!(x > 0.0) || std::isnan(a)) throw DomainError("upper_incomplete_gamma: requires x > 0");
  if (std::isinf(x)) return -kInf;
  if (x >= 1.0 && x > a + 1.0) return detail::log_gamma_cf(a, x);
  if (a >= 1.0) return std::lgamma(a) + detail::log_pq(a, x).second;
  // 0 <= a < 1 <= x <= a + 1: the fraction still converges, just more slowly.
  if (x >= 1.0) return detail::log_gamma_cf(a, x);
  // x < 1, a < 1: start from a0 = a + k in [0, 1) and step down with
  // Gamma(a, x) = (Gamma(a + 1, x) - x^a e^-x) / a, which is stable for x < 1.
  const double steps = a >= 0.0 ? 0.0 : std::ceil(-a);
  double a0 = a + steps;
  if (a0 >= 1.0) a0 -= 1.0;  // guards against rounding in ceil
  const int k = static_cast<int>(std::lround(a0 - a));
  double lg = std::log(detail::upper_gamma_small_x(a0, x));
  const double lx = std::log(x);
  for (int m = 1; m <= k; ++m) {
    const double am = a0 - m;
    const double lead = am * lx - x;  // log(x^am e^-x) > log Gamma(am + 1, x)
    lg = detail::log_diff_exp(lead, lg) - std::log(-am);
  }
  return lg;
}

/// Gamma(a, x); positive for every x > 0.
inline double upper_incomplete_gamma(double a, double x) {
  return std::exp(log_upper_incomplete_gamma(a, x));
}

/// log of int_{x1}^{x2} t^(a-1) e^(-t) dt for 0 < x1 < x2 <= inf, choosing
/// the lower or upper tail representation that avoids cancellation.
inline double log_gamma_interval(double a, double x1, double x2) {
  if (!(x1 > 0.0) || !(x2 > x1)) throw DomainError("log_gamma_interval: requires 0 < x1 < x2");
  if (std::isinf(x2)) return log_upper_incomplete_gamma(a, x1);
  if (a >= 1.0) {
    const double lg = std::lgamma(a);
    if (x2 <= a) {
      const auto [lp1, lq1] = detail::log_pq(a, x1);
      const auto [lp2, lq2] = detail::log_pq(a, x2);
      return lg + detail::log_diff_exp(lp2, lp1);
    }
    if (x1 >= a) {
      const auto [lp1, lq1] = detail::log_pq(a, x1);
      const auto [lp2, lq2] = detail::log_pq(a, x2);
      return lg + detail::log_diff_exp(lq1, lq2);
    }
    const double lp1 = detail::log_pq(a, x1).first;
    const double lq2 = detail::log_pq(a, x2).second;
    return lg + std::log1p(-(std::exp(lp1) + std::exp(lq2)));
  }
  return detail::log_diff_exp(log_upper_incomplete_gamma(a, x1), log_upper_incomplete_gamma(a, x2));
}

// ---------------------------------------------------------------------------
// Quadrature on a nonuniform grid
// ---------------------------------------------------------------------------

/// Trapezoid rule for samples `fs` at strictly increasing abscissae `ts`.
inline double integrate_grid(std::span<const double> ts, std::span<const double> fs) {
  if (ts.size() != fs.size()) throw DomainError("integrate_grid: length mismatch");
  if (ts.size() < 2) throw DomainError("integrate_grid: need at least two points");
  double acc = 0.0;
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const double h = ts[k] - ts[k - 1];
    if (!(h > 0.0)) throw DomainError("integrate_grid: abscissae must be strictly increasing");
    acc += 0.5 * h * (fs[k] + fs[k - 1]);
  }
  return acc;
}

/// Weights w_k with integrate_grid(ts, fs) == sum_k w_k fs_k.
inline std::vector<double> trapezoid_weights(std::span<const double> ts) {
  std::vector<double> w(ts.size(), 0.0);
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const double h = ts[k] - ts[k - 1];
    w[k - 1] += 0.5 * h;
    w[k] += 0.5 * h;
  }
  return w;
}

struct HermiteWeights {
  std::vector<double> value;
  std::vector<double> slope;
};

/// Weights for the cubic Hermite rule in w = log t:
///   int_{t_0}^{t_K} f dt ~= sum_k value_k f_k + slope_k f'_k,
/// exact when t f(t) is a cubic in log t. Requires 0 < t_0 < ... < t_K.
inline HermiteWeights log_hermite_weights(std::span<const double> ts) {
  if (ts.size() < 2) throw DomainError("log_hermite_weights: need at least two points");
  if (!(ts[0] > 0.0)) throw DomainError("log_hermite_weights: abscissae must be positive");
  HermiteWeights w{std::vector<double>(ts.size(), 0.0), std::vector<double>(ts.size(), 0.0)};
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const double a = ts[k - 1];
    const double b = ts[k];
    if (!(b > a)) throw DomainError("log_hermite_weights: abscissae must be strictly increasing");
    // Panel: h (g_a + g_b) / 2 - h^2 / 12 (g'_b - g'_a), with g = t f, g' = t f + t^2 f'.
    const double h = std::log(b / a);
    const double q = h * h / 12.0;
    w.value[k - 1] += 0.5 * h * a + q * a;
    w.slope[k - 1] += q * a * a;
    w.value[k] += 0.5 * h * b - q * b;
    w.slope[k] -= q * b * b;
  }
  return w;
}

}  // namespace lognlogs

#endif  // LOGNLOGS_NUMERICS_HPP
