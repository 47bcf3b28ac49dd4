#ifndef LOGNLOGS_SIMULATE_HPP
#define LOGNLOGS_SIMULATE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lognlogs/data.hpp"
#include "lognlogs/distribution.hpp"
#include "lognlogs/errors.hpp"
#include "lognlogs/rng.hpp"

namespace lognlogs {

struct SimSetting {
  BrokenParetoParams params;
  std::size_t n = 0;
  /// One value for all sources, or one per source.
  std::vector<double> a{1e19};
  std::vector<double> b{10.0};
  std::uint64_t seed = 1;

  void validate() const {
    if (n == 0) throw DomainError("SimSetting: n must be >= 1");
    auto check = [&](const std::vector<double>& v, const char* name) {
      if (v.size() != 1 && v.size() != n) {
        throw DomainError(std::string("SimSetting: ") + name + " must have 1 or n entries");
      }
    };
    check(a, "a");
    check(b, "b");
  }
  double area(std::size_t i) const { return a.size() == 1 ? a[0] : a[i]; }
  double background(std::size_t i) const { return b.size() == 1 ? b[0] : b[i]; }
};

/// The four simulation presets ("setting1" .. "setting4"): A = 1e19, b = 10.
inline SimSetting preset(const std::string& name, std::uint64_t seed = 1) {
  SimSetting s;
  s.seed = seed;
  if (name == "setting1") {
    s.params = BrokenParetoParams({1.0}, {5e-17});
    s.n = 100;
  } else if (name == "setting2") {
    s.params = BrokenParetoParams({0.5, 3.0}, {1e-17, 5e-17});
    s.n = 200;
  } else if (name == "setting3") {
    s.params = BrokenParetoParams({0.5, 1.5}, {1e-17, 5e-17});
    s.n = 200;
  } else if (name == "setting4") {
    s.params = BrokenParetoParams({0.3, 1.0, 3.0}, {1e-17, 8e-17, 1.8e-16});
    s.n = 500;
  } else {
    throw DomainError("unknown preset '" + name + "'");
  }
  return s;
}

struct Simulated {
  Dataset data;
  /// True fluxes; for oracle comparisons only.
  std::vector<double> latent;
};

/// S_i ~ Pareto_B(beta, tau), then Y_i ~ Poisson(A_i S_i + b_i).
inline Simulated generate(const SimSetting& setting) {
  setting.validate();
  Rng rng = make_rng(setting.seed);
  Simulated out;
  out.latent = sample(setting.n, setting.params, rng);
  std::vector<ObservedSource> src(setting.n);
  for (std::size_t i = 0; i < setting.n; ++i) {
    src[i].a = setting.area(i);
    src[i].b = setting.background(i);
    src[i].y = sample_poisson(src[i].a * out.latent[i] + src[i].b, rng);
  }
  out.data = Dataset(std::move(src));
  return out;
}

// ---------------------------------------------------------------------------
// log N - log S curves
// ---------------------------------------------------------------------------

struct CurvePoint {
  double log10_s;
  double log10_n;
};

/// Empirical curve: fluxes sorted in descending order, the i-th (1-based)
/// giving (log10 S_(i), log10 i).
inline std::vector<CurvePoint> lognlogs_curve(std::span<const double> fluxes) {
  if (fluxes.empty()) throw DomainError("lognlogs_curve: no fluxes");
  std::vector<double> s(fluxes.begin(), fluxes.end());
  for (double x : s) {
    if (!(x > 0.0)) throw DomainError("lognlogs_curve: fluxes must be positive");
  }
  std::sort(s.begin(), s.end(), std::greater<>());
  std::vector<CurvePoint> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = {std::log10(s[i]), std::log10(static_cast<double>(i + 1))};
  }
  return out;
}

/// One straight piece of the fitted curve, log10 N = log10_alpha - slope_beta * log10 S,
/// drawn from log10_s_start to log10_s_end.
struct OverlaySegment {
  std::size_t segment = 0;
  double log10_alpha = 0.0;
  double beta = 0.0;
  double log10_s_start = 0.0;
  double log10_s_end = 0.0;

  double at(double log10_s) const { return log10_alpha - beta * log10_s; }
};

/// Fitted overlay N(>S) = n S_B(S; theta), one segment per piece. The last
/// piece runs to `log10_s_max` (or one decade past tau_B when that is lower).
inline std::vector<OverlaySegment> lognlogs_overlay(const BrokenParetoParams& theta, std::size_t n,
                                                    double log10_s_max) {
  const std::size_t b = theta.pieces();
  const double log10_n = std::log10(static_cast<double>(n));
  std::vector<OverlaySegment> out(b);
  for (std::size_t j = 0; j < b; ++j) {
    const double lt = std::log10(theta.tau()[j]);
    auto& seg = out[j];
    seg.segment = j + 1;
    seg.beta = theta.beta()[j];
    seg.log10_alpha = log10_n + theta.log_survival_at_breaks()[j] / std::log(10.0) + seg.beta * lt;
    seg.log10_s_start = lt;
    seg.log10_s_end = j + 1 < b ? std::log10(theta.tau()[j + 1]) : std::max(log10_s_max, lt + 1.0);
  }
  return out;
}

}  // namespace lognlogs

#endif  // LOGNLOGS_SIMULATE_HPP
