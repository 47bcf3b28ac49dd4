#ifndef LOGNLOGS_BOOTSTRAP_HPP
#define LOGNLOGS_BOOTSTRAP_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lognlogs/data.hpp"
#include "lognlogs/distribution.hpp"
#include "lognlogs/em.hpp"
#include "lognlogs/errors.hpp"
#include "lognlogs/parallel.hpp"
#include "lognlogs/rng.hpp"

namespace lognlogs {

/// Parameter vector in reporting scale: (beta_1..beta_B, log10 tau_1..log10 tau_B).
inline std::vector<double> report_scale(const BrokenParetoParams& p) {
  std::vector<double> out(p.beta().begin(), p.beta().end());
  for (double t : p.tau()) out.push_back(std::log10(t));
  return out;
}

struct BootstrapReport {
  std::size_t pieces = 0;
  std::size_t n_boot = 0;
  BrokenParetoParams theta_hat;
  /// One row per successful replicate, in report_scale order.
  std::vector<std::vector<double>> replicates;
  /// Sample standard deviation of each column of `replicates`.
  std::vector<double> se;
  /// Replicates whose refit threw; they contribute no row.
  std::size_t failures = 0;
  /// Successful replicates that stopped at n_limit.
  std::size_t not_converged = 0;
  std::vector<std::string> failure_messages;
};

/// Case resampling of sources with replacement.
inline Dataset resample_sources(const Dataset& data, Rng& rng) {
  const std::size_t n = data.size();
  std::vector<ObservedSource> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto k = static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(n));
    if (k >= n) k = n - 1;
    out.push_back(data[k]);
  }
  return Dataset(std::move(out));
}

/// Full-data IEM fit at B, then n_boot refits on resampled data, each
/// warm-started at the full-data estimate.
inline BootstrapReport bootstrap_se(const Dataset& data, std::size_t pieces, std::size_t n_boot,
                                    const EmConfig& em_cfg = {}, std::uint64_t seed = 1,
                                    std::size_t threads = 1) {
  if (n_boot < 2) throw DomainError("bootstrap_se: n_boot must be >= 2");
  em_cfg.validate();

  BootstrapReport rep;
  rep.pieces = pieces;
  rep.n_boot = n_boot;
  rep.theta_hat = iem_fit(data, pieces, em_cfg).theta_hat;

  struct Slot {
    bool ok = false;
    bool converged = false;
    std::vector<double> row;
    std::string error;
  };
  std::vector<Slot> slots(n_boot);
  parallel_for(n_boot, threads, [&](std::size_t r) {
    Slot& s = slots[r];
    try {
      Rng rng = make_rng(derive_seed(seed, {r, 0}));
      const Dataset boot = resample_sources(data, rng);
      EmConfig ec = em_cfg;
      ec.init = rep.theta_hat;
      ec.seed = derive_seed(seed, {r, 1});
      const FitResult fit = iem_fit(boot, pieces, ec);
      s.row = report_scale(fit.theta_hat);
      s.converged = fit.converged;
      s.ok = true;
    } catch (const Error& e) {
      s.error = e.what();
    }
  });

  for (std::size_t r = 0; r < n_boot; ++r) {
    if (slots[r].ok) {
      rep.replicates.push_back(std::move(slots[r].row));
      if (!slots[r].converged) ++rep.not_converged;
    } else {
      ++rep.failures;
      rep.failure_messages.push_back("replicate " + std::to_string(r) + ": " + slots[r].error);
    }
  }
  if (rep.replicates.empty()) throw FitError("bootstrap_se: all replicates failed");

  const std::size_t dim = 2 * pieces;
  rep.se.assign(dim, 0.0);
  const double m = static_cast<double>(rep.replicates.size());
  if (rep.replicates.size() >= 2) {
    for (std::size_t c = 0; c < dim; ++c) {
      double mean = 0.0;
      for (const auto& row : rep.replicates) mean += row[c];
      mean /= m;
      double ss = 0.0;
      for (const auto& row : rep.replicates) ss += (row[c] - mean) * (row[c] - mean);
      rep.se[c] = std::sqrt(ss / (m - 1.0));
    }
  }
  return rep;
}

}  // namespace lognlogs

#endif  // LOGNLOGS_BOOTSTRAP_HPP
