#ifndef LOGNLOGS_MODEL_SELECT_HPP
#define LOGNLOGS_MODEL_SELECT_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lognlogs/data.hpp"
#include "lognlogs/distribution.hpp"
#include "lognlogs/em.hpp"
#include "lognlogs/errors.hpp"
#include "lognlogs/likelihood.hpp"
#include "lognlogs/parallel.hpp"
#include "lognlogs/rng.hpp"

namespace lognlogs {

enum class Criterion { Aic, Bic };

/// Penalized deviance with 2B free parameters; smaller is better.
///   AIC = -2 loglik + 4B,  BIC = -2 loglik + 2B log n.
inline double criterion(double loglik, std::size_t pieces, std::size_t n, Criterion kind) {
  if (pieces < 1) throw DomainError("criterion: B must be >= 1");
  if (n < 1) throw DomainError("criterion: n must be >= 1");
  const double b = static_cast<double>(pieces);
  const double penalty = kind == Criterion::Aic ? 4.0 * b : 2.0 * b * std::log(static_cast<double>(n));
  return -2.0 * loglik + penalty;
}

struct CandidateResult {
  std::size_t pieces = 0;
  bool ok = false;
  std::string error;
  std::optional<BrokenParetoParams> theta_hat;
  bool converged = false;
  std::size_t iterations = 0;
  double loglik = 0.0;
  double loglik_mc_se = 0.0;
  double aic = 0.0;
  double bic = 0.0;
};

struct ClosePair {
  std::size_t b1 = 0;
  std::size_t b2 = 0;
};

struct SelectionReport {
  std::vector<CandidateResult> candidates;
  /// 0 when no candidate succeeded.
  std::size_t b_hat_aic = 0;
  std::size_t b_hat_bic = 0;
  /// Candidate pairs whose criterion gap is within 2 combined MC standard
  /// errors of the deviance (2 sqrt(se_1^2 + se_2^2) on the loglik scale).
  std::vector<ClosePair> close_aic;
  std::vector<ClosePair> close_bic;

  const CandidateResult* find(std::size_t pieces) const {
    for (const auto& c : candidates) {
      if (c.pieces == pieces) return &c;
    }
    return nullptr;
  }
};

/// Fits and scores a single candidate with the seeds select_b would use.
inline CandidateResult evaluate_candidate(const Dataset& data, std::size_t pieces, const EmConfig& em_cfg,
                                          const PowerPosteriorConfig& pp_cfg) {
  CandidateResult r;
  r.pieces = pieces;
  try {
    EmConfig ec = em_cfg;
    ec.seed = derive_seed(em_cfg.seed, {pieces});
    if (ec.init && ec.init->pieces() != pieces) ec.init.reset();
    const FitResult fit = iem_fit(data, pieces, ec);
    r.theta_hat = fit.theta_hat;
    r.converged = fit.converged;
    r.iterations = fit.iterations;
    PowerPosteriorConfig pc = pp_cfg;
    pc.seed = derive_seed(pp_cfg.seed, {pieces});
    const LoglikEstimate ll = power_posterior_loglik(fit.theta_hat, data, pc);
    r.loglik = ll.value;
    r.loglik_mc_se = ll.mc_se;
    r.aic = criterion(r.loglik, pieces, data.size(), Criterion::Aic);
    r.bic = criterion(r.loglik, pieces, data.size(), Criterion::Bic);
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

inline SelectionReport select_b(const Dataset& data, std::size_t b_max = 4, const EmConfig& em_cfg = {},
                                const PowerPosteriorConfig& pp_cfg = {}, std::size_t threads = 1) {
  if (b_max < 1) throw DomainError("select_b: b_max must be >= 1");
  em_cfg.validate();
  pp_cfg.validate();
  SelectionReport rep;
  rep.candidates.resize(b_max);
  parallel_for(b_max, threads, [&](std::size_t k) {
    rep.candidates[k] = evaluate_candidate(data, k + 1, em_cfg, pp_cfg);
  });

  double best_aic = kInf;
  double best_bic = kInf;
  for (const auto& c : rep.candidates) {
    if (!c.ok) continue;
    if (c.aic < best_aic) {
      best_aic = c.aic;
      rep.b_hat_aic = c.pieces;
    }
    if (c.bic < best_bic) {
      best_bic = c.bic;
      rep.b_hat_bic = c.pieces;
    }
  }
  for (std::size_t i = 0; i < rep.candidates.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.candidates.size(); ++j) {
      const auto& a = rep.candidates[i];
      const auto& b = rep.candidates[j];
      if (!a.ok || !b.ok) continue;
      const double tol = 2.0 * 2.0 * std::hypot(a.loglik_mc_se, b.loglik_mc_se);
      if (std::abs(a.aic - b.aic) <= tol) rep.close_aic.push_back({a.pieces, b.pieces});
      if (std::abs(a.bic - b.bic) <= tol) rep.close_bic.push_back({a.pieces, b.pieces});
    }
  }
  return rep;
}

}  // namespace lognlogs

#endif  // LOGNLOGS_MODEL_SELECT_HPP
