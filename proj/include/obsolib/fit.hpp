#ifndef OBSOLIB_FIT_HPP
#define OBSOLIB_FIT_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "obsolib/dist.hpp"
#include "obsolib/ingest.hpp"
#include "obsolib/specfun.hpp"

namespace obsolib {

inline PoissonModel fit_poisson(const AgeSample& sample) {
  const double mean = sample.mean();
  if (mean == 0.0)
    throw DataError("fit_poisson '" + sample.dataset_id() +
                    "': degenerate sample (all ages 0, theta must be > 0)");
  return PoissonModel(mean);
}

// Histogram-weighted log likelihoods.  Underflow of an individual pmf shows
// up here as -inf, which callers surface as a warning.
inline double loglik(const PoissonModel& m, const AgeSample& sample) {
  KahanSum acc;
  for (const auto& [age, count] : sample.counts())
    acc.add(static_cast<double>(count) * poisson_log_pmf(m, age));
  return acc.value();
}

inline double loglik(const NegBinModel& m, const AgeSample& sample) {
  KahanSum acc;
  for (const auto& [age, count] : sample.counts())
    acc.add(static_cast<double>(count) * negbin_log_pmf(m, age));
  return acc.value();
}

struct MomentInit {
  double alpha0;
  double beta0;
};

inline MomentInit negbin_moment_init(double mean, double dispersion_index) {
  if (!(dispersion_index > 1.0))
    throw DataError("negbin_moment_init: requires dispersion index > 1");
  const double beta0 = 1.0 / (dispersion_index - 1.0);
  return {mean * beta0, beta0};
}

namespace detail {

struct ProfileScore {
  double value;
  double derivative;
};

// Profile log-likelihood score in alpha after eliminating beta = alpha/mean.
inline ProfileScore profile_score(const AgeSample& sample, double alpha) {
  const double mean = sample.mean();
  const double dga = digamma(alpha);
  const double tga = trigamma(alpha);
  KahanSum sc, dsc;
  for (const auto& [age, count] : sample.counts()) {
    if (age == 0) continue;  // digamma terms cancel exactly
    const double w = static_cast<double>(count);
    sc.add(w * (digamma(alpha + static_cast<double>(age)) - dga));
    dsc.add(w * (trigamma(alpha + static_cast<double>(age)) - tga));
  }
  const double n = static_cast<double>(sample.n_obs());
  return {sc.value() + n * std::log(alpha / (alpha + mean)),
          dsc.value() + n * (1.0 / alpha - 1.0 / (alpha + mean))};
}

}  // namespace detail

// Profile maximum likelihood: Newton on ln(alpha) inside a sign-change
// bracket, falling back to geometric bisection when a step misbehaves.
inline NegBinModel fit_negbin(const AgeSample& sample) {
  const double mean = sample.mean();
  if (mean == 0.0)
    throw DataError("fit_negbin '" + sample.dataset_id() +
                    "': degenerate sample (all ages 0)");
  if (sample.counts().size() < 2)
    throw DataError("fit_negbin '" + sample.dataset_id() +
                    "': single support point, profile likelihood is flat");
  const double id = sample.dispersion_index();
  if (id <= 1.0)
    throw DataError("fit_negbin '" + sample.dataset_id() +
                    "': underdispersed sample (dispersion index " +
                    std::to_string(id) +
                    " <= 1); the Poisson model is appropriate");

  constexpr int max_iter = 200;
  constexpr double score_tol = 1e-9;
  constexpr double step_tol = 1e-10;
  constexpr double alpha_min = 1e-12;
  constexpr double alpha_max = 1e12;

  int used = 0;
  const auto eval = [&](double a) {
    ++used;
    return detail::profile_score(sample, a);
  };

  double alpha = negbin_moment_init(mean, id).alpha0;
  detail::ProfileScore s = eval(alpha);

  // the score decreases through the root: positive side is the lower bracket
  double lo = alpha, hi = alpha;
  if (s.value > score_tol) {
    while (s.value > score_tol && used < max_iter) {
      lo = hi;
      hi *= 4.0;
      if (hi > alpha_max)
        throw ConvergenceError("fit_negbin '" + sample.dataset_id() +
                                   "': no score sign change below alpha 1e12",
                               static_cast<std::size_t>(used));
      alpha = hi;
      s = eval(alpha);
    }
  } else if (s.value < -score_tol) {
    while (s.value < -score_tol && used < max_iter) {
      hi = lo;
      lo /= 4.0;
      if (lo < alpha_min)
        throw ConvergenceError("fit_negbin '" + sample.dataset_id() +
                                   "': no score sign change above alpha 1e-12",
                               static_cast<std::size_t>(used));
      alpha = lo;
      s = eval(alpha);
    }
  }

  bool converged = std::fabs(s.value) <= score_tol;
  while (!converged && used < max_iter) {
    // Newton step in u = ln(alpha); ds/du = alpha * ds/dalpha
    double next = alpha * std::exp(-s.value / (s.derivative * alpha));
    if (!std::isfinite(next) || next <= lo || next >= hi)
      next = std::sqrt(lo * hi);
    const double step = std::fabs(std::log(next / alpha));
    alpha = next;
    s = eval(alpha);
    if (s.value > 0.0)
      lo = alpha;
    else
      hi = alpha;
    converged = std::fabs(s.value) <= score_tol || step <= step_tol;
  }
  if (!converged)
    throw ConvergenceError(
        "fit_negbin '" + sample.dataset_id() + "': score " +
            std::to_string(s.value) + " at alpha " + std::to_string(alpha),
        static_cast<std::size_t>(used));
  return NegBinModel(alpha, alpha / mean);
}

inline double aic(double loglik_value, int k) {
  if (!std::isfinite(loglik_value))
    throw DomainError("aic: log-likelihood must be finite");
  if (k < 1) throw DomainError("aic: k must be a positive integer");
  return 2.0 * static_cast<double>(k) - 2.0 * loglik_value;
}

enum class Preferred { poisson, negbin };

struct FitReport {
  std::string dataset_id;
  std::int64_t n_obs;
  PoissonModel poisson;
  double poisson_loglik;
  double poisson_aic;
  std::optional<NegBinModel> negbin;
  std::optional<double> negbin_loglik;
  std::optional<double> negbin_aic;
  std::optional<std::string> negbin_skip_reason;
  Preferred preferred;
  std::optional<double> aic_reduction_pct;
  std::vector<std::string> warnings;
};

inline FitReport compare_models(const AgeSample& sample,
                                const std::string& dataset_id) {
  const PoissonModel pm = fit_poisson(sample);
  const double ll_p = loglik(pm, sample);
  std::vector<std::string> warnings;
  double aic_p;
  if (std::isfinite(ll_p)) {
    aic_p = aic(ll_p, 1);
  } else {
    warnings.push_back("poisson pmf underflowed at an observed age");
    aic_p = std::numeric_limits<double>::infinity();
  }

  std::optional<NegBinModel> nb;
  std::optional<std::string> skip;
  try {
    nb = fit_negbin(sample);
  } catch (const DataError& e) {
    skip = e.what();
  }

  if (!nb)
    return {dataset_id, sample.n_obs(),  pm,
            ll_p,       aic_p,           std::nullopt,
            std::nullopt, std::nullopt,  skip,
            Preferred::poisson, std::nullopt, std::move(warnings)};

  const double ll_nb = loglik(*nb, sample);
  double aic_nb;
  if (std::isfinite(ll_nb)) {
    aic_nb = aic(ll_nb, 2);
  } else {
    warnings.push_back("negbin pmf underflowed at an observed age");
    aic_nb = std::numeric_limits<double>::infinity();
  }
  const Preferred pref =
      aic_nb < aic_p ? Preferred::negbin : Preferred::poisson;
  std::optional<double> reduction;
  if (std::isfinite(aic_p) && std::isfinite(aic_nb))
    reduction = 100.0 * (aic_p - aic_nb) / aic_p;
  return {dataset_id, sample.n_obs(), pm,           ll_p,
          aic_p,      nb,             ll_nb,        aic_nb,
          std::nullopt, pref,         reduction,    std::move(warnings)};
}

}  // namespace obsolib

#endif
