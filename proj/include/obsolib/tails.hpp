#ifndef OBSOLIB_TAILS_HPP
#define OBSOLIB_TAILS_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "obsolib/dist.hpp"
#include "obsolib/ingest.hpp"
#include "obsolib/specfun.hpp"

namespace obsolib {

// P(X >= x).  The complement-side incomplete beta keeps relative accuracy in
// the deep tail instead of cancelling against 1.
inline double survival(const NegBinModel& m, std::int64_t x,
                       const ConvergenceSpec& spec = {}) {
  if (x < 0) throw DomainError("survival: x must be nonnegative");
  if (x == 0) return 1.0;
  return reg_inc_beta(1.0 / (1.0 + m.beta()), static_cast<double>(x),
                      m.alpha(), spec);
}

// Tail mass by direct accumulation with a geometric-majorant stopping bound;
// the independent oracle for the incomplete-beta route.
inline double survival_by_summation(const NegBinModel& m, std::int64_t x) {
  if (x < 0) throw DomainError("survival_by_summation: x must be nonnegative");
  const double s = 1.0 / (1.0 + m.beta());
  KahanSum acc;
  double p = negbin_pmf(m, x);
  for (std::int64_t k = x;; ++k) {
    acc.add(p);
    const double kd = static_cast<double>(k);
    const double next = p * (m.alpha() + kd) / (kd + 1.0) * s;
    // every later term ratio is bounded by r, giving a geometric remainder
    const double r =
        m.alpha() > 1.0 ? s * (m.alpha() + kd + 1.0) / (kd + 2.0) : s;
    if (r < 1.0 && next / (1.0 - r) < 1e-16 * acc.value() + 1e-300)
      return acc.value();
    p = next;
    if (k - x > 10000000)
      throw ConvergenceError("survival_by_summation: tail did not close",
                             static_cast<std::size_t>(k - x));
  }
}

namespace detail {

inline std::int64_t largest_positive_survival(const NegBinModel& m,
                                              std::int64_t below,
                                              const ConvergenceSpec& spec) {
  std::int64_t lo = 0, hi = below;  // survival(lo) > 0 known
  while (lo + 1 < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (survival(m, mid, spec) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace detail

// Hazard: conditional mass at x given age >= x.
inline double mortality(const NegBinModel& m, std::int64_t x,
                        const ConvergenceSpec& spec = {}) {
  if (x < 0) throw DomainError("mortality: x must be nonnegative");
  const double surv = survival(m, x, spec);
  if (surv <= 0.0)
    throw TailUnderflowError(
        "mortality: survival underflowed at x = " + std::to_string(x),
        detail::largest_positive_survival(m, x, spec));
  return negbin_pmf(m, x) / surv;
}

// Smallest integer x with P(X > x) <= p.
inline std::int64_t var_p(const NegBinModel& m, double p,
                          const ConvergenceSpec& spec = {}) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("var_p: p must lie strictly inside (0, 1)");
  const auto exceed = [&](std::int64_t x) { return survival(m, x + 1, spec); };
  if (exceed(0) <= p) return 0;
  std::int64_t hi = 1;
  while (exceed(hi) > p) {
    hi *= 2;
    if (hi > (std::int64_t{1} << 40))
      throw ConvergenceError("var_p: threshold search ran away", 40);
  }
  std::int64_t lo = hi / 2;  // exceed(lo) > p, exceed(hi) <= p
  while (lo + 1 < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (exceed(mid) > p)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

struct TvarResult {
  std::int64_t var;
  // E[X | X >= var] by direct summation; the authoritative value
  double value;
  // certified bound on the tail mass dropped by the summation
  double truncation_bound;
  // the same quantity reassembled from the hypergeometric ratio
  std::optional<double> closed_form;
  std::optional<double> discrepancy;
  // E[X | X > var]: the ratio with argument 1/(1+beta)
  std::optional<double> strict_mean;
  // the ratio with argument q0 instead; tends to var + 1 + beta.  Kept
  // because tabulations of this family print it, so reports and
  // verification can compare conventions explicitly.
  std::optional<double> geometric_form;
};

namespace detail {

// (d+1) * 2F1(1, d+1+alpha; d+1; z) / 2F1(1, d+1+alpha; d+2; z)
inline double tvar_hyp_ratio(const NegBinModel& m, std::int64_t d, double z,
                             const ConvergenceSpec& spec) {
  const double dd = static_cast<double>(d);
  const double num = gauss_2f1(1.0, dd + 1.0 + m.alpha(), dd + 1.0, z, spec);
  const double den = gauss_2f1(1.0, dd + 1.0 + m.alpha(), dd + 2.0, z, spec);
  return (dd + 1.0) * num / den;
}

}  // namespace detail

inline TvarResult tvar_p(const NegBinModel& m, double p,
                         const ConvergenceSpec& spec = {}) {
  const std::int64_t d = var_p(m, p, spec);
  const double dd = static_cast<double>(d);
  const double surv_d = survival(m, d, spec);
  const double s = 1.0 / (1.0 + m.beta());

  // summation of (x - d) pmf(x) over x >= d, remainder certified by a
  // geometric majorant on the term ratios
  KahanSum acc;
  double pmf = negbin_pmf(m, d);
  double bound = 0.0;
  for (std::int64_t k = d;; ++k) {
    const double kd = static_cast<double>(k);
    acc.add((kd - dd) * pmf);
    const double next = pmf * (m.alpha() + kd) / (kd + 1.0) * s;
    const double r =
        m.alpha() > 1.0 ? s * (m.alpha() + kd + 1.0) / (kd + 2.0) : s;
    if (r < 1.0) {
      const double g = 1.0 - r;
      const double rem = next * ((kd + 1.0 - dd) / g + r / (g * g));
      if (rem / surv_d < 1e-12) {
        bound = rem / surv_d;
        break;
      }
    }
    pmf = next;
    if (k - d > 10000000)
      throw ConvergenceError("tvar_p: summation did not close",
                             static_cast<std::size_t>(k - d));
  }

  TvarResult out{d, dd + acc.value() / surv_d, bound,
                 std::nullopt, std::nullopt, std::nullopt, std::nullopt};
  try {
    const double strict = detail::tvar_hyp_ratio(m, d, s, spec);
    out.strict_mean = strict;
    const double surv_d1 = survival(m, d + 1, spec);
    out.closed_form = dd + surv_d1 / surv_d * (strict - dd);
    out.discrepancy = std::fabs(out.value - *out.closed_form);
  } catch (const ConvergenceError&) {
    // summation result stands alone
  }
  try {
    out.geometric_form = detail::tvar_hyp_ratio(m, d, m.q0(), spec);
  } catch (const ConvergenceError&) {
  }
  return out;
}

// a(t): ratio of citation intensity in consecutive years under the model.
inline double obsolescence_factor(const NegBinModel& m, std::int64_t t) {
  if (t < 0) throw DomainError("obsolescence_factor: t must be nonnegative");
  return m.q0() *
         (1.0 + (m.alpha() - 1.0) / (static_cast<double>(t) + 1.0));
}

// Aging factor of the single-intensity exponential model: independent of t.
inline double exp_aging_factor(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw DomainError("exp_aging_factor: theta must be finite and positive");
  return std::exp(-theta);
}

// c(t) = theta exp(-theta t); exposed so the t-independence of
// c(t+1)/c(t) can be checked directly.
inline double exp_citation_intensity(double theta, double t) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw DomainError("exp_citation_intensity: theta must be positive");
  if (!(t >= 0.0))
    throw DomainError("exp_citation_intensity: t must be nonnegative");
  return theta * std::exp(-theta * t);
}

// Median cited-reference age of a sample.
inline double half_life(const AgeSample& sample) {
  return detail::histogram_median(sample.counts(), sample.n_obs());
}

struct TailReport {
  std::string dataset_id;
  std::vector<std::int64_t> ages;
  std::vector<double> survival;
  std::vector<double> mortality;
};

struct RiskReport {
  std::string dataset_id;
  std::vector<double> probabilities;
  std::vector<std::int64_t> var;
  std::vector<double> tvar;       // hypergeometric ratio at q0
  std::vector<double> tail_mean;  // E[X | X >= var], the summation form
};

inline TailReport make_tail_report(const std::string& dataset_id,
                                   const NegBinModel& m,
                                   const std::vector<std::int64_t>& ages,
                                   const ConvergenceSpec& spec = {}) {
  if (ages.empty())
    throw DomainError("make_tail_report: ages grid must be non-empty");
  for (std::size_t i = 0; i < ages.size(); ++i) {
    if (ages[i] < 0)
      throw DomainError("make_tail_report: ages must be nonnegative");
    if (i > 0 && ages[i] <= ages[i - 1])
      throw DomainError("make_tail_report: ages must be strictly increasing");
  }
  TailReport out{dataset_id, ages, {}, {}};
  for (const auto x : ages) {
    out.survival.push_back(survival(m, x, spec));
    out.mortality.push_back(mortality(m, x, spec));
  }
  return out;
}

inline RiskReport make_risk_report(const std::string& dataset_id,
                                   const NegBinModel& m,
                                   const std::vector<double>& probs,
                                   const ConvergenceSpec& spec = {}) {
  if (probs.empty())
    throw DomainError("make_risk_report: probability grid must be non-empty");
  for (const auto p : probs)
    if (!(p > 0.0 && p < 1.0))
      throw DomainError(
          "make_risk_report: probabilities must lie strictly inside (0, 1)");
  RiskReport out{dataset_id, probs, {}, {}, {}};
  for (const auto p : probs) {
    const TvarResult t = tvar_p(m, p, spec);
    out.var.push_back(t.var);
    out.tvar.push_back(t.geometric_form.value_or(t.value));
    out.tail_mean.push_back(t.value);
  }
  return out;
}

}  // namespace obsolib

#endif
