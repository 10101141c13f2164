#ifndef OBSOLIB_DIST_HPP
#define OBSOLIB_DIST_HPP

#include <cmath>
#include <cstdint>

#include "obsolib/specfun.hpp"

namespace obsolib {

// Homogeneous citation-age model: constant annual intensity theta.
class PoissonModel {
public:
  explicit PoissonModel(double theta) : theta_(theta) {
    if (!(theta > 0.0) || !std::isfinite(theta))
      throw DomainError("PoissonModel: theta must be finite and positive");
  }

  double theta() const { return theta_; }

private:
  double theta_;
};

// Gamma(alpha, beta) mixing density over the Poisson intensity, rate
// parameterization: mean alpha/beta.
class GammaMixing {
public:
  GammaMixing(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw DomainError("GammaMixing: alpha must be finite and positive");
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw DomainError("GammaMixing: beta must be finite and positive");
  }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

private:
  double alpha_;
  double beta_;
};

// Negative binomial in the mixed-Poisson parameterization: the age X of a
// cited reference has mean alpha/beta and dispersion index (1+beta)/beta.
class NegBinModel {
public:
  NegBinModel(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw DomainError("NegBinModel: alpha must be finite and positive");
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw DomainError("NegBinModel: beta must be finite and positive");
  }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  // weight of the geometric base: pmf(x) carries q0^alpha * (1-q0)^x
  double q0() const { return beta_ / (1.0 + beta_); }

private:
  double alpha_;
  double beta_;
};

struct Moments {
  double mean;
  double variance;
  double dispersion_index;
};

inline double poisson_log_pmf(const PoissonModel& m, std::int64_t x) {
  if (x < 0) throw DomainError("poisson_log_pmf: x must be nonnegative");
  const double dx = static_cast<double>(x);
  return dx * std::log(m.theta()) - m.theta() - ln_gamma(dx + 1.0);
}

inline double poisson_pmf(const PoissonModel& m, std::int64_t x) {
  return std::exp(poisson_log_pmf(m, x));
}

inline double gamma_pdf(const GammaMixing& g, double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw DomainError("gamma_pdf: theta must be finite and positive");
  return std::exp(g.alpha() * std::log(g.beta()) - ln_gamma(g.alpha()) +
                  (g.alpha() - 1.0) * std::log(theta) - g.beta() * theta);
}

inline double negbin_log_pmf(const NegBinModel& m, std::int64_t x) {
  if (x < 0) throw DomainError("negbin_log_pmf: x must be nonnegative");
  const double dx = static_cast<double>(x);
  const double log_q0 = std::log(m.beta()) - std::log1p(m.beta());
  const double log_1mq0 = -std::log1p(m.beta());
  return ln_gamma(m.alpha() + dx) - ln_gamma(m.alpha()) - ln_gamma(dx + 1.0) +
         m.alpha() * log_q0 + dx * log_1mq0;
}

inline double negbin_pmf(const NegBinModel& m, std::int64_t x) {
  return std::exp(negbin_log_pmf(m, x));
}

// P(X <= x) through the regularized incomplete beta identity.
inline double negbin_cdf(const NegBinModel& m, std::int64_t x,
                         const ConvergenceSpec& spec = {}) {
  if (x < 0) return 0.0;
  return reg_inc_beta(m.q0(), m.alpha(), static_cast<double>(x) + 1.0, spec);
}

// Same quantity by direct accumulation; kept as an independent cross-check.
inline double negbin_cdf_by_summation(const NegBinModel& m, std::int64_t x) {
  if (x < 0) return 0.0;
  KahanSum acc;
  double pmf = std::exp(m.alpha() *
                        (std::log(m.beta()) - std::log1p(m.beta())));
  const double ratio_base = 1.0 / (1.0 + m.beta());
  for (std::int64_t k = 0;; ++k) {
    acc.add(pmf);
    if (k == x) break;
    pmf *= (m.alpha() + static_cast<double>(k)) /
           (static_cast<double>(k) + 1.0) * ratio_base;
  }
  return acc.value();
}

inline Moments negbin_mean_var(const NegBinModel& m) {
  const double mean = m.alpha() / m.beta();
  const double variance =
      m.alpha() * (1.0 + m.beta()) / (m.beta() * m.beta());
  return {mean, variance, (1.0 + m.beta()) / m.beta()};
}

namespace detail {

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * eps)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double eps) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 48);
}

}  // namespace detail

// Quadrature of the Poisson-gamma mixture integral.  This is the oracle the
// closed-form negative binomial pmf is verified against; it never takes the
// negbin shortcut.  Integration runs in v = log(theta) so the alpha < 1
// endpoint stays smooth.
inline double mixture_pmf(const GammaMixing& g, std::int64_t x,
                          const ConvergenceSpec& spec = {}) {
  if (x < 0) throw DomainError("mixture_pmf: x must be nonnegative");
  const double s = g.alpha() + static_cast<double>(x);
  const double r = 1.0 + g.beta();
  const double c = g.alpha() * std::log(g.beta()) - ln_gamma(g.alpha()) -
                   ln_gamma(static_cast<double>(x) + 1.0);
  // log-domain peak of exp(s v - r e^v) sits at v* = log(s/r); splitting
  // there keeps the peak on the sample grid however narrow it is
  const double v_star = std::log(s / r);
  const double v_lo = v_star - (60.0 / s + 20.0 / std::sqrt(s) + 2.0);
  const double v_hi = std::log((s + 45.0 * std::sqrt(s) + 60.0) / r);
  const double log_peak = c + s * v_star - s;
  const auto integrand = [&](double v) {
    return std::exp(c + s * v - r * std::exp(v) - log_peak);
  };
  const double eps = std::max(spec.abs_tolerance, 1e-13);
  const double scaled =
      detail::integrate(integrand, v_lo, v_star, eps * (v_star - v_lo)) +
      detail::integrate(integrand, v_star, v_hi, eps * (v_hi - v_star));
  return scaled * std::exp(log_peak);
}

}  // namespace obsolib

#endif
