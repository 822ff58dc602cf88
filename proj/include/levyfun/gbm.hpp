#pragma once

// Brownian-motion-with-drift special case (no jumps).  The distribution of
// the exponential functional collapses to closed forms in Whittaker M and W,
// so the module needs no root system, no Mellin machinery and no series
// assembly: everything reduces to the confluent hypergeometric 1F1.
//
// W is evaluated through its two-term connection to M rather than an integral
// representation; that keeps the module on the single audited 1F1 primitive.
// The connection degenerates when 2*eta is an integer, which the derive()
// entry point resolves by the same rate perturbation the jump model uses.

#include <cmath>
#include <complex>

#include "common.hpp"
#include "specfun.hpp"

namespace levyfun::gbm {

using levyfun::Side;

// Derived parameters for drift mu and volatility sigma at rate q:
//   nu    = 2 mu / sigma^2
//   eta   = sqrt(8 q / sigma^2 + nu^2) / 2
//   kappa = (1 - nu) / 2
struct GbmDerived {
  double mu = 0.0;
  double sigma = 0.0;
  cplx q;            // rate actually used (perturbed copy when flagged)
  cplx q_requested;  // rate as passed in
  cplx nu, eta, kappa;
  bool perturbed = false;
};

inline GbmDerived derive(cplx q, double mu, double sigma) {
  const char* where = "gbm.derive";
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu))
    throw domain_error(where, "need finite mu and sigma > 0");
  if (!(q.real() > 0.0)) throw domain_error(where, "Re(q) must be positive");

  auto build = [&](cplx qe) {
    GbmDerived d;
    d.mu = mu;
    d.sigma = sigma;
    d.q = qe;
    d.q_requested = q;
    const double s2 = sigma * sigma;
    d.nu = 2.0 * mu / s2;
    d.eta = 0.5 * std::sqrt(8.0 * qe / s2 + d.nu * d.nu);
    d.kappa = 0.5 * (1.0 - d.nu);
    if (std::abs(d.eta) < 1e-8 || integer_distance(2.0 * d.eta) < 1e-8)
      throw assumption_error(where, "2 eta within 1e-8 of an integer");
    return d;
  };

  try {
    return build(q);
  } catch (const assumption_error&) {
    warn("gbm.derive: 2 eta within 1e-8 of an integer; retrying with perturbed rate");
    GbmDerived d = build(q + 1e-9 * (1.0 + std::abs(q)));
    d.perturbed = true;
    return d;
  }
}

// M_{kappa,eta}(z) = e^{-z/2} z^{eta+1/2} 1F1(eta - kappa + 1/2; 1 + 2 eta; z)
inline cplx whittaker_m(cplx kappa, cplx eta, cplx z) {
  const char* where = "gbm.whittaker_m";
  if (near_nonpositive_integer(1.0 + 2.0 * eta))
    throw domain_error(where, "1 + 2 eta is a nonpositive integer");
  return std::exp(-0.5 * z) * std::pow(z, eta + 0.5) *
         sf::hyper_pfq({eta - kappa + 0.5}, {1.0 + 2.0 * eta}, z);
}

// W via the M-connection (2 eta not an integer):
//   W_{kappa,eta} = Gamma(-2 eta)/Gamma(1/2 - eta - kappa) M_{kappa,eta}
//                 + Gamma( 2 eta)/Gamma(1/2 + eta - kappa) M_{kappa,-eta}
inline cplx whittaker_w(cplx kappa, cplx eta, cplx z) {
  const char* where = "gbm.whittaker_w";
  if (integer_distance(2.0 * eta) < 1e-8)
    throw domain_error(where, "connection formula degenerates for integer 2 eta");
  sf::gamma_quotient c1;
  c1.num = {-2.0 * eta};
  c1.den = {0.5 - eta - kappa};
  sf::gamma_quotient c2;
  c2.num = {2.0 * eta};
  c2.den = {0.5 + eta - kappa};
  return sf::eval_gamma_quotient(c1, where) * whittaker_m(kappa, eta, z) +
         sf::eval_gamma_quotient(c2, where) * whittaker_m(kappa, -eta, z);
}

namespace detail {

// Common front factor q Gamma(eta-kappa+1/2)/Gamma(1+2 eta) x^kappa
//   * y^{ypow - kappa} e^{(1/x - 1/y)/sigma^2}.
// ypow is 1 for probabilities and 2 for truncated expectations.
inline cplx front(const GbmDerived& d, double x, double y, double ypow,
                  const char* where) {
  sf::gamma_quotient g;
  g.num = {d.eta - d.kappa + 0.5};
  g.den = {1.0 + 2.0 * d.eta};
  const double s2 = d.sigma * d.sigma;
  return d.q * sf::eval_gamma_quotient(g, where) * sf::cpow(x, d.kappa) *
         sf::cpow(y, ypow - d.kappa) * std::exp((1.0 / x - 1.0 / y) / s2);
}

inline void check_args(double x, double y, const char* where) {
  if (!(x > 0.0) || !std::isfinite(x)) throw domain_error(where, "x must be positive");
  if (!(y > 0.0) || !std::isfinite(y)) throw domain_error(where, "y must be positive");
}

// P(I > y) for y >= x.
inline cplx upper_tail(const GbmDerived& d, double x, double y, const char* where) {
  const double s2 = d.sigma * d.sigma;
  const cplx zx = 2.0 / (s2 * x), zy = 2.0 / (s2 * y);
  return front(d, x, y, 1.0, where) / (d.eta + d.kappa - 0.5) *
         whittaker_w(d.kappa, d.eta, zx) * whittaker_m(d.kappa - 1.0, d.eta, zy);
}

// P(I < y) for y <= x.  Identically zero below the e^{-1/(sigma^2 y)} floor;
// the cutoff matches the jump module's left-tail guard.
inline cplx lower_tail(const GbmDerived& d, double x, double y, const char* where) {
  const double s2 = d.sigma * d.sigma;
  const cplx zx = 2.0 / (s2 * x), zy = 2.0 / (s2 * y);
  if (zy.real() >= 200.0) return 0.0;
  return front(d, x, y, 1.0, where) * whittaker_m(d.kappa, d.eta, zx) *
         whittaker_w(d.kappa - 1.0, d.eta, zy);
}

// E[I 1{I > y}] for y >= x.
inline cplx texp_above(const GbmDerived& d, double x, double y, const char* where) {
  const double s2 = d.sigma * d.sigma;
  const cplx zx = 2.0 / (s2 * x), zy = 2.0 / (s2 * y);
  return front(d, x, y, 2.0, where) / (d.eta + d.kappa - 0.5) *
         whittaker_w(d.kappa, d.eta, zx) *
         (whittaker_m(d.kappa - 2.0, d.eta, zy) / (d.eta + d.kappa - 1.5) +
          whittaker_m(d.kappa - 1.0, d.eta, zy));
}

// E[I 1{I < y}] for y <= x.
inline cplx texp_below(const GbmDerived& d, double x, double y, const char* where) {
  const double s2 = d.sigma * d.sigma;
  const cplx zx = 2.0 / (s2 * x), zy = 2.0 / (s2 * y);
  if (zy.real() >= 200.0) return 0.0;
  return front(d, x, y, 2.0, where) * whittaker_m(d.kappa, d.eta, zx) *
         (whittaker_w(d.kappa - 1.0, d.eta, zy) - whittaker_w(d.kappa - 2.0, d.eta, zy));
}

}  // namespace detail

// E[I] = (q x + 1)/(q - mu - sigma^2/2), the n = 2 step of the moment
// recursion with the jump intensity set to zero.
inline cplx mean_c(const GbmDerived& d, double x) {
  const cplx denom = d.q - d.mu - 0.5 * d.sigma * d.sigma;
  if (std::abs(denom) < 1e-14)
    throw domain_error("gbm.mean", "q - psi(1) vanishes; mean undefined");
  if (denom.real() <= 0.0 && d.q.imag() == 0.0)
    warn("gbm.mean: q <= psi(1); E[I] is divergent and the formula is a continuation");
  return (d.q * x + 1.0) / denom;
}

inline cplx cdf_c(const GbmDerived& d, double x, double y) {
  const char* where = "gbm.cdf";
  detail::check_args(x, y, where);
  if (y < x) return detail::lower_tail(d, x, y, where);
  return 1.0 - detail::upper_tail(d, x, y, where);
}

inline cplx tail_expectation_c(const GbmDerived& d, double x, double y, Side side) {
  const char* where = "gbm.tail_expectation";
  detail::check_args(x, y, where);
  if (side == Side::above) {
    if (y >= x) return detail::texp_above(d, x, y, where);
    return mean_c(d, x) - detail::texp_below(d, x, y, where);
  }
  if (y < x) return detail::texp_below(d, x, y, where);
  return mean_c(d, x) - detail::texp_above(d, x, y, where);
}

inline double cdf(const GbmDerived& d, double x, double y) {
  const char* where = "gbm.cdf";
  if (d.q_requested.imag() != 0.0)
    throw domain_error(where, "real-valued result requested for complex q");
  double v = to_real(cdf_c(d, x, y), where);
  if (v < -1e-10 || v > 1.0 + 1e-10)
    throw cancellation_error(where, "probability outside [0,1] beyond slack");
  return std::min(1.0, std::max(0.0, v));
}

inline double tail_expectation(const GbmDerived& d, double x, double y, Side side) {
  const char* where = "gbm.tail_expectation";
  if (d.q_requested.imag() != 0.0)
    throw domain_error(where, "real-valued result requested for complex q");
  return to_real(tail_expectation_c(d, x, y, side), where);
}

inline double mean(const GbmDerived& d, double x) {
  if (d.q_requested.imag() != 0.0)
    throw domain_error("gbm.mean", "real-valued result requested for complex q");
  return to_real(mean_c(d, x), "gbm.mean");
}

}  // namespace levyfun::gbm
