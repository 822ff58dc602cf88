#pragma once

// Kou jump-diffusion: drift mu, volatility sigma, jump intensity lambda, and
// two-sided exponential jumps (upward rate rho with probability p, downward
// rate rho_hat).  The Laplace exponent is rational; clearing denominators in
// psi(z) = q gives a quartic whose four roots interlace the poles:
//   -zeta_hat2 < -rho_hat < -zeta_hat1 < 0 < zeta1 < rho < zeta2.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "common.hpp"

namespace levyfun::kou {

struct KouParams {
  double mu = 0.0;
  double sigma = 0.0;
  double lambda = 0.0;
  double p = 0.0;
  double rho = 0.0;
  double rho_hat = 0.0;

  void validate() const {
    if (!(sigma > 0.0)) throw domain_error("kou.params", "sigma must be positive");
    if (!(lambda >= 0.0)) throw domain_error("kou.params", "lambda must be nonnegative");
    if (!(p >= 0.0 && p <= 1.0)) throw domain_error("kou.params", "p must lie in [0,1]");
    if (!(rho > 0.0)) throw domain_error("kou.params", "rho must be positive");
    if (!(rho_hat > 0.0)) throw domain_error("kou.params", "rho_hat must be positive");
  }
};

inline cplx laplace_exponent(const KouParams& k, cplx z) {
  double A = 0.5 * k.sigma * k.sigma;
  return k.mu * z + A * z * z + k.lambda * k.p * z / (k.rho - z) -
         k.lambda * (1.0 - k.p) * z / (k.rho_hat + z);
}

inline cplx laplace_exponent_prime(const KouParams& k, cplx z) {
  double A = 0.5 * k.sigma * k.sigma;
  cplx dr = k.rho - z, dh = k.rho_hat + z;
  return k.mu + 2.0 * A * z + k.lambda * k.p * k.rho / (dr * dr) -
         k.lambda * (1.0 - k.p) * k.rho_hat / (dh * dh);
}

// (psi(z) - q)(rho - z)(rho_hat + z), expanded; leading coefficient -A.
inline std::array<cplx, 5> quartic_coeffs(const KouParams& k, cplx q) {
  double A = 0.5 * k.sigma * k.sigma;
  double rr = k.rho * k.rho_hat, rd = k.rho - k.rho_hat;
  std::array<cplx, 5> c;
  c[4] = -A;
  c[3] = A * rd - k.mu;
  c[2] = A * rr + k.mu * rd + q + k.lambda;
  c[1] = k.mu * rr - q * rd + k.lambda * k.p * k.rho_hat - k.lambda * (1.0 - k.p) * k.rho;
  c[0] = -q * rr;
  return c;
}

namespace detail {

inline cplx horner(const std::array<cplx, 5>& c, cplx z) {
  return (((c[4] * z + c[3]) * z + c[2]) * z + c[1]) * z + c[0];
}

inline cplx horner_prime(const std::array<cplx, 5>& c, cplx z) {
  return ((4.0 * c[4] * z + 3.0 * c[3]) * z + 2.0 * c[2]) * z + c[1];
}

inline double bisect(const std::array<cplx, 5>& c, double lo, double hi) {
  double flo = horner(c, lo).real();
  for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::fabs(lo) + std::fabs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = horner(c, mid).real();
    if ((fm >= 0.0) == (flo >= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline cplx polish(const std::array<cplx, 5>& c, cplx z, const char* where) {
  for (int it = 0; it < 50; ++it) {
    cplx f = horner(c, z);
    cplx fp = horner_prime(c, z);
    if (fp == 0.0) break;
    cplx step = f / fp;
    z -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(z))) return z;
  }
  cplx f = horner(c, z);
  if (std::abs(f) > 1e-8 * (1.0 + std::abs(c[0])))
    throw convergence_error(where, "Newton polish failed to converge");
  return z;
}

}  // namespace detail

struct RootSystem {
  cplx q;
  double A = 0.0;
  cplx zeta1, zeta2, zeta_hat1, zeta_hat2;

  // Wiener-Hopf exponents (real rates): Phi+(q) = zeta1, Phi-(q) = -zeta_hat1.
  cplx phi_plus() const { return zeta1; }
  cplx phi_minus() const { return -zeta_hat1; }
};

namespace detail {

inline std::array<cplx, 4> solve_real(const KouParams& k, double q, const char* where) {
  auto c = quartic_coeffs(k, q);
  // Sign pattern of P on the four intervals:
  //   P(0) = -q rho rho_hat < 0, P(rho) = lambda p rho (rho + rho_hat) > 0,
  //   P(-rho_hat) = lambda (1-p) rho_hat (rho + rho_hat) > 0, P(+-inf) = -inf.
  double span = 1.0;
  while (horner(c, k.rho + span).real() >= 0.0) {
    span *= 2.0;
    if (span > 1e12) throw convergence_error(where, "no sign change beyond rho");
  }
  double zeta2 = bisect(c, k.rho, k.rho + span);
  double zeta1 = bisect(c, 0.0, k.rho);
  double hat1 = -bisect(c, -k.rho_hat, 0.0);
  span = 1.0;
  while (horner(c, -k.rho_hat - span).real() >= 0.0) {
    span *= 2.0;
    if (span > 1e12) throw convergence_error(where, "no sign change beyond -rho_hat");
  }
  double hat2 = -bisect(c, -k.rho_hat - span, -k.rho_hat);
  std::array<cplx, 4> r = {zeta1, zeta2, -hat1, -hat2};
  for (cplx& z : r) z = polish(c, z, where);
  return r;  // as quartic roots: zeta1, zeta2, -zeta_hat1, -zeta_hat2
}

}  // namespace detail

inline RootSystem solve_roots(const KouParams& k, cplx q) {
  const char* where = "kou.solve_roots";
  k.validate();
  if (k.lambda == 0.0)
    throw domain_error(where, "lambda = 0 has no jump component; use the gbm module");
  if (!(k.p > 0.0 && k.p < 1.0))
    throw domain_error(where, "four-root structure requires 0 < p < 1");
  if (!(std::abs(q) > 0.0)) throw domain_error(where, "rate q must be nonzero");

  std::array<cplx, 4> roots;
  if (q.imag() == 0.0 && q.real() > 0.0) {
    roots = detail::solve_real(k, q.real(), where);
  } else {
    double q0 = q.real();
    if (!(q0 > 0.0)) {
      q0 = std::max(std::abs(q), 1e-8);
      warn("kou.solve_roots: homotopy start clamped to |q| for Re(q) <= 0");
    }
    roots = detail::solve_real(k, q0, where);
    bool done = false;
    for (int steps = 32; steps <= 4096 && !done; steps *= 2) {
      auto cur = roots;
      bool ok = true;
      for (int s = 1; s <= steps && ok; ++s) {
        cplx qt = q0 + (q - q0) * (double(s) / steps);
        auto c = quartic_coeffs(k, qt);
        auto prev = cur;
        for (int i = 0; i < 4 && ok; ++i) {
          try {
            cur[i] = detail::polish(c, prev[i], where);
          } catch (const convergence_error&) {
            ok = false;
          }
        }
        if (!ok) break;
        for (int i = 0; i < 4 && ok; ++i) {
          // Track continuity: each root must stay nearest its own predecessor.
          double own = std::abs(cur[i] - prev[i]);
          for (int j = 0; j < 4; ++j) {
            if (j != i && std::abs(cur[i] - prev[j]) < own) ok = false;
            if (j > i && std::abs(cur[i] - cur[j]) < 1e-10 * (1.0 + std::abs(cur[i])))
              ok = false;  // collision
          }
        }
      }
      if (ok) {
        roots = cur;
        done = true;
      }
    }
    if (!done)
      throw convergence_error(where, "homotopy tracking failed after step refinement");
  }

  RootSystem rs;
  rs.q = q;
  rs.A = 0.5 * k.sigma * k.sigma;
  rs.zeta1 = roots[0];
  rs.zeta2 = roots[1];
  rs.zeta_hat1 = -roots[2];
  rs.zeta_hat2 = -roots[3];
  for (cplx r : roots) {
    cplx resid = laplace_exponent(k, r) - q;
    // Small lambda pushes zeta2 (zeta_hat2) within O(lambda) of the pole rho
    // (-rho_hat) where |psi'| blows up, so the ulp-level placement error of a
    // root stored in doubles is amplified; grant that much slack explicitly.
    double slack = 1e-12 * (1.0 + std::abs(q)) +
                   8.0 * 0x1p-52 * std::abs(r) * std::abs(laplace_exponent_prime(k, r));
    if (!(std::abs(resid) <= slack))
      throw convergence_error(where, "root residual exceeds tolerance");
  }
  return rs;
}

// psi'(zeta) from the Wiener-Hopf factorization, for zeta in {zeta1, zeta2}.
inline cplx psi_prime(const KouParams& k, const RootSystem& rs, cplx at) {
  cplx z1 = rs.zeta1, z2 = rs.zeta2;
  bool is1 = std::abs(at - z1) <= 1e-9 * (1.0 + std::abs(z1));
  bool is2 = std::abs(at - z2) <= 1e-9 * (1.0 + std::abs(z2));
  if (!is1 && !is2)
    throw domain_error("kou.psi_prime", "argument is not one of zeta1, zeta2");
  cplx z = is1 ? z1 : z2, other = is1 ? z2 : z1;
  return rs.A * (z - other) * (z + rs.zeta_hat1) * (z + rs.zeta_hat2) /
         ((z - k.rho) * (z + k.rho_hat));
}

// Match the first two cumulants of a GBM (mu1, sigma1) within the jump
// environment (lambda, p, rho, rho_hat).
inline KouParams moment_match(double mu1, double sigma1, double lambda, double p,
                              double rho, double rho_hat) {
  KouParams k;
  k.lambda = lambda;
  k.p = p;
  k.rho = rho;
  k.rho_hat = rho_hat;
  k.mu = mu1 - lambda * p / rho + lambda * (1.0 - p) / rho_hat;
  double s2 = sigma1 * sigma1 - 2.0 * lambda * p / (rho * rho) -
              2.0 * lambda * (1.0 - p) / (rho_hat * rho_hat);
  if (!(s2 > 0.0))
    throw domain_error("kou.moment_match", "matched diffusion variance is not positive");
  k.sigma = std::sqrt(s2);
  return k;
}

}  // namespace levyfun::kou
