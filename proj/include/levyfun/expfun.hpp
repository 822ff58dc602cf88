#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "common.hpp"
#include "kou.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

// Distribution of the exponential functional I_{x,q} = x e^{X_T} + int_0^T
// e^{X_s} ds, T ~ Exp(q) independent of the Kou process X.  Everything is
// parameterized by an immutable query context carrying the root system and
// the caches shared by the Mellin transform and the distribution formulas.

namespace levyfun::ef {

using levyfun::Side;

namespace detail {

// Reusable straight-line Mellin-Barnes plan.  The integrand of a Meijer G
// factors as Phi(s) w^{-s} with Phi independent of the argument, so Phi is
// sampled once on a fixed Gauss-Legendre grid along Re(s) = lambda and every
// later evaluation is a weighted sum over exp(-s_j ln w).  Poles of a series
// group entry stranded to the right of the line re-enter as precomputed
// residue coefficients.
struct ContourPlan {
  std::vector<cplx> s;   // quadrature nodes lambda + i t (both half-lines)
  std::vector<cplx> cw;  // Phi(s_j) * weight_j / (2 pi)
  std::vector<cplx> rs;  // stranded pole locations
  std::vector<cplx> rc;  // their residue coefficients

  cplx eval(double w) const {
    const double lnw = std::log(w);
    cplx acc = 0.0;
    for (size_t j = 0; j < s.size(); ++j) acc += cw[j] * std::exp(-s[j] * lnw);
    for (size_t k = 0; k < rs.size(); ++k) acc += rc[k] * std::exp(-rs[k] * lnw);
    return acc;
  }
};

inline constexpr double gl16_x[8] = {
    0.09501250983763744, 0.28160355077925891, 0.45801677765722739, 0.61787624440264375,
    0.75540440835500303, 0.86563120238783175, 0.94457502307323258, 0.98940093499164993};
inline constexpr double gl16_w[8] = {
    0.18945061045506850, 0.18260341504492359, 0.16915651939500254, 0.14959598881657673,
    0.12462897125553387, 0.09515851168249278, 0.06225352393864789, 0.02715245941175409};

// Build the plan for g along the admissible window of its non-stranded
// parameters.  idx < 0 means no stranded entry (the usual separating line
// exists); cmax bounds |ln w| over the arguments the plan will serve, which
// sets the panel width needed to resolve the oscillation of w^{-i t}.
inline ContourPlan build_plan(const sf::GSpec& g, int idx, double cmax, const char* where) {
  sf::validate_gspec(g, where);
  if (!sf::condition_B(g)) throw domain_error(where, "condition B fails: integrand does not decay");
  double lo = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.m; ++j)
    if (j != idx) lo = std::max(lo, -g.b[j].real());
  double hi = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.n; ++j) hi = std::min(hi, 1.0 - g.a[j].real());
  if (!(lo < hi)) throw domain_error(where, "no admissible window for the parameter set");

  double lambda = 0.5 * (lo + hi);
  if (idx >= 0) {
    const double g0 = -g.b[idx].real();  // k = 0 of the stranded pole family
    if (lambda <= g0 + 0.25) {
      double p = g0 - std::max(0.0, std::round(g0 - lambda));
      if (std::abs(lambda - p) < 0.25) {
        lambda = (p + 0.5 < hi - 0.02) ? p + 0.5 : p - 0.5;  // family grid midpoints
        if (!(lambda > lo && lambda < hi))
          throw domain_error(where, "window too narrow to avoid the stranded pole grid");
      }
    }
  }

  ContourPlan pl;
  // panel width: resolve both the w^{-it} oscillation (cmax bounds |ln w|)
  // and the nearest pole family, which sits half a window off the line
  const double h = std::min({0.5, 6.0 / std::max(cmax, 1.0), 0.75 * (hi - lo)});
  double peak = 0.0;
  int quiet = 0;
  for (int p = 0;; ++p) {
    double t0 = p * h;
    if (t0 > 512.0) throw convergence_error(where, "contour tail did not decay by t = 512");
    double pmax = 0.0;
    for (int j = 0; j < 16; ++j) {
      double xi = j < 8 ? -gl16_x[j] : gl16_x[j - 8];
      double wt = 0.5 * h * gl16_w[j < 8 ? j : j - 8];
      double t = t0 + 0.5 * h * (1.0 + xi);
      for (int side = 0; side < 2; ++side) {
        cplx s(lambda, side == 0 ? t : -t);
        cplx phi = sf::meijer_integrand(g, s, 0.0);
        pl.s.push_back(s);
        pl.cw.push_back(phi * wt / (2.0 * pi));
        pmax = std::max(pmax, std::abs(phi));
      }
    }
    peak = std::max(peak, pmax);
    if (t0 >= 8.0 && pmax <= 1e-18 * peak) {
      if (++quiet >= 2) break;
    } else {
      quiet = 0;
    }
  }

  if (idx >= 0) {
    const double g0 = -g.b[idx].real();
    int K = (g0 > lambda) ? (int)std::floor(g0 - lambda) + 1 : 0;
    double sign = 1.0, kfact = 1.0;
    for (int k = 0; k < K; ++k) {
      cplx sk = -g.b[idx] - double(k);
      sf::gamma_quotient qt;
      for (int j = 0; j < g.m; ++j)
        if (j != idx) qt.num.push_back(g.b[j] + sk);
      for (int j = 0; j < g.n; ++j) qt.num.push_back(1.0 - g.a[j] - sk);
      for (int j = g.m; j < g.q(); ++j) qt.den.push_back(1.0 - g.b[j] - sk);
      for (int j = g.n; j < g.p(); ++j) qt.den.push_back(g.a[j] + sk);
      pl.rs.push_back(sk);
      pl.rc.push_back(sign / kfact * sf::eval_gamma_quotient(qt, where));
      sign = -sign;
      kfact *= double(k + 1);
    }
  }
  return pl;
}

}  // namespace detail

struct ExpFunctionalQuery {
  kou::KouParams params;
  cplx q;            // rate actually used (equals q_requested unless perturbed)
  cplx q_requested;
  double x = 0.0;
  bool perturbed = false;
  kou::RootSystem roots;

  // caches, built once per (params, q, x)
  double u = 0.0;    // 1/(A x)
  cplx sphi1, sphi2;           // sine-folded 3Phi3 weights of the hat-root groups
  cplx w_left1, w_left2;       // (A x)^{-zeta_hat_i} * sphi_i
  cplx g_one;                  // six-gamma ratio at s = 1 (normalizes mellin_m0)
  cplx m_zeta1, m_zeta2;       // M_{x,q} continued to the positive roots
  cplx n_zeta1, n_zeta2;       // (q x^zeta + zeta M(zeta)) / psi'(zeta)
  cplx m_two;                  // M_{x,q}(2) = E[I] when Re(zeta1) > 1
  detail::ContourPlan left_plan[3][2];  // (density, cdf, texp) x (own, swapped grouping)
};

namespace detail {

// sin(pi a)/sin(pi b) through the reflection formula, evaluated in log space:
// immune to overflow for complex roots and turns a near-integer b (a violated
// spacing assumption) into an assumption_error.
inline cplx sin_ratio(cplx a, cplx b, const char* where) {
  sf::gamma_quotient qt;
  qt.num = {b, 1.0 - b};
  qt.den = {a, 1.0 - a};
  return sf::eval_gamma_quotient(qt, where);
}

inline bool in_mellin_strip(const ExpFunctionalQuery& Q, cplx s) {
  double lo = std::max(0.0, 1.0 - Q.roots.zeta_hat1.real());
  return s.real() > lo && s.real() < 1.0;
}

// M_{x,q}(s) by the pole-group expansion of the Meijer G closed form (valid
// for every s away from positive integers; the sines of the expansion are
// folded into the gamma quotients).  Terms 2 and 3 reuse the cached sphi
// weights; term 1 carries the s-dependent 4Phi4.
inline cplx mellin_series(const ExpFunctionalQuery& Q, cplx s) {
  const char* where = "expfun.mellin_mxq";
  const auto& r = Q.roots;
  const double rho = Q.params.rho, rho_hat = Q.params.rho_hat;
  const double ax = r.A * Q.x;

  sf::gamma_quotient t1;
  t1.num = {1.0 + r.zeta1 - s, 1.0 + r.zeta2 - s, 1.0 - r.zeta_hat1 - s, 1.0 - r.zeta_hat2 - s};
  t1.den = {1.0 - s, 1.0 + rho - s, 1.0 - rho_hat - s};
  cplx f1 = sf::hyper_pfq_regularized(
      {cplx(1.0), 1.0 - s, 2.0 + rho - s, 2.0 - rho_hat - s},
      {2.0 - s - r.zeta_hat1, 2.0 - s - r.zeta_hat2, 2.0 - s + r.zeta1, 2.0 - s + r.zeta2},
      Q.u);
  cplx term1 = -sf::eval_gamma_quotient(t1, where) * sf::cpow(ax, s - 1.0) * f1;

  sf::gamma_quotient t2;
  t2.num = {1.0 + r.zeta1 - s, 1.0 + r.zeta2 - s, rho_hat + s, 1.0 - s - r.zeta_hat1};
  t2.den = {1.0 - s, 1.0 + rho - s, r.zeta_hat2 + s};
  cplx term2 = sf::eval_gamma_quotient(t2, where) * sf::cpow(ax, -r.zeta_hat1) * Q.sphi1;

  sf::gamma_quotient t3;
  t3.num = {1.0 + r.zeta1 - s, 1.0 + r.zeta2 - s, rho_hat + s, 1.0 - s - r.zeta_hat2};
  t3.den = {1.0 - s, 1.0 + rho - s, r.zeta_hat1 + s};
  cplx term3 = sf::eval_gamma_quotient(t3, where) * sf::cpow(ax, -r.zeta_hat2) * Q.sphi2;

  return Q.q * sf::cpow(r.A, -s) * (term1 + term2 + term3);
}

// Contour evaluation of the same transform through the G^{3,3}_{4,5} form;
// preferred inside the strip when 1/(Ax) is too large for the series.  A
// throwaway plan keeps the panel width matched to the oscillation of
// u^{-i t}, which an adaptive rule misjudges once ln u is large.
inline cplx mellin_contour(const ExpFunctionalQuery& Q, cplx s) {
  const char* where = "expfun.mellin_mxq";
  const auto& r = Q.roots;
  sf::gamma_quotient pre;
  pre.num = {1.0 + r.zeta1 - s, 1.0 + r.zeta2 - s, Q.params.rho_hat + s};
  pre.den = {1.0 - s, 1.0 + Q.params.rho - s, r.zeta_hat1 + s, r.zeta_hat2 + s};
  sf::GSpec g;
  g.m = 3;
  g.n = 3;
  g.a = {1.0 - s, cplx(1.0), cplx(-Q.params.rho), cplx(Q.params.rho_hat)};
  g.b = {1.0 - s, r.zeta_hat1, r.zeta_hat2, -r.zeta1, -r.zeta2};
  ContourPlan pl = build_plan(g, -1, std::abs(std::log(Q.u)) + 0.5, where);
  return Q.q * sf::cpow(r.A, -s) * sf::eval_gamma_quotient(pre, where) * pl.eval(Q.u);
}

// Continuation for 1/(Ax) too large for the series outside the strip: shift
// s by an integer into the inversion strip, evaluate the contour form there,
// and walk back with M(s+1) = (q x^s + s M(s)) / (q - psi(s)).
inline cplx mellin_strip_walk(const ExpFunctionalQuery& Q, cplx s) {
  const char* where = "expfun.mellin_mxq";
  const double lower = std::max(0.0, 1.0 - Q.roots.zeta_hat1.real());
  const int n = (int)std::floor(s.real() - lower);
  cplx s0 = s - double(n);
  if (!(s0.real() > lower + 0.02 && s0.real() < 0.98))
    throw cancellation_error(where, "no integer shift lands inside the inversion strip");
  cplx m = mellin_contour(Q, s0);
  for (int j = 0; j < n; ++j) {  // climb s0 -> s0 + n
    cplx t = s0 + double(j);
    cplx den = Q.q - kou::laplace_exponent(Q.params, t);
    if (std::abs(den) < 1e-12 * (1.0 + std::abs(Q.q)))
      throw assumption_error(where, "functional-equation step lands on a root of q - psi");
    m = (Q.q * sf::cpow(Q.x, t) + t * m) / den;
  }
  for (int j = 0; j > n; --j) {  // descend s0 -> s0 + n, n < 0
    cplx t = s0 + double(j) - 1.0;
    if (std::abs(t) < 1e-14)
      throw assumption_error(where, "functional-equation step lands on the pole at zero");
    m = ((Q.q - kou::laplace_exponent(Q.params, t)) * m - Q.q * sf::cpow(Q.x, t)) / t;
  }
  return m;
}

inline cplx mellin_eval(const ExpFunctionalQuery& Q, cplx s) {
  // Near positive integers the pole groups collide; snap to the integer (the
  // 1e-8 ball evaluates the limit) and step down through the functional
  // equation M(n) = (q x^{n-1} + (n-1) M(n-1)) / (q - psi(n-1)), which
  // reproduces M(1) = 1 and M(2) = (qx+1)/(q - psi(1)) exactly.
  if (integer_distance(s) < 1e-8 && std::round(s.real()) >= 1.0) {
    cplx sm(std::round(s.real()) - 1.0);
    cplx tail = (sm == 0.0) ? 0.0 : sm * mellin_eval(Q, sm);
    return (Q.q * sf::cpow(Q.x, sm) + tail) / (Q.q - kou::laplace_exponent(Q.params, sm));
  }
  if (in_mellin_strip(Q, s) && Q.u > 2.0) return mellin_contour(Q, s);
  if (Q.u > 40.0) return mellin_strip_walk(Q, s);  // series would lose ~e^u digits
  return mellin_series(Q, s);
}

// G-function shape of the left branch; kind: 0 density, 1 cdf, 2 truncated
// expectation below.  The series group ends with the zeta_hat1 entry; the
// swapped grouping (zeta_hat2 in the series group) is obtained by
// interchanging b[m-1] and b[q-1].
inline sf::GSpec left_gspec(const kou::KouParams& k, const kou::RootSystem& r, int kind) {
  sf::GSpec g;
  if (kind == 0) {
    g.m = 3;
    g.n = 1;
    g.a = {1.0 - k.rho_hat, cplx(1.0), 1.0 + k.rho};
    g.b = {1.0 + r.zeta1, 1.0 + r.zeta2, 1.0 - r.zeta_hat1, 1.0 - r.zeta_hat2};
  } else if (kind == 1) {
    g.m = 3;
    g.n = 1;
    g.a = {cplx(-k.rho_hat), cplx(k.rho), cplx(1.0)};
    g.b = {r.zeta1, r.zeta2, -r.zeta_hat1, -r.zeta_hat2};
  } else {
    g.m = 4;
    g.n = 1;
    g.a = {1.0 - k.rho_hat, cplx(1.0), 1.0 + k.rho, cplx(3.0)};
    g.b = {cplx(2.0), 1.0 + r.zeta1, 1.0 + r.zeta2, 1.0 - r.zeta_hat1, 1.0 - r.zeta_hat2};
  }
  return g;
}

// Left branch (0 < y < x) of density/cdf/truncated expectation.  The two
// hat-root terms carry *different* G-functions: interchanging zeta_hat1 and
// zeta_hat2 moves the interchanged entry in and out of the series group, so
// the weight w_left_i always multiplies the G whose series group holds its
// own hat root.  Both are evaluated from the plans cached in the query.
inline cplx left_branch(const ExpFunctionalQuery& Q, double y, int kind) {
  const auto& r = Q.roots;
  const double w = 1.0 / (r.A * y);
  if (w >= 200.0) return 0.0;  // below any representable tail mass
  if (!finite(Q.w_left1))
    throw cancellation_error("expfun.left_branch",
                             "distribution caches disabled for 1/(Ax) > 40");

  cplx sum = Q.w_left1 * Q.left_plan[kind][0].eval(w) +
             Q.w_left2 * Q.left_plan[kind][1].eval(w);
  if (kind == 0) return Q.q * sum;
  if (kind == 1) return Q.q / r.A * sum;
  return Q.q * y * y * sum;
}

// Right branch (y > x): the zeta1/zeta2-symmetric 3F3 (density, upper tail)
// and 4F4 (truncated expectation above) series.
inline cplx right_branch(const ExpFunctionalQuery& Q, double y, int kind) {
  // The two N-terms cancel to ~u digits as x -> 0, and the 3F3 arguments reach
  // -1/(A y) > 40 where the compensated ladder runs out; same cutoff as the
  // series caches.
  if (!finite(Q.w_left1))
    throw cancellation_error("expfun.right_branch",
                             "distribution caches disabled for 1/(Ax) > 40");
  const auto& r = Q.roots;
  const double rho = Q.params.rho, rho_hat = Q.params.rho_hat;
  const cplx arg = cplx(-1.0 / (r.A * y));
  const cplx zs[2] = {r.zeta1, r.zeta2};
  const cplx ns[2] = {Q.n_zeta1, Q.n_zeta2};
  cplx tot = 0.0;
  for (int i = 0; i < 2; ++i) {
    cplx za = zs[i], zb = zs[1 - i], N = ns[i];
    std::vector<cplx> den = {1.0 + za - zb, 1.0 + za + r.zeta_hat1, 1.0 + za + r.zeta_hat2};
    if (kind == 0) {
      tot += N * sf::cpow(y, -1.0 - za) *
             sf::hyper_pfq({1.0 + za, 1.0 + za - rho, 1.0 + za + rho_hat}, den, arg);
    } else if (kind == 1) {  // P(I > y)
      tot += N / za * sf::cpow(y, -za) *
             sf::hyper_pfq({1.0 + za - rho, 1.0 + za + rho_hat, za}, den, arg);
    } else {  // E[I 1{I > y}]
      den.push_back(za);
      tot += N / (za - 1.0) * sf::cpow(y, 1.0 - za) *
             sf::hyper_pfq({1.0 + za, 1.0 + za - rho, 1.0 + za + rho_hat, za - 1.0}, den, arg);
    }
  }
  return tot;
}

}  // namespace detail

// M_{0,q}(s) = A^{1-s} Gamma(s) G(s)/G(1) with G the six-gamma ratio of the
// root system.
inline cplx mellin_m0(const ExpFunctionalQuery& Q, cplx s) {
  const char* where = "expfun.mellin_m0";
  const auto& r = Q.roots;
  sf::gamma_quotient qt;
  qt.num = {s, 1.0 + r.zeta1 - s, 1.0 + r.zeta2 - s, Q.params.rho_hat + s};
  qt.den = {1.0 + Q.params.rho - s, r.zeta_hat1 + s, r.zeta_hat2 + s};
  return sf::cpow(r.A, 1.0 - s) * sf::eval_gamma_quotient(qt, where) / Q.g_one;
}

inline cplx mellin_mxq(const ExpFunctionalQuery& Q, cplx s) {
  if (!detail::in_mellin_strip(Q, s) && !(integer_distance(s) < 1e-8 && std::round(s.real()) >= 1.0))
    warn("expfun.mellin_mxq: s outside the principal strip; evaluating the analytic continuation");
  return detail::mellin_eval(Q, s);
}

// Independent verification route for the transform at s = 1 + w: the
// contour-integral representation against 1/M_{0,q}(-z).  Requires real q.
inline cplx mellin_contour_check(const ExpFunctionalQuery& Q, double w, double c) {
  const char* where = "expfun.mellin_contour_check";
  if (Q.q.imag() != 0.0 || !(Q.q.real() > 0.0))
    throw domain_error(where, "contour representation requires real positive q");
  double wlo = std::max(-1.0, -Q.roots.zeta_hat1.real());
  if (!(w > wlo && w < 0.0))
    throw domain_error(where, "w outside (max(-1, -zeta_hat1), 0)");
  if (!(c > 0.0 && c < -w)) throw domain_error(where, "c outside (0, -w)");

  const double lnx = std::log(Q.x);
  auto f = [&](double t) {
    cplx z(c, t);
    return std::exp(-z * lnx) /
           (z * std::sin(pi * z) * mellin_m0(Q, -z) * std::sin(pi * (w + z)));
  };
  double peak = std::abs(f(0.0));
  const double chunk = 2.0;
  cplx total = 0.0;
  for (int side = 0; side < 2; ++side) {
    double t0 = 0.0;
    for (;;) {
      double t1 = t0 + chunk;
      double a = side == 0 ? t0 : -t1;
      double b = side == 0 ? t1 : -t0;
      auto r = integrate(f, a, b, 1e-17 * std::max(peak, 1e-300), 5e-14);
      total += r.value;
      double endval = std::abs(f(side == 0 ? t1 : -t1));
      peak = std::max(peak, endval);
      if (std::abs(r.value) <= 1e-16 * std::abs(total) && endval <= 1e-18 * peak) break;
      t0 = t1;
      if (t0 > 64.0)
        throw convergence_error(where, "contour tail did not decay by t = 64");
    }
  }
  return -Q.q * std::sin(pi * w) * mellin_m0(Q, 1.0 + w) * 0.5 * total;
}

inline ExpFunctionalQuery make_query(const kou::KouParams& k, cplx q, double x) {
  const char* where = "expfun.make_query";
  if (!(x > 0.0)) throw domain_error(where, "x must be positive");

  auto build = [&](cplx qe) {
    ExpFunctionalQuery Q;
    Q.params = k;
    Q.q = qe;
    Q.q_requested = q;
    Q.x = x;
    Q.roots = kou::solve_roots(k, qe);
    const auto& r = Q.roots;
    if (integer_distance(r.zeta2 - r.zeta1) < 1e-8 ||
        integer_distance(r.zeta_hat2 - r.zeta_hat1) < 1e-8)
      throw assumption_error(where, "root spacing within 1e-8 of an integer");
    Q.u = 1.0 / (r.A * x);

    const bool small_u = Q.u <= 40.0;  // series caches lose ~e^u digits beyond
    if (small_u) {
      Q.sphi1 = detail::sin_ratio(k.rho_hat - r.zeta_hat1, r.zeta_hat2 - r.zeta_hat1, where) *
                sf::hyper_pfq_regularized(
                    {r.zeta_hat1, 1.0 + r.zeta_hat1 + k.rho, 1.0 + r.zeta_hat1 - k.rho_hat},
                    {1.0 + r.zeta_hat1 - r.zeta_hat2, 1.0 + r.zeta_hat1 + r.zeta1,
                     1.0 + r.zeta_hat1 + r.zeta2},
                    Q.u);
      Q.sphi2 = detail::sin_ratio(k.rho_hat - r.zeta_hat2, r.zeta_hat1 - r.zeta_hat2, where) *
                sf::hyper_pfq_regularized(
                    {r.zeta_hat2, 1.0 + r.zeta_hat2 + k.rho, 1.0 + r.zeta_hat2 - k.rho_hat},
                    {1.0 + r.zeta_hat2 - r.zeta_hat1, 1.0 + r.zeta_hat2 + r.zeta1,
                     1.0 + r.zeta_hat2 + r.zeta2},
                    Q.u);
      Q.w_left1 = sf::cpow(r.A * x, -r.zeta_hat1) * Q.sphi1;
      Q.w_left2 = sf::cpow(r.A * x, -r.zeta_hat2) * Q.sphi2;
    } else {
      warn("expfun.make_query: 1/(Ax) > 40, distribution caches disabled; "
           "only Mellin-transform queries are supported for this x");
      const cplx nan(std::numeric_limits<double>::quiet_NaN(), 0.0);
      Q.sphi1 = Q.sphi2 = Q.w_left1 = Q.w_left2 = nan;
    }

    sf::gamma_quotient g1q;
    g1q.num = {r.zeta1, r.zeta2, 1.0 + k.rho_hat};
    g1q.den = {cplx(k.rho), 1.0 + r.zeta_hat1, 1.0 + r.zeta_hat2};
    Q.g_one = sf::eval_gamma_quotient(g1q, where);

    Q.m_zeta1 = detail::mellin_eval(Q, r.zeta1);
    Q.m_zeta2 = detail::mellin_eval(Q, r.zeta2);
    Q.n_zeta1 = (qe * sf::cpow(x, r.zeta1) + r.zeta1 * Q.m_zeta1) / kou::psi_prime(k, r, r.zeta1);
    Q.n_zeta2 = (qe * sf::cpow(x, r.zeta2) + r.zeta2 * Q.m_zeta2) / kou::psi_prime(k, r, r.zeta2);
    Q.m_two = detail::mellin_eval(Q, cplx(2.0));

    // Left-branch arguments w = 1/(A y) range over (u, 200); the plan's panel
    // width must resolve exp(-i t ln w) across that whole span.
    if (small_u) {
      const double cmax = std::max(std::abs(std::log(Q.u)), std::log(200.0)) + 0.5;
      for (int kind = 0; kind < 3; ++kind) {
        sf::GSpec gl = detail::left_gspec(k, r, kind);
        sf::GSpec gr = gl;  // swapped grouping: zeta_hat2 joins the series group
        std::swap(gr.b[gr.m - 1], gr.b[gr.q() - 1]);
        Q.left_plan[kind][0] = detail::build_plan(gl, -1, cmax, where);
        Q.left_plan[kind][1] = detail::build_plan(gr, gr.m - 1, cmax, where);
      }
    }
    return Q;
  };

  try {
    return build(q);
  } catch (const assumption_error& e) {
    warn(std::string("expfun.make_query: ") + e.what() + "; retrying with a perturbed rate");
    ExpFunctionalQuery Q = build(q + 1e-9 * (1.0 + std::abs(q)));
    Q.perturbed = true;
    return Q;
  }
}

// ---------------------------------------------------------------------------
// Distribution quantities.  _c variants return the analytic continuation for
// complex q; the real wrappers assert the imaginary residue and project.
// ---------------------------------------------------------------------------

inline cplx density_c(const ExpFunctionalQuery& Q, double y) {
  if (!(y > 0.0)) throw domain_error("expfun.density", "y must be positive");
  if (y > Q.x) return detail::right_branch(Q, y, 0);
  if (y < Q.x) return detail::left_branch(Q, y, 0);
  return 0.5 * (detail::right_branch(Q, y, 0) + detail::left_branch(Q, y, 0));
}

inline cplx cdf_c(const ExpFunctionalQuery& Q, double y) {
  if (!(y > 0.0)) throw domain_error("expfun.cdf", "y must be positive");
  if (y < Q.x) return detail::left_branch(Q, y, 1);
  if (y > Q.x) return 1.0 - detail::right_branch(Q, y, 1);
  return 0.5 * (detail::left_branch(Q, y, 1) + 1.0 - detail::right_branch(Q, y, 1));
}

inline cplx tail_expectation_c(const ExpFunctionalQuery& Q, double y, Side side) {
  if (!(y > 0.0)) throw domain_error("expfun.tail_expectation", "y must be positive");
  if (Q.roots.zeta1.real() <= 1.0)
    warn("expfun.tail_expectation: Re(zeta1) <= 1, the first moment diverges; "
         "returning the analytic continuation");
  auto above = [&](double yy) { return detail::right_branch(Q, yy, 2); };
  auto below = [&](double yy) { return detail::left_branch(Q, yy, 2); };
  if (side == Side::above) {
    if (y > Q.x) return above(y);
    if (y < Q.x) return Q.m_two - below(y);
    return 0.5 * (above(y) + Q.m_two - below(y));
  }
  if (y < Q.x) return below(y);
  if (y > Q.x) return Q.m_two - above(y);
  return 0.5 * (below(y) + Q.m_two - above(y));
}

namespace detail {

inline void require_real_q(const ExpFunctionalQuery& Q, const char* where) {
  if (Q.q.imag() != 0.0)
    throw domain_error(where, "real-valued interface requires real q; use the _c variant");
}

}  // namespace detail

inline double density(const ExpFunctionalQuery& Q, double y) {
  detail::require_real_q(Q, "expfun.density");
  return to_real(density_c(Q, y), "expfun.density");
}

inline double cdf(const ExpFunctionalQuery& Q, double y) {
  detail::require_real_q(Q, "expfun.cdf");
  double v = to_real(cdf_c(Q, y), "expfun.cdf");
  if (v < -1e-10 || v > 1.0 + 1e-10)
    throw cancellation_error("expfun.cdf", "probability outside [0,1] beyond slack");
  return std::min(1.0, std::max(0.0, v));
}

inline double tail_expectation(const ExpFunctionalQuery& Q, double y, Side side) {
  detail::require_real_q(Q, "expfun.tail_expectation");
  return to_real(tail_expectation_c(Q, y, side), "expfun.tail_expectation");
}

// ---------------------------------------------------------------------------
// Identity cross-checks.  The distribution formulas integrate against y^{s-1}
// in closed form on both sides of x; the two sides must reassemble the Mellin
// transform.  Everything below is written out piecewise so tests can probe
// the internal cancellations as well as the assembled residuals.
// ---------------------------------------------------------------------------

namespace crosscheck {

struct Pieces {
  cplx f1, f2, f3, f4, f5, f6, f7, f8, f9, f10, f11;
  cplx a1, a2, a3, b1, b2, b3, c1, c2, c3;
  cplx d1, d2, d3, d4, e1, e2, e3, e4;
  cplx g1, g2, h1, h2;
  cplx mellin;     // closed-form transform at s
  cplx left_sum;   // integral over (0, x)
  cplx right_sum;  // integral over (x, infinity)
};

namespace detail {

inline cplx sinpi(cplx z) { return std::sin(pi * z); }

}  // namespace detail

inline Pieces build_pieces(const ExpFunctionalQuery& Q, cplx s) {
  const char* where = "expfun.crosscheck";
  const auto& r = Q.roots;
  const double rho = Q.params.rho, rh = Q.params.rho_hat;
  const cplx q = Q.q;
  const double A = r.A, x = Q.x, u = Q.u;
  const double ax = A * x;
  const cplx z1 = r.zeta1, z2 = r.zeta2, zh1 = r.zeta_hat1, zh2 = r.zeta_hat2;
  using detail::sinpi;
  auto phi = [&](std::vector<cplx> a, std::vector<cplx> b, cplx z) {
    return sf::hyper_pfq_regularized(a, b, z);
  };
  auto gq = [&](std::vector<cplx> num, std::vector<cplx> den) {
    sf::gamma_quotient qt;
    qt.num = std::move(num);
    qt.den = std::move(den);
    return sf::eval_gamma_quotient(qt, where);
  };

  Pieces P;
  P.f1 = phi({cplx(1.0), 1.0 - s, 2.0 + rho - s, 2.0 - rh - s},
             {2.0 - s - zh1, 2.0 - s - zh2, 2.0 - s + z1, 2.0 - s + z2}, u);
  P.f2 = phi({zh1, 1.0 + zh1 + rho, 1.0 + zh1 - rh},
             {1.0 + zh1 - zh2, 1.0 + zh1 + z1, 1.0 + zh1 + z2}, u);
  P.f3 = phi({zh2, 1.0 + zh2 + rho, 1.0 + zh2 - rh},
             {1.0 + zh2 - zh1, 1.0 + zh2 + z1, 1.0 + zh2 + z2}, u);
  P.f4 = phi({cplx(1.0), 1.0 - z1, 2.0 + rho - z1, 2.0 - rh - z1},
             {2.0 - z1 - zh1, 2.0 - z1 - zh2, cplx(2.0), 2.0 - z1 + z2}, u);
  P.f5 = phi({cplx(1.0), 1.0 - z2, 2.0 + rho - z2, 2.0 - rh - z2},
             {2.0 - z2 - zh1, 2.0 - z2 - zh2, cplx(2.0), 2.0 - z2 + z1}, u);
  P.f6 = phi({1.0 + z1 + rh, 1.0 + z1, 1.0 + z1 - rho, 1.0 + z1 - s},
             {2.0 + z1 - s, 1.0 + z1 - z2, 1.0 + z1 + zh1, 1.0 + z1 + zh2}, -u);
  P.f7 = phi({1.0 + z2 + rh, 1.0 + z2, 1.0 + z2 - rho, 1.0 + z2 - s},
             {2.0 + z2 - s, 1.0 + z2 - z1, 1.0 + z2 + zh1, 1.0 + z2 + zh2}, -u);
  P.f8 = phi({1.0 + rh - zh1, 1.0 - zh1, 1.0 - rho - zh1, 1.0 - s - zh1},
             {2.0 - zh1 - s, 1.0 - zh1 - z1, 1.0 - zh1 - z2, 1.0 + zh2 - zh1}, -u);
  P.f9 = phi({1.0 + rh - zh2, 1.0 - zh2, 1.0 - rho - zh2, 1.0 - s - zh2},
             {2.0 - zh2 - s, 1.0 - zh2 - z1, 1.0 - zh2 - z2, 1.0 + zh1 - zh2}, -u);
  P.f10 = sf::hyper_pfq({-z1, 1.0 + rho - z1, 1.0 - rh - z1},
                        {1.0 - z1 - zh1, 1.0 - z1 - zh2, 1.0 - z1 + z2}, cplx(u));
  P.f11 = sf::hyper_pfq({-z2, 1.0 + rho - z2, 1.0 - rh - z2},
                        {1.0 - z2 - zh1, 1.0 - z2 - zh2, 1.0 - z2 + z1}, cplx(u));

  auto acoef = [&](cplx ss, cplx& o1, cplx& o2, cplx& o3) {
    cplx gb = gq({1.0 + z1 - ss, 1.0 + z2 - ss, rh + ss},
                 {1.0 - ss, 1.0 + rho - ss, zh1 + ss, zh2 + ss});
    cplx base = pi * q * sf::cpow(A, -ss) * gb;
    o1 = -base * sinpi(rh + ss) / (sinpi(zh1 + ss) * sinpi(zh2 + ss)) * sf::cpow(ax, ss - 1.0);
    o2 = base * sinpi(rh - zh1) / (sinpi(ss + zh1) * sinpi(zh2 - zh1)) * sf::cpow(ax, -zh1);
    o3 = base * sinpi(rh - zh2) / (sinpi(ss + zh2) * sinpi(zh1 - zh2)) * sf::cpow(ax, -zh2);
  };
  acoef(s, P.a1, P.a2, P.a3);
  acoef(z1, P.b1, P.b2, P.b3);
  acoef(z2, P.c1, P.c2, P.c3);

  P.d1 = -sinpi(z1) * sinpi(rho - z1) / (sinpi(z2 - z1) * sinpi(zh1 + z1)) *
         sf::cpow(ax, -z1 - 1.0);
  P.d2 = -sinpi(z2) * sinpi(rho - z2) / (sinpi(z1 - z2) * sinpi(zh1 + z2)) *
         sf::cpow(ax, -z2 - 1.0);
  P.d3 = -sinpi(zh1) * sinpi(rho + zh1) / (sinpi(z1 + zh1) * sinpi(z2 + zh1)) *
         sf::cpow(ax, zh1 - 1.0);
  P.d4 = gq({1.0 + z1 - s, 1.0 + z2 - s, 1.0 - zh1 - s, s + rh}, {s + zh2, 1.0 - s, 1.0 + rho - s}) *
         sf::cpow(ax, -s);
  P.e1 = -sinpi(z1) * sinpi(rho - z1) / (sinpi(z2 - z1) * sinpi(zh2 + z1)) *
         sf::cpow(ax, -z1 - 1.0);
  P.e2 = -sinpi(z2) * sinpi(rho - z2) / (sinpi(z1 - z2) * sinpi(zh2 + z2)) *
         sf::cpow(ax, -z2 - 1.0);
  P.e3 = -sinpi(zh2) * sinpi(rho + zh2) / (sinpi(z1 + zh2) * sinpi(z2 + zh2)) *
         sf::cpow(ax, zh2 - 1.0);
  P.e4 = gq({1.0 + z1 - s, 1.0 + z2 - s, 1.0 - zh2 - s, s + rh}, {s + zh1, 1.0 - s, 1.0 + rho - s}) *
         sf::cpow(ax, -s);

  P.g1 = 1.0 / kou::psi_prime(Q.params, r, z1) * sf::cpow(x, s - 1.0 - z1) / (1.0 + z1 - s) *
         gq({2.0 + z1 - s, 1.0 + z1 - z2, 1.0 + z1 + zh1, 1.0 + z1 + zh2},
            {1.0 + z1 + rh, 1.0 + z1, 1.0 + z1 - rho, 1.0 + z1 - s});
  P.g2 = 1.0 / kou::psi_prime(Q.params, r, z2) * sf::cpow(x, s - 1.0 - z2) / (1.0 + z2 - s) *
         gq({2.0 + z2 - s, 1.0 + z2 - z1, 1.0 + z2 + zh1, 1.0 + z2 + zh2},
            {1.0 + z2 + rh, 1.0 + z2, 1.0 + z2 - rho, 1.0 + z2 - s});
  P.h1 = q * sf::cpow(A, -zh1) * sf::cpow(x, s - zh1) * sinpi(rh - zh1) / sinpi(zh2 - zh1);
  P.h2 = q * sf::cpow(A, -zh2) * sf::cpow(x, s - zh2) * sinpi(rh - zh2) / sinpi(zh1 - zh2);

  P.mellin = ef::detail::mellin_eval(Q, s);
  P.left_sum = P.h1 * P.d4 * P.f2 + P.h2 * P.e4 * P.f3 + P.h1 * P.d1 * P.f2 * P.f6 +
               P.h1 * P.d2 * P.f2 * P.f7 + P.h1 * P.d3 * P.f2 * P.f8 +
               P.h2 * P.e1 * P.f3 * P.f6 + P.h2 * P.e2 * P.f3 * P.f7 +
               P.h2 * P.e3 * P.f3 * P.f9;
  P.right_sum = q * sf::cpow(x, z1) * P.g1 * P.f6 + q * sf::cpow(x, z2) * P.g2 * P.f7 +
                z1 * P.b1 * P.g1 * P.f4 * P.f6 + z1 * P.b2 * P.g1 * P.f2 * P.f6 +
                z1 * P.b3 * P.g1 * P.f3 * P.f6 + z2 * P.c1 * P.g2 * P.f5 * P.f7 +
                z2 * P.c2 * P.g2 * P.f2 * P.f7 + z2 * P.c3 * P.g2 * P.f3 * P.f7;
  return P;
}

inline cplx mellin_sine_form(const ExpFunctionalQuery& Q, cplx s) {
  Pieces P = build_pieces(Q, s);
  return P.a1 * P.f1 + P.a2 * P.f2 + P.a3 * P.f3;
}

inline cplx left_integral_sum(const ExpFunctionalQuery& Q, cplx s) {
  return build_pieces(Q, s).left_sum;
}

inline cplx right_integral_sum(const ExpFunctionalQuery& Q, cplx s) {
  return build_pieces(Q, s).right_sum;
}

// |I_left + I_right - M| / (1 + |M|) for s in the principal strip.
inline double identity_residual(const ExpFunctionalQuery& Q, cplx s) {
  Pieces P = build_pieces(Q, s);
  return std::abs(P.left_sum + P.right_sum - P.mellin) / (1.0 + std::abs(P.mellin));
}

// The five-term reduction of the same identity, normalized by its largest
// term so the cancellation itself is what is measured.
inline double reduced_identity_residual(const ExpFunctionalQuery& Q, cplx s) {
  Pieces P = build_pieces(Q, s);
  const cplx q = Q.q;
  cplx t[5] = {q * sf::cpow(Q.x, Q.roots.zeta1) * P.g1 * P.f6 * P.f10,
               q * sf::cpow(Q.x, Q.roots.zeta2) * P.g2 * P.f7 * P.f11,
               P.h1 * P.d3 * P.f2 * P.f8, P.h2 * P.e3 * P.f3 * P.f9, -P.a1 * P.f1};
  cplx sum = 0.0;
  double mx = 0.0;
  for (const cplx& v : t) {
    sum += v;
    mx = std::max(mx, std::abs(v));
  }
  return std::abs(sum) / (1.0 + mx);
}

// Five-point rational-coefficient identity in an independent argument xx:
// H(xx) with alpha = (zeta1, zeta2, -zeta_hat1, -zeta_hat2, s-1) must vanish.
inline double five_term_residual(const ExpFunctionalQuery& Q, cplx s, double xx) {
  const auto& r = Q.roots;
  const double rho = Q.params.rho, rh = Q.params.rho_hat;
  if (!(xx > 0.0))
    throw domain_error("expfun.crosscheck", "argument must be positive");
  const cplx uu = cplx(1.0 / (r.A * xx));
  const cplx alpha[5] = {r.zeta1, r.zeta2, -r.zeta_hat1, -r.zeta_hat2, s - 1.0};
  cplx sum = 0.0;
  double mx = 0.0;
  for (int i = 0; i < 5; ++i) {
    cplx coef = (alpha[i] - rho) * (alpha[i] + rh);
    std::vector<cplx> d1, d2;
    for (int j = 0; j < 5; ++j) {
      if (j == i) continue;
      coef /= alpha[i] - alpha[j];
      d1.push_back(1.0 + alpha[i] - alpha[j]);
      d2.push_back(1.0 + alpha[j] - alpha[i]);
    }
    cplx F1 = sf::hyper_pfq({1.0 + alpha[i] - rho, 1.0 + alpha[i] + rh, 1.0 + alpha[i],
                             1.0 + alpha[i] - s}, d1, -uu);
    cplx F2 = sf::hyper_pfq({1.0 + rho - alpha[i], 1.0 - rh - alpha[i], -alpha[i],
                             s - alpha[i]}, d2, uu);
    cplx term = coef * F1 * F2;
    sum += term;
    mx = std::max(mx, std::abs(term));
  }
  return std::abs(sum) / (1.0 + mx);
}

}  // namespace crosscheck

}  // namespace levyfun::ef
