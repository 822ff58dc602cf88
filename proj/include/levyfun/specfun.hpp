#pragma once

// Complex special functions: principal-branch log-gamma (Lanczos), gamma
// ratios, Pochhammer symbols, generalized hypergeometric series pFq and the
// regularized pPhi_q, and the Meijer G-function (hypergeometric series
// expansion and Mellin-Barnes contour quadrature).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "common.hpp"
#include "double_double.hpp"
#include "quadrature.hpp"

namespace levyfun::sf {

// x^e for x > 0.
inline cplx cpow(double x, cplx e) { return std::exp(e * std::log(x)); }

// ---------------------------------------------------------------------------
// log Gamma, principal branch on the cut plane.
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double lanczos_g = 4.7421875;  // 607/128
inline constexpr double lanczos_c[15] = {
    0.99999999999999709182,     57.156235665862923517,
    -59.597960355475491248,     14.136097974741747174,
    -0.49191381609762019978,    3.3994649984811888699e-5,
    4.6523628927048575665e-5,   -9.8374475304879564677e-5,
    1.5808870322491248884e-4,   -2.1026444172410488319e-4,
    2.1743961811521264320e-4,   -1.6431810653676389022e-4,
    8.4418223983852743293e-5,   -2.6190838401581408670e-5,
    3.6899182659531622704e-6};
inline constexpr double half_log_two_pi = 0.91893853320467274178032973640562;

inline cplx lanczos_right(cplx z) {  // requires Re z >= 0.5
  cplx s = lanczos_c[0];
  for (int k = 1; k < 15; ++k) s += lanczos_c[k] / (z - 1.0 + double(k));
  cplx t = z + (lanczos_g - 0.5);
  return half_log_two_pi + std::log(s) + (z - 0.5) * std::log(t) - t;
}

}  // namespace detail

inline cplx log_gamma(cplx z) {
  if (near_nonpositive_integer(z, 1e-13))
    throw domain_error("specfun.log_gamma", "argument at a gamma pole");
  if (z.real() >= 0.5) return detail::lanczos_right(z);
  // Downward recursion keeps the principal branch: each step uses the
  // principal Log of a point in the cut plane.
  int m = (int)std::ceil(0.5 - z.real());
  cplx acc = 0.0;
  for (int j = 0; j < m; ++j) acc += std::log(z + double(j));
  return detail::lanczos_right(z + double(m)) - acc;
}

// Strict product/quotient of gammas; errors on any pole.
inline cplx gamma_ratio(const std::vector<cplx>& num, const std::vector<cplx>& den) {
  cplx acc = 0.0;
  for (size_t i = 0; i < num.size(); ++i) {
    if (near_nonpositive_integer(num[i], 1e-13))
      throw domain_error("specfun.gamma_ratio",
                         "numerator argument " + std::to_string(i) + " at a gamma pole");
    acc += log_gamma(num[i]);
  }
  for (size_t i = 0; i < den.size(); ++i) {
    if (near_nonpositive_integer(den[i], 1e-13))
      throw domain_error("specfun.gamma_ratio",
                         "denominator argument " + std::to_string(i) + " at a gamma pole");
    acc -= log_gamma(den[i]);
  }
  return std::exp(acc);
}

// Lenient gamma quotient for series coefficients: a denominator at a pole is a
// reciprocal-gamma zero (coefficient vanishes); a numerator within 1e-8 of a
// pole signals an integer-degenerate parameter configuration that a caller
// holding the rate q may perturb away.
struct gamma_quotient {
  std::vector<cplx> num, den;
};

inline cplx eval_gamma_quotient(const gamma_quotient& q, const char* where) {
  for (cplx d : q.den)
    if (near_nonpositive_integer(d, 1e-13)) {
      for (cplx nmr : q.num)  // 0/0 would be an unresolved limit
        if (near_nonpositive_integer(nmr, 1e-13))
          throw assumption_error(where, "indeterminate gamma quotient (pole over pole)");
      return 0.0;
    }
  cplx acc = 0.0;
  for (cplx nmr : q.num) {
    if (integer_distance(nmr) < 1e-8 && std::round(nmr.real()) <= 0.0)
      throw assumption_error(where,
          "gamma argument within 1e-8 of a nonpositive integer; parameters nearly degenerate");
    acc += log_gamma(nmr);
  }
  for (cplx d : q.den) acc -= log_gamma(d);
  return std::exp(acc);
}

// (a)_k
inline cplx pochhammer(cplx a, long k) {
  if (k < 0) throw domain_error("specfun.pochhammer", "negative order");
  if (k == 0) return 1.0;
  if (k <= 64) {
    cplx p = 1.0;
    for (long j = 0; j < k; ++j) p *= a + double(j);
    return p;
  }
  if (near_nonpositive_integer(a, 1e-13)) {
    long m = (long)(-std::round(a.real()));
    if (k > m) return 0.0;  // the factor a+m = 0 was passed
    double lg = std::lgamma(double(m) + 1.0) - std::lgamma(double(m - k) + 1.0);
    return ((k % 2) ? -1.0 : 1.0) * std::exp(lg);
  }
  return std::exp(log_gamma(a + double(k)) - log_gamma(a));
}

// ---------------------------------------------------------------------------
// pFq and the regularized pPhi_q.
//
// Summation ladder: compensated double with term-ratio diagnostics; if the
// largest term exceeds 1e12 x |sum| the series is recomputed in double-double
// (error-free term recurrence); past 1e24 the cancellation is hopeless and we
// raise instead of returning noise.
// ---------------------------------------------------------------------------

struct pfq_diag {
  double max_term_ratio = 0.0;
  int terms = 0;
  bool escalated = false;
};

namespace detail {

using levyfun::detail::two_sum;

struct neumaier {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double t = s + x;
    c += (std::fabs(s) >= std::fabs(x)) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double get() const { return s + c; }
};

constexpr int pfq_max_terms = 100000;

struct pfq_run {
  cplx value;
  double max_ratio;
  int terms;
};

inline pfq_run pfq_double(const std::vector<cplx>& a, const std::vector<cplx>& b,
                          cplx z, const char* where) {
  neumaier sre, sim;
  sre.add(1.0);
  cplx term = 1.0;
  double maxt = 1.0;
  int small_run = 0, k = 0;
  for (; k < pfq_max_terms; ++k) {
    cplx f = z / double(k + 1);
    for (cplx ai : a) f *= ai + double(k);
    for (cplx bj : b) f /= bj + double(k);
    term *= f;
    if (term == 0.0) break;  // a numerator parameter terminated the series
    sre.add(term.real());
    sim.add(term.imag());
    double at = std::abs(term);
    maxt = std::max(maxt, at);
    double as = std::hypot(sre.get(), sim.get());
    if (at <= 0x1p-53 * as) {
      if (++small_run >= 8) break;
    } else {
      small_run = 0;
    }
  }
  if (k >= pfq_max_terms)
    throw convergence_error(where, "hypergeometric series exceeded 100000 terms");
  cplx val(sre.get(), sim.get());
  double av = std::abs(val);
  return {val, av > 0.0 ? maxt / av : std::numeric_limits<double>::infinity(), k + 1};
}

inline pfq_run pfq_ddpass(const std::vector<cplx>& a, const std::vector<cplx>& b,
                          cplx z, const char* where) {
  cdd sum(1.0, 0.0), term(1.0, 0.0);
  double maxt = 1.0;
  int small_run = 0, k = 0;
  for (; k < pfq_max_terms; ++k) {
    cdd f(z);
    f /= cdd(double(k + 1), 0.0);
    for (cplx ai : a) f *= cdd(two_sum(ai.real(), double(k)), dd(ai.imag()));
    for (cplx bj : b) f /= cdd(two_sum(bj.real(), double(k)), dd(bj.imag()));
    term *= f;
    double at = abs(term);
    if (at == 0.0) break;
    sum += term;
    maxt = std::max(maxt, at);
    double as = abs(sum);
    if (at <= 0x1p-105 * as) {
      if (++small_run >= 8) break;
    } else {
      small_run = 0;
    }
  }
  if (k >= pfq_max_terms)
    throw convergence_error(where, "hypergeometric series exceeded 100000 terms");
  cplx val = sum.to_cplx();
  double av = std::abs(val);
  return {val, av > 0.0 ? maxt / av : std::numeric_limits<double>::infinity(), k + 1};
}

}  // namespace detail

inline cplx hyper_pfq(const std::vector<cplx>& a, const std::vector<cplx>& b, cplx z,
                      pfq_diag* diag = nullptr) {
  const char* where = "specfun.hyper_pfq";
  if (a.size() > b.size())
    throw domain_error(where, "p > q is outside the supported (entire) family");
  for (size_t j = 0; j < b.size(); ++j)
    if (near_nonpositive_integer(b[j], 1e-12))
      throw domain_error(where, "denominator parameter " + std::to_string(j) +
                                    " at a pole; use hyper_pfq_regularized");
  if (z == 0.0) {
    if (diag) *diag = {1.0, 1, false};
    return 1.0;
  }
  auto r1 = detail::pfq_double(a, b, z, where);
  if (r1.max_ratio <= 1e12) {
    if (diag) *diag = {r1.max_ratio, r1.terms, false};
    return r1.value;
  }
  auto r2 = detail::pfq_ddpass(a, b, z, where);
  if (r2.max_ratio > 1e24)
    throw cancellation_error(where, "series cancellation beyond double-double range");
  if (diag) *diag = {r2.max_ratio, r2.terms, true};
  return r2.value;
}

// pPhi_q(a; b; z) = [prod Gamma(a_i+k) / prod Gamma(b_j+k)] z^k / k! summed over
// k, i.e. Gamma[a;b] * pFq with denominator poles handled by their limits.
inline cplx hyper_pfq_regularized(const std::vector<cplx>& a, const std::vector<cplx>& b,
                                  cplx z, pfq_diag* diag = nullptr) {
  const char* where = "specfun.hyper_pfq_regularized";
  if (a.size() > b.size())
    throw domain_error(where, "p > q is outside the supported (entire) family");
  int k0 = 0;
  for (cplx bj : b)
    if (near_nonpositive_integer(bj, 1e-12))
      k0 = std::max(k0, 1 + (int)(-std::round(bj.real())));
  for (cplx ai : a)
    if (integer_distance(ai) < 1e-8 && std::round(ai.real()) <= 0.0 &&
        -std::round(ai.real()) >= double(k0))
      throw assumption_error(where,
          "numerator parameter within 1e-8 of a gamma pole not cancelled by a "
          "denominator zero");
  // Leading term at k0.
  cplx lacc = 0.0;
  for (cplx ai : a) lacc += log_gamma(ai + double(k0));
  for (cplx bj : b) lacc -= log_gamma(bj + double(k0));
  cplx t0 = std::exp(lacc - std::lgamma(double(k0) + 1.0));
  for (int j = 0; j < k0; ++j) t0 *= z;
  if (t0 == 0.0 || z == 0.0) {
    if (diag) *diag = {1.0, 1, false};
    return t0;
  }
  // Shifted parameters reduce to a plain pFq recurrence starting from t0:
  // the tail is sum_j prod(a+k0)_j / [prod(b+k0)_j (k0+1)_j] z^j, so the
  // factorial becomes the extra denominator (k0+1)_j and a numerator (1)_j
  // cancels the recurrence's own 1/j!.
  std::vector<cplx> as(a), bs(b);
  for (cplx& v : as) v += double(k0);
  for (cplx& v : bs) v += double(k0);
  as.push_back(1.0);
  bs.push_back(double(k0 + 1));
  struct runner {
    static detail::pfq_run go(const std::vector<cplx>& as, const std::vector<cplx>& bs,
                              cplx z, const char* where, bool use_dd) {
      return use_dd ? detail::pfq_ddpass(as, bs, z, where)
                    : detail::pfq_double(as, bs, z, where);
    }
  };
  auto r1 = runner::go(as, bs, z, where, false);
  cplx val;
  pfq_diag d{};
  if (r1.max_ratio <= 1e12) {
    val = r1.value;
    d = {r1.max_ratio, r1.terms, false};
  } else {
    auto r2 = runner::go(as, bs, z, where, true);
    if (r2.max_ratio > 1e24)
      throw cancellation_error(where, "series cancellation beyond double-double range");
    val = r2.value;
    d = {r2.max_ratio, r2.terms, true};
  }
  if (diag) *diag = d;
  return t0 * val;
}

// ---------------------------------------------------------------------------
// Meijer G.
// ---------------------------------------------------------------------------

struct GSpec {
  int m = 0, n = 0;
  std::vector<cplx> a, b;

  int p() const { return (int)a.size(); }
  int q() const { return (int)b.size(); }
};

inline void validate_gspec(const GSpec& g, const char* where) {
  if (g.m < 0 || g.m > g.q() || g.n < 0 || g.n > g.p())
    throw domain_error(where, "order indices outside 0<=n<=p, 0<=m<=q");
}

// amax over a_1..a_n (-inf if n = 0); bmin over b_1..b_m (+inf if m = 0).
inline double a_bar(const GSpec& g) {
  double v = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.n; ++j) v = std::max(v, g.a[j].real());
  return v;
}
inline double b_low(const GSpec& g) {
  double v = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.m; ++j) v = std::min(v, g.b[j].real());
  return v;
}

inline bool condition_A(const GSpec& g) { return a_bar(g) - 1.0 < b_low(g); }
inline bool condition_B(const GSpec& g) { return g.p() + g.q() < 2 * (g.m + g.n); }

// Parameter shift (x^c G(a; b | x) absorbs c into all parameters) and the
// argument inversion swapping the two index groups.
inline GSpec shift_gspec(GSpec g, cplx c) {
  for (cplx& v : g.a) v += c;
  for (cplx& v : g.b) v += c;
  return g;
}
inline GSpec invert_gspec(const GSpec& g) {
  GSpec h;
  h.m = g.n;
  h.n = g.m;
  h.a.resize(g.q());
  h.b.resize(g.p());
  for (int j = 0; j < g.q(); ++j) h.a[j] = 1.0 - g.b[j];
  for (int j = 0; j < g.p(); ++j) h.b[j] = 1.0 - g.a[j];
  return h;
}

// Series expansion over the poles of Gamma(b_k + s), k = 1..m.  Requires
// p < q and pairwise non-integer differences among b_1..b_m.
inline cplx meijer_g(const GSpec& g, double x) {
  const char* where = "specfun.meijer_g";
  validate_gspec(g, where);
  if (!(x > 0.0)) throw domain_error(where, "argument must be positive");
  if (g.p() >= g.q())
    throw domain_error(where, "series expansion requires p < q; use the contour");
  for (int j = 0; j < g.m; ++j)
    for (int k = j + 1; k < g.m; ++k)
      if (integer_distance(g.b[j] - g.b[k]) < 1e-8)
        throw assumption_error(where, "integer-spaced b parameters in the series group");
  int par = g.p() - g.m - g.n;
  cplx zarg = (((par % 2) + 2) % 2 == 0) ? cplx(x) : cplx(-x);
  detail::neumaier sre, sim;
  double maxt = 0.0;
  for (int k = 0; k < g.m; ++k) {
    gamma_quotient qt;
    for (int j = 0; j < g.m; ++j)
      if (j != k) qt.num.push_back(g.b[j] - g.b[k]);
    for (int j = 0; j < g.n; ++j) qt.num.push_back(1.0 + g.b[k] - g.a[j]);
    for (int j = g.m; j < g.q(); ++j) qt.den.push_back(1.0 + g.b[k] - g.b[j]);
    for (int j = g.n; j < g.p(); ++j) qt.den.push_back(g.a[j] - g.b[k]);
    cplx coeff = eval_gamma_quotient(qt, where);
    if (coeff == 0.0) continue;
    std::vector<cplx> fa, fb;
    for (int j = 0; j < g.p(); ++j) fa.push_back(1.0 + g.b[k] - g.a[j]);
    for (int j = 0; j < g.q(); ++j)
      if (j != k) fb.push_back(1.0 + g.b[k] - g.b[j]);
    cplx F;
    try {
      F = hyper_pfq(fa, fb, zarg);
    } catch (const domain_error& e) {
      // A pole in 1 + b_k - b_j for j > m: the expansion degenerates exactly
      // like integer spacing inside the series group.
      throw assumption_error(where, std::string("degenerate series parameters: ") + e.what());
    }
    cplx term = coeff * cpow(x, g.b[k]) * F;
    sre.add(term.real());
    sim.add(term.imag());
    maxt = std::max(maxt, std::abs(term));
  }
  cplx total(sre.get(), sim.get());
  double av = std::abs(total);
  if (maxt > 0.0 && (av == 0.0 || maxt / av > 1e12))
    throw cancellation_error(where, "cross-term cancellation in the series expansion");
  return total;
}

// Mellin-Barnes integrand on the vertical line, s = lambda + i t.
inline cplx meijer_integrand(const GSpec& g, cplx s, double lnx) {
  const char* where = "specfun.meijer_g_contour";
  cplx acc = -s * lnx;
  for (int j = 0; j < g.m; ++j) {
    cplx arg = g.b[j] + s;
    if (near_nonpositive_integer(arg, 1e-13))
      throw domain_error(where, "contour passes through a gamma pole");
    acc += log_gamma(arg);
  }
  for (int j = 0; j < g.n; ++j) {
    cplx arg = 1.0 - g.a[j] - s;
    if (near_nonpositive_integer(arg, 1e-13))
      throw domain_error(where, "contour passes through a gamma pole");
    acc += log_gamma(arg);
  }
  for (int j = g.m; j < g.q(); ++j) {
    cplx arg = 1.0 - g.b[j] - s;
    if (near_nonpositive_integer(arg, 1e-13)) return 0.0;  // reciprocal-gamma zero
    acc -= log_gamma(arg);
  }
  for (int j = g.n; j < g.p(); ++j) {
    cplx arg = g.a[j] + s;
    if (near_nonpositive_integer(arg, 1e-13)) return 0.0;
    acc -= log_gamma(arg);
  }
  return std::exp(acc);
}

inline cplx meijer_g_contour(const GSpec& g, double x,
                             double lambda = std::numeric_limits<double>::quiet_NaN()) {
  const char* where = "specfun.meijer_g_contour";
  validate_gspec(g, where);
  if (!(x > 0.0)) throw domain_error(where, "argument must be positive");
  if (!condition_A(g))
    throw domain_error(where, "condition A fails: no separating vertical line");
  if (!condition_B(g))
    throw domain_error(where, "condition B fails: integrand does not decay");
  double lo = -b_low(g), hi = 1.0 - a_bar(g);  // admissible open interval
  if (std::isnan(lambda)) {
    if (std::isinf(lo) && std::isinf(hi))
      lambda = 0.0;
    else if (std::isinf(lo))
      lambda = hi - 1.0;
    else if (std::isinf(hi))
      lambda = lo + 1.0;
    else
      lambda = 0.5 * (lo + hi);
  }
  if (!(lambda > lo && lambda < hi))
    throw domain_error(where, "contour abscissa outside the admissible interval");
  const double lnx = std::log(x);
  auto f = [&](double t) { return meijer_integrand(g, cplx(lambda, t), lnx); };
  double peak = std::abs(f(0.0));
  const double chunk = 4.0;
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
      if (t0 > 2048.0)
        throw convergence_error(where, "contour tail did not decay by t = 2048");
    }
  }
  return total / (2.0 * pi);
}

}  // namespace levyfun::sf
