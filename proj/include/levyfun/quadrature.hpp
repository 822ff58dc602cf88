#pragma once

// Adaptive Gauss-Kronrod 15(7) quadrature over finite segments, templated on
// the integrand's value type (double or cplx).  Error estimation follows the
// QUADPACK qk15 recipe (resasc-scaled sharpening of |K15 - G7|).

#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"

namespace levyfun {

namespace detail {

// Kronrod abscissae (positive half) and weights, Gauss-7 weights interleaved.
inline constexpr double gk_x[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double gk_wk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double vnorm(double v) { return std::fabs(v); }
inline double vnorm(cplx v) { return std::abs(v); }

}  // namespace detail

template <class T>
struct quad_result {
  T value{};
  double error = 0.0;
  long evals = 0;
  bool converged = true;
};

// Single GK15 panel on [a,b].
template <class F, class T = std::invoke_result_t<F, double>>
quad_result<T> gk15(F&& f, double a, double b) {
  using detail::gk_wg;
  using detail::gk_wk;
  using detail::gk_x;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * gk_x[i]);
    fv[14 - i] = f(c + h * gk_x[i]);
  }
  fv[7] = f(c);
  T kron{}, gauss{};
  double resabs = 0.0;
  for (int i = 0; i < 8; ++i) {
    T pair = (i == 7) ? fv[7] : fv[i] + fv[14 - i];
    kron += gk_wk[i] * pair;
    resabs += gk_wk[i] * (i == 7 ? detail::vnorm(fv[7])
                                 : detail::vnorm(fv[i]) + detail::vnorm(fv[14 - i]));
    // Gauss-7 nodes are the odd-index Kronrod abscissae plus the center (i==7).
    if (i % 2 == 1) gauss += gk_wg[i / 2] * pair;
  }
  quad_result<T> r;
  r.value = h * kron;
  // resasc: deviation from the mean, for the QUADPACK error sharpening.
  T mean = kron * 0.5;
  double resasc = 0.0;
  for (int i = 0; i < 8; ++i) {
    if (i == 7)
      resasc += gk_wk[7] * detail::vnorm(fv[7] - mean);
    else
      resasc += gk_wk[i] * (detail::vnorm(fv[i] - mean) + detail::vnorm(fv[14 - i] - mean));
  }
  resasc *= std::fabs(h);
  double err = detail::vnorm(h * (kron - gauss));
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  double round_off = 50.0 * std::numeric_limits<double>::epsilon() * resabs * std::fabs(h);
  r.error = std::max(err, round_off);
  r.evals = 15;
  return r;
}

// Adaptive subdivision until sum(err) <= max(abs_tol, rel_tol * |value|).
template <class F, class T = std::invoke_result_t<F, double>>
quad_result<T> integrate(F&& f, double a, double b, double abs_tol = 0.0,
                         double rel_tol = 1e-13, int max_panels = 4000) {
  struct seg {
    double a, b, err;
    T val;
  };
  std::vector<seg> segs;
  auto r0 = gk15(f, a, b);
  segs.push_back({a, b, r0.error, r0.value});
  long evals = r0.evals;
  for (;;) {
    T total{};
    double toterr = 0.0;
    size_t worst = 0;
    for (size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].val;
      toterr += segs[i].err;
      if (segs[i].err > segs[worst].err) worst = i;
    }
    double goal = std::max(abs_tol, rel_tol * detail::vnorm(total));
    if (toterr <= goal || (int)segs.size() >= max_panels) {
      quad_result<T> r{total, toterr, evals, toterr <= goal};
      return r;
    }
    seg s = segs[worst];
    double mid = 0.5 * (s.a + s.b);
    if (mid <= s.a || mid >= s.b) {  // interval exhausted at machine precision
      quad_result<T> r{total, toterr, evals, false};
      return r;
    }
    auto rl = gk15(f, s.a, mid);
    auto rr = gk15(f, mid, s.b);
    evals += rl.evals + rr.evals;
    segs[worst] = {s.a, mid, rl.error, rl.value};
    segs.push_back({mid, s.b, rr.error, rr.value});
  }
}

}  // namespace levyfun
