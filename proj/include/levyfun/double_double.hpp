#pragma once

// Double-double ("compensated") arithmetic: unevaluated sums hi + lo with
// |lo| <= ulp(hi)/2, giving ~31 significant digits.  Used as the escalation
// tier when a hypergeometric series cancels more than ~1e12 of its largest
// term.  Algorithms are the classical error-free transformations (Dekker,
// Knuth) with std::fma for the product remainder.

#include <cmath>
#include <complex>

#include "common.hpp"

namespace levyfun {

struct dd {
  double hi = 0.0, lo = 0.0;

  dd() = default;
  dd(double h) : hi(h), lo(0.0) {}
  dd(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi + lo; }
};

namespace detail {

inline dd two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline dd quick_two_sum(double a, double b) {  // requires |a| >= |b|
  double s = a + b;
  return {s, b - (s - a)};
}

inline dd two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

}  // namespace detail

inline dd operator+(dd a, dd b) {
  dd s = detail::two_sum(a.hi, b.hi);
  dd t = detail::two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = detail::quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return detail::quick_two_sum(s.hi, s.lo);
}

inline dd operator-(dd a) { return {-a.hi, -a.lo}; }
inline dd operator-(dd a, dd b) { return a + (-b); }

inline dd operator*(dd a, dd b) {
  dd p = detail::two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return detail::quick_two_sum(p.hi, p.lo);
}

inline dd operator/(dd a, dd b) {
  double q1 = a.hi / b.hi;
  dd r = a - b * dd(q1);
  double q2 = r.hi / b.hi;
  r = r - b * dd(q2);
  double q3 = r.hi / b.hi;
  dd q = detail::quick_two_sum(q1, q2);
  return q + dd(q3);
}

inline dd& operator+=(dd& a, dd b) { return a = a + b; }
inline dd& operator-=(dd& a, dd b) { return a = a - b; }
inline dd& operator*=(dd& a, dd b) { return a = a * b; }
inline dd& operator/=(dd& a, dd b) { return a = a / b; }

inline double abs(dd a) { return std::fabs(a.hi + a.lo); }

// Complex double-double: enough surface for series recurrences.
struct cdd {
  dd re, im;

  cdd() = default;
  cdd(dd r, dd i) : re(r), im(i) {}
  cdd(double r, double i = 0.0) : re(r), im(i) {}
  cdd(cplx z) : re(z.real()), im(z.imag()) {}

  cplx to_cplx() const { return {double(re), double(im)}; }
};

inline cdd operator+(cdd a, cdd b) { return {a.re + b.re, a.im + b.im}; }
inline cdd operator-(cdd a, cdd b) { return {a.re - b.re, a.im - b.im}; }

inline cdd operator*(cdd a, cdd b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

inline cdd operator/(cdd a, cdd b) {
  dd denom = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / denom, (a.im * b.re - a.re * b.im) / denom};
}

inline cdd& operator+=(cdd& a, cdd b) { return a = a + b; }
inline cdd& operator*=(cdd& a, cdd b) { return a = a * b; }
inline cdd& operator/=(cdd& a, cdd b) { return a = a / b; }

inline double abs(cdd a) { return std::hypot(double(a.re), double(a.im)); }

}  // namespace levyfun
