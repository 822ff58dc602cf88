#pragma once

// Gompertz-Makeham lifetime model (hazard A + B c^{x+t} at attained age x)
// and its approximation by a complex exponential sum
//   f(t) ~ sum_i w_i exp(-s_i t),   Re(s_i) > 0,
// fitted with the Hankel/con-eigenvalue (Prony-type) method: decimate the
// sample grid, take the eigenvector of the (M+1)-th largest |eigenvalue| of
// the sample Hankel matrix, read the nodes off the unit-disk roots of its
// polynomial, and solve for weights in least squares over the full grid.
// For real data the con-eigen problem is the ordinary symmetric one.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "common.hpp"
#include "linalg.hpp"

namespace levyfun::mortality {

struct GompertzMakeham {
  double age = 0.0;  // attained age x
  double A = 0.0;    // accident rate
  double B = 0.0;    // aging coefficient
  double c = 0.0;    // aging base

  void validate() const {
    if (!(A >= 0.0)) throw domain_error("mortality.params", "A must be nonnegative");
    if (!(B > 0.0)) throw domain_error("mortality.params", "B must be positive");
    if (!(c > 1.0)) throw domain_error("mortality.params", "c must exceed 1");
  }
};

// S(t) = exp{-A t - B c^x (c^t - 1)/ln c}
inline double survival(const GompertzMakeham& gm, double t) {
  if (!(t >= 0.0)) throw domain_error("mortality.survival", "t must be nonnegative");
  const double lnc = std::log(gm.c);
  return std::exp(-gm.A * t - gm.B * std::pow(gm.c, gm.age) * std::expm1(t * lnc) / lnc);
}

// f(t) = (A + B c^{x+t}) S(t): hazard times survival
inline double density(const GompertzMakeham& gm, double t) {
  if (!(t >= 0.0)) throw domain_error("mortality.density", "t must be nonnegative");
  return (gm.A + gm.B * std::pow(gm.c, gm.age + t)) * survival(gm, t);
}

struct ExpSumTerm {
  cplx s;  // node, Re(s) > 0
  cplx w;  // weight
};

struct ExpSum {
  std::vector<ExpSumTerm> terms;
  double horizon = 0.0;
  double sup_error = 0.0;

  cplx eval(double t) const {
    cplx acc = 0.0;
    for (const auto& term : terms) acc += term.w * std::exp(-term.s * t);
    return acc;
  }
};

namespace detail {

// Pair complex nodes with their conjugates and average; force lone nearly-real
// nodes onto the axis.  Nodes whose partner is missing (z on the negative real
// axis has none) are dropped with a warning.
inline std::vector<cplx> pair_conjugates(std::vector<cplx> s, const char* where) {
  std::vector<cplx> out;
  std::vector<bool> used(s.size(), false);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    if (std::abs(s[i].imag()) <= 1e-9 * std::abs(s[i])) {
      out.push_back(cplx(s[i].real(), 0.0));
      continue;
    }
    std::size_t best = s.size();
    double bestd = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (used[j]) continue;
      double d = std::abs(std::conj(s[j]) - s[i]);
      if (d < bestd) {
        bestd = d;
        best = j;
      }
    }
    if (best == s.size() || bestd > 1e-6 * (1.0 + std::abs(s[i]))) {
      warn(std::string(where) + ": dropping a node without a conjugate partner");
      continue;
    }
    used[best] = true;
    cplx avg = 0.5 * (s[i] + std::conj(s[best]));
    out.push_back(avg);
    out.push_back(std::conj(avg));
  }
  return out;
}

}  // namespace detail

// Fit f(t) ~ sum w_i exp(-s_i t) on a uniform grid of `samples` points over
// [0, horizon].  M selects the con-eigenvalue index; the returned sum has at
// most M terms (fewer, with a warning, when unit-disk filtering removes some).
template <class F>
inline ExpSum fit_exponential_sum_of(F&& f, int M, double horizon, int samples) {
  const char* where = "mortality.fit_exponential_sum";
  if (M < 1) throw domain_error(where, "M must be at least 1");
  if (!(horizon > 0.0)) throw domain_error(where, "horizon must be positive");

  const int N = samples - 1;
  if (N < 3) throw domain_error(where, "need at least 4 samples");
  const double h = horizon / N;
  std::vector<double> fs(samples);
  for (int k = 0; k < samples; ++k) fs[k] = f(k * h);

  // Hankel sequence: the decimated subsequence with stride sigma, sized so the
  // eigen solve stays modest while the samples still span the horizon.
  const int stride = std::max(1, N / 512);
  const int n = std::min(N / (2 * stride), samples / 2 - 1);  // Hankel is (n+1) x (n+1)
  if (M > n) throw domain_error(where, "M exceeds the Hankel rank bound; use more samples");

  std::vector<double> H((n + 1) * (n + 1));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) H[i * (n + 1) + j] = fs[(i + j) * stride];
  la::sym_eig eig = la::jacobi_symmetric(std::move(H), n + 1);

  // Polynomial of the M-th con-eigenvector (0-based; its |eigenvalue| bounds
  // the achievable sample error).  Trim negligible leading coefficients before
  // forming the companion matrix.
  const double* u = &eig.vectors[static_cast<std::size_t>(M) * (n + 1)];
  double umax = 0.0;
  for (int j = 0; j <= n; ++j) umax = std::max(umax, std::fabs(u[j]));
  int deg = n;
  while (deg > 0 && std::fabs(u[deg]) <= 1e-14 * umax) --deg;
  if (deg < 1) throw domain_error(where, "degenerate con-eigenvector polynomial");

  std::vector<cplx> comp(static_cast<std::size_t>(deg) * deg, 0.0);
  for (int j = 0; j < deg; ++j) comp[j] = -u[deg - 1 - j] / u[deg];
  for (int i = 1; i < deg; ++i) comp[i * deg + i - 1] = 1.0;
  la::balance(comp, deg);
  std::vector<cplx> z = la::hessenberg_eigenvalues(std::move(comp), deg);

  // Keep decaying modes |z| < 1 (equivalently Re(s) > 0) and map to nodes.
  const double dt = stride * h;
  std::vector<cplx> nodes;
  for (cplx zi : z)
    if (std::abs(zi) < 1.0) nodes.push_back(-std::log(zi) / dt);
  nodes = detail::pair_conjugates(std::move(nodes), where);
  std::erase_if(nodes, [](cplx s) { return !(s.real() > 0.0); });
  if (nodes.empty()) throw domain_error(where, "no decaying modes survived filtering");
  if (static_cast<int>(nodes.size()) < M)
    warn(std::string(where) + ": fewer than M nodes survived; returning the reduced sum");

  // Weights: least squares over the full fitting grid.
  const int m = static_cast<int>(nodes.size());
  std::vector<cplx> V(static_cast<std::size_t>(samples) * m);
  std::vector<cplx> b(samples);
  for (int k = 0; k < samples; ++k) {
    b[k] = fs[k];
    for (int j = 0; j < m; ++j) V[static_cast<std::size_t>(k) * m + j] = std::exp(-nodes[j] * (k * h));
  }
  std::vector<cplx> w = la::lstsq(std::move(V), samples, m, std::move(b));

  // Conjugate symmetry of the weights, mirroring the node pairing.
  for (int i = 0; i < m; ++i) {
    if (nodes[i].imag() == 0.0) {
      w[i] = w[i].real();
    } else if (i + 1 < m && nodes[i + 1] == std::conj(nodes[i])) {
      cplx avg = 0.5 * (w[i] + std::conj(w[i + 1]));
      w[i] = avg;
      w[i + 1] = std::conj(avg);
      ++i;
    }
  }

  ExpSum out;
  out.horizon = horizon;
  for (int i = 0; i < m; ++i) out.terms.push_back({nodes[i], w[i]});

  // Exactly-representable inputs leave spurious near-zero-weight modes from
  // the (non-unique) null-space polynomial; drop them.
  double wmax = 0.0;
  for (const auto& term : out.terms) wmax = std::max(wmax, std::abs(term.w));
  std::erase_if(out.terms,
                [&](const ExpSumTerm& term) { return std::abs(term.w) <= 1e-12 * wmax; });

  double sup = 0.0;
  for (int k = 0; k < samples; ++k) sup = std::max(sup, std::abs(out.eval(k * h) - fs[k]));
  out.sup_error = sup;
  return out;
}

inline ExpSum fit_exponential_sum(const GompertzMakeham& gm, int M, double horizon = 100.0,
                                  int samples = 2048) {
  gm.validate();
  return fit_exponential_sum_of([&](double t) { return density(gm, t); }, M, horizon, samples);
}

}  // namespace levyfun::mortality
