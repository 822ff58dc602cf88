#pragma once

// Dense linear algebra needed by the exponential-sum fitter: cyclic Jacobi for
// real symmetric eigenproblems, balanced shifted QR for complex Hessenberg
// eigenvalues (companion matrices), and Householder least squares.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "common.hpp"

namespace levyfun::la {

// Row-major dense matrix helpers.
inline double& at(std::vector<double>& m, int n, int i, int j) { return m[i * n + j]; }
inline cplx& at(std::vector<cplx>& m, int n, int i, int j) { return m[i * n + j]; }

struct sym_eig {
  std::vector<double> values;   // sorted by |value| descending
  std::vector<double> vectors;  // row-major, row k = eigenvector for values[k]
};

// Cyclic Jacobi. A is n x n symmetric (row-major), destroyed.
inline sym_eig jacobi_symmetric(std::vector<double> a, int n) {
  std::vector<double> v(n * n, 0.0);
  for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto off = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
    return std::sqrt(2.0 * s);
  };
  double fro = 0.0;
  for (double x : a) fro += x * x;
  fro = std::sqrt(fro);
  const double tol = 1e-15 * std::max(fro, 1e-300);
  for (int sweep = 0; sweep < 60 && off() > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a[p * n + q];
        if (std::fabs(apq) <= 1e-300) continue;
        double app = a[p * n + p], aqq = a[q * n + q];
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v[p * n + k], vkq = v[q * n + k];
          v[p * n + k] = c * vkp - s * vkq;
          v[q * n + k] = s * vkp + c * vkq;
        }
      }
    }
  }
  sym_eig out;
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = a[i * n + i];
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return std::fabs(out.values[i]) > std::fabs(out.values[j]);
  });
  sym_eig sorted;
  sorted.values.resize(n);
  sorted.vectors.resize(n * n);
  for (int k = 0; k < n; ++k) {
    sorted.values[k] = out.values[order[k]];
    for (int j = 0; j < n; ++j) sorted.vectors[k * n + j] = v[order[k] * n + j];
  }
  return sorted;
}

// Parlett-Reinsch balancing (powers of 2), preserves eigenvalues and the
// Hessenberg profile under the diagonal similarity.
inline void balance(std::vector<cplx>& a, int n) {
  const double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a[j * n + i]);
        r += std::abs(a[i * n + j]);
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix, f = 1.0, s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        for (int j = 0; j < n; ++j) a[i * n + j] /= f;
        for (int j = 0; j < n; ++j) a[j * n + i] *= f;
      }
    }
  }
}

// Eigenvalues of a complex upper-Hessenberg matrix by explicit single-shift
// QR with Givens rotations.  Only the active block is touched (eigenvalues
// only, no Schur vectors).  Destroys a.
inline std::vector<cplx> hessenberg_eigenvalues(std::vector<cplx> a, int n) {
  std::vector<cplx> eig(n);
  int hi = n - 1;
  int iters_here = 0;
  while (hi >= 0) {
    if (hi == 0) {
      eig[0] = a[0];
      break;
    }
    // Deflate converged subdiagonals from the bottom.
    int lo = hi;
    while (lo > 0) {
      double sub = std::abs(a[lo * n + lo - 1]);
      double scale = std::abs(a[(lo - 1) * n + lo - 1]) + std::abs(a[lo * n + lo]);
      if (sub <= 1e-16 * std::max(scale, 1e-300)) {
        a[lo * n + lo - 1] = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      eig[hi] = a[hi * n + hi];
      --hi;
      iters_here = 0;
      continue;
    }
    if (++iters_here > 80)
      throw convergence_error("linalg.hessenberg_eigenvalues", "QR iteration stalled");
    // Wilkinson shift: the trailing-2x2 eigenvalue closest to the corner.
    cplx h00 = a[(hi - 1) * n + hi - 1], h01 = a[(hi - 1) * n + hi];
    cplx h10 = a[hi * n + hi - 1], h11 = a[hi * n + hi];
    cplx tr = h00 + h11, det = h00 * h11 - h01 * h10;
    cplx disc = std::sqrt(tr * tr - 4.0 * det);
    cplx mu1 = 0.5 * (tr + disc), mu2 = 0.5 * (tr - disc);
    cplx shift = (std::abs(mu1 - h11) < std::abs(mu2 - h11)) ? mu1 : mu2;
    if (iters_here % 16 == 0)  // exceptional shift to break rare cycles
      shift = h11 + 0.75 * std::abs(h10);
    for (int k = lo; k <= hi; ++k) a[k * n + k] -= shift;
    // Factor: R = G_{hi-1}^H ... G_lo^H (H - shift I), rotation k zeroing (k+1,k).
    std::vector<cplx> cs(hi - lo), sn(hi - lo);
    for (int k = lo; k < hi; ++k) {
      cplx x = a[k * n + k], y = a[(k + 1) * n + k];
      double r = std::hypot(std::abs(x), std::abs(y));
      cplx c = 1.0, s = 0.0;
      if (r > 0.0) {
        c = x / r;
        s = y / r;
      }
      cs[k - lo] = c;
      sn[k - lo] = s;
      for (int j = k; j <= hi; ++j) {
        cplx t1 = a[k * n + j], t2 = a[(k + 1) * n + j];
        a[k * n + j] = std::conj(c) * t1 + std::conj(s) * t2;
        a[(k + 1) * n + j] = -s * t1 + c * t2;
      }
    }
    // Form RQ: right-multiply by G_lo ... G_{hi-1}; column pair (k, k+1):
    //   col_k'   =  c * col_k + s * col_{k+1}
    //   col_k+1' = -conj(s) * col_k + conj(c) * col_{k+1}
    for (int k = lo; k < hi; ++k) {
      cplx c = cs[k - lo], s = sn[k - lo];
      int imax = std::min(k + 1, hi);
      for (int i = lo; i <= imax; ++i) {
        cplx t1 = a[i * n + k], t2 = a[i * n + k + 1];
        a[i * n + k] = c * t1 + s * t2;
        a[i * n + k + 1] = -std::conj(s) * t1 + std::conj(c) * t2;
      }
    }
    for (int k = lo; k <= hi; ++k) a[k * n + k] += shift;
  }
  return eig;
}

// Least squares min |Ax - b| for complex tall A (row-major, rows >= cols) by
// Householder QR.  Returns the coefficient vector.
inline std::vector<cplx> lstsq(std::vector<cplx> a, int rows, int cols,
                               std::vector<cplx> b) {
  if (rows < cols) throw domain_error("linalg.lstsq", "system is underdetermined");
  std::vector<cplx> rdiag(cols);
  for (int k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (int i = k; i < rows; ++i) norm += std::norm(a[i * cols + k]);
    norm = std::sqrt(norm);
    if (norm <= 1e-300) throw domain_error("linalg.lstsq", "rank-deficient design matrix");
    cplx akk = a[k * cols + k];
    cplx alpha = (std::abs(akk) > 0.0) ? -(akk / std::abs(akk)) * norm : cplx(-norm, 0.0);
    rdiag[k] = alpha;
    a[k * cols + k] -= alpha;  // column k rows k.. now holds the Householder vector
    double v2 = 0.0;
    for (int i = k; i < rows; ++i) v2 += std::norm(a[i * cols + k]);
    if (v2 <= 1e-300) continue;
    for (int j = k + 1; j < cols; ++j) {
      cplx dot = 0.0;
      for (int i = k; i < rows; ++i) dot += std::conj(a[i * cols + k]) * a[i * cols + j];
      cplx f = 2.0 * dot / v2;
      for (int i = k; i < rows; ++i) a[i * cols + j] -= f * a[i * cols + k];
    }
    cplx dot = 0.0;
    for (int i = k; i < rows; ++i) dot += std::conj(a[i * cols + k]) * b[i];
    cplx f = 2.0 * dot / v2;
    for (int i = k; i < rows; ++i) b[i] -= f * a[i * cols + k];
  }
  std::vector<cplx> x(cols);
  for (int k = cols - 1; k >= 0; --k) {
    cplx s = b[k];
    for (int j = k + 1; j < cols; ++j) s -= a[k * cols + j] * x[j];
    x[k] = s / rdiag[k];
  }
  return x;
}

}  // namespace levyfun::la
