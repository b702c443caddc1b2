#pragma once

// Smallest eigenvalue of the generalized symmetric problem A x = lambda B x
// with B positive definite: Cholesky reduction to a standard symmetric
// problem followed by cyclic Jacobi rotations.

#include <cmath>
#include <vector>

#include "ckn/errors.hpp"

namespace ckn {

struct SymmetricPencil {
  int n = 0;
  std::vector<double> a;  // row-major n x n
  std::vector<double> b;

  SymmetricPencil(int n_, std::vector<double> a_, std::vector<double> b_)
      : n(n_), a(std::move(a_)), b(std::move(b_)) {
    if (n < 1 || n > 64) throw InvalidParams("SymmetricPencil: order must lie in [1,64]");
    if ((int)a.size() != n * n || (int)b.size() != n * n)
      throw InvalidParams("SymmetricPencil: matrix size mismatch");
    double scale = 0.0;
    for (double x : a) scale = std::max(scale, std::abs(x));
    for (double x : b) scale = std::max(scale, std::abs(x));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (std::abs(a[i * n + j] - a[j * n + i]) > 1e-12 * scale ||
            std::abs(b[i * n + j] - b[j * n + i]) > 1e-12 * scale)
          throw InvalidParams("SymmetricPencil: matrices must be symmetric");
      }
  }
};

namespace detail {

// In-place lower Cholesky factor of b; throws on a nonpositive pivot.
inline std::vector<double> cholesky(const std::vector<double>& b, int n) {
  std::vector<double> l(n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = b[i * n + j];
      for (int k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s))
          throw NotPositiveDefinite("smallest_eigenvalue: B is not positive definite");
        l[i * n + i] = std::sqrt(s);
      } else {
        l[i * n + j] = s / l[j * n + j];
      }
    }
  }
  return l;
}

}  // namespace detail

inline double smallest_eigenvalue(const SymmetricPencil& pencil) {
  const int n = pencil.n;
  const std::vector<double> l = detail::cholesky(pencil.b, n);

  // M = L^{-1} A L^{-T}, formed by two triangular solves.
  std::vector<double> c(pencil.a);  // solve L C = A, column by column
  for (int col = 0; col < n; ++col)
    for (int i = 0; i < n; ++i) {
      double s = c[i * n + col];
      for (int k = 0; k < i; ++k) s -= l[i * n + k] * c[k * n + col];
      c[i * n + col] = s / l[i * n + i];
    }
  std::vector<double> m(n * n);  // solve L M^T = C^T, i.e. rows of M
  for (int row = 0; row < n; ++row)
    for (int i = 0; i < n; ++i) {
      double s = c[row * n + i];
      for (int k = 0; k < i; ++k) s -= l[i * n + k] * m[row * n + k];
      m[row * n + i] = s / l[i * n + i];
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (m[i * n + j] + m[j * n + i]);
      m[i * n + j] = m[j * n + i] = avg;
    }

  double norm = 0.0;
  for (double x : m) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) return 0.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += 2.0 * m[i * n + j] * m[i * n + j];
    if (std::sqrt(off) <= 1e-13 * norm) {
      double lo = m[0];
      for (int i = 1; i < n; ++i) lo = std::min(lo, m[i * n + i]);
      return lo;
    }
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = m[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (int k = 0; k < n; ++k) {
          const double mkp = m[k * n + p], mkq = m[k * n + q];
          m[k * n + p] = cs * mkp - sn * mkq;
          m[k * n + q] = sn * mkp + cs * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m[p * n + k], mqk = m[q * n + k];
          m[p * n + k] = cs * mpk - sn * mqk;
          m[q * n + k] = sn * mpk + cs * mqk;
        }
      }
  }
  throw NoConvergence("smallest_eigenvalue: Jacobi sweeps did not converge");
}

}  // namespace ckn
