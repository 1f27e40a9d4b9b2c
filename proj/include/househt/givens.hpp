#ifndef HOUSEHT_GIVENS_HPP
#define HOUSEHT_GIVENS_HPP

#include "report.hpp"

namespace househt {

/// Plane rotation [c -s; s c] with [c -s; s c] [a; b] = [r; 0].
struct GivensRotation {
  double c = 1.0;
  double s = 0.0;
  double r = 0.0;
};

inline GivensRotation givens(double a, double b) {
  if (b == 0.0) return {1.0, 0.0, a};
  const double r = std::hypot(a, b);
  return {a / r, -b / r, r};
}

namespace detail {

/// Rows x, y (stride inc, len entries) <- [c -s; s c] [x; y].
inline void rotate(double* x, double* y, Index len, Index inc, const GivensRotation& g) {
  for (Index t = 0; t < len; ++t) {
    const double xv = x[t * inc], yv = y[t * inc];
    x[t * inc] = g.c * xv - g.s * yv;
    y[t * inc] = g.s * xv + g.c * yv;
  }
}

} // namespace detail

/**
 * Classical rotation-based reduction: each column of A is reduced bottom-up,
 * every left rotation is followed by a right rotation restoring B.
 */
inline HtResult reduce_givens(ConstView A0, ConstView B0) {
  detail::require_pencil(A0, B0);
  const Index n = A0.rows();
  if (n < 3) return detail::trivial_result(A0, B0);

  HtResult res{DenseMatrix(A0), DenseMatrix(B0), DenseMatrix::identity(n), DenseMatrix::identity(n), {}};
  DenseMatrix &A = res.H, &B = res.T, &Q = res.Q, &Z = res.Z;
  const Index ld = n;
  std::uint64_t fl = 0;
  for (Index j = 0; j + 2 < n; ++j) {
    for (Index i = n - 1; i >= j + 2; --i) {
      // rows i-1, i annihilate A(i, j)
      GivensRotation g = givens(A(i - 1, j), A(i, j));
      if (g.s != 0.0) {
        A(i - 1, j) = g.r;
        A(i, j) = 0.0;
        detail::rotate(&A(i - 1, j + 1), &A(i, j + 1), n - j - 1, ld, g);
        detail::rotate(&B(i - 1, i - 1), &B(i, i - 1), n - i + 1, ld, g);
        // Q <- Q G^T acts on columns i-1, i
        GivensRotation gt{g.c, g.s, 0.0};
        detail::rotate(&Q(0, i - 1), &Q(0, i), n, 1, gt);
        fl += 6 * std::uint64_t(2 * n - j - i);
        fl += 6 * std::uint64_t(n);
      }
      // columns i-1, i annihilate B(i, i-1)
      GivensRotation h = givens(B(i, i), B(i, i - 1));
      if (h.s != 0.0) {
        B(i, i) = h.r;
        B(i, i - 1) = 0.0;
        detail::rotate(&B(0, i), &B(0, i - 1), i, 1, h);
        detail::rotate(&A(0, i), &A(0, i - 1), n, 1, h);
        detail::rotate(&Z(0, i), &Z(0, i - 1), n, 1, h);
        fl += 6 * std::uint64_t(i + 2 * n);
      }
    }
  }
  res.report.flops = fl;
  return res;
}

} // namespace househt

#endif
