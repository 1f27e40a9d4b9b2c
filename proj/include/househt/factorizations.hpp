#ifndef HOUSEHT_FACTORIZATIONS_HPP
#define HOUSEHT_FACTORIZATIONS_HPP

#include <string>

#include "reflectors.hpp"

namespace househt {

/// Orthogonal factor as a WY aggregate together with the triangular factor.
struct OrthoFactors {
  CompactWY Q;
  DenseMatrix F;
};

namespace detail {

inline Vector row_copy(ConstView M, Index i, Index j0, Index n) {
  Vector r(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) r[j] = M(i, j0 + j);
  return r;
}

inline Vector embed(const Vector& v, Index offset, Index m) {
  Vector full(static_cast<std::size_t>(m), 0.0);
  std::copy(v.begin(), v.end(), full.begin() + offset);
  return full;
}

} // namespace detail

/// M = Q*R, R upper triangular (m x n, m >= n).
inline OrthoFactors qr_wy(ConstView M, FlopCounter* flops = nullptr) {
  const Index m = M.rows(), n = M.cols();
  require(m >= n, "qr_wy: rows must be >= cols");
  OrthoFactors out{CompactWY(m, n), DenseMatrix(M)};
  DenseMatrix& R = out.F;
  for (Index j = 0; j < n; ++j) {
    Reflector h = house(std::span<const double>(R.view().col(j) + j, static_cast<std::size_t>(m - j)), flops);
    apply_reflector(R.block(j, j + 1, m - j, n - j - 1), h, Side::left, flops);
    R(j, j) = h.alpha;
    for (Index i = j + 1; i < m; ++i) R(i, j) = 0.0;
    wy_append(out.Q, h, j, flops);
  }
  return out;
}

/// M = Q*L with L = [0; L1], L1 lower triangular in the bottom n x n block.
inline OrthoFactors ql_wy(ConstView M, FlopCounter* flops = nullptr) {
  const Index m = M.rows(), n = M.cols();
  require(m >= n, "ql_wy: rows must be >= cols");
  OrthoFactors out{CompactWY(m, n), DenseMatrix(M)};
  DenseMatrix& L = out.F;
  for (Index c = n - 1; c >= 0; --c) {
    const Index r = m - n + c;
    Reflector h = house_last(std::span<const double>(L.view().col(c), static_cast<std::size_t>(r + 1)), flops);
    apply_reflector(L.block(0, 0, r + 1, c), h, Side::left, flops);
    L(r, c) = h.alpha;
    for (Index i = 0; i < r; ++i) L(i, c) = 0.0;
    out.Q.append_general(detail::embed(h.v, 0, m), h.beta, flops);
  }
  return out;
}

/// M = R*Q with R upper triangular in its rightmost p x p block (p x q, q >= p).
inline OrthoFactors rq_wy(ConstView M, FlopCounter* flops = nullptr) {
  const Index p = M.rows(), q = M.cols();
  require(q >= p, "rq_wy: cols must be >= rows");
  OrthoFactors out{CompactWY(q, p), DenseMatrix(M)};
  DenseMatrix& R = out.F;
  std::vector<Reflector> hs;
  for (Index r = p - 1; r >= 0; --r) {
    const Index c = q - p + r;
    Reflector h = house_last(detail::row_copy(R, r, 0, c + 1), flops);
    apply_reflector(R.block(0, 0, r, c + 1), h, Side::right, flops);
    R(r, c) = h.alpha;
    for (Index j = 0; j < c; ++j) R(r, j) = 0.0;
    hs.push_back(std::move(h));
  }
  // R = M*H_{p-1}...H_0, hence Q = H_0...H_{p-1}
  for (auto it = hs.rbegin(); it != hs.rend(); ++it)
    out.Q.append_general(detail::embed(it->v, 0, q), it->beta, flops);
  return out;
}

/// M = L*Q with L lower triangular in its leading p x p block (p x q, q >= p).
inline OrthoFactors lq_wy(ConstView M, FlopCounter* flops = nullptr) {
  const Index p = M.rows(), q = M.cols();
  require(q >= p, "lq_wy: cols must be >= rows");
  OrthoFactors out{CompactWY(q, p), DenseMatrix(M)};
  DenseMatrix& L = out.F;
  std::vector<std::pair<Index, Reflector>> hs;
  for (Index r = 0; r < p; ++r) {
    Reflector h = house(detail::row_copy(L, r, r, q - r), flops);
    apply_reflector(L.block(r + 1, r, p - r - 1, q - r), h, Side::right, flops);
    L(r, r) = h.alpha;
    for (Index j = r + 1; j < q; ++j) L(r, j) = 0.0;
    hs.emplace_back(r, std::move(h));
  }
  for (auto it = hs.rbegin(); it != hs.rend(); ++it)
    out.Q.append_general(detail::embed(it->second.v, it->first, q), it->second.beta, flops);
  return out;
}

// ---------------------------------------------------------------------------
// LU with partial pivoting

/// Packed L\U with LAPACK-style interchange sequence: row i was swapped with piv[i].
struct LuFactors {
  DenseMatrix LU;
  std::vector<Index> piv;
  bool singular = false;

  Index size() const { return LU.rows(); }
};

inline LuFactors lu_pp(ConstView M, FlopCounter* flops = nullptr) {
  require(M.rows() == M.cols(), "lu_pp: square matrix required");
  const Index n = M.rows();
  LuFactors f{DenseMatrix(M), std::vector<Index>(static_cast<std::size_t>(n)), false};
  DenseMatrix& A = f.LU;
  for (Index c = 0; c < n; ++c) {
    Index p = c;
    double best = std::abs(A(c, c));
    for (Index i = c + 1; i < n; ++i)
      if (std::abs(A(i, c)) > best) {
        best = std::abs(A(i, c));
        p = i;
      }
    f.piv[c] = p;
    if (best == 0.0) {
      f.singular = true;
      continue;
    }
    if (p != c)
      for (Index j = 0; j < n; ++j) std::swap(A(c, j), A(p, j));
    const double inv = 1.0 / A(c, c);
    for (Index i = c + 1; i < n; ++i) A(i, c) *= inv;
    for (Index j = c + 1; j < n; ++j) {
      const double a = A(c, j);
      if (a == 0.0) continue;
      double* dst = A.data() + j * n;
      const double* l = A.data() + c * n;
      for (Index i = c + 1; i < n; ++i) dst[i] -= l[i] * a;
    }
    const double r = double(n - c - 1);
    count(flops, r + 2.0 * r * r);
  }
  return f;
}

/// Solves A x = b in place from LU factors.
inline void lu_solve(const LuFactors& f, std::span<double> b, FlopCounter* flops = nullptr) {
  const Index n = f.size();
  require(static_cast<Index>(b.size()) == n, "lu_solve: dimension mismatch");
  if (f.singular) throw SingularSystem("lu_solve: exactly singular factor");
  const DenseMatrix& A = f.LU;
  for (Index i = 0; i < n; ++i)
    if (f.piv[i] != i) std::swap(b[i], b[f.piv[i]]);
  for (Index j = 0; j < n; ++j) {
    const double bj = b[j];
    if (bj == 0.0) continue;
    for (Index i = j + 1; i < n; ++i) b[i] -= A(i, j) * bj;
  }
  for (Index j = n - 1; j >= 0; --j) {
    b[j] /= A(j, j);
    const double bj = b[j];
    if (bj == 0.0) continue;
    for (Index i = 0; i < j; ++i) b[i] -= A(i, j) * bj;
  }
  count(flops, 2.0 * double(n) * double(n));
}

/// log|det| from LU factors; -inf when singular.
inline double lu_log_abs_det(const LuFactors& f) {
  if (f.singular) return -std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (Index i = 0; i < f.size(); ++i) s += std::log(std::abs(f.LU(i, i)));
  return s;
}

// ---------------------------------------------------------------------------
// reduced transforms

/**
 * For a p x q strip C (p < q) returns a WY of exactly q-p reflectors with
 * C*Qt^T zero in its first q-p columns. Only the needed rows of the RQ
 * factor are formed.
 */
inline CompactWY reduced_right_transform(ConstView C, FlopCounter* flops = nullptr) {
  const Index p = C.rows(), q = C.cols(), k = q - p;
  require(p < q, "reduced_right_transform: need p < q");
  OrthoFactors rq = rq_wy(C, flops);
  // first k rows of Q = I - V T V^T
  DenseMatrix top(k, q);
  for (Index i = 0; i < k; ++i) top(i, i) = 1.0;
  if (rq.Q.size() > 0) {
    DenseMatrix VT = multiply(rq.Q.V().block(0, 0, k, rq.Q.size()), rq.Q.T());
    gemm_acc(top, VT, rq.Q.V(), -1.0, 1.0, false, true, flops);
  }
  OrthoFactors lq = lq_wy(top, flops);
  CompactWY Qt = std::move(lq.Q);

  DenseMatrix check(C);
  wy_apply(check, Qt, Side::right, true, flops);
  const double res = frob_norm(check.block(0, 0, p, k));
  const double tol = 100.0 * double(q) * unit_roundoff * frob_norm(C);
  if (!(res <= tol))
    throw NumericalFailure("reduced_right_transform: residual " + std::to_string(res) +
                           " exceeds guard " + std::to_string(tol));
  return Qt;
}

/**
 * For a p x q strip C (p > q) returns a WY of exactly p-q reflectors with
 * Qt^T*C zero in its last p-q rows.
 */
inline CompactWY reduced_left_transform(ConstView C, FlopCounter* flops = nullptr) {
  const Index p = C.rows(), q = C.cols(), k = p - q;
  require(p > q, "reduced_left_transform: need p > q");
  OrthoFactors qr = qr_wy(C, flops);
  // last k columns of Q = I - V T V^T
  DenseMatrix last(p, k);
  for (Index i = 0; i < k; ++i) last(q + i, i) = 1.0;
  if (qr.Q.size() > 0) {
    DenseMatrix TVt(qr.Q.size(), k);
    gemm_acc(TVt, qr.Q.T(), qr.Q.V().block(q, 0, k, qr.Q.size()), 1.0, 0.0, false, true, flops);
    gemm_acc(last, qr.Q.V(), TVt, -1.0, 1.0, false, false, flops);
  }
  OrthoFactors ql = ql_wy(last, flops);
  CompactWY Qt = std::move(ql.Q);

  DenseMatrix check(C);
  wy_apply(check, Qt, Side::left, true, flops);
  const double res = frob_norm(check.block(q, 0, k, q));
  const double tol = 100.0 * double(std::max(p, q)) * unit_roundoff * frob_norm(C);
  if (!(res <= tol))
    throw NumericalFailure("reduced_left_transform: residual " + std::to_string(res) +
                           " exceeds guard " + std::to_string(tol));
  return Qt;
}

} // namespace househt

#endif
