#ifndef HOUSEHT_PREPROCESS_HPP
#define HOUSEHT_PREPROCESS_HPP

#include "ht_blocked.hpp"

namespace househt {

/// (A1, B1) = (Q^T A Z, Q^T B Z) with the ell zero columns of B moved to the front.
struct Deflated {
  DenseMatrix A1, B1, Q, Z;
  Index ell = 0;
};

namespace detail {

inline bool is_zero_column(ConstView M, Index j) {
  for (Index i = 0; i < M.rows(); ++i)
    if (M(i, j) != 0.0) return false;
  return true;
}

inline bool is_diagonal(ConstView M) {
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i)
      if (i != j && M(i, j) != 0.0) return false;
  return true;
}

/// Column permutation as an explicit matrix: column t of P is e_{perm[t]}.
inline DenseMatrix permutation_matrix(const std::vector<Index>& perm) {
  const Index n = static_cast<Index>(perm.size());
  DenseMatrix P(n, n);
  for (Index t = 0; t < n; ++t) P(perm[t], t) = 1.0;
  return P;
}

inline DenseMatrix permute_columns(ConstView M, const std::vector<Index>& perm) {
  DenseMatrix R(M.rows(), M.cols());
  for (Index t = 0; t < M.cols(); ++t) copy(M.block(0, perm[t], M.rows(), 1), R.block(0, t, M.rows(), 1));
  return R;
}

inline DenseMatrix permute_rows(ConstView M, const std::vector<Index>& perm) {
  DenseMatrix R(M.rows(), M.cols());
  for (Index j = 0; j < M.cols(); ++j)
    for (Index t = 0; t < M.rows(); ++t) R(t, j) = M(perm[t], j);
  return R;
}

} // namespace detail

/**
 * Moves the exactly-zero columns of B to the front and triangularizes the
 * matching columns of A. The trailing pencil (A1, B1)[ell:, ell:] is left
 * with B1 upper triangular and is what remains to be reduced.
 */
inline Deflated deflate_zero_columns(ConstView A, ConstView B, FlopCounter* flops = nullptr) {
  detail::require_pencil(A, B);
  const Index n = A.rows();
  std::vector<Index> perm;
  for (Index j = 0; j < n; ++j)
    if (detail::is_zero_column(B, j)) perm.push_back(j);
  const Index ell = static_cast<Index>(perm.size());
  Deflated d{DenseMatrix(A), DenseMatrix(B), DenseMatrix::identity(n), DenseMatrix::identity(n), ell};
  if (ell == 0) return d;
  for (Index j = 0; j < n; ++j)
    if (!detail::is_zero_column(B, j)) perm.push_back(j);

  const bool diagonal = detail::is_diagonal(B);
  d.Z = detail::permutation_matrix(perm);
  d.A1 = detail::permute_columns(A, perm);
  d.B1 = detail::permute_columns(B, perm);
  if (diagonal) {
    d.Q = d.Z;
    d.A1 = detail::permute_rows(d.A1, perm);
    d.B1 = detail::permute_rows(d.B1, perm);
  }

  OrthoFactors qr = qr_wy(d.A1.block(0, 0, n, ell), flops);
  copy(qr.F, d.A1.block(0, 0, n, ell));
  for (Index j = 0; j < ell; ++j)
    for (Index i = j + 1; i < n; ++i) d.A1(i, j) = 0.0;
  wy_apply(d.A1.block(0, ell, n, n - ell), qr.Q, Side::left, true, flops);
  wy_apply(d.B1.block(0, ell, n, n - ell), qr.Q, Side::left, true, flops);
  wy_apply(d.Q, qr.Q, Side::right, false, flops);

  // B1[ell:, ell:] is in general no longer triangular; a QR from the left puts it back
  const Index m = n - ell;
  if (m > 1 && structure_defect(d.B1.block(ell, ell, m, m), Structure::upper_triangular) != 0.0) {
    OrthoFactors qr2 = qr_wy(d.B1.block(ell, ell, m, m), flops);
    copy(qr2.F, d.B1.block(ell, ell, m, m));
    for (Index j = 0; j < m; ++j)
      for (Index i = j + 1; i < m; ++i) d.B1(ell + i, ell + j) = 0.0;
    wy_apply(d.A1.block(ell, ell, m, m), qr2.Q, Side::left, true, flops);
    wy_apply(d.Q.block(0, ell, n, m), qr2.Q, Side::right, false, flops);
  }
  return d;
}

/**
 * Deflates zero columns of B and reduces the trailing pencil with house_ht.
 * The report counts refer to the trailing reduction; its flops include the
 * deflation and the final assembly.
 */
inline HtResult reduce_with_preprocessing(ConstView A, ConstView B, const HtConfig& cfg = {},
                                          std::vector<ColumnEvent>* trace = nullptr) {
  FlopCounter fc;
  Deflated d = deflate_zero_columns(A, B, &fc);
  const Index n = A.rows(), ell = d.ell, m = n - ell;
  if (ell == 0) {
    HtResult r = house_ht(A, B, cfg, trace);
    r.report.flops += fc.total;
    return r;
  }
  HtResult sub = house_ht(d.A1.block(ell, ell, m, m), d.B1.block(ell, ell, m, m), cfg, trace);
  HtResult r{std::move(d.A1), std::move(d.B1), std::move(d.Q), std::move(d.Z), sub.report};
  copy(sub.H, r.H.block(ell, ell, m, m));
  copy(sub.T, r.T.block(ell, ell, m, m));
  if (m > 0) {
    DenseMatrix top = multiply(r.H.block(0, ell, ell, m), sub.Z);
    copy(top, r.H.block(0, ell, ell, m));
    top = multiply(r.T.block(0, ell, ell, m), sub.Z);
    copy(top, r.T.block(0, ell, ell, m));
    DenseMatrix q = multiply(r.Q.block(0, ell, n, m), sub.Q);
    copy(q, r.Q.block(0, ell, n, m));
    DenseMatrix z = multiply(r.Z.block(0, ell, n, m), sub.Z);
    copy(z, r.Z.block(0, ell, n, m));
    fc.total += 2 * std::uint64_t(ell) * m * m * 2 + 2 * std::uint64_t(n) * m * m * 2;
  }
  r.report.flops = sub.report.flops + fc.total;
  return r;
}

} // namespace househt

#endif
