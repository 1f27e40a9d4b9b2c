#ifndef HOUSEHT_HT_BASIC_HPP
#define HOUSEHT_HT_BASIC_HPP

#include "pencil_solve.hpp"
#include "report.hpp"

namespace househt {

/**
 * Unblocked reduction: per column one left reflector for A and one opposite
 * reflector from the right for B. The trailing part of B is dense after each
 * step, so every solve uses a fresh LU of the whole trailing block.
 */
inline HtResult reduce_basic(ConstView A0, ConstView B0, std::uint64_t seed = 0) {
  detail::require_pencil(A0, B0);
  const Index n = A0.rows();
  if (n < 3) return detail::trivial_result(A0, B0);

  HtResult res{DenseMatrix(A0), DenseMatrix(B0), DenseMatrix::identity(n), DenseMatrix::identity(n), {}};
  DenseMatrix &A = res.H, &Q = res.Q, &Z = res.Z;
  ReductionReport& rep = res.report;
  FlopCounter fc;
  std::mt19937_64 rng(seed);
  BlockTriangularB B(std::move(res.T));

  for (Index j = 0; j + 2 < n; ++j) {
    const Index m = n - j - 1;
    Reflector F = house(std::span<const double>(A.view().col(j) + j + 1, static_cast<std::size_t>(m)), &fc);
    apply_reflector(A.block(j + 1, j + 1, m, m), F, Side::left, &fc);
    A(j + 1, j) = F.alpha;
    for (Index i = j + 2; i < n; ++i) A(i, j) = 0.0;
    {
      DenseMatrix& M = B.matrix_mut();
      apply_reflector(M.block(j + 1, j + 1, m, m), F, Side::left, &fc);
    }
    apply_reflector(Q.block(0, j + 1, n, m), F, Side::right, &fc);

    std::vector<Index> off(static_cast<std::size_t>(j + 2));
    for (Index i = 0; i <= j + 1; ++i) off[i] = i;
    off.push_back(n);
    B.set_offsets(std::move(off));
    Desingularized d = desingularize_diagonal(B, rng, j + 1, &fc);
    if (d.replacements > 0) {
      rep.replacements += d.replacements;
      B = std::move(d.B);
    }
    CompactWY none(m);
    SolveOutcome out = solve_with_refinement(B, none, none, j, 10, 2.0 * unit_roundoff * B.bnorm(), &fc);
    ++rep.columns;
    rep.ir_steps_total += out.ir_steps;
    if (out.ir_steps > 0) ++rep.ir_extra_columns;
    if (!out.converged) ++rep.ir_failed_columns;

    Reflector G = house(out.x, &fc);
    apply_reflector(A.block(0, j + 1, n, m), G, Side::right, &fc);
    DenseMatrix& M = B.matrix_mut();
    apply_reflector(M.block(0, j + 1, n, m), G, Side::right, &fc);
    for (Index i = j + 2; i < n; ++i) M(i, j + 1) = 0.0;
    apply_reflector(Z.block(0, j + 1, n, m), G, Side::right, &fc);
  }
  res.T = B.matrix();
  rep.flops = fc.total;
  return res;
}

} // namespace househt

#endif
