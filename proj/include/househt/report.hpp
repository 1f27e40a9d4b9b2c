#ifndef HOUSEHT_REPORT_HPP
#define HOUSEHT_REPORT_HPP

#include "matrix.hpp"

namespace househt {

/// Counters collected during one reduction. Residual fields are filled by the verifier.
struct ReductionReport {
  std::uint64_t flops = 0;
  Index ir_extra_columns = 0;   // columns that needed at least one refinement step
  Index ir_failed_columns = 0;  // columns where refinement did not converge
  Index ir_steps_total = 0;
  Index absorptions = 0;
  Index premature_absorptions = 0;
  Index replacements = 0;       // desingularized pivots
  Index first_column_failures = 0;
  Index columns = 0;            // columns that went through a right solve
  double residual_a = 0.0, residual_b = 0.0, orth_q = 0.0, orth_z = 0.0;
};

/// Hessenberg-triangular form with A = Q H Z^T and B = Q T Z^T.
struct HtResult {
  DenseMatrix H, T, Q, Z;
  ReductionReport report;
};

namespace detail {

inline void require_pencil(ConstView A, ConstView B) {
  require(A.rows() == A.cols() && B.rows() == B.cols() && A.rows() == B.rows(),
          "reduction: A and B must be square of equal size");
  require(structure_defect(B, Structure::upper_triangular) == 0.0,
          "reduction: B must be upper triangular");
}

inline HtResult trivial_result(ConstView A, ConstView B) {
  const Index n = A.rows();
  return HtResult{DenseMatrix(A), DenseMatrix(B), DenseMatrix::identity(n), DenseMatrix::identity(n), {}};
}

} // namespace detail
} // namespace househt

#endif
