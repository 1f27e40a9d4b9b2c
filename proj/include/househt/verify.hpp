#ifndef HOUSEHT_VERIFY_HPP
#define HOUSEHT_VERIFY_HPP

#include <random>

#include "factorizations.hpp"
#include "report.hpp"

namespace househt {

struct VerificationResult {
  double residual_a = 0.0, residual_b = 0.0;  // relative to ||A||_F, ||B||_F
  double orth_q = 0.0, orth_z = 0.0;
  double hessenberg_defect = 0.0, triangular_defect = 0.0;
  double threshold = 0.0;                     // 100 n u, for all four relative measures
  bool det_checked = false;
  double det_rel_error = 0.0;                 // max over sampled lambda of | |det(H-lT)|/|det(A-lB)| - 1 |
  bool pass = false;
};

namespace detail {

inline double relative_residual(ConstView M, ConstView Q, ConstView R, ConstView Z) {
  DenseMatrix QR = multiply(Q, R);
  DenseMatrix D(M);
  gemm_acc(D, QR, Z, -1.0, 1.0, false, true);
  const double nm = frob_norm(M);
  return nm == 0.0 ? frob_norm(D) : frob_norm(D) / nm;
}

inline double shifted_log_det(ConstView A, ConstView B, double lambda) {
  DenseMatrix M(A);
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) M(i, j) -= lambda * B(i, j);
  return lu_log_abs_det(lu_pp(M));
}

} // namespace detail

/// Default lambdas for the determinant comparison: 5 uniform draws in [-3, 3].
inline std::vector<double> sample_lambdas(std::uint64_t seed = 0, int count = 5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  std::vector<double> l;
  for (int i = 0; i < count; ++i) l.push_back(d(rng));
  return l;
}

inline VerificationResult verify(ConstView A, ConstView B, ConstView H, ConstView T, ConstView Q, ConstView Z,
                                 std::uint64_t det_seed = 0) {
  const Index n = A.rows();
  require(B.rows() == n && H.rows() == n && T.rows() == n && Q.rows() == n && Z.rows() == n,
          "verify: dimension mismatch");
  VerificationResult v;
  v.threshold = 100.0 * double(n) * unit_roundoff;
  v.residual_a = detail::relative_residual(A, Q, H, Z);
  v.residual_b = detail::relative_residual(B, Q, T, Z);
  v.orth_q = orthogonality_defect(Q);
  v.orth_z = orthogonality_defect(Z);
  v.hessenberg_defect = structure_defect(H, Structure::hessenberg);
  v.triangular_defect = structure_defect(T, Structure::upper_triangular);
  if (n <= 64) {
    v.det_checked = true;
    for (double l : sample_lambdas(det_seed)) {
      const double d0 = detail::shifted_log_det(A, B, l), d1 = detail::shifted_log_det(H, T, l);
      const double e = std::isfinite(d0) || std::isfinite(d1) ? std::abs(std::expm1(d1 - d0)) : 0.0;
      v.det_rel_error = std::max(v.det_rel_error, std::isnan(e) ? INFINITY : e);
    }
  }
  v.pass = v.hessenberg_defect == 0.0 && v.triangular_defect == 0.0 && v.residual_a <= v.threshold &&
           v.residual_b <= v.threshold && v.orth_q <= v.threshold && v.orth_z <= v.threshold;
  return v;
}

inline VerificationResult verify(ConstView A, ConstView B, const HtResult& r, std::uint64_t det_seed = 0) {
  return verify(A, B, r.H, r.T, r.Q, r.Z, det_seed);
}

} // namespace househt

#endif
