#ifndef HOUSEHT_TESTS_REDUCTION_SUPPORT_HPP
#define HOUSEHT_TESTS_REDUCTION_SUPPORT_HPP

#include <gtest/gtest.h>

#include <househt/report.hpp>

#include "support.hpp"

namespace testing_support {

/// Relative residuals and orthogonality of a reduction, all against 50 n u.
inline void expect_valid_reduction(househt::ConstView A, househt::ConstView B, const househt::HtResult& r,
                                   double factor = 50.0) {
  using namespace househt;
  const Index n = A.rows();
  const double tol = factor * double(n) * unit_roundoff;
  EXPECT_EQ(structure_defect(r.H, Structure::hessenberg), 0.0);
  EXPECT_EQ(structure_defect(r.T, Structure::upper_triangular), 0.0);
  Eigen::MatrixXd Q = to_eigen(r.Q), Z = to_eigen(r.Z);
  const double ra = (to_eigen(A) - Q * to_eigen(r.H) * Z.transpose()).norm() / to_eigen(A).norm();
  const double rb = (to_eigen(B) - Q * to_eigen(r.T) * Z.transpose()).norm() / to_eigen(B).norm();
  EXPECT_LE(ra, tol);
  EXPECT_LE(rb, tol);
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  EXPECT_LE((Q.transpose() * Q - I).norm(), tol);
  EXPECT_LE((Z.transpose() * Z - I).norm(), tol);
}

} // namespace testing_support

#endif
