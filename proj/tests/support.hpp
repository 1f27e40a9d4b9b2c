#ifndef HOUSEHT_TESTS_SUPPORT_HPP
#define HOUSEHT_TESTS_SUPPORT_HPP

#include <random>

#include <Eigen/Dense>

#include <househt/matrix.hpp>

namespace testing_support {

using househt::DenseMatrix;
using househt::Index;

inline DenseMatrix random_matrix(Index m, Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  DenseMatrix a(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = g(rng);
  return a;
}

inline DenseMatrix random_upper(Index n, std::mt19937_64& rng) {
  DenseMatrix a = random_matrix(n, n, rng);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) a(i, j) = 0.0;
  return a;
}

inline Eigen::MatrixXd to_eigen(househt::ConstView a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) e(i, j) = a(i, j);
  return e;
}

inline DenseMatrix from_eigen(const Eigen::MatrixXd& e) {
  DenseMatrix a(e.rows(), e.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) a(i, j) = e(i, j);
  return a;
}

inline double diff_norm(househt::ConstView a, househt::ConstView b) {
  return (to_eigen(a) - to_eigen(b)).norm();
}

} // namespace testing_support

#endif
