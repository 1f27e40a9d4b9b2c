#ifndef HOUSEHT_GENERATORS_HPP
#define HOUSEHT_GENERATORS_HPP

#include <random>

#include "factorizations.hpp"

namespace househt {

struct Pencil {
  DenseMatrix A, B;
};

inline DenseMatrix normal_matrix(Index m, Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  DenseMatrix M(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) M(i, j) = g(rng);
  return M;
}

/// A standard normal, B the R factor of a standard normal matrix.
inline Pencil gen_random_pencil(Index n, std::uint64_t seed) {
  require(n >= 1, "gen_random_pencil: n must be positive");
  std::mt19937_64 rng(seed);
  Pencil p{normal_matrix(n, n, rng), normal_matrix(n, n, rng)};
  OrthoFactors qr = qr_wy(p.B);
  p.B = std::move(qr.F);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) p.B(i, j) = 0.0;
  return p;
}

/**
 * [X Y; Y^T 0] - lambda diag(I, 0) with X = G^T G + n I of order 3n/4 and
 * Y a normal (3n/4) x (n/4) matrix.
 */
inline Pencil gen_saddlepoint(Index n, std::uint64_t seed) {
  require(n >= 4 && n % 4 == 0, "gen_saddlepoint: n must be a positive multiple of 4");
  std::mt19937_64 rng(seed);
  const Index p = 3 * n / 4, q = n - p;
  DenseMatrix G = normal_matrix(p, p, rng);
  DenseMatrix X = multiply(G, G, true, false);
  for (Index i = 0; i < p; ++i) X(i, i) += double(n);
  DenseMatrix Y = normal_matrix(p, q, rng);
  Pencil pc{DenseMatrix(n, n), DenseMatrix(n, n)};
  copy(X, pc.A.block(0, 0, p, p));
  copy(Y, pc.A.block(0, p, p, q));
  for (Index j = 0; j < q; ++j)
    for (Index i = 0; i < p; ++i) pc.A(p + j, i) = Y(i, j);
  for (Index i = 0; i < p; ++i) pc.B(i, i) = 1.0;
  return pc;
}

} // namespace househt

#endif
