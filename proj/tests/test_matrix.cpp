#include <gtest/gtest.h>

#include <househt/matrix.hpp>

#include "support.hpp"

using namespace househt;

TEST(Gemm, IdentityTimesIdentity) {
  DenseMatrix C(2, 2), I = DenseMatrix::identity(2);
  gemm_acc(C, I, I, 1.0, 0.0);
  EXPECT_EQ(C, I);
}

TEST(Gemm, ScaledIdentityProduct) {
  DenseMatrix A{{1, 2}, {3, 4}}, C(2, 2);
  gemm_acc(C, A, DenseMatrix::identity(2), 2.0, 0.0);
  EXPECT_EQ(C, (DenseMatrix{{2, 4}, {6, 8}}));
}

TEST(Gemm, HandProduct) {
  DenseMatrix A{{1, 2}, {3, 4}}, B{{5, 6}, {7, 8}}, C(2, 2);
  FlopCounter fc;
  gemm_acc(C, A, B, 1.0, 0.0, false, false, &fc);
  EXPECT_EQ(C, (DenseMatrix{{19, 22}, {43, 50}}));
  EXPECT_EQ(fc.total, 16u);
}

TEST(Gemm, BetaScalingCountsExtraFlops) {
  DenseMatrix A{{1, 2}, {3, 4}}, B = DenseMatrix::identity(2), C{{1, 1}, {1, 1}};
  FlopCounter fc;
  gemm_acc(C, A, B, 1.0, 3.0, false, false, &fc);
  EXPECT_EQ(C, (DenseMatrix{{4, 5}, {6, 7}}));
  EXPECT_EQ(fc.total, 16u + 4u);
}

TEST(Gemm, DimensionMismatchThrows) {
  DenseMatrix A(2, 3), B(2, 2), C(2, 2);
  EXPECT_THROW(gemm_acc(C, A, B, 1.0, 0.0), ContractViolation);
}

TEST(Gemm, MatchesTripleLoopBitwiseOnSmallIntegers) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> d(-9, 9);
  for (Index m = 1; m <= 8; ++m)
    for (Index n = 1; n <= 8; ++n)
      for (Index k = 1; k <= 8; ++k)
        for (int ta = 0; ta < 2; ++ta)
          for (int tb = 0; tb < 2; ++tb) {
            DenseMatrix A(ta ? k : m, ta ? m : k), B(tb ? n : k, tb ? k : n);
            for (Index j = 0; j < A.cols(); ++j)
              for (Index i = 0; i < A.rows(); ++i) A(i, j) = d(rng);
            for (Index j = 0; j < B.cols(); ++j)
              for (Index i = 0; i < B.rows(); ++i) B(i, j) = d(rng);
            DenseMatrix C(m, n, 99.0), R(m, n);
            gemm_acc(C, A, B, 1.0, 0.0, ta, tb);
            for (Index i = 0; i < m; ++i)
              for (Index j = 0; j < n; ++j) {
                double s = 0;
                for (Index p = 0; p < k; ++p) s += (ta ? A(p, i) : A(i, p)) * (tb ? B(j, p) : B(p, j));
                R(i, j) = s;
              }
            ASSERT_EQ(C, R) << m << "x" << n << "x" << k << " ta=" << ta << " tb=" << tb;
          }
}

TEST(Gemm, WorksOnStridedViews) {
  std::mt19937_64 rng(3);
  DenseMatrix big = testing_support::random_matrix(9, 9, rng);
  DenseMatrix A(big.block(1, 2, 4, 3)), B(big.block(0, 5, 3, 2));
  DenseMatrix C1(4, 2), big2(6, 6);
  gemm_acc(C1, big.block(1, 2, 4, 3), big.block(0, 5, 3, 2), 1.0, 0.0);
  gemm_acc(big2.block(1, 1, 4, 2), A, B, 1.0, 0.0);
  EXPECT_EQ(C1, DenseMatrix(big2.block(1, 1, 4, 2)));
}

TEST(FrobNorm, Examples) {
  EXPECT_EQ(frob_norm(DenseMatrix(3, 3)), 0.0);
  EXPECT_DOUBLE_EQ(frob_norm(DenseMatrix::identity(3)), std::sqrt(3.0));
  EXPECT_DOUBLE_EQ(frob_norm(DenseMatrix{{3}, {4}}), 5.0);
}

TEST(FrobNorm, NoOverflowForHugeEntries) {
  DenseMatrix a{{3e200}, {4e200}};
  EXPECT_NEAR(frob_norm(a) / 5e200, 1.0, 1e-15);
}

TEST(StructureDefect, Examples) {
  DenseMatrix I = DenseMatrix::identity(4);
  EXPECT_EQ(structure_defect(I, Structure::hessenberg), 0.0);
  DenseMatrix M = I;
  M(3, 1) = 1e-3;
  EXPECT_EQ(structure_defect(M, Structure::hessenberg), 1e-3);
  DenseMatrix D{{1, 2, 0, 0}, {3, 4, 0, 0}, {0, 0, 5, 6}, {0, 0, 7, 8}};
  EXPECT_EQ(structure_defect(D, Structure::block_upper_triangular, {0, 2, 4}), 0.0);
  EXPECT_EQ(structure_defect(D, Structure::upper_triangular), 7.0);
}

TEST(StructureDefect, InvalidOffsetsThrow) {
  DenseMatrix I = DenseMatrix::identity(4);
  EXPECT_THROW(structure_defect(I, Structure::block_upper_triangular, {0, 3}), ContractViolation);
  EXPECT_THROW(structure_defect(I, Structure::block_upper_triangular, {0, 2, 2, 4}), ContractViolation);
}

TEST(Trmm, MatchesExplicitProducts) {
  std::mt19937_64 rng(11);
  DenseMatrix T = testing_support::random_upper(5, rng);
  DenseMatrix W = testing_support::random_matrix(5, 3, rng), Wr = testing_support::random_matrix(3, 5, rng);
  for (int trans = 0; trans < 2; ++trans) {
    DenseMatrix L(W), R(Wr);
    trmm_upper(T, L, true, trans);
    trmm_upper(T, R, false, trans);
    EXPECT_LT(testing_support::diff_norm(L, multiply(T, W, trans, false)), 1e-13);
    EXPECT_LT(testing_support::diff_norm(R, multiply(Wr, T, false, trans)), 1e-13);
  }
}
