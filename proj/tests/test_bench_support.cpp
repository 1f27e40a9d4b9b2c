#include <gtest/gtest.h>

#include <sstream>

#include <househt/househt.hpp>

#include "reduction_support.hpp"

using namespace househt;
using namespace testing_support;

TEST(DeflateZeroColumns, IdentityBHasNothingToDo) {
  std::mt19937_64 rng(1);
  DenseMatrix A = random_matrix(4, 4, rng);
  Deflated d = deflate_zero_columns(A, DenseMatrix::identity(4));
  EXPECT_EQ(d.ell, 0);
  EXPECT_EQ(d.A1, A);
  EXPECT_EQ(d.B1, DenseMatrix::identity(4));
  EXPECT_EQ(d.Q, DenseMatrix::identity(4));
  EXPECT_EQ(d.Z, DenseMatrix::identity(4));
}

TEST(DeflateZeroColumns, TwoByTwo) {
  DenseMatrix A{{1, 2}, {3, 4}}, B{{1, 0}, {0, 0}};
  Deflated d = deflate_zero_columns(A, B);
  EXPECT_EQ(d.ell, 1);
  EXPECT_EQ(d.A1(1, 0), 0.0);
  EXPECT_EQ(d.B1(0, 0), 0.0);
  EXPECT_EQ(d.B1(1, 0), 0.0);
  // Q = Z is the swap, then the QR of A's column [4; 2]
  EXPECT_NEAR(std::abs(d.A1(0, 0)), std::sqrt(20.0), 1e-14);
  EXPECT_LE(diff_norm(multiply(multiply(d.Q, d.A1), d.Z, false, true), A), 1e-14);
  EXPECT_LE(diff_norm(multiply(multiply(d.Q, d.B1), d.Z, false, true), B), 1e-14);
}

TEST(DeflateZeroColumns, StablePermutationAndTriangularTrail) {
  std::mt19937_64 rng(2);
  const Index n = 9;
  DenseMatrix A = random_matrix(n, n, rng), B = random_upper(n, rng);
  for (Index j : {2, 5, 6})
    for (Index i = 0; i < n; ++i) B(i, j) = 0.0;
  B(8, 8) = 1e-300;  // near-zero columns stay
  Deflated d = deflate_zero_columns(A, B);
  ASSERT_EQ(d.ell, 3);
  EXPECT_EQ(d.Z(2, 0), 1.0);
  EXPECT_EQ(d.Z(5, 1), 1.0);
  EXPECT_EQ(d.Z(6, 2), 1.0);
  for (Index j = 0; j < 3; ++j) {
    for (Index i = 0; i < n; ++i) EXPECT_EQ(d.B1(i, j), 0.0);
    for (Index i = j + 1; i < n; ++i) EXPECT_EQ(d.A1(i, j), 0.0);
  }
  EXPECT_EQ(structure_defect(d.B1.block(3, 3, n - 3, n - 3), Structure::upper_triangular), 0.0);
  const double tol = 50.0 * n * unit_roundoff;
  EXPECT_LE(diff_norm(multiply(multiply(d.Q, d.A1), d.Z, false, true), A), tol * frob_norm(A));
  EXPECT_LE(diff_norm(multiply(multiply(d.Q, d.B1), d.Z, false, true), B), tol * frob_norm(B));
}

TEST(ReduceWithPreprocessing, SaddlepointIsValid) {
  Pencil p = gen_saddlepoint(48, 3);
  HtConfig cfg;
  cfg.nb = 6;
  HtResult r = reduce_with_preprocessing(p.A, p.B, cfg);
  expect_valid_reduction(p.A, p.B, r);
  VerificationResult v = verify(p.A, p.B, r);
  EXPECT_TRUE(v.pass);
}

TEST(Generators, RandomPencil) {
  Pencil a = gen_random_pencil(5, 11), b = gen_random_pencil(5, 11);
  EXPECT_EQ(a.A, b.A);
  EXPECT_EQ(a.B, b.B);
  EXPECT_EQ(structure_defect(gen_random_pencil(50, 1).B, Structure::upper_triangular), 0.0);
  Pencil one = gen_random_pencil(1, 4);
  EXPECT_GT(std::abs(one.B(0, 0)), 0.0);
}

TEST(Generators, Saddlepoint) {
  Pencil p = gen_saddlepoint(4, 1);
  EXPECT_EQ(p.B, (DenseMatrix{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 0}}));
  EXPECT_EQ(p.A(3, 3), 0.0);
  EXPECT_EQ(p.A(3, 0), p.A(0, 3));
  Pencil q = gen_saddlepoint(100, 2);
  EXPECT_EQ(deflate_zero_columns(q.A, q.B).ell, 25);
  // X is symmetric positive definite
  Eigen::MatrixXd X = to_eigen(q.A).topLeftCorner(75, 75);
  EXPECT_EQ((X - X.transpose()).norm(), 0.0);
  EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(X).info(), Eigen::Success);
  EXPECT_THROW(gen_saddlepoint(10, 1), ContractViolation);
}

TEST(Verify, TrivialPass) {
  DenseMatrix H{{1, 2, 3}, {4, 5, 6}, {0, 7, 8}}, T{{1, 2, 3}, {0, 4, 5}, {0, 0, 6}};
  DenseMatrix I = DenseMatrix::identity(3);
  VerificationResult v = verify(H, T, H, T, I, I);
  EXPECT_TRUE(v.pass);
  EXPECT_TRUE(v.det_checked);
  EXPECT_EQ(v.det_rel_error, 0.0);
  DenseMatrix H2 = H;
  H2(2, 0) = 1e-8;
  v = verify(H, T, H2, T, I, I);
  EXPECT_EQ(v.hessenberg_defect, 1e-8);
  EXPECT_FALSE(v.pass);
}

TEST(Verify, BasicReductionPasses) {
  Pencil p = gen_random_pencil(20, 5);
  VerificationResult v = verify(p.A, p.B, reduce_basic(p.A, p.B));
  EXPECT_TRUE(v.pass);
  EXPECT_LE(v.det_rel_error, 1e-8);
}

TEST(MatrixMarket, ArrayColumnMajor) {
  std::istringstream in("%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n2\n3\n4\n");
  EXPECT_EQ(mm_read(in), (DenseMatrix{{1, 3}, {2, 4}}));
}

TEST(MatrixMarket, CoordinateAndSymmetric) {
  std::istringstream a("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 5.0\n");
  EXPECT_EQ(mm_read(a), (DenseMatrix{{5, 0}, {0, 0}}));
  std::istringstream s("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n2 1 -3\n");
  EXPECT_EQ(mm_read(s), (DenseMatrix{{1, -3}, {-3, 0}}));
}

TEST(MatrixMarket, RoundTripIsBitwise) {
  std::mt19937_64 rng(6);
  DenseMatrix M = random_matrix(7, 3, rng);
  M(0, 0) = -0.0;
  M(1, 0) = 1e-310;
  std::stringstream io;
  mm_write(io, M);
  DenseMatrix R = mm_read(io);
  ASSERT_EQ(R.rows(), 7);
  for (Index j = 0; j < 3; ++j)
    for (Index i = 0; i < 7; ++i) EXPECT_EQ(std::bit_cast<std::uint64_t>(R(i, j)), std::bit_cast<std::uint64_t>(M(i, j)));
}

TEST(MatrixMarket, Errors) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return mm_read(in);
  };
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n"), UnsupportedFormat);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1 0\n"), UnsupportedFormat);
  try {
    parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\nx\n4\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
  EXPECT_THROW(parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n"), ParseError);
  EXPECT_THROW(parse("not a header\n"), ParseError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"), ParseError);
}
