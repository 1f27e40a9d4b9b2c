#include <gtest/gtest.h>

#include <househt/pencil_solve.hpp>

#include "panel_support.hpp"

using namespace househt;
using namespace testing_support;

namespace {
constexpr double u = unit_roundoff;

Vector unit(Index m) {
  Vector e(static_cast<std::size_t>(m), 0.0);
  e[0] = 1.0;
  return e;
}

/// B with a tiny diagonal entry one row below the panel origin s + 1.
/// A tiny entry at the origin itself does not hurt the factored solve.
DenseMatrix crafted_b(Index n, Index s, double tiny, std::mt19937_64& rng) {
  DenseMatrix B = random_upper(n, rng);
  for (Index i = 0; i < n; ++i) B(i, i) = 2.0 + std::abs(B(i, i));
  B(s + 2, s + 2) = tiny;
  return B;
}
} // namespace

TEST(BlockBackSubstitute, Identity) {
  BlockTriangularB B(DenseMatrix::identity(4));
  Vector r{1, 2, 3, 4};
  EXPECT_EQ(block_back_substitute(B, r), r);
}

TEST(BlockBackSubstitute, PlainTriangular) {
  BlockTriangularB B(DenseMatrix{{2, 0}, {0, 4}});
  EXPECT_EQ(block_back_substitute(B, unit(2)), (Vector{0.5, 0.0}));
}

TEST(BlockBackSubstitute, RandomBlocks) {
  std::mt19937_64 rng(1);
  DenseMatrix M = random_matrix(12, 12, rng);
  for (Index j = 0; j < 12; ++j)
    for (Index i = (j / 4 + 1) * 4; i < 12; ++i) M(i, j) = 0.0;
  BlockTriangularB B(M, {0, 4, 8, 12});
  DenseMatrix r = random_matrix(12, 1, rng);
  Vector y = block_back_substitute(B, r.view().column(0));
  Vector By = block_multiply(B, y);
  Vector d(12);
  for (Index i = 0; i < 12; ++i) d[i] = By[i] - r(i, 0);
  EXPECT_LE(norm2(d), 1e-13 * frob_norm(r));
  // a solve of a trailing subsystem starting at a block boundary
  Vector y2 = block_back_substitute(B, std::span<const double>(r.data() + 4, 8), 4);
  Vector By2 = block_multiply(B, y2, 4);
  for (Index i = 0; i < 8; ++i) EXPECT_NEAR(By2[i], r(4 + i, 0), 1e-13 * frob_norm(r));
  EXPECT_THROW(block_back_substitute(B, std::span<const double>(r.data() + 2, 10), 2), ContractViolation);
}

TEST(BlockBackSubstitute, ZeroDiagonalThrows) {
  BlockTriangularB B(DenseMatrix{{1, 1}, {0, 0}});
  EXPECT_THROW(block_back_substitute(B, unit(2)), SingularSystem);
  BlockTriangularB C(DenseMatrix{{1, 2}, {2, 4}}, {0, 2});
  EXPECT_THROW(block_back_substitute(C, unit(2)), SingularSystem);
}

TEST(Desingularize, NothingToDo) {
  Desingularized d = desingularize_diagonal(BlockTriangularB(DenseMatrix::identity(3)), 42u);
  EXPECT_EQ(d.replacements, 0);
  EXPECT_EQ(d.B.matrix(), DenseMatrix::identity(3));
}

TEST(Desingularize, ReplacesZeroDiagonal) {
  DenseMatrix M{{1, 0, 0}, {0, 0, 0}, {0, 0, 1}};
  Desingularized d = desingularize_diagonal(BlockTriangularB(M), 42u);
  EXPECT_EQ(d.replacements, 1);
  const double nb = std::sqrt(2.0);
  const double v = std::abs(d.B.matrix()(1, 1));
  EXPECT_GT(v, 0.0);
  EXPECT_GE(v, 0.5 * u * nb);
  EXPECT_EQ(d.B.matrix()(0, 0), 1.0);
  EXPECT_NO_THROW(block_back_substitute(d.B, unit(3)));
  // deterministic per seed
  EXPECT_EQ(desingularize_diagonal(BlockTriangularB(M), 42u).B.matrix(), d.B.matrix());
}

TEST(Desingularize, AllZeroIsContractViolation) {
  EXPECT_THROW(desingularize_diagonal(BlockTriangularB(DenseMatrix(3, 3)), 1u), ContractViolation);
}

TEST(Desingularize, SingularBlockIsRebuiltConsistently) {
  DenseMatrix M{{1, 2, 5}, {2, 4, 1}, {0, 0, 3}};
  BlockTriangularB B(M, {0, 2, 3});
  Desingularized d = desingularize_diagonal(B, 7u);
  EXPECT_EQ(d.replacements, 1);
  // the solve uses the modified factors, the multiply uses the rebuilt block
  Vector y = block_back_substitute(d.B, unit(3));
  Vector w = block_multiply(d.B, y);
  Vector e = unit(3);
  double r = 0;
  for (int i = 0; i < 3; ++i) r += (w[i] - e[i]) * (w[i] - e[i]);
  EXPECT_LE(std::sqrt(r), 2 * u * d.B.bnorm() * norm2(y));
  EXPECT_LE(std::abs(d.B.matrix()(0, 0) - 1.0) + std::abs(d.B.matrix()(1, 1) - 4.0), 1e-14);
}

TEST(SolveFactored, EmptyAggregatesEqualPlainSolve) {
  std::mt19937_64 rng(2);
  const Index n = 7, j = 2;
  BlockTriangularB B(random_upper(n, rng));
  CompactWY U(n - j - 1), V(n - j - 1);
  Vector x = solve_factored_e1(B, U, V, j);
  EXPECT_EQ(x, block_back_substitute(B, unit(n - j - 1), j + 1));
}

TEST(SolveFactored, MatchesExplicitFormOnRandomPanel) {
  std::mt19937_64 rng(3);
  DenseMatrix M = random_upper(6, rng);
  for (Index i = 0; i < 6; ++i) M(i, i) += (M(i, i) >= 0 ? 3.0 : -3.0);
  PanelFixture f = make_panel(M, 0, 1, rng);
  Vector x = solve_factored_e1(f.B, f.U, f.V, f.j());
  MatL Bt = explicit_btilde(f);
  const Index o = 6 - f.U.length(), t = f.j() + 1 - o, m = 6 - f.j() - 1;
  Eigen::Matrix<long double, Eigen::Dynamic, 1> e = Eigen::Matrix<long double, Eigen::Dynamic, 1>::Zero(m);
  e(0) = 1;
  Eigen::Matrix<long double, Eigen::Dynamic, 1> ref = Bt.block(t, t, m, m).partialPivLu().solve(e);
  ASSERT_EQ(static_cast<Index>(x.size()), ref.size());
  for (Index i = 0; i < ref.size(); ++i) EXPECT_NEAR(x[i], static_cast<double>(ref(i)), 1e-10);
}

TEST(SolveFactored, IllConditionedLeadingBlockBreaksRawSolve) {
  std::mt19937_64 rng(4);
  PanelFixture f = make_panel(crafted_b(10, 0, 1e-14, rng), 0, 1, rng);
  Vector x = solve_factored_e1(f.B, f.U, f.V, f.j());
  Vector r = residual_e1(f.B, f.U, f.V, f.j(), x);
  EXPECT_GT(norm2(r), 2 * u * f.B.bnorm() * norm2(x));
}

TEST(Residual, Trivial) {
  BlockTriangularB B(DenseMatrix::identity(5));
  CompactWY U(4), V(4);
  Vector x = unit(4);
  Vector r = residual_e1(B, U, V, 0, x);
  EXPECT_EQ(r, Vector(4, 0.0));
  Vector z(4, 0.0);
  EXPECT_EQ(residual_e1(B, U, V, 0, z), unit(4));
}

TEST(Residual, MatchesExplicitForm) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 40; ++t) {
    const Index n = 6 + t % 35, k = 1 + t % 8;
    if (k + 2 >= n) continue;
    PanelFixture f = make_panel(random_upper(n, rng), t % 2, k, rng);
    if (f.j() + 2 > n) continue;
    DenseMatrix xm = random_matrix(n - f.j() - 1, 1, rng);
    Vector x(xm.data(), xm.data() + xm.rows());
    Vector r = residual_e1(f.B, f.U, f.V, f.j(), x);
    EXPECT_NEAR(norm2(r), explicit_residual(f, x), 50.0 * n * u * f.B.bnorm() * norm2(x));
  }
}

TEST(Refinement, StableCaseNeedsNoSteps) {
  std::mt19937_64 rng(6);
  BlockTriangularB B(random_upper(9, rng));
  CompactWY U(8), V(8);
  wy_append(U, house(random_matrix(8, 1, rng).view().column(0)), 0);
  SolveOutcome out = solve_with_refinement(B, U, V, 0);
  EXPECT_TRUE(out.converged);
  EXPECT_EQ(out.ir_steps, 0);
  EXPECT_LE(out.final_residual, 2 * u * B.bnorm() * norm2(out.x));
}

TEST(Refinement, MildlyIllConditionedConverges) {
  std::mt19937_64 rng(7);
  PanelFixture f = make_panel(crafted_b(10, 0, 1e-14, rng), 0, 1, rng);
  SolveOutcome out = solve_with_refinement(f.B, f.U, f.V, f.j());
  EXPECT_TRUE(out.converged);
  EXPECT_GE(out.ir_steps, 1);
  EXPECT_LE(out.ir_steps, 10);
  EXPECT_LE(explicit_residual(f, out.x), 2 * u * f.B.bnorm() * norm2(out.x));
}

TEST(Refinement, ExtremeScalingFailsAfterTenSteps) {
  std::mt19937_64 rng(8);
  PanelFixture f = make_panel(crafted_b(10, 0, 1e-300, rng), 0, 1, rng);
  SolveOutcome out = solve_with_refinement(f.B, f.U, f.V, f.j());
  EXPECT_FALSE(out.converged);
  EXPECT_EQ(out.ir_steps, 10);
}

TEST(Refinement, Deterministic) {
  std::mt19937_64 r1(9), r2(9);
  PanelFixture a = make_panel(random_upper(20, r1), 1, 4, r1);
  PanelFixture b = make_panel(random_upper(20, r2), 1, 4, r2);
  SolveOutcome x = solve_with_refinement(a.B, a.U, a.V, a.j());
  SolveOutcome y = solve_with_refinement(b.B, b.U, b.V, b.j());
  EXPECT_EQ(x.x, y.x);
  EXPECT_EQ(x.ir_steps, y.ir_steps);
}

TEST(OppositeReflectorFirst, IdentityLeftReflector) {
  BlockTriangularB B(DenseMatrix{{1, 0, 0}, {0, 2, 0}, {0, 0, 4}});
  Reflector id = house(Vector{1, 0});
  Reflector g = opposite_reflector_first(B, id, 0);
  EXPECT_TRUE(g.identity());
  EXPECT_DOUBLE_EQ(g.alpha, 0.5);
}

TEST(OppositeReflectorFirst, MatchesDenseSolve) {
  std::mt19937_64 rng(10);
  DenseMatrix M = random_upper(3, rng);
  BlockTriangularB B(M);
  Reflector uref = house(Vector{0.3, -1.2});
  Reflector g = opposite_reflector_first(B, uref, 0);
  DenseMatrix B22(M.block(1, 1, 2, 2));
  apply_reflector(B22, uref, Side::left);
  Eigen::VectorXd x = to_eigen(B22).partialPivLu().solve(Eigen::Vector2d(1, 0));
  Reflector ref = house(Vector{x(0), x(1)});
  EXPECT_NEAR(g.beta, ref.beta, 1e-13);
  EXPECT_NEAR(g.v[1], ref.v[1], 1e-13);
  EXPECT_NEAR(g.alpha, ref.alpha, 1e-13 * std::abs(ref.alpha));
}

TEST(OppositeReflectorFirst, ZeroPivotWithoutDesingularizationThrows) {
  BlockTriangularB B(DenseMatrix{{1, 1, 1}, {0, 0, 1}, {0, 0, 1}});
  EXPECT_THROW(opposite_reflector_first(B, house(Vector{1, 1}), 0), SingularSystem);
}
