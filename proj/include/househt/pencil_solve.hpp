#ifndef HOUSEHT_PENCIL_SOLVE_HPP
#define HOUSEHT_PENCIL_SOLVE_HPP

#include <optional>
#include <random>

#include "factorizations.hpp"

namespace househt {

/**
 * Upper block triangular matrix with diagonal blocks [o_b, o_{b+1}).
 * Offsets 0,1,...,n describe a plain triangular matrix. LU factors of the
 * non-trivial diagonal blocks are cached and refreshed lazily.
 */
class BlockTriangularB {
public:
  BlockTriangularB() = default;

  explicit BlockTriangularB(DenseMatrix B) : B_(std::move(B)) {
    require(B_.rows() == B_.cols(), "BlockTriangularB: square matrix required");
    std::vector<Index> off(static_cast<std::size_t>(B_.rows() + 1));
    for (Index i = 0; i <= B_.rows(); ++i) off[i] = i;
    set_offsets(std::move(off));
  }

  BlockTriangularB(DenseMatrix B, std::vector<Index> offsets) : B_(std::move(B)) {
    require(B_.rows() == B_.cols(), "BlockTriangularB: square matrix required");
    set_offsets(std::move(offsets));
  }

  Index size() const { return B_.rows(); }
  const DenseMatrix& matrix() const { return B_; }

  /// Mutable access; drops cached factors and the cached norm.
  DenseMatrix& matrix_mut() {
    invalidate();
    return B_;
  }

  const std::vector<Index>& offsets() const { return off_; }

  void set_offsets(std::vector<Index> off) {
    const Index n = size();
    require(!off.empty() && off.front() == 0 && off.back() == n,
            "BlockTriangularB: offsets must partition [0,n]");
    for (std::size_t b = 0; b + 1 < off.size(); ++b)
      require(off[b] < off[b + 1] || n == 0, "BlockTriangularB: offsets must increase");
    off_ = std::move(off);
    block_.assign(static_cast<std::size_t>(n), 0);
    for (std::size_t b = 0; b + 1 < off_.size(); ++b)
      for (Index i = off_[b]; i < off_[b + 1]; ++i) block_[i] = static_cast<Index>(b);
    invalidate();
  }

  Index block_of(Index i) const { return block_[static_cast<std::size_t>(i)]; }
  Index block_start(Index i) const { return off_[static_cast<std::size_t>(block_of(i))]; }
  Index block_end(Index i) const { return off_[static_cast<std::size_t>(block_of(i) + 1)]; }
  bool is_boundary(Index i) const { return i == size() || block_start(i) == i; }
  Index num_blocks() const { return static_cast<Index>(off_.size()) - 1; }

  double bnorm() const {
    if (!norm_) norm_ = frob_norm(B_);
    return *norm_;
  }

  void invalidate() {
    lu_.assign(off_.empty() ? 0 : off_.size() - 1, std::nullopt);
    norm_.reset();
  }

  /// LU factors of diagonal block b (size > 1), computed on first use.
  const LuFactors& block_lu(Index b, FlopCounter* flops = nullptr) const {
    auto& slot = lu_[static_cast<std::size_t>(b)];
    if (!slot) {
      const Index p = off_[b], q = off_[b + 1];
      slot = lu_pp(B_.block(p, p, q - p, q - p), flops);
    }
    return *slot;
  }

  /// Installs externally computed factors for block b (used by desingularization).
  void set_block_lu(Index b, LuFactors f) { lu_[static_cast<std::size_t>(b)] = std::move(f); }

private:
  DenseMatrix B_;
  std::vector<Index> off_;
  std::vector<Index> block_;
  mutable std::vector<std::optional<LuFactors>> lu_;
  mutable std::optional<double> norm_;
};

/// Result of an iteratively refined solve.
struct SolveOutcome {
  Vector x;
  Index ir_steps = 0;
  bool converged = false;
  double final_residual = 0.0;
};

struct Desingularized {
  BlockTriangularB B;
  Index replacements = 0;
};

/**
 * Replaces tiny pivots of B[first:, first:] (diagonal entries of unit blocks,
 * LU pivots of larger blocks) by 2*u*rho*||B||_F with rho standard normal.
 * Larger blocks are rebuilt from the modified factors so that the returned
 * matrix and its cached factors describe the same operator.
 */
inline Desingularized desingularize_diagonal(const BlockTriangularB& B, std::mt19937_64& rng,
                                             Index first = 0, FlopCounter* flops = nullptr) {
  const double nrm = B.bnorm();
  require(nrm > 0.0, "desingularize_diagonal: B must be nonzero");
  const double u = unit_roundoff;
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&]() {
    for (;;) {
      double r = 2.0 * u * normal(rng) * nrm;
      if (std::abs(r) >= 0.5 * u * nrm) return r;
    }
  };

  Desingularized out{B, 0};
  if (first >= B.size()) return out;
  std::vector<std::pair<Index, double>> diag;       // 1x1 blocks: row, new value
  std::vector<std::pair<Index, LuFactors>> blocks;  // larger blocks: index, modified factors
  for (Index b = B.block_of(first); b < B.num_blocks(); ++b) {
    const Index p = B.offsets()[b], q = B.offsets()[b + 1];
    if (q - p == 1) {
      if (std::abs(B.matrix()(p, p)) < u * nrm) diag.emplace_back(p, draw());
      continue;
    }
    LuFactors f = B.block_lu(b, flops);
    bool changed = false;
    for (Index i = 0; i < q - p; ++i)
      if (std::abs(f.LU(i, i)) < u * nrm) {
        f.LU(i, i) = draw();
        ++out.replacements;
        changed = true;
      }
    if (changed) {
      f.singular = false;
      blocks.emplace_back(b, std::move(f));
    }
  }
  out.replacements += static_cast<Index>(diag.size());
  if (out.replacements == 0) return out;

  DenseMatrix& M = out.B.matrix_mut();
  for (auto& [i, val] : diag) M(i, i) = val;
  for (auto& [b, f] : blocks) {
    // rebuild the block as P^T L U
    const Index p = B.offsets()[b], m = f.size();
    DenseMatrix L = DenseMatrix::identity(m), U(m, m);
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < m; ++i) (i > j ? L(i, j) : U(i, j)) = f.LU(i, j);
    DenseMatrix blk = multiply(L, U);
    for (Index i = m - 1; i >= 0; --i)
      if (f.piv[i] != i)
        for (Index j = 0; j < m; ++j) std::swap(blk(i, j), blk(f.piv[i], j));
    copy(blk, M.block(p, p, m, m));
  }
  for (auto& [b, f] : blocks) out.B.set_block_lu(b, std::move(f));
  return out;
}

inline Desingularized desingularize_diagonal(const BlockTriangularB& B, std::uint64_t seed,
                                             Index first = 0) {
  std::mt19937_64 rng(seed);
  return desingularize_diagonal(B, rng, first);
}

/// Solves B[first:, first:] y = rhs; `first` must start a diagonal block.
inline Vector block_back_substitute(const BlockTriangularB& B, std::span<const double> rhs,
                                    Index first = 0, FlopCounter* flops = nullptr) {
  const Index n = B.size();
  require(first >= 0 && first <= n && B.is_boundary(first), "block_back_substitute: bad start row");
  require(static_cast<Index>(rhs.size()) == n - first, "block_back_substitute: dimension mismatch");
  Vector y(rhs.begin(), rhs.end());
  const DenseMatrix& M = B.matrix();
  const auto& off = B.offsets();
  double fl = 0.0;
  for (Index b = B.num_blocks() - 1; b >= 0 && off[b] >= first; --b) {
    const Index p = off[b], q = off[b + 1];
    double* yb = y.data() + (p - first);
    if (q - p == 1) {
      const double d = M(p, p);
      if (d == 0.0) throw SingularSystem("block_back_substitute: zero diagonal entry");
      yb[0] /= d;
      fl += 1.0;
    } else {
      lu_solve(B.block_lu(b, flops), std::span<double>(yb, static_cast<std::size_t>(q - p)), flops);
    }
    for (Index c = p; c < q; ++c) {
      const double yc = y[c - first];
      if (yc == 0.0) continue;
      const double* col = M.data() + c * M.rows();
      for (Index i = first; i < p; ++i) y[i - first] -= col[i] * yc;
    }
    fl += 2.0 * double(p - first) * double(q - p);
  }
  count(flops, fl);
  return y;
}

/// w = B[first:, first:] x exploiting the block structure.
inline Vector block_multiply(const BlockTriangularB& B, std::span<const double> x, Index first = 0,
                             FlopCounter* flops = nullptr) {
  const Index n = B.size();
  require(static_cast<Index>(x.size()) == n - first, "block_multiply: dimension mismatch");
  Vector w(static_cast<std::size_t>(n - first), 0.0);
  const DenseMatrix& M = B.matrix();
  double fl = 0.0;
  for (Index c = first; c < n; ++c) {
    const double xc = x[c - first];
    const Index hi = B.block_end(c);
    fl += 2.0 * double(hi - first);
    if (xc == 0.0) continue;
    const double* col = M.data() + c * M.rows();
    for (Index i = first; i < hi; ++i) w[i - first] += col[i] * xc;
  }
  count(flops, fl);
  return w;
}

namespace detail {
inline Index solve_origin(const BlockTriangularB& B, const CompactWY& U, const CompactWY& V, Index j) {
  const Index n = B.size();
  require(U.length() == V.length(), "factored solve: U and V lengths differ");
  const Index o = n - U.length();
  require(o >= 0 && j + 1 >= o && j + 1 < n, "factored solve: column outside the aggregate range");
  return o;
}
} // namespace detail

/**
 * Candidate solution of Bt[j+1:, j+1:] x = c with Bt = (I-USU^T)^T B (I-VTV^T)
 * acting on rows/cols [o, n), o = n - U.length(). Not backward stable in general.
 */
inline Vector solve_factored(const BlockTriangularB& B, const CompactWY& U, const CompactWY& V, Index j,
                             std::span<const double> c, FlopCounter* flops = nullptr) {
  const Index n = B.size();
  const Index o = detail::solve_origin(B, U, V, j);
  require(static_cast<Index>(c.size()) == n - j - 1, "solve_factored: rhs length mismatch");
  Vector t(static_cast<std::size_t>(n - o), 0.0);
  std::copy(c.begin(), c.end(), t.begin() + (j + 1 - o));
  wy_apply(t, U, false, flops);
  Vector y = block_back_substitute(B, t, o, flops);
  wy_apply(y, V, true, flops);
  return Vector(y.begin() + (j + 1 - o), y.end());
}

inline Vector solve_factored_e1(const BlockTriangularB& B, const CompactWY& U, const CompactWY& V,
                                Index j, FlopCounter* flops = nullptr) {
  Vector e(static_cast<std::size_t>(B.size() - j - 1), 0.0);
  e[0] = 1.0;
  return solve_factored(B, U, V, j, e, flops);
}

namespace detail {

using ExtVector = std::vector<long double>;

/// w <- (I - V T V^T) w, or the transpose, accumulated in extended precision.
inline void wy_apply_ext(ExtVector& w, const CompactWY& wy, bool trans, FlopCounter* flops) {
  const Index m = wy.length(), k = wy.size();
  if (k == 0) return;
  ConstView V = wy.V(), T = wy.T();
  ExtVector t(static_cast<std::size_t>(k)), s(static_cast<std::size_t>(k));
  for (Index a = 0; a < k; ++a) {
    long double acc = 0.0L;
    for (Index i = a; i < m; ++i) acc += static_cast<long double>(V(i, a)) * w[i];
    t[a] = acc;
  }
  for (Index a = 0; a < k; ++a) {
    long double acc = 0.0L;
    if (trans)
      for (Index b = 0; b <= a; ++b) acc += static_cast<long double>(T(b, a)) * t[b];
    else
      for (Index b = a; b < k; ++b) acc += static_cast<long double>(T(a, b)) * t[b];
    s[a] = acc;
  }
  for (Index a = 0; a < k; ++a)
    for (Index i = a; i < m; ++i) w[i] -= static_cast<long double>(V(i, a)) * s[a];
  count(flops, 4.0 * double(m) * double(k) + double(k) * double(k));
}

} // namespace detail

/**
 * r = c - Bt[j+1:, j+1:] x through the factored form. The products are
 * accumulated in long double: in double their rounding error is of the
 * same size as the refinement tolerance.
 */
inline Vector residual(const BlockTriangularB& B, const CompactWY& U, const CompactWY& V, Index j,
                       std::span<const double> x, std::span<const double> c,
                       FlopCounter* flops = nullptr) {
  const Index n = B.size();
  const Index o = detail::solve_origin(B, U, V, j);
  require(static_cast<Index>(x.size()) == n - j - 1 && x.size() == c.size(),
          "residual: length mismatch");
  detail::ExtVector w(static_cast<std::size_t>(n - o), 0.0L);
  std::copy(x.begin(), x.end(), w.begin() + (j + 1 - o));
  detail::wy_apply_ext(w, V, false, flops);

  detail::ExtVector z(w.size(), 0.0L);
  const DenseMatrix& M = B.matrix();
  double fl = 0.0;
  for (Index col = o; col < n; ++col) {
    const Index hi = B.block_end(col);
    fl += 2.0 * double(hi - o);
    const long double wc = w[col - o];
    if (wc == 0.0L) continue;
    const double* mc = M.data() + col * M.rows();
    for (Index i = o; i < hi; ++i) z[i - o] += static_cast<long double>(mc[i]) * wc;
  }
  count(flops, fl);
  detail::wy_apply_ext(z, U, true, flops);

  Vector r(c.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<double>(c[i] - z[(j + 1 - o) + i]);
  return r;
}

inline Vector residual_e1(const BlockTriangularB& B, const CompactWY& U, const CompactWY& V, Index j,
                          std::span<const double> x, FlopCounter* flops = nullptr) {
  Vector e(static_cast<std::size_t>(B.size() - j - 1), 0.0);
  e[0] = 1.0;
  return residual(B, U, V, j, x, e, flops);
}

/**
 * Factored solve of Bt[j+1:, j+1:] x = e_1 followed by iterative refinement
 * until ||r||/||x|| <= tol or max_iters corrections have been spent.
 */
inline SolveOutcome solve_with_refinement(const BlockTriangularB& B, const CompactWY& U,
                                          const CompactWY& V, Index j, Index max_iters, double tol,
                                          FlopCounter* flops = nullptr) {
  SolveOutcome out;
  out.x = solve_factored_e1(B, U, V, j, flops);
  for (;;) {
    Vector r = residual_e1(B, U, V, j, out.x, flops);
    const double rn = norm2(r);
    const double xn = norm2(out.x);
    out.final_residual = rn;
    if (xn == 0.0 || rn <= tol * xn) {
      out.converged = true;
      return out;
    }
    if (out.ir_steps >= max_iters) return out;
    Vector c = solve_factored(B, U, V, j, r, flops);
    for (std::size_t i = 0; i < c.size(); ++i) out.x[i] += c[i];
    count(flops, double(c.size()));
    ++out.ir_steps;
  }
}

inline SolveOutcome solve_with_refinement(const BlockTriangularB& B, const CompactWY& U,
                                          const CompactWY& V, Index j, Index max_iters = 10) {
  return solve_with_refinement(B, U, V, j, max_iters, 2.0 * unit_roundoff * B.bnorm());
}

/**
 * First opposite reflector of a panel: x solves B[j+1:, j+1:] x = (I - beta u u^T) e_1,
 * where u is the left reflector of column j (rows j+1..n-1).
 */
inline Reflector opposite_reflector_first(const BlockTriangularB& B, const Reflector& u, Index j,
                                          FlopCounter* flops = nullptr) {
  const Index n = B.size();
  require(u.size() == n - j - 1, "opposite_reflector_first: reflector length mismatch");
  Vector y(static_cast<std::size_t>(n - j - 1));
  for (Index i = 0; i < n - j - 1; ++i) y[i] = -u.beta * u.v[i] * u.v[0];
  y[0] += 1.0;
  Vector x = block_back_substitute(B, y, j + 1, flops);
  return house(x, flops);
}

} // namespace househt

#endif
