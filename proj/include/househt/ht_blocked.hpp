#ifndef HOUSEHT_HT_BLOCKED_HPP
#define HOUSEHT_HT_BLOCKED_HPP

#include <functional>

#include "pencil_solve.hpp"
#include "report.hpp"

namespace househt {

struct HtConfig {
  Index nb = 32;
  Index ell = 4;  // 2 gives the plain sweeps; larger values merge panels into blocks of at most 2 nb
  Index max_ir = 10;
  std::uint64_t seed = 0;
  bool accelerated = true;
  // end the panel after any column whose solve needed refinement
  bool absorb_after_refinement = true;
  bool debug_checks = false;
};

/// One right solve of the panel loop, for tracing.
struct ColumnEvent {
  Index j = 0;
  Index k = 0;
  Index ir_steps = 0;
  bool converged = true;
  bool undone = false;      // IR failed with k > 0, column restored
  bool ends_panel = false;  // absorption follows this solve although k < nb
};

/**
 * Delayed two-sided transformation of a panel starting at column s:
 * A <- (I - U S U^T)^T A (I - V T V^T) with Y = A V T kept for the right part.
 * U and V live on rows s+1..n-1.
 */
struct PanelState {
  Index s = 0;
  Index k = 0;
  CompactWY U, V;
  DenseMatrix Y;
  Vector saved;  // column j before its update, for the undo path

  PanelState(Index n, Index s_, Index nb)
    : s(s_), U(n - s_ - 1, nb + 1), V(n - s_ - 1, nb), Y(n, nb) {}

  Index j() const { return s + k; }
  Index origin() const { return s + 1; }
  ConstView Yk() const { return Y.block(0, 0, Y.rows(), k); }
};

enum class ColumnStatus { ok, ir_failure };

/// Brings column j of A up to date with the k delayed reflectors.
inline void panel_update_column(PanelState& st, View A, FlopCounter* flops = nullptr) {
  const Index n = A.rows(), j = st.j(), o = st.origin();
  std::span<double> col = A.column(j);
  st.saved.assign(col.begin(), col.end());
  if (st.k == 0) return;
  // A(:,j) -= Y V(j,:)^T
  Vector vrow(static_cast<std::size_t>(st.k));
  for (Index c = 0; c < st.k; ++c) vrow[c] = st.V.V()(j - o, c);
  gemv(col, st.Yk(), vrow, -1.0, 1.0, false, flops);
  // A(o:,j) <- (I - U S U^T)^T A(o:,j)
  wy_apply(col.subspan(static_cast<std::size_t>(o)), st.U, true, flops);
  (void)n;
}

/**
 * Reduces column j of A from the left and, through a refined factored solve,
 * column j+1 of the implicitly transformed B from the right.
 */
inline ColumnStatus panel_reduce_column(PanelState& st, View A, const BlockTriangularB& B,
                                        const HtConfig& cfg, ReductionReport& rep,
                                        FlopCounter* flops = nullptr, SolveOutcome* outcome = nullptr) {
  const Index n = A.rows(), j = st.j(), o = st.origin(), m = n - j - 1;
  double* col = A.col(j);
  Reflector u = house(std::span<const double>(col + j + 1, static_cast<std::size_t>(m)), flops);
  col[j + 1] = u.alpha;
  for (Index i = j + 2; i < n; ++i) col[i] = 0.0;
  wy_append(st.U, u, st.k, flops);

  SolveOutcome out =
      solve_with_refinement(B, st.U, st.V, j, cfg.max_ir, 2.0 * unit_roundoff * B.bnorm(), flops);
  ++rep.columns;
  rep.ir_steps_total += out.ir_steps;
  if (out.ir_steps > 0) ++rep.ir_extra_columns;
  if (!out.converged) ++rep.ir_failed_columns;
  if (outcome) *outcome = out;

  if (!out.converged) {
    if (st.k > 0) {
      std::copy(st.saved.begin(), st.saved.end(), col);
      st.U.pop_back();
      return ColumnStatus::ir_failure;
    }
    // k = 0: the solve is backward stable by construction, keep it
    ++rep.first_column_failures;
  }

  Reflector v = house(out.x, flops);
  const Index k = st.k;
  Vector z(static_cast<std::size_t>(k), 0.0);
  if (k > 0) gemv(z, st.V.V().block(k, 0, m, k), v.v, 1.0, 0.0, true, flops);
  wy_append(st.V, v, k, flops);

  // y = gamma (A(:, j+1:) v - Y z)
  std::span<double> y = st.Y.view().column(k);
  gemv(y, A.block(0, j + 1, n, m), v.v, v.beta, 0.0, false, flops);
  if (k > 0) gemv(y, st.Yk(), z, -v.beta, 1.0, false, flops);
  st.k = k + 1;
  (void)o;
  return ColumnStatus::ok;
}

namespace detail {

/// lo[i - J] is the first column >= J that may be nonzero in row i >= J; nondecreasing.
struct RowProfile {
  Index J = 0;
  std::vector<Index> lo;

  Index at(Index i) const { return lo[static_cast<std::size_t>(i - J)]; }
  /// one past the last row with a possible nonzero left of column b (rows < J always count)
  Index rows_before(Index b) const {
    Index i = static_cast<Index>(lo.size()) - 1;
    while (i >= 0 && lo[static_cast<std::size_t>(i)] >= b) --i;
    return J + i + 1;
  }
  void right_transform(Index a, Index b) {
    for (auto& l : lo)
      if (l < b) l = std::min(l, a);
  }
  void left_transform(Index a, Index b) {
    const Index l0 = at(a);
    for (Index i = a; i < b; ++i) lo[static_cast<std::size_t>(i - J)] = l0;
  }
  void set(Index a, Index b, Index value) {
    for (Index i = a; i < b; ++i) lo[static_cast<std::size_t>(i - J)] = value;
  }
};

inline RowProfile profile_from_blocks(const BlockTriangularB& B, Index J) {
  RowProfile p{J, {}};
  for (Index i = J; i < B.size(); ++i) p.lo.push_back(std::max(J, B.block_start(i)));
  return p;
}

inline bool plain_mode(const HtConfig& cfg) { return !cfg.accelerated || cfg.ell <= 2; }

/// Block starts of B strictly inside (J, n).
inline std::vector<Index> grid_after(const BlockTriangularB& B, Index J) {
  std::vector<Index> g;
  for (Index x : B.offsets())
    if (x > J && x < B.size()) g.push_back(x);
  return g;
}

/// Ends of the QL windows on rows [J, n), each window k rows longer than the step.
inline std::vector<Index> right_window_ends(const BlockTriangularB& B, Index J, Index k,
                                            const HtConfig& cfg, std::vector<Index>& target) {
  const Index n = B.size(), m2 = n - J;
  std::vector<Index> ends;
  if (plain_mode(cfg)) {
    if (m2 > k) {
      const Index r = m2 <= 2 * k ? 1 : (m2 + k - 1) / k - 1;
      for (Index t = 0; t < r; ++t) ends.push_back(n - (r - 1 - t) * k);
    }
    target.clear();
    for (Index q = n; q > J; q -= k) target.push_back(std::max(J, q - k));
    std::reverse(target.begin(), target.end());
    return ends;
  }
  std::vector<Index> g = grid_after(B, J);
  bool unit = static_cast<Index>(g.size()) == n - J - 1;
  if (unit) {
    // fresh grid; diagonal blocks stay within two panel widths
    const Index D = std::min<Index>(cfg.ell - 1, 2) * cfg.nb;
    g.clear();
    for (Index x = n - D; x > J; x -= D) g.push_back(x);
    std::reverse(g.begin(), g.end());
  }
  target = g;
  target.insert(target.begin(), J);
  if (m2 <= k) return ends;
  ends = g;
  ends.push_back(n);
  if (ends.size() > 1 && ends.front() - J <= k) ends.erase(ends.begin());
  return ends;
}

inline void zero_block(View M) { fill(M, 0.0); }

} // namespace detail

/**
 * Applies the right reflectors of a finished panel to A, B and Z and restores
 * B[J:, J:] to block upper triangular form. Columns s+1..J-1 of B are left
 * dense; absorb_left clears them. On return the offsets of B describe the
 * block grid on [J, n).
 */
inline void absorb_right(View A, BlockTriangularB& Bt, View Z, const PanelState& st, const HtConfig& cfg,
                         FlopCounter* flops = nullptr) {
  const Index k = st.k;
  if (k == 0) return;
  const Index n = A.rows(), o = st.origin(), J = o + k, m2 = n - J;
  require(st.V.size() == k && st.V.length() == n - o, "absorb_right: inconsistent panel state");

  std::vector<Index> target;
  std::vector<Index> ends = detail::right_window_ends(Bt, J, k, cfg, target);
  detail::RowProfile prof = detail::profile_from_blocks(Bt, J);
  DenseMatrix& B = Bt.matrix_mut();

  // reduce V2 by QL windows from the top, applying each window to the columns
  DenseMatrix V2(st.V.V().block(k, 0, m2, k));
  Index a = J;
  for (Index b : ends) {
    OrthoFactors ql = ql_wy(V2.block(a - J, 0, b - a, k), flops);
    copy(ql.F, V2.block(a - J, 0, b - a, k));
    const Index hi = prof.rows_before(b);
    wy_apply(B.block(0, a, hi, b - a), ql.Q, Side::right, false, flops);
    wy_apply(A.block(0, a, n, b - a), ql.Q, Side::right, false, flops);
    wy_apply(Z.block(0, a, n, b - a), ql.Q, Side::right, false, flops);
    prof.right_transform(a, b);
    a = b - k;
  }
  const Index kb = std::min(k, m2);
  DenseMatrix L1(V2.block(m2 - kb, 0, kb, k));
  DenseMatrix V1(st.V.V().block(0, 0, k, k));
  ConstView T = st.V.T();

  // low-rank part: M(:, o:J) and M(:, n-kb:) see I - [V1; L1] T [V1; L1]^T
  auto low_rank = [&](View M) {
    const Index rows = M.rows();
    DenseMatrix W(rows, k);
    gemm_acc(W, M.block(0, o, rows, k), V1, 1.0, 0.0, false, false, flops);
    gemm_acc(W, M.block(0, n - kb, rows, kb), L1, 1.0, 1.0, false, false, flops);
    trmm_upper(T, W, false, false, flops);
    gemm_acc(M.block(0, o, rows, k), W, V1, -1.0, 1.0, false, true, flops);
    gemm_acc(M.block(0, n - kb, rows, kb), W, L1, -1.0, 1.0, false, true, flops);
  };
  low_rank(B);
  low_rank(Z);
  prof.right_transform(n - kb, n);

  // A = A diag(I, Q) - Y [0 V1^T L^T]; earlier panel columns are already done
  {
    Vector vrow(static_cast<std::size_t>(k));
    for (Index c = 0; c < k; ++c) vrow[c] = V1(k - 1, c);
    gemv(A.column(J - 1), st.Yk(), vrow, -1.0, 1.0, false, flops);
    gemm_acc(A.block(0, n - kb, n, kb), st.Yk(), L1, -1.0, 1.0, false, true, flops);
  }

  // restore block triangular form from the bottom
  const bool plain = detail::plain_mode(cfg);
  std::vector<Index> bounds = target;
  bounds.push_back(n);
  for (Index t = static_cast<Index>(target.size()) - 1; t >= 0; --t) {
    const Index p = bounds[t], q = bounds[t + 1], lo = prof.at(p);
    if (plain) {
      OrthoFactors rq = rq_wy(B.block(p, lo, q - p, q - lo), flops);
      wy_apply(B.block(0, lo, p, q - lo), rq.Q, Side::right, true, flops);
      copy(rq.F, B.block(p, lo, q - p, q - lo));
      wy_apply(A.block(0, lo, n, q - lo), rq.Q, Side::right, true, flops);
      wy_apply(Z.block(0, lo, n, q - lo), rq.Q, Side::right, true, flops);
      for (Index i = p; i < q; ++i) prof.set(i, i + 1, i);
    } else {
      if (lo >= p) continue;
      CompactWY Qt = reduced_right_transform(B.block(p, lo, q - p, q - lo), flops);
      wy_apply(B.block(0, lo, q, q - lo), Qt, Side::right, true, flops);
      detail::zero_block(B.block(p, lo, q - p, p - lo));
      wy_apply(A.block(0, lo, n, q - lo), Qt, Side::right, true, flops);
      wy_apply(Z.block(0, lo, n, q - lo), Qt, Side::right, true, flops);
      prof.set(p, q, p);
    }
  }

  std::vector<Index> off;
  for (Index i = 0; i <= o; ++i) off.push_back(i);
  if (J > o) off.push_back(J);
  if (plain) {
    for (Index i = J + 1; i <= n; ++i) off.push_back(i);
  } else {
    for (std::size_t t = 1; t < target.size(); ++t) off.push_back(target[t]);
    off.push_back(n);
  }
  if (off.back() != n) off.push_back(n);
  off.erase(std::unique(off.begin(), off.end()), off.end());
  Bt.set_offsets(std::move(off));
}

/**
 * Applies the left reflectors of a finished panel to A, B and Q after
 * absorb_right. B ends up triangular on [0, J) and block triangular after.
 */
inline void absorb_left(View A, BlockTriangularB& Bt, View Q, const PanelState& st, const HtConfig& cfg,
                        FlopCounter* flops = nullptr) {
  const Index k = st.k;
  if (k == 0) return;
  const Index n = A.rows(), o = st.origin(), J = o + k, m2 = n - J;
  require(st.U.size() == k && st.U.length() == n - o, "absorb_left: inconsistent panel state");
  const bool plain = detail::plain_mode(cfg);
  std::vector<Index> grid = plain ? std::vector<Index>{} : detail::grid_after(Bt, J);
  DenseMatrix& B = Bt.matrix_mut();
  ConstView U = st.U.V(), S = st.U.T();

  // spike columns o..J-1 become exactly triangular
  {
    DenseMatrix X(k, k);
    gemm_acc(X, U, B.block(o, o, n - o, k), 1.0, 0.0, true, false, flops);
    trmm_upper(S, X, true, true, flops);
    gemm_acc(B.block(o, o, k, k), U.block(0, 0, k, k), X, -1.0, 1.0, false, false, flops);
    detail::zero_block(B.block(J, o, m2, k));
    for (Index c = o; c < J; ++c)
      for (Index i = c + 1; i < J; ++i) B(i, c) = 0.0;
  }

  detail::RowProfile prof{J, {}};
  if (plain) {
    for (Index i = J; i < n; ++i) prof.lo.push_back(i);
  } else {
    std::vector<Index> starts = grid;
    starts.insert(starts.begin(), J);
    for (Index i = J, b = 0; i < n; ++i) {
      while (b + 1 < static_cast<Index>(starts.size()) && starts[b + 1] <= i) ++b;
      prof.lo.push_back(starts[b]);
    }
  }

  // reduce U2 by QR windows from the bottom; tops sit on block starts
  std::vector<Index> tops;
  if (plain) {
    for (Index t = J; t < n; t += k) tops.push_back(t);
  } else {
    tops = grid;
    tops.insert(tops.begin(), J);
  }
  DenseMatrix U2(U.block(k, 0, m2, k));
  if (m2 > k) {
    if (tops.size() > 1 && n - tops.back() <= k) tops.pop_back();
    for (Index t = static_cast<Index>(tops.size()) - 1; t >= 0; --t) {
      const Index a = tops[t];
      const Index b = t + 1 < static_cast<Index>(tops.size()) ? std::min(n, tops[t + 1] + k) : n;
      OrthoFactors qr = qr_wy(U2.block(a - J, 0, b - a, k), flops);
      copy(qr.F, U2.block(a - J, 0, b - a, k));
      const Index lo = prof.at(a);
      wy_apply(B.block(a, lo, b - a, n - lo), qr.Q, Side::left, true, flops);
      wy_apply(A.block(a, J - 1, b - a, n - J + 1), qr.Q, Side::left, true, flops);
      wy_apply(Q.block(0, a, n, b - a), qr.Q, Side::right, false, flops);
      prof.left_transform(a, b);
    }
  }

  // low-rank part with U_hat = [U1; R1] on rows o..J+kt-1
  const Index kt = std::min(k, m2), r = k + kt;
  DenseMatrix Uh(r, k);
  copy(U.block(0, 0, k, k), Uh.block(0, 0, k, k));
  copy(U2.block(0, 0, kt, k), Uh.block(k, 0, kt, k));
  auto left_low_rank = [&](View M) {
    DenseMatrix W(k, M.cols());
    gemm_acc(W, Uh, M, 1.0, 0.0, true, false, flops);
    trmm_upper(S, W, true, true, flops);
    gemm_acc(M, Uh, W, -1.0, 1.0, false, false, flops);
  };
  left_low_rank(B.block(o, J, r, n - J));
  left_low_rank(A.block(o, J - 1, r, n - J + 1));
  {
    DenseMatrix W(n, k);
    gemm_acc(W, Q.block(0, o, n, r), Uh, 1.0, 0.0, false, false, flops);
    trmm_upper(S, W, false, false, flops);
    gemm_acc(Q.block(0, o, n, r), W, Uh, -1.0, 1.0, false, true, flops);
  }
  if (kt > 0) prof.left_transform(J, J + kt);

  // restore from the top
  std::vector<Index> bounds;
  if (plain) {
    for (Index p = J; p < n; p += k) bounds.push_back(p);
  } else {
    bounds = grid;
    bounds.insert(bounds.begin(), J);
  }
  bounds.push_back(n);
  for (std::size_t t = 0; t + 1 < bounds.size(); ++t) {
    const Index p = bounds[t], q = bounds[t + 1], hi = prof.rows_before(q);
    if (plain) {
      OrthoFactors qr = qr_wy(B.block(p, p, hi - p, q - p), flops);
      copy(qr.F, B.block(p, p, hi - p, q - p));
      wy_apply(B.block(p, q, hi - p, n - q), qr.Q, Side::left, true, flops);
      wy_apply(A.block(p, J - 1, hi - p, n - J + 1), qr.Q, Side::left, true, flops);
      wy_apply(Q.block(0, p, n, hi - p), qr.Q, Side::right, false, flops);
    } else {
      if (hi <= q) continue;
      CompactWY Qt = reduced_left_transform(B.block(p, p, hi - p, q - p), flops);
      wy_apply(B.block(p, p, hi - p, n - p), Qt, Side::left, true, flops);
      detail::zero_block(B.block(q, p, hi - q, q - p));
      wy_apply(A.block(p, J - 1, hi - p, n - J + 1), Qt, Side::left, true, flops);
      wy_apply(Q.block(0, p, n, hi - p), Qt, Side::right, false, flops);
    }
    prof.set(q, hi, q);
  }

  std::vector<Index> off;
  for (Index i = 0; i <= J; ++i) off.push_back(i);
  if (plain) {
    for (Index i = J + 1; i <= n; ++i) off.push_back(i);
  } else {
    for (Index g : grid) off.push_back(g);
    if (off.back() != n) off.push_back(n);
  }
  Bt.set_offsets(std::move(off));
}

namespace detail {

inline double equivalence_residual(ConstView Q, ConstView M0, ConstView Z, ConstView M) {
  DenseMatrix QtM = multiply(Q, M0, true, false);
  DenseMatrix R = multiply(QtM, Z);
  for (Index j = 0; j < R.cols(); ++j)
    for (Index i = 0; i < R.rows(); ++i) R(i, j) -= M(i, j);
  return frob_norm(R);
}

} // namespace detail

/**
 * Blocked Hessenberg-triangular reduction. B must be upper triangular.
 * `trace`, when given, receives one event per right solve.
 */
inline HtResult house_ht(ConstView A0, ConstView B0, const HtConfig& cfg = {},
                         std::vector<ColumnEvent>* trace = nullptr) {
  detail::require_pencil(A0, B0);
  require(cfg.nb >= 1 && cfg.ell >= 2 && cfg.max_ir >= 0, "house_ht: invalid configuration");
  const Index n = A0.rows();
  if (n < 3) return detail::trivial_result(A0, B0);

  HtResult res{DenseMatrix(A0), DenseMatrix(), DenseMatrix::identity(n), DenseMatrix::identity(n), {}};
  DenseMatrix &A = res.H, &Q = res.Q, &Z = res.Z;
  ReductionReport& rep = res.report;
  FlopCounter fc;
  std::mt19937_64 rng(cfg.seed);
  BlockTriangularB B{DenseMatrix(B0)};
  const double na = frob_norm(A0), nbn = frob_norm(B0);

  Index s = 0;
  while (s + 2 < n) {
    {
      Desingularized d = desingularize_diagonal(B, rng, s + 1, &fc);
      rep.replacements += d.replacements;
      B = std::move(d.B);
    }
    PanelState st(n, s, cfg.nb);
    bool early = false;
    while (st.k < cfg.nb && st.j() + 2 < n) {
      panel_update_column(st, A, &fc);
      SolveOutcome out;
      const Index kbefore = st.k;
      ColumnStatus cs = panel_reduce_column(st, A, B, cfg, rep, &fc, &out);
      const bool undone = cs == ColumnStatus::ir_failure;
      const bool stop = undone || (cfg.absorb_after_refinement && out.ir_steps > 0 && st.j() + 2 < n);
      if (trace) trace->push_back({st.s + kbefore, kbefore, out.ir_steps, out.converged, undone, stop});
      if (stop) {
        early = true;
        break;
      }
    }
    absorb_right(A, B, Z, st, cfg, &fc);
    absorb_left(A, B, Q, st, cfg, &fc);
    ++rep.absorptions;
    if (early && st.k < cfg.nb) ++rep.premature_absorptions;
    s += st.k;

    if (cfg.debug_checks) {
      const double tol = 100.0 * double(n) * unit_roundoff;
      const double ra = detail::equivalence_residual(Q, A0, Z, A);
      const double rb = detail::equivalence_residual(Q, B0, Z, B.matrix());
      if (!(ra <= tol * na && rb <= tol * nbn))
        throw NumericalFailure("house_ht: equivalence lost after absorption");
      DenseMatrix lead(A.block(0, 0, n, s));
      for (Index j = 0; j < s; ++j)
        for (Index i = j + 2; i < n; ++i)
          if (lead(i, j) != 0.0) throw NumericalFailure("house_ht: reduced column of A refilled");
      for (Index j = 0; j < s; ++j)
        for (Index i = j + 1; i < n; ++i)
          if (B.matrix()(i, j) != 0.0) throw NumericalFailure("house_ht: leading part of B not triangular");
    }
  }

  // the last absorption ends at J = n-1, leaving only unit blocks
  if (B.num_blocks() != n)
    throw NumericalFailure("house_ht: B not triangular after the final absorption");
  res.T = B.matrix();
  rep.flops = fc.total;
  return res;
}

} // namespace househt

#endif
