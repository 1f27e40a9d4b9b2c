#ifndef HOUSEHT_REFLECTORS_HPP
#define HOUSEHT_REFLECTORS_HPP

#include "matrix.hpp"

namespace househt {

enum class Side { left, right };

/**
 * H = I - beta*v*v^T. By convention v[0] = 1; beta == 0 encodes the identity.
 * `alpha` is the value the pivot component takes in H*x.
 */
struct Reflector {
  Vector v;
  double beta = 0.0;
  double alpha = 0.0;

  bool identity() const { return beta == 0.0; }
  Index size() const { return static_cast<Index>(v.size()); }
};

/// Reflector with H*x = alpha*e_1, alpha = -sign(x_1)*||x||.
inline Reflector house(std::span<const double> x, FlopCounter* flops = nullptr) {
  require(!x.empty(), "house: empty vector");
  const Index m = static_cast<Index>(x.size());
  Reflector h;
  h.v.assign(x.size(), 0.0);
  h.v[0] = 1.0;
  const double x0 = x[0];
  const double xnorm = norm2(x.subspan(1));
  count(flops, 3.0 * double(m));
  if (xnorm == 0.0) {
    h.alpha = x0;
    return h;
  }
  const double nrm = std::hypot(x0, xnorm);
  const double alpha = x0 >= 0.0 ? -nrm : nrm;
  const double scal = 1.0 / (x0 - alpha);
  for (Index i = 1; i < m; ++i) h.v[i] = x[i] * scal;
  h.beta = (alpha - x0) / alpha;
  h.alpha = alpha;
  return h;
}

/// Mirror of house(): annihilates x[0..m-2] into the last position; v[m-1] = 1.
inline Reflector house_last(std::span<const double> x, FlopCounter* flops = nullptr) {
  Vector r(x.rbegin(), x.rend());
  Reflector h = house(r, flops);
  std::reverse(h.v.begin(), h.v.end());
  return h;
}

/// M <- H*M (left) or M*H (right) as a rank-1 update; 4mn flops.
inline void apply_reflector(View M, const Reflector& h, Side side, FlopCounter* flops = nullptr) {
  const Index len = h.size();
  const double* v = h.v.data();
  if (side == Side::left) {
    require(M.rows() == len, "apply_reflector: dimension mismatch");
    if (h.identity() || M.cols() == 0) return;
    count(flops, 4.0 * double(M.rows()) * double(M.cols()));
    for (Index j = 0; j < M.cols(); ++j) {
      double* c = M.col(j);
      double w = 0.0;
      for (Index i = 0; i < len; ++i) w += v[i] * c[i];
      w *= h.beta;
      if (w == 0.0) continue;
      for (Index i = 0; i < len; ++i) c[i] -= w * v[i];
    }
  } else {
    require(M.cols() == len, "apply_reflector: dimension mismatch");
    if (h.identity() || M.rows() == 0) return;
    const Index m = M.rows();
    count(flops, 4.0 * double(m) * double(M.cols()));
    Vector w(static_cast<std::size_t>(m), 0.0);
    for (Index j = 0; j < len; ++j) {
      const double* c = M.col(j);
      const double vj = v[j];
      if (vj == 0.0) continue;
      for (Index i = 0; i < m; ++i) w[i] += c[i] * vj;
    }
    for (Index j = 0; j < len; ++j) {
      double* c = M.col(j);
      const double s = h.beta * v[j];
      if (s == 0.0) continue;
      for (Index i = 0; i < m; ++i) c[i] -= w[i] * s;
    }
  }
}

/**
 * Product of reflectors H_1 H_2 ... H_k = I - V*T*V^T with T upper triangular.
 * Columns are appended in product order; earlier columns and the leading
 * block of T never change.
 */
class CompactWY {
public:
  explicit CompactWY(Index m = 0, Index capacity = 0) : m_(m) { reserve(capacity); }

  Index length() const { return m_; }
  Index size() const { return k_; }
  bool empty() const { return k_ == 0; }

  ConstView V() const { return ConstView(V_.data(), m_, k_, std::max<Index>(m_, 1)); }
  ConstView T() const { return ConstView(T_.data(), k_, k_, std::max<Index>(cap_, 1)); }
  double beta(Index c) const { return T_(c, c); }
  Index support_start(Index c) const { return start_[static_cast<std::size_t>(c)]; }

  void reserve(Index capacity) {
    if (capacity <= cap_) return;
    DenseMatrix V(m_, capacity), T(capacity, capacity);
    if (k_ > 0) {
      copy(V_.block(0, 0, m_, k_), V.block(0, 0, m_, k_));
      copy(T_.block(0, 0, k_, k_), T.block(0, 0, k_, k_));
    }
    V_ = std::move(V);
    T_ = std::move(T);
    cap_ = capacity;
  }

  /// Appends I - beta*v*v^T for a full-length v with no structural checks.
  void append_general(std::span<const double> v, double beta, FlopCounter* flops = nullptr) {
    require(static_cast<Index>(v.size()) == m_, "CompactWY: reflector length mismatch");
    if (k_ == cap_) reserve(std::max<Index>(4, 2 * cap_));
    Index first = 0;
    while (first < m_ && v[first] == 0.0) ++first;
    push(v, beta, first, flops);
  }

  void pop_back() {
    require(k_ > 0, "CompactWY: pop from empty aggregate");
    --k_;
    start_.pop_back();
    for (Index i = 0; i < m_; ++i) V_(i, k_) = 0.0;
    for (Index i = 0; i <= k_; ++i) T_(i, k_) = 0.0;
  }

  /// Explicit I - V*T*V^T, mainly for tests.
  DenseMatrix explicit_matrix() const {
    DenseMatrix G = DenseMatrix::identity(m_);
    if (k_ == 0) return G;
    DenseMatrix VT = multiply(V(), T());
    gemm_acc(G, VT, V(), -1.0, 1.0, false, true);
    return G;
  }

private:
  friend void wy_append(CompactWY&, const Reflector&, Index, FlopCounter*);

  void push(std::span<const double> v, double beta, Index first, FlopCounter* flops) {
    const Index k = k_;
    for (Index i = 0; i < m_; ++i) V_(i, k) = v[i];
    if (k > 0 && beta != 0.0) {
      // new column of T: -beta * T * (V^T v), using only the support of v
      Vector z(static_cast<std::size_t>(k), 0.0);
      for (Index c = 0; c < k; ++c) {
        const double* vc = V_.data() + c * V_.stride();
        double s = 0.0;
        for (Index i = first; i < m_; ++i) s += vc[i] * v[i];
        z[c] = s;
      }
      count(flops, 2.0 * double(m_ - first) * double(k) + double(k) * double(k));
      for (Index i = 0; i < k; ++i) {
        double s = 0.0;
        for (Index p = i; p < k; ++p) s += T_(i, p) * z[p];
        T_(i, k) = -beta * s;
      }
    } else {
      for (Index i = 0; i < k; ++i) T_(i, k) = 0.0;
    }
    T_(k, k) = beta;
    start_.push_back(first);
    ++k_;
  }

  Index m_ = 0;
  Index k_ = 0;
  Index cap_ = 0;
  DenseMatrix V_;
  DenseMatrix T_;
  std::vector<Index> start_;
};

/**
 * Appends h to a unit lower trapezoidal aggregate. A short h is embedded at
 * `offset`; a full-length h (offset < 0) must carry its unit entry at the
 * start of its support. Supports must start strictly below the previous one.
 */
inline void wy_append(CompactWY& wy, const Reflector& h, Index offset = -1,
                      FlopCounter* flops = nullptr) {
  const Index m = wy.length();
  Vector full;
  std::span<const double> v;
  Index first = 0;
  if (offset < 0) {
    require(h.size() == m, "wy_append: reflector length mismatch");
    while (first < m && h.v[first] == 0.0) ++first;
    require(first < m, "wy_append: zero reflector vector");
    v = h.v;
  } else {
    require(offset + h.size() == m, "wy_append: embedded reflector must reach the last row");
    full.assign(static_cast<std::size_t>(m), 0.0);
    std::copy(h.v.begin(), h.v.end(), full.begin() + offset);
    first = offset;
    v = full;
  }
  require(v[first] == 1.0, "wy_append: leading entry must be 1");
  require(wy.k_ == 0 || first > wy.start_.back(), "wy_append: support must start below previous");
  if (wy.k_ == wy.cap_) wy.reserve(std::max<Index>(4, 2 * wy.cap_));
  wy.push(v, h.beta, first, flops);
}

/**
 * M <- op(I - V T V^T) * M (left) or M * op(I - V T V^T) (right), op = transpose
 * when `trans` is set. Two gemm calls and one triangular multiply.
 */
inline void wy_apply(View M, const CompactWY& wy, Side side, bool trans,
                     FlopCounter* flops = nullptr) {
  const Index k = wy.size();
  const Index m = wy.length();
  if (side == Side::left) {
    require(M.rows() == m, "wy_apply: dimension mismatch");
    if (k == 0 || M.cols() == 0) return;
    DenseMatrix W(k, M.cols());
    gemm_acc(W, wy.V(), M, 1.0, 0.0, true, false, flops);
    trmm_upper(wy.T(), W, true, trans, flops);
    gemm_acc(M, wy.V(), W, -1.0, 1.0, false, false, flops);
  } else {
    require(M.cols() == m, "wy_apply: dimension mismatch");
    if (k == 0 || M.rows() == 0) return;
    DenseMatrix W(M.rows(), k);
    gemm_acc(W, M, wy.V(), 1.0, 0.0, false, false, flops);
    trmm_upper(wy.T(), W, false, trans, flops);
    gemm_acc(M, W, wy.V(), -1.0, 1.0, false, true, flops);
  }
}

/// Vector form of wy_apply (left side).
inline void wy_apply(std::span<double> x, const CompactWY& wy, bool trans,
                     FlopCounter* flops = nullptr) {
  View X(x.data(), static_cast<Index>(x.size()), 1, std::max<Index>(1, static_cast<Index>(x.size())));
  wy_apply(X, wy, Side::left, trans, flops);
}

/// I - V*W^T with W = V*T^T.
struct RegularWY {
  DenseMatrix V;
  DenseMatrix W;
};

inline RegularWY wy_to_regular(const CompactWY& wy, FlopCounter* flops = nullptr) {
  RegularWY r{DenseMatrix(wy.V()), DenseMatrix(wy.V())};
  trmm_upper(wy.T(), r.W, false, true, flops);
  return r;
}

} // namespace househt

#endif
