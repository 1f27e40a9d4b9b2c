#ifndef HOUSEHT_MATRIX_HPP
#define HOUSEHT_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace househt {

using Index = std::ptrdiff_t;

/// Unit roundoff of IEEE double precision.
inline constexpr double unit_roundoff = std::numeric_limits<double>::epsilon() / 2;

/// Raised when a caller breaks a documented precondition.
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Raised when an internal residual guard fires.
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a triangular or block solve meets an exact zero pivot.
class SingularSystem : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* what) {
  if (!cond) throw ContractViolation(what);
}

/// Monotone flop tally, passed explicitly to the kernels.
struct FlopCounter {
  std::uint64_t total = 0;
  void add(std::uint64_t f) { total += f; }
  void reset() { total = 0; }
};

inline void count(FlopCounter* fc, double f) {
  if (fc && f > 0) fc->add(static_cast<std::uint64_t>(f));
}

/**
 * Non-owning column-major window. Element (i,j) lives at data[i + j*stride].
 */
template <typename T>
class MatrixRef {
public:
  MatrixRef() = default;
  MatrixRef(T* data, Index rows, Index cols, Index stride)
    : data_(data), rows_(rows), cols_(cols), stride_(stride) {}

  // view-to-const conversion
  template <typename U, typename = std::enable_if_t<std::is_same_v<const U, T>>>
  MatrixRef(const MatrixRef<U>& o)
    : data_(o.data()), rows_(o.rows()), cols_(o.cols()), stride_(o.stride()) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index stride() const { return stride_; }
  T* data() const { return data_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  T& operator()(Index i, Index j) const { return data_[i + j * stride_]; }
  T* col(Index j) const { return data_ + j * stride_; }

  MatrixRef block(Index i, Index j, Index m, Index n) const {
    require(i >= 0 && j >= 0 && m >= 0 && n >= 0 && i + m <= rows_ && j + n <= cols_,
            "block out of range");
    return MatrixRef(data_ + i + j * stride_, m, n, stride_);
  }
  MatrixRef cols_range(Index j, Index n) const { return block(0, j, rows_, n); }
  MatrixRef rows_range(Index i, Index m) const { return block(i, 0, m, cols_); }
  std::span<T> column(Index j) const { return std::span<T>(col(j), static_cast<std::size_t>(rows_)); }

private:
  T* data_ = nullptr;
  Index rows_ = 0;
  Index cols_ = 0;
  Index stride_ = 1;
};

using View = MatrixRef<double>;
using ConstView = MatrixRef<const double>;

/**
 * Owning column-major dense matrix with stride == rows.
 */
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(Index rows, Index cols, double fill = 0.0)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {
    require(rows >= 0 && cols >= 0, "negative dimension");
  }
  explicit DenseMatrix(ConstView v) : DenseMatrix(v.rows(), v.cols()) {
    for (Index j = 0; j < cols_; ++j)
      std::copy(v.col(j), v.col(j) + rows_, data_.data() + j * rows_);
  }
  /// Row-major initializer, handy for small literals.
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = static_cast<Index>(rows.size());
    cols_ = rows_ ? static_cast<Index>(rows.begin()->size()) : 0;
    data_.assign(static_cast<std::size_t>(rows_ * cols_), 0.0);
    Index i = 0;
    for (auto& r : rows) {
      require(static_cast<Index>(r.size()) == cols_, "ragged initializer");
      Index j = 0;
      for (double x : r) (*this)(i, j++) = x;
      ++i;
    }
  }

  static DenseMatrix identity(Index n) {
    DenseMatrix m(n, n);
    for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index stride() const { return rows_ > 0 ? rows_ : 1; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator()(Index i, Index j) { return data_[static_cast<std::size_t>(i + j * rows_)]; }
  double operator()(Index i, Index j) const { return data_[static_cast<std::size_t>(i + j * rows_)]; }

  View view() { return View(data_.data(), rows_, cols_, stride()); }
  ConstView view() const { return ConstView(data_.data(), rows_, cols_, stride()); }
  ConstView cview() const { return view(); }
  operator View() { return view(); }
  operator ConstView() const { return view(); }

  View block(Index i, Index j, Index m, Index n) { return view().block(i, j, m, n); }
  ConstView block(Index i, Index j, Index m, Index n) const { return view().block(i, j, m, n); }

  bool operator==(const DenseMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// elementwise helpers

inline void copy(ConstView src, View dst) {
  require(src.rows() == dst.rows() && src.cols() == dst.cols(), "copy: dimension mismatch");
  for (Index j = 0; j < src.cols(); ++j)
    std::copy(src.col(j), src.col(j) + src.rows(), dst.col(j));
}

inline void fill(View m, double x) {
  for (Index j = 0; j < m.cols(); ++j) std::fill(m.col(j), m.col(j) + m.rows(), x);
}

inline DenseMatrix transpose(ConstView a) {
  DenseMatrix t(a.cols(), a.rows());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

namespace detail {
inline double scaled_sumsq(const double* x, Index n, Index inc, double& scale, double& ssq) {
  for (Index i = 0; i < n; ++i) {
    double a = std::abs(x[i * inc]);
    if (a == 0.0) continue;
    if (scale < a) {
      ssq = 1.0 + ssq * (scale / a) * (scale / a);
      scale = a;
    } else {
      ssq += (a / scale) * (a / scale);
    }
  }
  return scale * std::sqrt(ssq);
}
} // namespace detail

/// Euclidean norm, overflow-safe.
inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  if (std::isfinite(s) && s > std::numeric_limits<double>::min() / unit_roundoff)
    return std::sqrt(s);
  double scale = 0.0, ssq = 1.0;
  return detail::scaled_sumsq(x.data(), static_cast<Index>(x.size()), 1, scale, ssq);
}

inline double frob_norm(ConstView m) {
  double s = 0.0;
  for (Index j = 0; j < m.cols(); ++j) {
    const double* c = m.col(j);
    for (Index i = 0; i < m.rows(); ++i) s += c[i] * c[i];
  }
  if (s == 0.0) return 0.0;
  if (std::isfinite(s) && s > std::numeric_limits<double>::min() / unit_roundoff)
    return std::sqrt(s);
  double scale = 0.0, ssq = 1.0;
  for (Index j = 0; j < m.cols(); ++j) detail::scaled_sumsq(m.col(j), m.rows(), 1, scale, ssq);
  return scale * std::sqrt(ssq);
}

inline double max_abs(ConstView m) {
  double r = 0.0;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) r = std::max(r, std::abs(m(i, j)));
  return r;
}

// ---------------------------------------------------------------------------
// kernels

enum class Op { none, trans };

namespace detail {

constexpr Index row_chunk = 256;

// C(:, j0:j0+n) += op(A) * op(B) with beta already applied
inline void gemm_nn(Index m, Index n, Index k, double alpha, ConstView A, ConstView B, View C,
                    bool btrans) {
  auto bval = [&](Index p, Index j) { return btrans ? B(j, p) : B(p, j); };
  for (Index i0 = 0; i0 < m; i0 += row_chunk) {
    Index mb = std::min(row_chunk, m - i0);
    Index j = 0;
    for (; j + 4 <= n; j += 4) {
      double* c0 = C.col(j) + i0;
      double* c1 = C.col(j + 1) + i0;
      double* c2 = C.col(j + 2) + i0;
      double* c3 = C.col(j + 3) + i0;
      for (Index p = 0; p < k; ++p) {
        double b0 = alpha * bval(p, j), b1 = alpha * bval(p, j + 1);
        double b2 = alpha * bval(p, j + 2), b3 = alpha * bval(p, j + 3);
        const double* a = A.col(p) + i0;
        for (Index i = 0; i < mb; ++i) {
          double ai = a[i];
          c0[i] += ai * b0;
          c1[i] += ai * b1;
          c2[i] += ai * b2;
          c3[i] += ai * b3;
        }
      }
    }
    for (; j < n; ++j) {
      double* c0 = C.col(j) + i0;
      for (Index p = 0; p < k; ++p) {
        double b0 = alpha * bval(p, j);
        const double* a = A.col(p) + i0;
        for (Index i = 0; i < mb; ++i) c0[i] += a[i] * b0;
      }
    }
  }
}

// C += alpha * A^T * B: entries are dot products down columns
inline void gemm_tn(Index m, Index n, Index k, double alpha, ConstView A, ConstView B, View C) {
  Index i = 0;
  for (; i + 2 <= m; i += 2) {
    const double* a0 = A.col(i);
    const double* a1 = A.col(i + 1);
    Index j = 0;
    for (; j + 2 <= n; j += 2) {
      const double* b0 = B.col(j);
      const double* b1 = B.col(j + 1);
      double s00 = 0, s01 = 0, s10 = 0, s11 = 0;
      for (Index p = 0; p < k; ++p) {
        s00 += a0[p] * b0[p];
        s10 += a1[p] * b0[p];
        s01 += a0[p] * b1[p];
        s11 += a1[p] * b1[p];
      }
      C(i, j) += alpha * s00;
      C(i + 1, j) += alpha * s10;
      C(i, j + 1) += alpha * s01;
      C(i + 1, j + 1) += alpha * s11;
    }
    for (; j < n; ++j) {
      const double* b0 = B.col(j);
      double s0 = 0, s1 = 0;
      for (Index p = 0; p < k; ++p) {
        s0 += a0[p] * b0[p];
        s1 += a1[p] * b0[p];
      }
      C(i, j) += alpha * s0;
      C(i + 1, j) += alpha * s1;
    }
  }
  for (; i < m; ++i) {
    const double* a0 = A.col(i);
    for (Index j = 0; j < n; ++j) {
      const double* b0 = B.col(j);
      double s = 0;
      for (Index p = 0; p < k; ++p) s += a0[p] * b0[p];
      C(i, j) += alpha * s;
    }
  }
}

inline void gemm_tt(Index m, Index n, Index k, double alpha, ConstView A, ConstView B, View C) {
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) {
      double s = 0;
      for (Index p = 0; p < k; ++p) s += A(p, i) * B(j, p);
      C(i, j) += alpha * s;
    }
}

} // namespace detail

/**
 * C <- alpha*op(A)*op(B) + beta*C.
 * Counts 2mnk flops, plus mn when beta is neither 0 nor 1.
 */
inline void gemm_acc(View C, ConstView A, ConstView B, double alpha, double beta,
                     bool transA = false, bool transB = false, FlopCounter* flops = nullptr) {
  const Index m = transA ? A.cols() : A.rows();
  const Index k = transA ? A.rows() : A.cols();
  const Index kb = transB ? B.cols() : B.rows();
  const Index n = transB ? B.rows() : B.cols();
  require(k == kb && C.rows() == m && C.cols() == n, "gemm_acc: dimension mismatch");
  if (beta == 0.0) {
    fill(C, 0.0);
  } else if (beta != 1.0) {
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i) C(i, j) *= beta;
    count(flops, double(m) * double(n));
  }
  if (m == 0 || n == 0 || k == 0 || alpha == 0.0) return;
  count(flops, 2.0 * double(m) * double(n) * double(k));
  if (!transA)
    detail::gemm_nn(m, n, k, alpha, A, B, C, transB);
  else if (!transB)
    detail::gemm_tn(m, n, k, alpha, A, B, C);
  else
    detail::gemm_tt(m, n, k, alpha, A, B, C);
}

inline DenseMatrix multiply(ConstView A, ConstView B, bool transA = false, bool transB = false) {
  DenseMatrix C(transA ? A.cols() : A.rows(), transB ? B.rows() : B.cols());
  gemm_acc(C, A, B, 1.0, 0.0, transA, transB);
  return C;
}

/// y <- alpha*op(A)*x + beta*y.
inline void gemv(std::span<double> y, ConstView A, std::span<const double> x, double alpha,
                 double beta, bool transA = false, FlopCounter* flops = nullptr) {
  const Index m = transA ? A.cols() : A.rows();
  const Index k = transA ? A.rows() : A.cols();
  require(static_cast<Index>(y.size()) == m && static_cast<Index>(x.size()) == k,
          "gemv: dimension mismatch");
  View Y(y.data(), m, 1, std::max<Index>(m, 1));
  ConstView X(x.data(), k, 1, std::max<Index>(k, 1));
  gemm_acc(Y, A, X, alpha, beta, transA, false, flops);
}

/**
 * In-place product with an upper triangular T (k x k):
 * side left computes W <- op(T) W, side right computes W <- W op(T).
 * Counts k*k*n flops.
 */
inline void trmm_upper(ConstView T, View W, bool left, bool trans, FlopCounter* flops = nullptr) {
  const Index k = T.rows();
  require(T.cols() == k && (left ? W.rows() : W.cols()) == k, "trmm_upper: dimension mismatch");
  if (k == 0) return;
  if (left) {
    count(flops, double(k) * double(k) * double(W.cols()));
    for (Index c = 0; c < W.cols(); ++c) {
      double* w = W.col(c);
      if (!trans) {
        // (T w)_i = sum_{p>=i} T(i,p) w_p, ascending i keeps inputs intact
        for (Index i = 0; i < k; ++i) {
          double s = 0;
          for (Index p = i; p < k; ++p) s += T(i, p) * w[p];
          w[i] = s;
        }
      } else {
        for (Index i = k - 1; i >= 0; --i) {
          double s = 0;
          for (Index p = 0; p <= i; ++p) s += T(p, i) * w[p];
          w[i] = s;
        }
      }
    }
  } else {
    const Index m = W.rows();
    count(flops, double(k) * double(k) * double(m));
    if (!trans) {
      // (W T)_{:,j} = sum_{p<=j} W_{:,p} T(p,j), descending j
      for (Index j = k - 1; j >= 0; --j) {
        double* wj = W.col(j);
        double tjj = T(j, j);
        for (Index i = 0; i < m; ++i) wj[i] *= tjj;
        for (Index p = 0; p < j; ++p) {
          double t = T(p, j);
          if (t == 0.0) continue;
          const double* wp = W.col(p);
          for (Index i = 0; i < m; ++i) wj[i] += wp[i] * t;
        }
      }
    } else {
      // (W T^T)_{:,j} = sum_{p>=j} W_{:,p} T(j,p), ascending j
      for (Index j = 0; j < k; ++j) {
        double* wj = W.col(j);
        double tjj = T(j, j);
        for (Index i = 0; i < m; ++i) wj[i] *= tjj;
        for (Index p = j + 1; p < k; ++p) {
          double t = T(j, p);
          if (t == 0.0) continue;
          const double* wp = W.col(p);
          for (Index i = 0; i < m; ++i) wj[i] += wp[i] * t;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// structure predicates

enum class Structure { hessenberg, upper_triangular, block_upper_triangular };

/**
 * Largest magnitude in the region that the given pattern forces to zero.
 * For the block kind, offsets partition [0, n] into diagonal blocks.
 */
inline double structure_defect(ConstView M, Structure kind, const std::vector<Index>& offsets = {}) {
  require(M.rows() == M.cols(), "structure_defect: square matrix required");
  const Index n = M.rows();
  double d = 0.0;
  if (kind == Structure::block_upper_triangular) {
    require(!offsets.empty() && offsets.front() == 0 && offsets.back() == n,
            "structure_defect: offsets must partition [0,n]");
    for (std::size_t b = 0; b + 1 < offsets.size(); ++b) {
      require(offsets[b] < offsets[b + 1], "structure_defect: offsets must increase");
      for (Index j = offsets[b]; j < offsets[b + 1]; ++j)
        for (Index i = offsets[b + 1]; i < n; ++i) d = std::max(d, std::abs(M(i, j)));
    }
    return d;
  }
  const Index sub = kind == Structure::hessenberg ? 2 : 1;
  for (Index j = 0; j < n; ++j)
    for (Index i = j + sub; i < n; ++i) d = std::max(d, std::abs(M(i, j)));
  return d;
}

/// ||M^T M - I||_F
inline double orthogonality_defect(ConstView M) {
  DenseMatrix G = multiply(M, M, true, false);
  for (Index i = 0; i < G.rows(); ++i) G(i, i) -= 1.0;
  return frob_norm(G);
}

} // namespace househt

#endif
