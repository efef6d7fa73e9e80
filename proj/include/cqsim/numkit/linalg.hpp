#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqsim {

using Vector = std::vector<double>;

}  // namespace cqsim

namespace cqsim::numkit {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(std::span<const double> a) { return dot(a, a); }

inline double norm2(std::span<const double> a) {
  // Scaled to avoid overflow/underflow on extreme inputs.
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : a) s += (v / scale) * (v / scale);
  return scale * std::sqrt(s);
}

/// q-norm for q in [1, inf].
inline double norm_q(std::span<const double> a, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("norm_q: q must be in [1, inf]");
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (std::isinf(q) || scale == 0.0) return scale;
  if (q == 2.0) return norm2(a);
  double s = 0.0;
  for (double v : a) s += std::pow(std::abs(v) / scale, q);
  return scale * std::pow(s, 1.0 / q);
}

inline double dist_sq(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

inline Vector mean_of(std::span<const Vector> rows) {
  if (rows.empty()) throw std::invalid_argument("mean_of: no rows");
  Vector m(rows.front().size(), 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += r[j];
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (auto& v : m) v *= inv;
  return m;
}

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense symmetric matrix. Every setter writes both triangles.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t d) : d_(d), a_(d * d, 0.0) {}

  static SymmetricMatrix identity(std::size_t d) {
    SymmetricMatrix m(d);
    for (std::size_t i = 0; i < d; ++i) m.set(i, i, 1.0);
    return m;
  }

  static SymmetricMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    SymmetricMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) throw std::invalid_argument("SymmetricMatrix: not square");
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (rows[i][j] != rows[j][i]) throw std::invalid_argument("SymmetricMatrix: not symmetric");
        m.a_[i * m.d_ + j] = rows[i][j];
      }
    }
    return m;
  }

  std::size_t dim() const { return d_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * d_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    a_[i * d_ + j] = v;
    a_[j * d_ + i] = v;
  }
  void add(std::size_t i, std::size_t j, double v) {
    a_[i * d_ + j] += v;
    if (i != j) a_[j * d_ + i] += v;
  }

  void apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < d_; ++i) y[i] = dot({a_.data() + i * d_, d_}, x);
  }

  /// out += w * this^2
  void accumulate_square(SymmetricMatrix& out, double w) const {
    const Eigen::Map<const DenseMatrix> a(a_.data(), d_, d_);
    const DenseMatrix sq = a * a;
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = 0; j < d_; ++j) out.a_[i * d_ + j] += w * sq(i, j);
  }

  /// out += w * this
  void accumulate(SymmetricMatrix& out, double w) const {
    for (std::size_t k = 0; k < a_.size(); ++k) out.a_[k] += w * a_[k];
  }

  SymmetricMatrix to_dense() const { return *this; }
  std::span<const double> data() const { return a_; }

  friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

 private:
  std::size_t d_ = 0;
  std::vector<double> a_;
};

/// Symmetric tridiagonal matrix: diagonal of length d, off-diagonal of length d-1.
class TridiagonalMatrix {
 public:
  TridiagonalMatrix() = default;
  TridiagonalMatrix(Vector diag, Vector off) : diag_(std::move(diag)), off_(std::move(off)) {
    if (!diag_.empty() && off_.size() + 1 != diag_.size())
      throw std::invalid_argument("TridiagonalMatrix: off-diagonal must have length d-1");
  }

  /// scale * tridiag(-1, 2, -1) + shift * I
  static TridiagonalMatrix second_difference(std::size_t d, double scale, double shift = 0.0) {
    return TridiagonalMatrix(Vector(d, 2.0 * scale + shift), Vector(d ? d - 1 : 0, -scale));
  }

  std::size_t dim() const { return diag_.size(); }
  const Vector& diagonal() const { return diag_; }
  const Vector& off_diagonal() const { return off_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return diag_[i];
    if (i + 1 == j) return off_[i];
    if (j + 1 == i) return off_[j];
    return 0.0;
  }

  void shift_diagonal(double s) {
    for (auto& v : diag_) v += s;
  }

  void apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t d = diag_.size();
    if (d == 0) return;
    if (d == 1) {
      y[0] = diag_[0] * x[0];
      return;
    }
    y[0] = diag_[0] * x[0] + off_[0] * x[1];
    for (std::size_t i = 1; i + 1 < d; ++i) y[i] = off_[i - 1] * x[i - 1] + diag_[i] * x[i] + off_[i] * x[i + 1];
    y[d - 1] = off_[d - 2] * x[d - 2] + diag_[d - 1] * x[d - 1];
  }

  /// out += w * this^2 (pentadiagonal, O(d))
  void accumulate_square(SymmetricMatrix& out, double w) const {
    const std::size_t d = diag_.size();
    for (std::size_t i = 0; i < d; ++i) {
      double s = diag_[i] * diag_[i];
      if (i > 0) s += off_[i - 1] * off_[i - 1];
      if (i + 1 < d) s += off_[i] * off_[i];
      out.add(i, i, w * s);
      if (i + 1 < d) out.add(i, i + 1, w * off_[i] * (diag_[i] + diag_[i + 1]));
      if (i + 2 < d) out.add(i, i + 2, w * off_[i] * off_[i + 1]);
    }
  }

  void accumulate(SymmetricMatrix& out, double w) const {
    const std::size_t d = diag_.size();
    for (std::size_t i = 0; i < d; ++i) {
      out.add(i, i, w * diag_[i]);
      if (i + 1 < d) out.add(i, i + 1, w * off_[i]);
    }
  }

  void accumulate(TridiagonalMatrix& out, double w) const {
    for (std::size_t i = 0; i < diag_.size(); ++i) out.diag_[i] += w * diag_[i];
    for (std::size_t i = 0; i < off_.size(); ++i) out.off_[i] += w * off_[i];
  }

  SymmetricMatrix to_dense() const {
    SymmetricMatrix m(dim());
    accumulate(m, 1.0);
    return m;
  }

  /// Solves this * x = rhs (Thomas algorithm; requires a nonsingular matrix
  /// that needs no pivoting, e.g. positive definite).
  Vector solve(std::span<const double> rhs) const {
    const std::size_t d = diag_.size();
    Vector c(d, 0.0), x(rhs.begin(), rhs.end());
    double denom = diag_[0];
    if (denom == 0.0) throw std::domain_error("TridiagonalMatrix::solve: zero pivot");
    if (d > 1) c[0] = off_[0] / denom;
    x[0] /= denom;
    for (std::size_t i = 1; i < d; ++i) {
      denom = diag_[i] - off_[i - 1] * c[i - 1];
      if (denom == 0.0) throw std::domain_error("TridiagonalMatrix::solve: zero pivot");
      if (i + 1 < d) c[i] = off_[i] / denom;
      x[i] = (x[i] - off_[i - 1] * x[i - 1]) / denom;
    }
    for (std::size_t i = d - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    return x;
  }

  friend bool operator==(const TridiagonalMatrix&, const TridiagonalMatrix&) = default;

 private:
  Vector diag_;
  Vector off_;
};

/// Anything the problem and smoothness code can treat as a symmetric matrix.
template <typename M>
concept SymmetricOperator = requires(const M m, std::span<const double> x, std::span<double> y, SymmetricMatrix& out) {
  { m.dim() } -> std::convertible_to<std::size_t>;
  m.apply(x, y);
  m.accumulate_square(out, 1.0);
  m.accumulate(out, 1.0);
  { m.to_dense() } -> std::convertible_to<SymmetricMatrix>;
};

inline Vector solve(const TridiagonalMatrix& m, std::span<const double> rhs) { return m.solve(rhs); }

/// Solves m * x = rhs for symmetric positive (semi)definite m.
inline Vector solve(const SymmetricMatrix& m, std::span<const double> rhs) {
  const std::size_t d = m.dim();
  const Eigen::Map<const DenseMatrix> a(m.data().data(), d, d);
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), d);
  Eigen::LDLT<DenseMatrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw std::domain_error("solve: factorization failed");
  const Eigen::VectorXd x = ldlt.solve(b);
  return Vector(x.data(), x.data() + d);
}

/// A zero matrix with the same structure as m.
inline SymmetricMatrix zero_like(const SymmetricMatrix& m) { return SymmetricMatrix(m.dim()); }
inline TridiagonalMatrix zero_like(const TridiagonalMatrix& m) {
  return TridiagonalMatrix(Vector(m.dim(), 0.0), Vector(m.off_diagonal().size(), 0.0));
}

namespace detail {

inline void require_finite(std::span<const double> v, const char* who) {
  if (!all_finite(v)) throw std::invalid_argument(std::string(who) + ": non-finite entries");
}

inline Eigen::VectorXd eigenvalues(const SymmetricMatrix& m) {
  require_finite(m.data(), "eigenvalues");
  if (m.dim() == 0) return {};
  const Eigen::Map<const DenseMatrix> a(m.data().data(), m.dim(), m.dim());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalues: solver did not converge");
  return es.eigenvalues();
}

inline Eigen::VectorXd eigenvalues(const TridiagonalMatrix& m) {
  require_finite(m.diagonal(), "eigenvalues");
  require_finite(m.off_diagonal(), "eigenvalues");
  if (m.dim() == 0) return {};
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(m.diagonal().data(), m.dim());
  Eigen::VectorXd sub = m.dim() > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(m.off_diagonal().data(), m.dim() - 1))
                                    : Eigen::VectorXd(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalues: solver did not converge");
  return es.eigenvalues();
}

}  // namespace detail

/// Ascending eigenvalues.
template <typename M>
Vector eigenvalues(const M& m) {
  const Eigen::VectorXd ev = detail::eigenvalues(m);
  return Vector(ev.data(), ev.data() + ev.size());
}

/// Largest absolute eigenvalue.
template <typename M>
double spectral_norm(const M& m) {
  const Eigen::VectorXd ev = detail::eigenvalues(m);
  if (ev.size() == 0) return 0.0;
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

template <typename M>
double min_eigenvalue(const M& m) {
  const Eigen::VectorXd ev = detail::eigenvalues(m);
  if (ev.size() == 0) throw std::invalid_argument("min_eigenvalue: empty matrix");
  return ev(0);
}

template <typename M>
double max_eigenvalue(const M& m) {
  const Eigen::VectorXd ev = detail::eigenvalues(m);
  if (ev.size() == 0) throw std::invalid_argument("max_eigenvalue: empty matrix");
  return ev(ev.size() - 1);
}

}  // namespace cqsim::numkit
