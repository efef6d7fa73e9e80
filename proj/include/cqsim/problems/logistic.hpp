#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "cqsim/compressors/inputs.hpp"
#include "cqsim/numkit/linalg.hpp"
#include "cqsim/problems/libsvm.hpp"
#include "cqsim/problems/smoothness.hpp"

namespace cqsim::problems {

/// f_i(x) = (1/m_i) sum_k log(1 + exp(-y_k a_k^T x)) + lambda sum_j x_j^2 / (1 + x_j^2)
class LogisticProblem {
 public:
  LogisticProblem(std::vector<Dataset> shards, double lambda) : shards_(std::move(shards)), lambda_(lambda) {
    if (shards_.empty()) throw std::invalid_argument("LogisticProblem: need at least one shard");
    if (!(lambda_ > 0.0)) throw std::invalid_argument("LogisticProblem: lambda must be positive");
    d_ = shards_.front().d;
    for (const auto& s : shards_) {
      if (s.d != d_) throw std::invalid_argument("LogisticProblem: shards disagree on dimension");
      if (s.rows() == 0) throw std::invalid_argument("LogisticProblem: empty shard");
    }
    x0_.assign(d_, 0.0);
  }

  std::size_t n() const { return shards_.size(); }
  std::size_t d() const { return d_; }
  double lambda() const { return lambda_; }
  const Vector& x0() const { return x0_; }
  const Dataset& shard_data(std::size_t i) const { return shards_.at(i); }

  double value(std::size_t i, std::span<const double> x) const {
    check(x);
    const auto& s = shards_.at(i);
    double loss = 0.0;
    for (std::size_t r = 0; r < s.rows(); ++r) {
      const double z = s.labels[r] * row_dot(s, r, x);
      loss += std::log1p(std::exp(-std::abs(z))) + std::max(-z, 0.0);
    }
    return loss / static_cast<double>(s.rows()) + regularizer(x);
  }

  double value(std::span<const double> x) const {
    double v = 0.0;
    for (std::size_t i = 0; i < n(); ++i) v += value(i, x);
    return v / static_cast<double>(n());
  }

  Vector gradient(std::size_t i, std::span<const double> x) const {
    check(x);
    const auto& s = shards_.at(i);
    Vector g(d_, 0.0);
    const double inv_m = 1.0 / static_cast<double>(s.rows());
    for (std::size_t r = 0; r < s.rows(); ++r) {
      const double y = s.labels[r];
      const double z = y * row_dot(s, r, x);
      // -y * sigmoid(-z) / m
      const double coef = -y * inv_m / (1.0 + std::exp(z));
      for (std::size_t k = s.row_begin(r); k < s.row_end(r); ++k) g[s.cols[k]] += coef * s.vals[k];
    }
    for (std::size_t j = 0; j < d_; ++j) {
      const double t = 1.0 + x[j] * x[j];
      g[j] += lambda_ * 2.0 * x[j] / (t * t);
    }
    return g;
  }

  Vector full_gradient(std::span<const double> x) const {
    Vector g(d_, 0.0);
    for (std::size_t i = 0; i < n(); ++i) {
      const Vector gi = gradient(i, x);
      for (std::size_t j = 0; j < d_; ++j) g[j] += gi[j];
    }
    for (auto& v : g) v /= static_cast<double>(n());
    return g;
  }

  compressors::ClientInputs client_gradients(std::span<const double> x) const {
    std::vector<Vector> g(n());
    for (std::size_t i = 0; i < n(); ++i) g[i] = gradient(i, x);
    return compressors::ClientInputs::distinct(std::move(g));
  }

  compressors::ClientInputs gradient_differences(std::span<const double> x_new, std::span<const double> x_old) const {
    std::vector<Vector> g(n());
    for (std::size_t i = 0; i < n(); ++i) {
      g[i] = gradient(i, x_new);
      const Vector old = gradient(i, x_old);
      for (std::size_t j = 0; j < d_; ++j) g[i][j] -= old[j];
    }
    return compressors::ClientInputs::distinct(std::move(g));
  }

 private:
  void check(std::span<const double> x) const {
    if (x.size() != d_) throw std::invalid_argument("LogisticProblem: dimension mismatch");
  }

  static double row_dot(const Dataset& s, std::size_t r, std::span<const double> x) {
    double z = 0.0;
    for (std::size_t k = s.row_begin(r); k < s.row_end(r); ++k) z += s.vals[k] * x[s.cols[k]];
    return z;
  }

  double regularizer(std::span<const double> x) const {
    double s = 0.0;
    for (double v : x) s += v * v / (1.0 + v * v);
    return lambda_ * s;
  }

  std::vector<Dataset> shards_;
  double lambda_;
  std::size_t d_ = 0;
  Vector x0_;
};

/// Upper bounds on the smoothness constants of a logistic problem. The data
/// term of shard i has Hessian at most (1/(4 m_i)) X_i^T X_i; the regularizer
/// Hessian is bounded by 2 lambda in absolute value. L+- is not bounded
/// separately and is reported as L+.
inline SmoothnessProfile logistic_smoothness_bounds(const LogisticProblem& p) {
  const std::size_t n = p.n(), d = p.d();
  SmoothnessProfile out;
  numkit::SymmetricMatrix mean(d);
  out.L_i.resize(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = p.shard_data(i);
    numkit::SymmetricMatrix gram(d);
    const double w = 1.0 / (4.0 * static_cast<double>(s.rows()));
    for (std::size_t r = 0; r < s.rows(); ++r)
      for (std::size_t a = s.row_begin(r); a < s.row_end(r); ++a)
        for (std::size_t b = a; b < s.row_end(r); ++b) gram.add(s.cols[a], s.cols[b], w * s.vals[a] * s.vals[b]);
    gram.accumulate(mean, 1.0 / static_cast<double>(n));
    out.L_i[i] = numkit::max_eigenvalue(gram) + 2.0 * p.lambda();
    sq += out.L_i[i] * out.L_i[i];
  }
  out.L_minus = numkit::max_eigenvalue(mean) + 2.0 * p.lambda();
  out.L_plus = std::sqrt(sq / static_cast<double>(n));
  out.L_pm = out.L_plus;
  double s = 0.0;
  for (double v : out.L_i) s += v;
  out.L_avg = s / static_cast<double>(n);
  return out;
}

/// Closed-form constants are not available for logistic problems.
inline SmoothnessProfile smoothness_profile(const LogisticProblem&) {
  throw UnsupportedProblem("smoothness_profile: logistic problems have no closed-form constants");
}

}  // namespace cqsim::problems
