#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cqsim/compressors/inputs.hpp"
#include "cqsim/numkit/linalg.hpp"

namespace cqsim::problems {

/// f_i(x) = 1/2 x^T A_i x - b_i^T x, f = (1/n) sum f_i.
template <numkit::SymmetricOperator M>
class QuadraticProblem {
 public:
  using Matrix = M;

  QuadraticProblem(std::vector<M> a, std::vector<Vector> b, Vector x0)
      : a_(std::move(a)), b_(std::move(b)), x0_(std::move(x0)) {
    if (a_.empty() || a_.size() != b_.size()) throw std::invalid_argument("QuadraticProblem: need n matrices and n vectors");
    const std::size_t d = x0_.size();
    for (std::size_t i = 0; i < a_.size(); ++i)
      if (a_[i].dim() != d || b_[i].size() != d) throw std::invalid_argument("QuadraticProblem: dimension mismatch");
    mean_a_ = numkit::zero_like(a_.front());
    const double w = 1.0 / static_cast<double>(a_.size());
    for (const auto& m : a_) m.accumulate(mean_a_, w);
    mean_b_ = numkit::mean_of(b_);
    identical_curvature_ = true;
    homogeneous_ = true;
    for (std::size_t i = 1; i < a_.size(); ++i) {
      if (!(a_[i] == a_[0])) identical_curvature_ = false;
      if (b_[i] != b_[0]) homogeneous_ = false;
    }
    homogeneous_ = homogeneous_ && identical_curvature_;
    if (identical_curvature_) mean_a_ = a_.front();
    if (homogeneous_) mean_b_ = b_.front();
  }

  std::size_t n() const { return a_.size(); }
  std::size_t d() const { return x0_.size(); }
  const Vector& x0() const { return x0_; }
  const M& matrix(std::size_t i) const { return a_.at(i); }
  const Vector& linear(std::size_t i) const { return b_.at(i); }
  const std::vector<M>& matrices() const { return a_; }
  const M& mean_matrix() const { return mean_a_; }
  const Vector& mean_linear() const { return mean_b_; }

  /// All A_i equal: client gradient differences coincide.
  bool identical_curvature() const { return identical_curvature_; }
  /// All (A_i, b_i) equal: client gradients coincide.
  bool homogeneous() const { return homogeneous_; }

  double value(std::size_t i, std::span<const double> x) const { return value_of(a_.at(i), b_.at(i), x); }
  double value(std::span<const double> x) const { return value_of(mean_a_, mean_b_, x); }

  Vector gradient(std::size_t i, std::span<const double> x) const { return gradient_of(a_.at(i), b_.at(i), x); }
  Vector full_gradient(std::span<const double> x) const { return gradient_of(mean_a_, mean_b_, x); }

  compressors::ClientInputs client_gradients(std::span<const double> x) const {
    check(x);
    if (homogeneous_) return compressors::ClientInputs::replicated(full_gradient(x), n());
    std::vector<Vector> g(n());
    for (std::size_t i = 0; i < n(); ++i) g[i] = gradient(i, x);
    return compressors::ClientInputs::distinct(std::move(g));
  }

  /// grad f_i(x_new) - grad f_i(x_old) = A_i (x_new - x_old)
  compressors::ClientInputs gradient_differences(std::span<const double> x_new, std::span<const double> x_old) const {
    check(x_new);
    check(x_old);
    Vector dx(d());
    for (std::size_t j = 0; j < d(); ++j) dx[j] = x_new[j] - x_old[j];
    Vector out(d());
    if (identical_curvature_) {
      mean_a_.apply(dx, out);
      return compressors::ClientInputs::replicated(std::move(out), n());
    }
    std::vector<Vector> g(n(), Vector(d()));
    for (std::size_t i = 0; i < n(); ++i) a_[i].apply(dx, g[i]);
    return compressors::ClientInputs::distinct(std::move(g));
  }

  /// Solution of mean(A) x = mean(b); requires mean(A) positive definite.
  Vector minimizer() const { return numkit::solve(mean_a_, mean_b_); }
  double optimal_value() const { return value(minimizer()); }

 private:
  void check(std::span<const double> x) const {
    if (x.size() != d()) throw std::invalid_argument("QuadraticProblem: dimension mismatch");
  }

  double value_of(const M& a, const Vector& b, std::span<const double> x) const {
    check(x);
    Vector ax(d());
    a.apply(x, ax);
    return 0.5 * numkit::dot(x, ax) - numkit::dot(b, x);
  }

  Vector gradient_of(const M& a, const Vector& b, std::span<const double> x) const {
    check(x);
    Vector g(d());
    a.apply(x, g);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] -= b[j];
    return g;
  }

  std::vector<M> a_;
  std::vector<Vector> b_;
  Vector x0_;
  M mean_a_;
  Vector mean_b_;
  bool identical_curvature_ = false;
  bool homogeneous_ = false;
};

}  // namespace cqsim::problems
