#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cqsim/numkit/linalg.hpp"
#include "cqsim/numkit/random.hpp"
#include "cqsim/problems/quadratic.hpp"

namespace cqsim::problems {

using TridiagonalQuadratic = QuadraticProblem<numkit::TridiagonalMatrix>;

namespace detail {

inline Vector start_point(std::size_t d) {
  Vector x0(d, 0.0);
  x0[0] = std::sqrt(static_cast<double>(d));
  return x0;
}

}  // namespace detail

/// Task with controlled Hessian variance. Client i draws (xi_s, xi_b) from
/// rng/i: nu_s = 1 + s xi_s, nu_b = s xi_b (standard normals);
/// A_i = nu_s/4 tridiag(-1, 2, -1), b_i = nu_s/4 (-1 + nu_b, 0, ..., 0);
/// then every A_i is shifted by (lambda - lambda_min(mean A)) I.
inline TridiagonalQuadratic generate_quadratic_lpm(std::size_t n, std::size_t d, double lambda, double s,
                                                   const numkit::RandomStream& rng) {
  if (n == 0 || d == 0) throw std::invalid_argument("generate_quadratic_lpm: n and d must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("generate_quadratic_lpm: lambda must be positive");
  if (!(s >= 0.0)) throw std::invalid_argument("generate_quadratic_lpm: noise scale must be nonnegative");
  std::vector<numkit::TridiagonalMatrix> a;
  std::vector<Vector> b;
  a.reserve(n);
  b.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = rng.child(i);
    const double nu_s = 1.0 + s * r.normal();
    const double nu_b = s * r.normal();
    a.push_back(numkit::TridiagonalMatrix::second_difference(d, nu_s / 4.0));
    Vector bi(d, 0.0);
    bi[0] = nu_s / 4.0 * (-1.0 + nu_b);
    b.push_back(std::move(bi));
  }
  auto mean = numkit::zero_like(a.front());
  for (const auto& m : a) m.accumulate(mean, 1.0 / static_cast<double>(n));
  bool identical = true;
  for (const auto& m : a) identical = identical && m == a.front();
  const double shift = lambda - numkit::min_eigenvalue(identical ? a.front() : mean);
  for (auto& m : a) m.shift_diagonal(shift);
  return TridiagonalQuadratic(std::move(a), std::move(b), detail::start_point(d));
}

/// Task with controlled per-client smoothness. Client i draws (xi_s, xi_b)
/// from rng/i: nu_s = 1 + s xi_s (xi_s ~ Exp(1)), nu_b = s xi_b (normal);
/// A_i = nu_s/4 tridiag(-1, 2, -1), b_i = (-1 + nu_b, 0, ..., 0). No shift.
inline TridiagonalQuadratic generate_quadratic_li(std::size_t n, std::size_t d, double s,
                                                  const numkit::RandomStream& rng) {
  if (n == 0 || d == 0) throw std::invalid_argument("generate_quadratic_li: n and d must be positive");
  if (!(s >= 0.0)) throw std::invalid_argument("generate_quadratic_li: noise scale must be nonnegative");
  std::vector<numkit::TridiagonalMatrix> a;
  std::vector<Vector> b;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = rng.child(i);
    const double nu_s = 1.0 + s * r.exponential();
    const double nu_b = s * r.normal();
    a.push_back(numkit::TridiagonalMatrix::second_difference(d, nu_s / 4.0));
    Vector bi(d, 0.0);
    bi[0] = -1.0 + nu_b;
    b.push_back(std::move(bi));
  }
  return TridiagonalQuadratic(std::move(a), std::move(b), detail::start_point(d));
}

/// Adds independent N(0, scale^2) perturbations to every b_i. The Hessians
/// are untouched, so the Hessian variance stays exactly as before.
template <numkit::SymmetricOperator M>
QuadraticProblem<M> perturb_linear_terms(const QuadraticProblem<M>& p, double scale, const numkit::RandomStream& rng) {
  std::vector<Vector> b;
  for (std::size_t i = 0; i < p.n(); ++i) {
    auto r = rng.child(i);
    Vector bi = p.linear(i);
    for (auto& v : bi) v += scale * r.normal();
    b.push_back(std::move(bi));
  }
  return QuadraticProblem<M>(p.matrices(), std::move(b), p.x0());
}

}  // namespace cqsim::problems
