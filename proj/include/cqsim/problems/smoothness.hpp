#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cqsim/numkit/linalg.hpp"
#include "cqsim/problems/quadratic.hpp"

namespace cqsim::problems {

class UnsupportedProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SmoothnessProfile {
  double L_minus = 0.0;
  double L_plus = 0.0;
  double L_pm = 0.0;
  std::vector<double> L_i;
  double L_avg = 0.0;
  std::optional<std::vector<double>> weights;
  std::optional<double> L_plus_w;
  std::optional<double> L_pm_w;
};

/// Smoothness constants of a quadratic problem:
///   L-  = ||mean A||
///   L+  = sqrt(lambda_max((1/n) sum A_i^2))
///   L+- = sqrt(lambda_max((1/n) sum (A_i - mean A)^2))
///   L_i = ||A_i||
/// With weights w, the weighted variants replace (1/n) sum with
/// (1/n) sum 1/(n w_i).
template <numkit::SymmetricOperator M>
SmoothnessProfile smoothness_profile(const QuadraticProblem<M>& p,
                                     std::optional<std::span<const double>> weights = std::nullopt) {
  const std::size_t n = p.n(), d = p.d();
  const double nn = static_cast<double>(n);
  SmoothnessProfile out;
  out.L_minus = numkit::spectral_norm(p.mean_matrix());

  numkit::SymmetricMatrix second(d), centered(d);
  auto diff = numkit::zero_like(p.matrix(0));
  for (std::size_t i = 0; i < n; ++i) {
    p.matrix(i).accumulate_square(second, 1.0 / nn);
    if (!p.identical_curvature()) {
      diff = p.matrix(i);
      p.mean_matrix().accumulate(diff, -1.0);
      diff.accumulate_square(centered, 1.0 / nn);
    }
  }
  out.L_plus = std::sqrt(std::max(0.0, numkit::max_eigenvalue(second)));
  out.L_pm = p.identical_curvature() ? 0.0 : std::sqrt(std::max(0.0, numkit::max_eigenvalue(centered)));

  out.L_i.resize(n);
  if (p.identical_curvature()) {
    std::fill(out.L_i.begin(), out.L_i.end(), out.L_minus);
  } else {
    for (std::size_t i = 0; i < n; ++i) out.L_i[i] = numkit::spectral_norm(p.matrix(i));
  }
  out.L_avg = std::accumulate(out.L_i.begin(), out.L_i.end(), 0.0) / nn;

  if (weights) {
    const auto w = *weights;
    if (w.size() != n) throw std::invalid_argument("smoothness_profile: need one weight per client");
    numkit::SymmetricMatrix weighted(d);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(w[i] > 0.0)) throw std::invalid_argument("smoothness_profile: weights must be positive");
      p.matrix(i).accumulate_square(weighted, 1.0 / (nn * nn * w[i]));
    }
    out.weights = std::vector<double>(w.begin(), w.end());
    out.L_plus_w = std::sqrt(std::max(0.0, numkit::max_eigenvalue(weighted)));
    p.mean_matrix().accumulate_square(weighted, -1.0);
    out.L_pm_w = std::sqrt(std::max(0.0, numkit::max_eigenvalue(weighted)));
  }
  return out;
}

}  // namespace cqsim::problems
