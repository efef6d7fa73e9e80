#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cqsim/combinatorial/importance.hpp"
#include "cqsim/compressors/constants.hpp"
#include "cqsim/problems/smoothness.hpp"

namespace cqsim::optimizers {

namespace detail {

inline double variance_ratio(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("stepsize: p must be in (0, 1]");
  return (1.0 - p) / p;
}

inline double finish(double L_minus, double spread) {
  if (!(L_minus >= 0.0) || !(spread >= 0.0)) throw std::invalid_argument("stepsize: constants must be nonnegative");
  const double denom = L_minus + std::sqrt(spread);
  if (!(denom > 0.0)) throw std::invalid_argument("stepsize: all constants are zero");
  return 1.0 / denom;
}

}  // namespace detail

/// 1 / (L- + sqrt((1-p)/p * ((A-B) L+^2 + B L+-^2)))
inline double theoretical_stepsize(const problems::SmoothnessProfile& prof, const compressors::ABConstants& ab, double p) {
  const double r = detail::variance_ratio(p);
  if (!(ab.A >= 0.0) || !(ab.B >= 0.0)) throw std::invalid_argument("stepsize: A and B must be nonnegative");
  const double mix = (ab.A - ab.B) * prof.L_plus * prof.L_plus + ab.B * prof.L_pm * prof.L_pm;
  return detail::finish(prof.L_minus, r * std::max(0.0, mix));
}

/// Weighted form: L+ and L+- are replaced by their w-weighted versions, which
/// the profile must carry for the same weights.
inline double theoretical_stepsize(const problems::SmoothnessProfile& prof, const combinatorial::WeightedABSpec& ab,
                                   double p) {
  const double r = detail::variance_ratio(p);
  ab.validate();
  if (!prof.weights || !prof.L_plus_w || !prof.L_pm_w)
    throw std::invalid_argument("stepsize: profile has no weighted constants");
  if (prof.weights->size() != ab.weights.size()) throw std::invalid_argument("stepsize: weight count mismatch");
  for (std::size_t i = 0; i < ab.weights.size(); ++i)
    if (std::abs((*prof.weights)[i] - ab.weights[i]) > 1e-12)
      throw std::invalid_argument("stepsize: profile was computed for different weights");
  const double Lw = *prof.L_plus_w, Lpw = *prof.L_pm_w;
  const double mix = (ab.A - ab.B) * Lw * Lw + ab.B * Lpw * Lpw;
  return detail::finish(prof.L_minus, r * std::max(0.0, mix));
}

/// Importance sampling q_i = L_i / sum L_j composed with an unbiased
/// single-client compressor of variance omega:
/// 1 / (L- + L_avg sqrt((1-p)/p (omega + 1)))
inline double importance_sampling_stepsize(const problems::SmoothnessProfile& prof, double omega, double p) {
  const double r = detail::variance_ratio(p);
  if (!(omega >= 0.0)) throw std::invalid_argument("stepsize: omega must be nonnegative");
  return detail::finish(prof.L_minus, prof.L_avg * prof.L_avg * r * (omega + 1.0));
}

/// Largest gamma of the form 1/(sqrt(a) + b); it satisfies a gamma^2 + b gamma <= 1.
inline double lemma2_stepsize(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw std::invalid_argument("lemma2_stepsize: a and b must be nonnegative");
  const double denom = std::sqrt(a) + b;
  if (!(denom > 0.0)) throw std::invalid_argument("lemma2_stepsize: a and b are both zero");
  return 1.0 / denom;
}

}  // namespace cqsim::optimizers
