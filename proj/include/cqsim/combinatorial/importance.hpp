#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <span>
#include <stdexcept>
#include <vector>

#include "cqsim/compressors/constants.hpp"
#include "cqsim/compressors/inputs.hpp"
#include "cqsim/compressors/round.hpp"
#include "cqsim/compressors/spec.hpp"
#include "cqsim/numkit/linalg.hpp"
#include "cqsim/numkit/random.hpp"

namespace cqsim::combinatorial {

namespace detail {

inline void check_simplex(std::span<const double> w, const char* who) {
  if (w.empty()) throw std::invalid_argument(std::string(who) + ": empty weight vector");
  double s = 0.0;
  for (double v : w) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": weights must be positive");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument(std::string(who) + ": weights must sum to 1");
}

}  // namespace detail

/// (A, B, w) of the weighted AB-inequality:
/// E||S - mean||^2 <= (A/n) sum_i ||a_i||^2 / (n w_i) - B ||mean||^2.
struct WeightedABSpec {
  double A = 0.0;
  double B = 0.0;
  std::vector<double> weights;

  void validate() const {
    if (!(A >= 0.0) || !(B >= 0.0)) throw std::invalid_argument("WeightedABSpec: A and B must be nonnegative");
    detail::check_simplex(weights, "WeightedABSpec");
  }

  /// Right-hand side of the inequality for the given inputs.
  double bound(const compressors::ClientInputs& in) const {
    const std::size_t n = in.n();
    const double nn = static_cast<double>(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += numkit::norm_sq(in[i]) / (nn * weights[i]);
    return A / nn * s - B * numkit::norm_sq(in.mean());
  }
};

/// Draws tau client indices i.i.d. from q and reweights by 1/(n q_i).
class ImportanceSampler {
 public:
  explicit ImportanceSampler(std::vector<double> q, std::size_t tau = 1) : q_(std::move(q)), tau_(tau) {
    detail::check_simplex(q_, "ImportanceSampler");
    if (tau_ == 0) throw std::invalid_argument("ImportanceSampler: tau must be positive");
    cumulative_.resize(q_.size());
    double s = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) cumulative_[i] = (s += q_[i]);
  }

  static ImportanceSampler uniform(std::size_t n, std::size_t tau = 1) {
    if (n == 0) throw std::invalid_argument("ImportanceSampler: n must be positive");
    return ImportanceSampler(std::vector<double>(n, 1.0 / static_cast<double>(n)), tau);
  }

  /// q_i = L_i / sum_j L_j
  static ImportanceSampler proportional(std::span<const double> scores, std::size_t tau = 1) {
    double s = 0.0;
    for (double v : scores) {
      if (!(v > 0.0)) throw std::invalid_argument("ImportanceSampler: scores must be positive");
      s += v;
    }
    std::vector<double> q(scores.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = scores[i] / s;
    // Absorb the rounding residue so the simplex check holds to 1e-12.
    double t = 0.0;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) t += q[i];
    if (!q.empty()) q.back() = 1.0 - t;
    return ImportanceSampler(std::move(q), tau);
  }

  std::size_t n() const { return q_.size(); }
  std::size_t tau() const { return tau_; }
  const std::vector<double>& probabilities() const { return q_; }

  std::size_t draw(numkit::RandomStream& rng) const { return numkit::sample_categorical(cumulative_, rng); }

 private:
  std::vector<double> q_;
  std::size_t tau_;
  std::vector<double> cumulative_;
};

inline Vector importance_sample(const ImportanceSampler& s, const compressors::ClientInputs& in,
                                numkit::RandomStream& rng) {
  if (in.n() != s.n()) throw std::invalid_argument("importance_sample: client count mismatch");
  const double nn = static_cast<double>(s.n());
  Vector out(in.d(), 0.0);
  for (std::size_t k = 0; k < s.tau(); ++k) {
    const std::size_t i = s.draw(rng);
    const double w = 1.0 / (nn * s.probabilities()[i] * static_cast<double>(s.tau()));
    const auto& a = in[i];
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += w * a[j];
  }
  return out;
}

/// Closed-form MSE of importance_sample:
/// (1/tau) ((1/n) sum ||a_i||^2 / (n q_i) - ||mean||^2).
inline double importance_sampling_mse(const ImportanceSampler& s, const compressors::ClientInputs& in) {
  const WeightedABSpec ab{1.0, 1.0, s.probabilities()};
  return ab.bound(in) / static_cast<double>(s.tau());
}

namespace detail {

inline void check_inner(const compressors::CompressorSpec& inner) {
  inner.validate();
  if (inner.n != 1) throw std::invalid_argument("combinatorial: inner compressor must be a single-client spec (n = 1)");
  if (inner.is_permk()) throw std::invalid_argument("combinatorial: inner compressor must be individually unbiased");
}

}  // namespace detail

/// Importance sampling (tau = 1) of independently compressed client vectors:
/// Q(a_chi) / (n q_chi). The inner round draws from rng/kCompressor/k, k the
/// number of draws rng has made so far, so repeated calls stay independent.
inline Vector compose_with_unbiased(const ImportanceSampler& s, const compressors::CompressorSpec& inner,
                                    const compressors::ClientInputs& in, numkit::RandomStream& rng) {
  if (s.tau() != 1) throw std::invalid_argument("compose_with_unbiased: tau must be 1");
  detail::check_inner(inner);
  if (in.n() != s.n()) throw std::invalid_argument("compose_with_unbiased: client count mismatch");
  if (in.d() != inner.d) throw std::invalid_argument("compose_with_unbiased: dimension mismatch");
  const std::size_t i = s.draw(rng);
  const Vector one[1] = {in[i]};
  const auto round = compressors::compress_round(inner, std::span<const Vector>(one),
                                                 rng.child(numkit::label::kCompressor, rng.draws()));
  const double w = 1.0 / (static_cast<double>(s.n()) * s.probabilities()[i]);
  Vector out = round.decoded.front();
  for (auto& v : out) v *= w;
  return out;
}

/// Weighted-AB constants of plain sampling, (1/tau, 1/tau, q).
inline WeightedABSpec weighted_ab_of(const ImportanceSampler& s) {
  const double t = 1.0 / static_cast<double>(s.tau());
  return {t, t, s.probabilities()};
}

/// Weighted-AB constants of sampling composed with an unbiased compressor,
/// (omega + 1, 1, q). Requires tau = 1.
inline WeightedABSpec weighted_ab_of(const ImportanceSampler& s, const compressors::CompressorSpec& inner) {
  if (s.tau() != 1) throw compressors::UnsupportedScheme("weighted_ab_of: composition needs tau = 1");
  detail::check_inner(inner);
  return {compressors::omega(inner) + 1.0, 1.0, s.probabilities()};
}

/// Default bits per coordinate for the transmitting client.
inline double default_beta(const compressors::CompressorSpec& inner) {
  return static_cast<double>(compressors::bits_per_client(inner, true)) / static_cast<double>(inner.d);
}

/// Expected bits per client in one compressed round: beta * d / n.
inline double expected_bits_per_client(double beta, std::size_t d, std::size_t n) {
  return beta * static_cast<double>(d) / static_cast<double>(n);
}

}  // namespace cqsim::combinatorial
