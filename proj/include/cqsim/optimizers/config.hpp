#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cqsim/combinatorial/importance.hpp"
#include "cqsim/compressors/inputs.hpp"
#include "cqsim/compressors/spec.hpp"
#include "cqsim/numkit/linalg.hpp"

namespace cqsim::optimizers {

/// What the optimizers need from a problem.
template <typename P>
concept Problem = requires(const P p, std::span<const double> x) {
  { p.n() } -> std::convertible_to<std::size_t>;
  { p.d() } -> std::convertible_to<std::size_t>;
  { p.x0() } -> std::convertible_to<Vector>;
  { p.value(x) } -> std::convertible_to<double>;
  { p.full_gradient(x) } -> std::convertible_to<Vector>;
  { p.client_gradients(x) } -> std::same_as<compressors::ClientInputs>;
  { p.gradient_differences(x, x) } -> std::same_as<compressors::ClientInputs>;
};

enum class Method { kMarina, kMarinaComb, kDCGD, kGD };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::kMarina: return "marina";
    case Method::kMarinaComb: return "marina_comb";
    case Method::kDCGD: return "dcgd";
    case Method::kGD: return "gd";
  }
  return "?";
}

/// Importance sampling over clients composed with a single-client compressor.
struct CombinatorialSpec {
  combinatorial::ImportanceSampler sampler;
  compressors::CompressorSpec inner;
  std::optional<double> beta;  // bits per coordinate of the sending client

  double effective_beta() const { return beta ? *beta : combinatorial::default_beta(inner); }
};

struct RunConfig {
  Method method = Method::kMarina;
  compressors::CompressorSpec compressor;
  std::optional<CombinatorialSpec> combinatorial;
  double p = 1.0;
  double gamma = 0.0;
  std::optional<std::size_t> rounds;
  std::optional<double> bit_budget;  // per client
  std::uint64_t seed = 0;
  std::size_t log_every = 1;  // telemetry stride; the first and last rows are always kept
  // Fixed-rounds mode only: stop once the output iterate has been reached.
  // Later rounds cannot change it, so x_hat is unaffected.
  bool stop_after_output = false;

  void validate() const {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("RunConfig: p must be in (0, 1]");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("RunConfig: gamma must be positive");
    if (rounds.has_value() == bit_budget.has_value())
      throw std::invalid_argument("RunConfig: set exactly one of rounds and bit_budget");
    if (bit_budget && !(*bit_budget > 0.0)) throw std::invalid_argument("RunConfig: bit budget must be positive");
    if (log_every == 0) throw std::invalid_argument("RunConfig: log_every must be positive");
    if (method == Method::kMarinaComb && !combinatorial)
      throw std::invalid_argument("RunConfig: marina_comb needs a combinatorial spec");
    if (method == Method::kMarina || method == Method::kDCGD) compressor.validate();
  }
};

struct MetricsRow {
  std::size_t round = 0;
  int flag = 0;  // 1 if this row's bits came from an uncompressed transmission
  double bits_cum = 0.0;
  double grad_norm_sq = 0.0;
  double fval = 0.0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct RunResult {
  std::vector<MetricsRow> rows;
  std::vector<std::uint8_t> flags;  // c_t for every executed round
  Vector x_final;
  Vector x_hat;
  std::size_t x_hat_index = 0;
  double x_hat_grad_norm_sq = 0.0;
  std::size_t rounds_run = 0;
  double bits_total = 0.0;
  std::optional<std::size_t> diverged_at;
};

}  // namespace cqsim::optimizers
