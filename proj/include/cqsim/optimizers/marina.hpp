#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cqsim/combinatorial/importance.hpp"
#include "cqsim/compressors/constants.hpp"
#include "cqsim/compressors/round.hpp"
#include "cqsim/numkit/linalg.hpp"
#include "cqsim/numkit/random.hpp"
#include "cqsim/optimizers/config.hpp"

namespace cqsim::optimizers {

// Derivation paths below RandomStream(seed):
//   kFlags            c_t ~ Bern(p), one draw per round (MARINA variants)
//   kCompressor / t   all compressor randomness of round t
//   kOutput           index of the returned iterate
//
// Row 0 describes x^0. For MARINA variants and GD it carries the initial
// full gradient (flag 1, 32d bits); for DCGD it carries no bits. Row t >= 1
// describes x^t after round t-1.
template <Problem P>
RunResult run(const P& problem, const RunConfig& cfg) {
  cfg.validate();
  const std::size_t d = problem.d(), n = problem.n();
  if ((cfg.method == Method::kMarina || cfg.method == Method::kDCGD) && (cfg.compressor.n != n || cfg.compressor.d != d))
    throw std::invalid_argument("run: compressor spec does not match the problem");
  if (cfg.method == Method::kMarinaComb &&
      (cfg.combinatorial->sampler.n() != n || cfg.combinatorial->inner.d != d))
    throw std::invalid_argument("run: combinatorial spec does not match the problem");

  const numkit::RandomStream root(cfg.seed);
  auto flag_rng = root.child(numkit::label::kFlags);
  auto out_rng = root.child(numkit::label::kOutput);
  const auto comp_root = root.child(numkit::label::kCompressor);

  const double full_bits = 32.0 * static_cast<double>(d);
  double comp_bits = full_bits;
  switch (cfg.method) {
    case Method::kMarina:
    case Method::kDCGD: comp_bits = static_cast<double>(compressors::bits_per_client(cfg.compressor, true)); break;
    case Method::kMarinaComb:
      comp_bits = combinatorial::expected_bits_per_client(cfg.combinatorial->effective_beta(), d, n);
      break;
    case Method::kGD: break;
  }
  const bool uses_estimator = cfg.method != Method::kDCGD;

  RunResult res;
  Vector x = problem.x0();
  Vector g;
  double bits = 0.0;
  int flag0 = 0;
  if (uses_estimator) {
    g = problem.full_gradient(x);
    bits = full_bits;
    flag0 = 1;
  }

  auto log_row = [&](std::size_t t, int flag, const Vector* known_grad) {
    MetricsRow row{t, flag, bits, 0.0, problem.value(x)};
    row.grad_norm_sq = known_grad ? numkit::norm_sq(*known_grad) : numkit::norm_sq(problem.full_gradient(x));
    res.rows.push_back(row);
  };
  log_row(0, flag0, uses_estimator ? &g : nullptr);

  // Output iterate: fixed index when T is known, reservoir sampling otherwise.
  std::optional<std::size_t> t_hat;
  if (cfg.rounds) {
    if (*cfg.rounds == 0) throw std::invalid_argument("run: rounds must be positive");
    t_hat = static_cast<std::size_t>(out_rng.uniform_below(*cfg.rounds));
  }

  std::size_t t = 0;
  bool last_logged = true;
  for (;; ++t) {
    if (cfg.rounds && t == *cfg.rounds) break;
    if (cfg.stop_after_output && t_hat && t > *t_hat) break;
    int c = 1;
    switch (cfg.method) {
      case Method::kMarina:
      case Method::kMarinaComb: c = flag_rng.bernoulli(cfg.p) ? 1 : 0; break;
      case Method::kDCGD: c = 0; break;
      case Method::kGD: c = 1; break;
    }
    const double cost = c ? full_bits : comp_bits;
    if (cfg.bit_budget && bits + cost > *cfg.bit_budget) break;

    // x^t is one of the candidates for the output.
    if (t_hat) {
      if (t == *t_hat) {
        res.x_hat = x;
        res.x_hat_index = t;
      }
    } else if (out_rng.uniform_below(t + 1) == 0) {
      res.x_hat = x;
      res.x_hat_index = t;
    }

    Vector x_new(d);
    bool overflow = false;
    try {
      if (cfg.method == Method::kDCGD) {
        const Vector est =
            compressors::compress_mean(cfg.compressor, problem.client_gradients(x), comp_root.child(t));
        for (std::size_t j = 0; j < d; ++j) x_new[j] = x[j] - cfg.gamma * est[j];
      } else {
        for (std::size_t j = 0; j < d; ++j) x_new[j] = x[j] - cfg.gamma * g[j];
        if (c) {
          g = problem.full_gradient(x_new);
        } else if (cfg.method == Method::kMarina) {
          const Vector est = compressors::compress_mean(cfg.compressor, problem.gradient_differences(x_new, x),
                                                        comp_root.child(t));
          for (std::size_t j = 0; j < d; ++j) g[j] += est[j];
        } else {
          auto rng = comp_root.child(t);
          const auto& cs = *cfg.combinatorial;
          const Vector est =
              combinatorial::compose_with_unbiased(cs.sampler, cs.inner, problem.gradient_differences(x_new, x), rng);
          for (std::size_t j = 0; j < d; ++j) g[j] += est[j];
        }
      }
    } catch (const std::overflow_error&) {
      // A norm header no longer fits in float32: the run has blown up.
      overflow = true;
    }
    x = std::move(x_new);
    bits += cost;
    res.flags.push_back(static_cast<std::uint8_t>(c));

    if (overflow || !numkit::all_finite(x) || (uses_estimator && !numkit::all_finite(g))) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      res.rows.push_back({t + 1, c, bits, nan, nan});
      res.diverged_at = t + 1;
      ++t;
      last_logged = true;
      break;
    }
    last_logged = (t + 1) % cfg.log_every == 0;
    if (last_logged) log_row(t + 1, c, uses_estimator && c ? &g : nullptr);
  }
  if (!last_logged) log_row(t, res.flags.empty() ? flag0 : res.flags.back(), nullptr);

  res.rounds_run = t;
  res.bits_total = bits;
  res.x_final = x;
  if (res.x_hat.empty()) {
    // Budget smaller than one round: the only candidate is x^0.
    res.x_hat = problem.x0();
    res.x_hat_index = 0;
  }
  res.x_hat_grad_norm_sq =
      numkit::all_finite(res.x_hat) ? numkit::norm_sq(problem.full_gradient(res.x_hat)) : std::numeric_limits<double>::quiet_NaN();
  return res;
}

template <Problem P>
RunResult marina(const P& problem, RunConfig cfg) {
  cfg.method = Method::kMarina;
  return run(problem, cfg);
}

template <Problem P>
RunResult marina_combinatorial(const P& problem, RunConfig cfg) {
  cfg.method = Method::kMarinaComb;
  return run(problem, cfg);
}

template <Problem P>
RunResult dcgd(const P& problem, RunConfig cfg) {
  cfg.method = Method::kDCGD;
  return run(problem, cfg);
}

template <Problem P>
RunResult gd(const P& problem, RunConfig cfg) {
  cfg.method = Method::kGD;
  return run(problem, cfg);
}

}  // namespace cqsim::optimizers
