#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cqsim/optimizers/config.hpp"
#include "cqsim/optimizers/marina.hpp"

namespace cqsim::optimizers {

/// Multipliers 2^lo, ..., 2^hi.
inline std::vector<double> powers_of_two(int lo, int hi) {
  if (lo > hi) throw std::invalid_argument("powers_of_two: empty range");
  std::vector<double> m;
  for (int e = lo; e <= hi; ++e) m.push_back(std::ldexp(1.0, e));
  return m;
}

struct TuneResult {
  double multiplier = 0.0;
  double gamma = 0.0;
  RunResult run;
  std::vector<double> scores;  // final ||grad f||^2 per multiplier, NaN if diverged
  bool all_diverged = false;
};

/// Runs the template (its gamma is the base stepsize) once per multiplier
/// up to the bit budget and keeps the smallest final ||grad f||^2. Diverged
/// runs rank last; ties go to the smaller multiplier. If every run
/// diverges, the smallest multiplier is returned with all_diverged set.
template <Problem P>
TuneResult tune_stepsize(const P& problem, const RunConfig& base, double bit_budget, std::vector<double> multipliers) {
  if (multipliers.empty()) throw std::invalid_argument("tune_stepsize: no multipliers");
  for (double m : multipliers)
    if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("tune_stepsize: multipliers must be positive");
  std::sort(multipliers.begin(), multipliers.end());

  TuneResult out;
  std::size_t best = multipliers.size();
  double best_score = 0.0;
  std::vector<RunResult> runs;
  runs.reserve(multipliers.size());
  for (std::size_t k = 0; k < multipliers.size(); ++k) {
    RunConfig cfg = base;
    cfg.gamma = base.gamma * multipliers[k];
    cfg.rounds.reset();
    cfg.bit_budget = bit_budget;
    runs.push_back(run(problem, cfg));
    const auto& r = runs.back();
    const double score = r.diverged_at ? std::nan("") : r.rows.back().grad_norm_sq;
    out.scores.push_back(score);
    if (std::isfinite(score) && (best == multipliers.size() || score < best_score)) {
      best = k;
      best_score = score;
    }
  }
  if (best == multipliers.size()) {
    out.all_diverged = true;
    best = 0;
  }
  out.multiplier = multipliers[best];
  out.gamma = base.gamma * multipliers[best];
  out.run = std::move(runs[best]);
  return out;
}

}  // namespace cqsim::optimizers
