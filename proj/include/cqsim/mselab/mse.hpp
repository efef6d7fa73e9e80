#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cqsim/compressors/constants.hpp"
#include "cqsim/compressors/inputs.hpp"
#include "cqsim/compressors/round.hpp"
#include "cqsim/compressors/spec.hpp"
#include "cqsim/numkit/format.hpp"
#include "cqsim/numkit/linalg.hpp"
#include "cqsim/numkit/random.hpp"

namespace cqsim::mselab {

/// Pairwise (cascade) summation.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

struct MSEReport {
  std::string scheme;
  std::string input_id;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t trials = 0;
  double mse = 0.0;
  double se = 0.0;
  double max_error = 0.0;  // largest single-trial squared error
  std::optional<double> bound;
  std::optional<double> exact;
  bool pass = true;
};

inline constexpr std::size_t kMinTrials = 1000;
inline constexpr std::size_t kDefaultTrials = 100000;

/// Monte-Carlo MSE from per-trial squared errors. `sq_error(stream)` runs
/// one trial on rng/k. pass is decided against `exact` (within 4 SE, or
/// every trial exactly zero when exact is 0) and against `bound` (within
/// 3 SE).
template <typename F>
MSEReport estimate_from_errors(F&& sq_error, std::size_t trials, const numkit::RandomStream& rng,
                               std::optional<double> bound = std::nullopt,
                               std::optional<double> exact = std::nullopt) {
  if (trials < kMinTrials) throw std::invalid_argument("estimate_mse: need at least 1000 trials");
  std::vector<double> err(trials);
  for (std::size_t k = 0; k < trials; ++k) {
    auto stream = rng.child(k);
    err[k] = sq_error(stream);
  }
  MSEReport r;
  r.trials = trials;
  r.mse = pairwise_sum(err) / static_cast<double>(trials);
  for (auto& e : err) {
    r.max_error = std::max(r.max_error, e);
    e = (e - r.mse) * (e - r.mse);
  }
  const double var = pairwise_sum(err) / static_cast<double>(trials - 1);
  r.se = std::sqrt(var / static_cast<double>(trials));
  r.bound = bound;
  r.exact = exact;
  if (exact) r.pass = *exact == 0.0 ? r.max_error == 0.0 : std::abs(r.mse - *exact) <= 4.0 * r.se;
  if (bound) r.pass = r.pass && r.mse <= *bound + 3.0 * r.se;
  return r;
}

/// MSE of an arbitrary mean estimator `est(stream) -> Vector` against `truth`.
template <typename F>
MSEReport estimate_mse(F&& est, std::span<const double> truth, std::size_t trials, const numkit::RandomStream& rng,
                       std::optional<double> bound = std::nullopt, std::optional<double> exact = std::nullopt) {
  auto r = estimate_from_errors(
      [&](numkit::RandomStream& s) {
        const Vector e = est(s);
        if (e.size() != truth.size()) throw std::invalid_argument("estimate_mse: estimator returned wrong dimension");
        return numkit::dist_sq(e, truth);
      },
      trials, rng, bound, exact);
  r.d = truth.size();
  return r;
}

/// MSE of the mean estimate of a compressor scheme on the given inputs.
inline MSEReport estimate_mse(const compressors::CompressorSpec& spec, const compressors::ClientInputs& in,
                              std::size_t trials, const numkit::RandomStream& rng,
                              std::optional<double> bound = std::nullopt, std::optional<double> exact = std::nullopt) {
  const Vector truth = in.mean();
  auto r = estimate_mse([&](numkit::RandomStream& s) { return compressors::compress_mean(spec, in, s); }, truth,
                        trials, rng, bound, exact);
  r.scheme = compressors::describe(spec);
  r.n = in.n();
  return r;
}

/// (1/n) sum ||a_i - mean||^2
inline double variance_of_inputs(const compressors::ClientInputs& in) {
  if (in.n() == 0) throw std::invalid_argument("variance_of_inputs: no inputs");
  if (in.is_replicated()) return 0.0;
  const Vector m = in.mean();
  double s = 0.0;
  for (std::size_t i = 0; i < in.n(); ++i) s += numkit::dist_sq(in[i], m);
  return s / static_cast<double>(in.n());
}

/// A (1/n) sum ||a_i||^2 - B ||mean||^2
inline double ab_bound(const compressors::ABConstants& ab, const compressors::ClientInputs& in) {
  return ab.A * in.mean_square_norm() - ab.B * numkit::norm_sq(in.mean());
}

struct NamedInputs {
  std::string id;
  compressors::ClientInputs inputs;
};

struct ABCertificate {
  compressors::ABConstants declared;
  std::vector<MSEReport> reports;
  double max_margin = 0.0;  // max over inputs of mse - (bound + 3 SE); <= 0 on success
  std::vector<std::string> offending;
  bool pass() const { return offending.empty(); }
};

/// Checks MSE <= A ms - B ||mean||^2 + 3 SE on every input set. Input set k
/// uses rng/k.
inline ABCertificate estimate_ab(const compressors::CompressorSpec& spec, const compressors::ABConstants& declared,
                                 std::span<const NamedInputs> sets, std::size_t trials,
                                 const numkit::RandomStream& rng) {
  if (sets.empty()) throw std::invalid_argument("estimate_ab: no input sets");
  ABCertificate c;
  c.declared = declared;
  c.max_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const auto& s = sets[k];
    auto r = estimate_mse(spec, s.inputs, trials, rng.child(k), ab_bound(declared, s.inputs));
    r.input_id = s.id;
    c.max_margin = std::max(c.max_margin, r.mse - (*r.bound + 3.0 * r.se));
    if (!r.pass) c.offending.push_back(s.id);
    c.reports.push_back(std::move(r));
  }
  return c;
}

/// A mix of homogeneous and heterogeneous input sets: Gaussian, shared
/// direction with noise, sparse, and one-hot rows.
inline std::vector<NamedInputs> standard_input_sets(std::size_t n, std::size_t d, std::size_t count,
                                                    const numkit::RandomStream& rng) {
  std::vector<NamedInputs> out;
  for (std::size_t k = 0; k < count; ++k) {
    auto r = rng.child(k);
    const std::size_t kind = k % 5;
    std::vector<Vector> rows(n, Vector(d, 0.0));
    Vector base(d);
    for (auto& v : base) v = r.normal();
    std::string id;
    switch (kind) {
      case 0:
        id = "homogeneous";
        out.push_back({id + "-" + std::to_string(k), compressors::ClientInputs::replicated(base, n)});
        continue;
      case 1:
        id = "gaussian";
        for (auto& row : rows)
          for (auto& v : row) v = r.normal();
        break;
      case 2:
        id = "shared-direction";
        for (auto& row : rows)
          for (std::size_t j = 0; j < d; ++j) row[j] = base[j] + 0.1 * r.normal();
        break;
      case 3:
        id = "sparse";
        for (auto& row : rows)
          for (auto& v : row) v = r.uniform01() < 0.1 ? r.normal() : 0.0;
        break;
      default:
        id = "one-hot";
        for (auto& row : rows) row[r.uniform_below(d)] = 1.0 + r.uniform01();
        break;
    }
    out.push_back({id + "-" + std::to_string(k), compressors::ClientInputs::distinct(std::move(rows))});
  }
  return out;
}

inline constexpr const char* kCsvHeader = "scheme,n,d,input_id,trials,mse,se,bound,exact,pass";

/// Quotes a field that contains a comma or a quote.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv_row(std::ostream& os, const MSEReport& r) {
  using numkit::format_double;
  os << csv_field(r.scheme) << ',' << r.n << ',' << r.d << ',' << csv_field(r.input_id) << ',' << r.trials << ',' << format_double(r.mse)
     << ',' << format_double(r.se) << ',' << (r.bound ? format_double(*r.bound) : "") << ','
     << (r.exact ? format_double(*r.exact) : "") << ',' << (r.pass ? 1 : 0) << '\n';
}

}  // namespace cqsim::mselab
