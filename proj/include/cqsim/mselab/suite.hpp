#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cqsim/combinatorial/importance.hpp"
#include "cqsim/compressors/constants.hpp"
#include "cqsim/compressors/quantizers.hpp"
#include "cqsim/compressors/round.hpp"
#include "cqsim/compressors/wire.hpp"
#include "cqsim/mselab/exact.hpp"
#include "cqsim/mselab/mse.hpp"
#include "cqsim/numkit/random.hpp"

namespace cqsim::mselab {

/// 20 scalar positions in (0, 1): 0.05, 0.10, ..., 0.95 and 0.625.
inline std::vector<double> default_scalar_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 19; ++k) g.push_back(0.05 * k);
  g.push_back(0.625);
  return g;
}

/// Scalar CQ with n identical inputs a on [l, r], checked against the
/// exact law. Whenever n*y is an integer every trial must be exactly zero.
inline MSEReport cq_scalar_report(std::size_t n, double a, double l, double r, std::size_t trials,
                                  const numkit::RandomStream& rng) {
  const double exact = cq_scalar_exact_mse(n, a, l, r);
  std::vector<double> in(n, a), u(n);
  std::vector<std::uint32_t> perm(n);
  const double nn = static_cast<double>(n);
  auto rep = estimate_from_errors(
      [&](numkit::RandomStream& s) {
        numkit::sample_permutation_into(perm, s);
        for (auto& v : u) v = s.uniform01();
        const auto q = compressors::cq_scalar(in, l, r, perm, u);
        double m = 0.0;
        for (double v : q) m += v;
        const double e = m / nn - a;
        return e * e;
      },
      trials, rng, std::nullopt, exact);
  rep.scheme = "cq_scalar";
  rep.n = n;
  rep.d = 1;
  rep.input_id = "a=" + numkit::format_double(a);
  return rep;
}

inline std::vector<MSEReport> cq_exact_law(const std::vector<std::size_t>& ns, const std::vector<double>& grid,
                                           std::size_t trials, const numkit::RandomStream& rng) {
  std::vector<MSEReport> out;
  for (std::size_t i = 0; i < ns.size(); ++i)
    for (std::size_t k = 0; k < grid.size(); ++k)
      out.push_back(cq_scalar_report(ns[i], grid[k], 0.0, 1.0, trials, rng.child(ns[i], k)));
  return out;
}

/// Scalar IQ with n identical inputs: bound (r - l)^2 / (4n).
inline MSEReport iq_scalar_report(std::size_t n, double a, double l, double r, std::size_t trials,
                                  const numkit::RandomStream& rng) {
  const double nn = static_cast<double>(n);
  auto rep = estimate_from_errors(
      [&](numkit::RandomStream& s) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += compressors::iq_scalar(a, l, r, s.uniform01());
        const double e = m / nn - a;
        return e * e;
      },
      trials, rng, (r - l) * (r - l) / (4.0 * nn), iq_scalar_exact_mse(n, a, l, r));
  rep.scheme = "iq_scalar";
  rep.n = n;
  rep.d = 1;
  rep.input_id = "a=" + numkit::format_double(a);
  return rep;
}

struct BoundSuiteResult {
  std::vector<MSEReport> reports;
  bool permk_cq_bits_exact = true;  // every message is 32 + d/tau bits on the wire
  bool pass() const {
    if (!permk_cq_bits_exact) return false;
    for (const auto& r : reports)
      if (!r.pass) return false;
    return true;
  }
};

/// Every closed-form bound on homogeneous inputs, `inputs` random inputs
/// per (d, n) cell:
///   iq scalar     (r-l)^2 / (4n)
///   cq scalar     (r-l)^2 / (4n^2)
///   iq            d ||a||^2 / n
///   cq            d ||a||^2 / n^2
///   permk_cq      d tau^2 ||a||^2 / n^2, plus the exact bit count
///   sampling o iq weighted (omega + 1, 1, q) bound
inline BoundSuiteResult bound_suite(const std::vector<std::size_t>& ds, const std::vector<std::size_t>& ns,
                                    std::size_t inputs, std::size_t tau, std::size_t trials,
                                    const numkit::RandomStream& rng) {
  BoundSuiteResult out;
  for (std::size_t d : ds) {
    for (std::size_t n : ns) {
      const double nn = static_cast<double>(n), dd = static_cast<double>(d);
      for (std::size_t k = 0; k < inputs; ++k) {
        auto cell = rng.child(d, n, k);
        auto gen = cell.child(numkit::label::kInputs);
        const std::string id = "d=" + std::to_string(d) + ";n=" + std::to_string(n) + ";k=" + std::to_string(k);

        // Scalars on a random range.
        const double l = -gen.uniform01(), r = l + 0.5 + gen.uniform01();
        const double a = l + (r - l) * gen.uniform01();
        auto rep = iq_scalar_report(n, a, l, r, trials, cell.child(1));
        rep.input_id = id;
        out.reports.push_back(rep);
        rep = cq_scalar_report(n, a, l, r, trials, cell.child(2));
        rep.bound = (r - l) * (r - l) / (4.0 * nn * nn);
        rep.pass = rep.pass && rep.mse <= *rep.bound + 3.0 * rep.se;
        rep.input_id = id;
        out.reports.push_back(rep);

        Vector v(d);
        for (auto& x : v) x = gen.normal();
        const double ns2 = numkit::norm_sq(v);
        const auto in = compressors::ClientInputs::replicated(v, n);

        rep = estimate_mse(compressors::CompressorSpec::iq(n, d), in, trials, cell.child(3), dd * ns2 / nn,
                           iq_vector_exact_mse(v, n));
        rep.input_id = id;
        out.reports.push_back(rep);
        rep = estimate_mse(compressors::CompressorSpec::cq(n, d), in, trials, cell.child(4), dd * ns2 / (nn * nn),
                           cq_vector_exact_mse(v, n));
        rep.input_id = id;
        out.reports.push_back(rep);

        const auto pspec = compressors::CompressorSpec::permk_cq(n, d, tau);
        const double t = static_cast<double>(tau);
        rep = estimate_mse(pspec, in, trials, cell.child(5), dd * t * t * ns2 / (nn * nn));
        rep.input_id = id;
        out.reports.push_back(rep);
        if (k == 0) {
          const auto round = compressors::compress_round(pspec, in, cell.child(6));
          const std::uint64_t want = 32 + d / tau;
          for (const auto& msg : round.messages) {
            const auto wire = compressors::serialize(pspec, msg);
            const auto back = compressors::deserialize(wire, d);
            out.permk_cq_bits_exact = out.permk_cq_bits_exact && msg.bit_count == want &&
                                      msg.body.size() == want && back.message == msg &&
                                      compressors::bits_per_client(pspec, true) == want;
          }
        }

        // Importance sampling over random probabilities, each client's
        // vector compressed by an independent single-client IQ.
        std::vector<double> q(n);
        double qs = 0.0;
        for (auto& x : q) qs += (x = 0.1 + gen.uniform01());
        for (auto& x : q) x /= qs;
        double drift = 1.0;
        for (std::size_t i = 0; i + 1 < n; ++i) drift -= q[i];
        q.back() = drift;
        const combinatorial::ImportanceSampler sampler(q);
        const auto inner = compressors::CompressorSpec::iq(1, d);
        const auto wab = combinatorial::weighted_ab_of(sampler, inner);
        rep = estimate_mse(
            [&](numkit::RandomStream& s) { return combinatorial::compose_with_unbiased(sampler, inner, in, s); }, v,
            trials, cell.child(7), wab.bound(in));
        rep.scheme = "importance_sampling+iq";
        rep.n = n;
        rep.input_id = id;
        out.reports.push_back(rep);
      }
    }
  }
  return out;
}

struct FactorSeparation {
  double iq_mse = 0.0;  // Monte Carlo
  double iq_se = 0.0;
  double cq_mse = 0.0;  // exact law
  double ratio = 0.0;
};

/// MSE(IQ) / MSE(CQ) averaged over `inputs` homogeneous Gaussian inputs.
inline FactorSeparation factor_n_separation(std::size_t d, std::size_t n, std::size_t inputs, std::size_t trials,
                                            const numkit::RandomStream& rng) {
  FactorSeparation f;
  double var = 0.0;
  for (std::size_t k = 0; k < inputs; ++k) {
    auto gen = rng.child(k, numkit::label::kInputs);
    Vector v(d);
    for (auto& x : v) x = gen.normal();
    const auto rep = estimate_mse(compressors::CompressorSpec::iq(n, d), compressors::ClientInputs::replicated(v, n),
                                  trials, rng.child(k));
    f.iq_mse += rep.mse;
    var += rep.se * rep.se;
    f.cq_mse += cq_vector_exact_mse(v, n);
  }
  const double m = static_cast<double>(inputs);
  f.iq_mse /= m;
  f.iq_se = std::sqrt(var) / m;
  f.cq_mse /= m;
  f.ratio = f.iq_mse / f.cq_mse;
  return f;
}

/// Independent unbiased compressors with variance omega satisfy the AB
/// inequality with A = omega / n, B = 0.
inline ABCertificate independent_compressor_certificate(const compressors::CompressorSpec& spec,
                                                        std::size_t input_sets, std::size_t trials,
                                                        const numkit::RandomStream& rng) {
  const auto sets = standard_input_sets(spec.n, spec.d, input_sets, rng.child(numkit::label::kInputs));
  const compressors::ABConstants ab{compressors::omega(spec) / static_cast<double>(spec.n), 0.0};
  return estimate_ab(spec, ab, sets, trials, rng);
}

/// Everything above at desk scale; used by the mse subcommand.
inline std::vector<MSEReport> default_suite(std::size_t trials, std::uint64_t seed) {
  const numkit::RandomStream root(seed);
  auto out = cq_exact_law({2, 4, 8, 16}, default_scalar_grid(), trials, root.child(1));
  const auto bounds = bound_suite({8, 64}, {4, 16}, 5, 4, std::max<std::size_t>(trials / 10, kMinTrials), root.child(2));
  out.insert(out.end(), bounds.reports.begin(), bounds.reports.end());
  const std::vector<compressors::CompressorSpec> independent = {
      compressors::CompressorSpec::iq(8, 32), compressors::CompressorSpec::std_dither(8, 32, 2.0, 2),
      compressors::CompressorSpec::nat_dither(8, 32, 2.0, 3), compressors::CompressorSpec::ternary(8, 32)};
  for (std::size_t k = 0; k < independent.size(); ++k) {
    const auto cert = independent_compressor_certificate(independent[k], 10,
                                                         std::max<std::size_t>(trials / 10, kMinTrials), root.child(3, k));
    out.insert(out.end(), cert.reports.begin(), cert.reports.end());
  }
  return out;
}

}  // namespace cqsim::mselab
