#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cqsim/analysis/complexity.hpp"
#include "cqsim/cli/config.hpp"
#include "cqsim/combinatorial/importance.hpp"
#include "cqsim/compressors/constants.hpp"
#include "cqsim/compressors/spec.hpp"
#include "cqsim/mselab/suite.hpp"
#include "cqsim/numkit/format.hpp"
#include "cqsim/numkit/random.hpp"
#include "cqsim/optimizers/marina.hpp"
#include "cqsim/optimizers/stepsize.hpp"
#include "cqsim/optimizers/tuning.hpp"
#include "cqsim/problems/generators.hpp"
#include "cqsim/problems/libsvm.hpp"
#include "cqsim/problems/logistic.hpp"
#include "cqsim/problems/smoothness.hpp"

namespace cqsim::cli {

namespace fs = std::filesystem;

inline constexpr const char* kTrajectoryHeader = "round,flag,bits_cum,grad_norm_sq,fval";
inline constexpr const char* kSummaryHeader =
    "cell,s,method,scheme,seed,p,gamma,multiplier,rounds,bits_total,final_grad_norm_sq,x_hat_grad_norm_sq,diverged";
inline constexpr const char* kTuningHeader = "cell,multiplier,score";

inline void write_trajectory(std::ostream& os, const optimizers::RunResult& r) {
  using numkit::format_double;
  os << kTrajectoryHeader << '\n';
  for (const auto& row : r.rows)
    os << row.round << ',' << row.flag << ',' << format_double(row.bits_cum) << ',' << format_double(row.grad_norm_sq)
       << ',' << format_double(row.fval) << '\n';
}

/// Compressor spec named by a method entry.
inline compressors::CompressorSpec build_spec(const std::string& scheme, std::size_t n, std::size_t d,
                                              const ExperimentConfig& c) {
  using compressors::CompressorSpec;
  if (scheme == "identity") return CompressorSpec::identity(n, d);
  if (scheme == "iq") return CompressorSpec::iq(n, d);
  if (scheme == "cq") return CompressorSpec::cq(n, d);
  if (scheme == "std_dither") return CompressorSpec::std_dither(n, d, 2.0, c.dither_levels);
  if (scheme == "nat_dither") return CompressorSpec::nat_dither(n, d, 2.0, c.dither_levels);
  if (scheme == "ternary") return CompressorSpec::ternary(n, d);
  if (scheme == "permk") return CompressorSpec::permk(n, d, c.tau);
  if (scheme == "permk_cq") return CompressorSpec::permk_cq(n, d, c.tau);
  throw ConfigError("methods.list: unknown compressor '" + scheme + "'");
}

/// A fully resolved optimizer cell: run configuration without a budget plus
/// the base stepsize the tuner multiplies.
struct ResolvedCell {
  std::string id;
  double s = 0.0;
  MethodEntry entry;
  optimizers::RunConfig config;
};

namespace detail {

using AnyProblem = std::variant<problems::TridiagonalQuadratic, problems::LogisticProblem>;

inline AnyProblem build_problem(const ExperimentConfig& c, std::size_t s_index) {
  const double s = c.noise_scales.at(s_index);
  const auto rng = numkit::RandomStream(c.problem_seed).child(numkit::label::kProblem, s_index);
  switch (c.kind) {
    case ExperimentKind::kQuadraticLpm:
    case ExperimentKind::kPermKCQ: return problems::generate_quadratic_lpm(c.n, c.d, c.lambda, s, rng);
    case ExperimentKind::kWeighted: return problems::generate_quadratic_li(c.n, c.d, s, rng);
    case ExperimentKind::kLogistic: {
      auto ds = problems::load_libsvm(c.dataset, c.d == 0 ? std::nullopt : std::optional<std::size_t>(c.d));
      if (ds.rows() < c.n) throw ConfigError("problem.n: dataset has fewer rows than clients");
      return problems::LogisticProblem(problems::shard(ds, c.n), c.lambda);
    }
    default: break;
  }
  throw std::logic_error("build_problem: experiment kind has no problem");
}

inline problems::SmoothnessProfile profile_of(const AnyProblem& p) {
  if (auto q = std::get_if<problems::TridiagonalQuadratic>(&p)) return problems::smoothness_profile(*q);
  return problems::logistic_smoothness_bounds(std::get<problems::LogisticProblem>(p));
}

inline std::size_t problem_n(const AnyProblem& p) {
  return std::visit([](const auto& x) { return x.n(); }, p);
}
inline std::size_t problem_d(const AnyProblem& p) {
  return std::visit([](const auto& x) { return x.d(); }, p);
}

}  // namespace detail

/// Chooses p and the base stepsize for one method entry.
///   gd           p = 1, gamma = 1/L-
///   dcgd         gamma = 1/L-
///   marina       p = config or argmin C(p); gamma from the AB constants
///   marina_comb  p = config or argmin C(p) with A = omega + 1 and
///                alpha = beta d / n; importance sampling uses q ~ L_i
inline ResolvedCell resolve_cell(const ExperimentConfig& c, const MethodEntry& m, double s,
                                 const problems::SmoothnessProfile& prof, std::size_t n, std::size_t d,
                                 const detail::AnyProblem* problem) {
  ResolvedCell cell;
  cell.s = s;
  cell.entry = m;
  cell.id = "s" + numkit::format_double(s) + "_" + m.label();
  auto& rc = cell.config;
  rc.log_every = c.log_every;
  if (m.method == "gd") {
    rc.method = optimizers::Method::kGD;
    rc.p = 1.0;
    rc.gamma = 1.0 / prof.L_minus;
  } else if (m.method == "dcgd") {
    rc.method = optimizers::Method::kDCGD;
    rc.compressor = build_spec(m.scheme, n, d, c);
    rc.compressor.validate();
    rc.gamma = 1.0 / prof.L_minus;
  } else if (m.method == "marina") {
    rc.method = optimizers::Method::kMarina;
    rc.compressor = build_spec(m.scheme, n, d, c);
    compressors::ABConstants ab;
    try {
      ab = compressors::ab_constants(rc.compressor);
    } catch (const compressors::UnsupportedScheme& e) {
      throw ConfigError(std::string("methods.list: ") + e.what());
    }
    if (c.p) {
      rc.p = *c.p;
    } else {
      analysis::ComplexityInputs in;
      in.d = d;
      in.n = n;
      in.L_minus = prof.L_minus;
      in.L_plus = prof.L_plus;
      in.L_pm = prof.L_pm;
      in.A = ab.A;
      in.B = ab.B;
      in.alpha = static_cast<double>(compressors::bits_per_client(rc.compressor, true));
      rc.p = analysis::optimal_p(in);
    }
    rc.gamma = optimizers::theoretical_stepsize(prof, ab, rc.p);
  } else {
    rc.method = optimizers::Method::kMarinaComb;
    if (c.kind == ExperimentKind::kLogistic)
      throw ConfigError("methods.list: marina_comb needs a quadratic problem");
    const auto sampler = m.scheme == "importance" ? combinatorial::ImportanceSampler::proportional(prof.L_i)
                                                  : combinatorial::ImportanceSampler::uniform(n);
    const auto inner = compressors::CompressorSpec::identity(1, d);
    rc.combinatorial = optimizers::CombinatorialSpec{sampler, inner, std::nullopt};
    const double omega = compressors::omega(inner);
    if (c.p) {
      rc.p = *c.p;
    } else {
      analysis::ComplexityInputs in;
      in.d = d;
      in.n = n;
      in.L_minus = prof.L_minus;
      in.L_plus = prof.L_avg;
      in.A = omega + 1.0;
      in.alpha = combinatorial::expected_bits_per_client(rc.combinatorial->effective_beta(), d, n);
      rc.p = analysis::optimal_p(in);
    }
    if (m.scheme == "importance") {
      rc.gamma = optimizers::importance_sampling_stepsize(prof, omega, rc.p);
    } else {
      const auto& q = std::get<problems::TridiagonalQuadratic>(*problem);
      const auto wprof = problems::smoothness_profile(q, std::span<const double>(sampler.probabilities()));
      rc.gamma = optimizers::theoretical_stepsize(wprof, combinatorial::weighted_ab_of(sampler, inner), rc.p);
    }
  }
  return cell;
}

struct ExperimentResult {
  std::vector<fs::path> files;
  bool diverged = false;
};

namespace detail {

inline void write_file(const fs::path& path, const std::string& text, ExperimentResult& res) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  res.files.push_back(path);
}

inline ExperimentResult run_optimization(const ExperimentConfig& c, const fs::path& dir, std::ostream& log) {
  ExperimentResult res;
  fs::create_directories(dir / "trajectories");
  std::ostringstream summary, tuning;
  summary << kSummaryHeader << '\n';
  tuning << kTuningHeader << '\n';
  const std::vector<double> noise = c.kind == ExperimentKind::kLogistic ? std::vector<double>{0.0} : c.noise_scales;
  for (std::size_t si = 0; si < noise.size(); ++si) {
    ExperimentConfig cs = c;
    cs.noise_scales = noise;
    const auto problem = build_problem(cs, si);
    const auto prof = profile_of(problem);
    const std::size_t n = problem_n(problem), d = problem_d(problem);
    for (const auto& m : c.methods) {
      const auto cell = resolve_cell(cs, m, noise[si], prof, n, d, &problem);
      double multiplier = 1.0;
      if (c.stepsize == StepsizeMode::kTune) {
        auto tcfg = cell.config;
        tcfg.seed = c.seeds.front();
        const auto tuned = std::visit(
            [&](const auto& p) {
              return optimizers::tune_stepsize(p, tcfg, c.bit_budget, optimizers::powers_of_two(c.tune_min, c.tune_max));
            },
            problem);
        multiplier = tuned.multiplier;
        std::vector<double> mults = optimizers::powers_of_two(c.tune_min, c.tune_max);
        for (std::size_t k = 0; k < mults.size(); ++k)
          tuning << cell.id << ',' << numkit::format_double(mults[k]) << ',' << numkit::format_double(tuned.scores[k])
                 << '\n';
        if (tuned.all_diverged) log << cell.id << ": every multiplier diverged, using the smallest\n";
      }
      for (std::uint64_t seed : c.seeds) {
        auto rc = cell.config;
        rc.gamma *= multiplier;
        rc.seed = seed;
        rc.bit_budget = c.bit_budget;
        const auto r = std::visit([&](const auto& p) { return optimizers::run(p, rc); }, problem);
        std::ostringstream traj;
        write_trajectory(traj, r);
        write_file(dir / "trajectories" / (cell.id + "_seed" + std::to_string(seed) + ".csv"), traj.str(), res);
        using numkit::format_double;
        summary << cell.id << ',' << format_double(noise[si]) << ',' << m.method << ',' << m.scheme << ',' << seed
                << ',' << format_double(rc.p) << ',' << format_double(rc.gamma) << ',' << format_double(multiplier)
                << ',' << r.rounds_run << ',' << format_double(r.bits_total) << ','
                << format_double(r.rows.back().grad_norm_sq) << ',' << format_double(r.x_hat_grad_norm_sq) << ','
                << (r.diverged_at ? 1 : 0) << '\n';
        if (r.diverged_at) {
          res.diverged = true;
          log << cell.id << " seed " << seed << ": diverged at round " << *r.diverged_at << '\n';
        }
      }
    }
  }
  write_file(dir / "summary.csv", summary.str(), res);
  if (c.stepsize == StepsizeMode::kTune) write_file(dir / "tuning.csv", tuning.str(), res);
  return res;
}

inline ExperimentResult run_dn_plane(const ExperimentConfig& c, const fs::path& dir) {
  ExperimentResult res;
  fs::create_directories(dir);
  const auto cq = analysis::dn_plane(compressors::Kind::kCQ, c.log2_dmin, c.log2_dmax, c.log2_nmin, c.log2_nmax);
  const auto iq = analysis::dn_plane(compressors::Kind::kIQ, c.log2_dmin, c.log2_dmax, c.log2_nmin, c.log2_nmax);
  auto emit = [&](const std::string& name, const std::vector<analysis::PlanePoint>& g) {
    std::ostringstream os;
    analysis::write_plane_csv(os, g);
    write_file(dir / name, os.str(), res);
  };
  emit("cq.csv", cq);
  emit("iq.csv", iq);
  emit("cq_minus_iq.csv", analysis::plane_difference(cq, iq));
  return res;
}

inline ExperimentResult run_mse_suite(const ExperimentConfig& c, const fs::path& dir) {
  ExperimentResult res;
  fs::create_directories(dir);
  std::ostringstream os;
  os << mselab::kCsvHeader << '\n';
  for (const auto& r : mselab::default_suite(c.trials, c.seeds.front())) mselab::write_csv_row(os, r);
  write_file(dir / "mse.csv", os.str(), res);
  return res;
}

}  // namespace detail

/// Runs the experiment and writes its CSV files under out_root/name.
inline ExperimentResult run_experiment(const ExperimentConfig& c, const fs::path& out_root, std::ostream& log) {
  const fs::path dir = out_root / c.name;
  switch (c.kind) {
    case ExperimentKind::kDnPlane: return detail::run_dn_plane(c, dir);
    case ExperimentKind::kMseSuite: return detail::run_mse_suite(c, dir);
    default: return detail::run_optimization(c, dir, log);
  }
}

/// Derivation path of every random consumer, one per line.
inline std::string seed_report(const ExperimentConfig& c) {
  using numkit::RandomStream;
  namespace L = numkit::label;
  std::ostringstream os;
  os << "experiment " << kind_name(c.kind) << " (" << c.name << ")\n";
  switch (c.kind) {
    case ExperimentKind::kDnPlane: os << "closed form, no randomness\n"; return os.str();
    case ExperimentKind::kMseSuite:
      os << "mse suite: " << RandomStream(c.seeds.front()).describe() << " / section / cell / trial\n";
      return os.str();
    default: break;
  }
  if (c.kind == ExperimentKind::kLogistic) {
    os << "problem: dataset " << c.dataset << " (no randomness)\n";
  } else {
    for (std::size_t si = 0; si < c.noise_scales.size(); ++si)
      os << "problem s=" << numkit::format_double(c.noise_scales[si]) << ": "
         << RandomStream(c.problem_seed).child(L::kProblem, si).describe() << " / client\n";
  }
  for (std::uint64_t seed : c.seeds) {
    const RandomStream root(seed);
    os << "seed " << seed << ":\n";
    os << "  flags      " << root.child(L::kFlags).describe() << '\n';
    os << "  compressor " << root.child(L::kCompressor).describe() << " / round\n";
    os << "  output     " << root.child(L::kOutput).describe() << '\n';
  }
  if (c.stepsize == StepsizeMode::kTune) os << "tuning runs use seed " << c.seeds.front() << '\n';
  return os.str();
}

}  // namespace cqsim::cli
