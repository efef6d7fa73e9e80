#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "cqsim/analysis/complexity.hpp"
#include "cqsim/cli/config.hpp"
#include "cqsim/cli/runner.hpp"
#include "cqsim/mselab/suite.hpp"

namespace {

namespace fs = std::filesystem;
using cqsim::cli::ConfigError;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

// Accepts "2^k" or a plain power of two; returns k.
int parse_pow2(const std::string& text, const std::string& flag) {
  if (text.rfind("2^", 0) == 0) {
    const int k = std::stoi(text.substr(2));
    if (k < 0 || k > 40) throw ConfigError(flag + ": exponent out of range");
    return k;
  }
  const unsigned long long v = std::stoull(text);
  if (v == 0 || (v & (v - 1)) != 0) throw ConfigError(flag + ": must be a power of two");
  int k = 0;
  while ((1ull << k) < v) ++k;
  return k;
}

fs::path resolve_out(const std::optional<std::string>& flag, const std::string& from_config) {
  if (flag) return *flag;
  if (const char* env = std::getenv("OUTPUT_DIR"); env && *env) return env;
  return from_config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed distributed optimization simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment config");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool dry_run = false;
  run->add_option("--config", config_path, "Experiment config (INI)")->required();
  run->add_option("--seed", seed, "Replace the configured seeds with this one");
  run->add_option("--out", out, "Output root directory");
  run->add_flag("--dry-run", dry_run, "Validate the config and exit");

  auto* analyze = app.add_subcommand("analyze", "Closed-form complexity analysis");
  analyze->require_subcommand(1);
  auto* plane = analyze->add_subcommand("dn-plane", "log2 speedup over a (d, n) grid");
  std::string scheme = "cq", dmax = "2^20", nmax = "2^20", dmin = "2^4", nmin = "2^4";
  std::optional<std::string> plane_out;
  plane->add_option("--scheme", scheme, "cq, iq or cq-iq")->check(CLI::IsMember({"cq", "iq", "cq-iq"}));
  plane->add_option("--dmax", dmax, "Largest d (2^k or power of two)");
  plane->add_option("--nmax", nmax, "Largest n");
  plane->add_option("--dmin", dmin, "Smallest d");
  plane->add_option("--nmin", nmin, "Smallest n");
  plane->add_option("--out", plane_out, "Write CSV to this file instead of stdout");

  auto* mse = app.add_subcommand("mse", "Monte-Carlo MSE suite");
  std::string suite = "default";
  std::size_t trials = cqsim::mselab::kDefaultTrials;
  std::uint64_t mse_seed = 0;
  std::optional<std::string> mse_out;
  mse->add_option("--suite", suite, "Suite name")->check(CLI::IsMember({"default"}));
  mse->add_option("--trials", trials, "Trials per report");
  mse->add_option("--seed", mse_seed, "Root seed");
  mse->add_option("--out", mse_out, "Write CSV to this file instead of stdout");

  auto* seeds = app.add_subcommand("seeds", "Print the random derivation paths of a config");
  std::string seeds_config;
  std::optional<std::uint64_t> seeds_seed;
  seeds->add_option("--config", seeds_config, "Experiment config (INI)")->required();
  seeds->add_option("--seed", seeds_seed, "Replace the configured seeds with this one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed() || seeds->parsed()) {
      auto cfg = cqsim::cli::load_config(run->parsed() ? config_path : seeds_config);
      const auto& s = run->parsed() ? seed : seeds_seed;
      if (s) cfg.seeds = {*s};
      if (seeds->parsed()) {
        std::cout << cqsim::cli::seed_report(cfg);
        return kExitOk;
      }
      if (dry_run) {
        std::cout << "config ok: " << cqsim::cli::kind_name(cfg.kind) << " (" << cfg.name << ")\n";
        return kExitOk;
      }
      const auto res = cqsim::cli::run_experiment(cfg, resolve_out(out, cfg.output_dir), std::cerr);
      for (const auto& f : res.files) std::cout << f.string() << '\n';
      return res.diverged ? kExitDiverged : kExitOk;
    }
    if (plane->parsed()) {
      const int dlo = parse_pow2(dmin, "--dmin"), dhi = parse_pow2(dmax, "--dmax");
      const int nlo = parse_pow2(nmin, "--nmin"), nhi = parse_pow2(nmax, "--nmax");
      if (dlo > dhi || nlo > nhi) throw ConfigError("dn-plane: empty range");
      using cqsim::compressors::Kind;
      std::vector<cqsim::analysis::PlanePoint> grid;
      if (scheme == "cq-iq") {
        grid = cqsim::analysis::plane_difference(cqsim::analysis::dn_plane(Kind::kCQ, dlo, dhi, nlo, nhi),
                                                 cqsim::analysis::dn_plane(Kind::kIQ, dlo, dhi, nlo, nhi));
      } else {
        grid = cqsim::analysis::dn_plane(scheme == "cq" ? Kind::kCQ : Kind::kIQ, dlo, dhi, nlo, nhi);
      }
      if (plane_out) {
        std::ofstream f(*plane_out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + *plane_out);
        cqsim::analysis::write_plane_csv(f, grid);
      } else {
        cqsim::analysis::write_plane_csv(std::cout, grid);
      }
      return kExitOk;
    }
    if (mse->parsed()) {
      if (trials < cqsim::mselab::kMinTrials) throw ConfigError("--trials: need at least 1000");
      std::ofstream file;
      if (mse_out) {
        file.open(*mse_out, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write " + *mse_out);
      }
      std::ostream& os = mse_out ? static_cast<std::ostream&>(file) : std::cout;
      os << cqsim::mselab::kCsvHeader << '\n';
      bool all_pass = true;
      for (const auto& r : cqsim::mselab::default_suite(trials, mse_seed)) {
        cqsim::mselab::write_csv_row(os, r);
        all_pass = all_pass && r.pass;
      }
      if (!all_pass) std::cerr << "some reports exceed their bound\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const cqsim::problems::ParseError& e) {
    std::cerr << "dataset error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
