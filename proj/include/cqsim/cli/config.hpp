#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <type_traits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cqsim::cli {

/// Bad or missing configuration; the message names the key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { kQuadraticLpm, kLogistic, kPermKCQ, kDnPlane, kWeighted, kMseSuite };

inline std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kQuadraticLpm: return "quadratic_lpm";
    case ExperimentKind::kLogistic: return "logistic";
    case ExperimentKind::kPermKCQ: return "permk_cq";
    case ExperimentKind::kDnPlane: return "dn_plane";
    case ExperimentKind::kWeighted: return "weighted";
    case ExperimentKind::kMseSuite: return "mse_suite";
  }
  return "?";
}

inline ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::kQuadraticLpm, ExperimentKind::kLogistic, ExperimentKind::kPermKCQ,
                 ExperimentKind::kDnPlane, ExperimentKind::kWeighted, ExperimentKind::kMseSuite})
    if (kind_name(k) == s) return k;
  throw ConfigError("experiment.kind: unknown experiment '" + s + "'");
}

enum class StepsizeMode { kTune, kTheory };

/// One optimizer cell, written "method" or "method:scheme" in the config,
/// e.g. marina:cq, dcgd:iq, gd, marina_comb:importance.
struct MethodEntry {
  std::string method;
  std::string scheme;

  std::string label() const { return scheme.empty() ? method : method + "_" + scheme; }
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kQuadraticLpm;
  std::string name;
  std::vector<std::uint64_t> seeds;
  double bit_budget = 4e6;
  std::string output_dir = "out";

  // problem
  std::size_t n = 0;
  std::size_t d = 0;
  double lambda = 1e-3;
  std::vector<double> noise_scales{0.0};
  std::uint64_t problem_seed = 0;
  std::string dataset;

  // methods
  std::vector<MethodEntry> methods;
  std::optional<double> p;  // unset: chosen per method
  StepsizeMode stepsize = StepsizeMode::kTune;
  int tune_min = 0;
  int tune_max = 8;
  std::size_t log_every = 1;
  std::size_t tau = 1;
  std::uint32_t dither_levels = 1;

  // dn_plane
  int log2_dmin = 4, log2_dmax = 20, log2_nmin = 4, log2_nmax = 20;

  // mse_suite
  std::size_t trials = 100000;
};

namespace detail {

using boost::property_tree::ptree;

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  T v{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  std::from_chars_result res;
  if constexpr (std::is_floating_point_v<T>) {
    res = std::from_chars(first, last, v);
  } else {
    res = std::from_chars(first, last, v);
    // Integers may also be written in floating form such as 4e6.
    if (res.ec == std::errc{} && res.ptr != last) {
      double dv = 0.0;
      const auto r2 = std::from_chars(first, last, dv);
      if (r2.ec == std::errc{} && r2.ptr == last && dv >= 0.0 && dv == static_cast<double>(static_cast<T>(dv))) {
        return static_cast<T>(dv);
      }
    }
  }
  if (s.empty() || res.ec != std::errc{} || res.ptr != last) throw ConfigError(key + ": cannot parse '" + s + "'");
  return v;
}

inline std::optional<std::string> get(const ptree& pt, const std::string& key) {
  if (auto v = pt.get_optional<std::string>(ptree::path_type(key, '.'))) return trim(*v);
  return std::nullopt;
}

template <typename T>
void read(const ptree& pt, const std::string& key, T& out) {
  if (auto v = get(pt, key)) out = parse_number<T>(*v, key);
}

template <typename T>
void read_list(const ptree& pt, const std::string& key, std::vector<T>& out) {
  if (auto v = get(pt, key)) {
    out.clear();
    for (const auto& item : split_list(*v)) out.push_back(parse_number<T>(item, key));
  }
}

inline void check_keys(const ptree& pt) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> known = {
      {"experiment", {"kind", "name", "seeds", "bit_budget", "output_dir"}},
      {"problem", {"n", "d", "lambda", "noise_scales", "problem_seed", "dataset"}},
      {"methods", {"list", "p", "stepsize", "tune_min", "tune_max", "log_every", "tau", "dither_levels"}},
      {"dn_plane", {"log2_dmin", "log2_dmax", "log2_nmin", "log2_nmax"}},
      {"mse", {"trials"}},
  };
  for (const auto& [section, body] : pt) {
    const std::vector<std::string>* keys = nullptr;
    for (const auto& [name, list] : known)
      if (name == section) keys = &list;
    if (!keys) throw ConfigError(section + ": unknown section");
    for (const auto& [key, value] : body) {
      bool ok = false;
      for (const auto& k : *keys) ok = ok || k == key;
      if (!ok) throw ConfigError(section + "." + key + ": unknown key");
    }
  }
}

}  // namespace detail

inline MethodEntry parse_method(const std::string& token) {
  MethodEntry m;
  const auto colon = token.find(':');
  m.method = detail::trim(token.substr(0, colon));
  if (colon != std::string::npos) m.scheme = detail::trim(token.substr(colon + 1));
  static const std::vector<std::string> methods = {"marina", "marina_comb", "dcgd", "gd"};
  static const std::vector<std::string> schemes = {"identity", "iq",      "cq",       "std_dither", "nat_dither",
                                                   "ternary",  "permk",   "permk_cq"};
  static const std::vector<std::string> samplers = {"importance", "uniform"};
  auto contains = [](const std::vector<std::string>& v, const std::string& s) {
    for (const auto& x : v)
      if (x == s) return true;
    return false;
  };
  if (!contains(methods, m.method)) throw ConfigError("methods.list: unknown method '" + m.method + "'");
  if (m.method == "gd") {
    if (!m.scheme.empty()) throw ConfigError("methods.list: gd takes no compressor");
  } else if (m.method == "marina_comb") {
    if (!contains(samplers, m.scheme)) throw ConfigError("methods.list: marina_comb needs importance or uniform");
  } else if (!contains(schemes, m.scheme)) {
    throw ConfigError("methods.list: unknown compressor '" + m.scheme + "' for " + m.method);
  }
  return m;
}

/// Resolves relative paths in the config against `base_dir`.
inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  detail::ptree pt;
  try {
    boost::property_tree::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  detail::check_keys(pt);

  ExperimentConfig c;
  const auto kind = detail::get(pt, "experiment.kind");
  if (!kind) throw ConfigError("experiment.kind: missing");
  c.kind = parse_kind(*kind);
  c.name = detail::get(pt, "experiment.name").value_or(kind_name(c.kind));
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos)
    throw ConfigError("experiment.name: must be a plain non-empty name");
  c.seeds = {0};
  detail::read_list(pt, "experiment.seeds", c.seeds);
  if (c.seeds.empty()) throw ConfigError("experiment.seeds: must not be empty");
  detail::read(pt, "experiment.bit_budget", c.bit_budget);
  if (!(c.bit_budget > 0.0)) throw ConfigError("experiment.bit_budget: must be positive");
  if (auto v = detail::get(pt, "experiment.output_dir")) c.output_dir = *v;

  detail::read(pt, "problem.n", c.n);
  detail::read(pt, "problem.d", c.d);
  detail::read(pt, "problem.lambda", c.lambda);
  detail::read_list(pt, "problem.noise_scales", c.noise_scales);
  detail::read(pt, "problem.problem_seed", c.problem_seed);
  if (auto v = detail::get(pt, "problem.dataset")) {
    std::filesystem::path p(*v);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.dataset = p.string();
  }

  if (auto v = detail::get(pt, "methods.list"))
    for (const auto& tok : detail::split_list(*v)) c.methods.push_back(parse_method(tok));
  if (auto v = detail::get(pt, "methods.p")) {
    if (*v != "auto") c.p = detail::parse_number<double>(*v, "methods.p");
  }
  if (auto v = detail::get(pt, "methods.stepsize")) {
    if (*v == "tune") c.stepsize = StepsizeMode::kTune;
    else if (*v == "theory") c.stepsize = StepsizeMode::kTheory;
    else throw ConfigError("methods.stepsize: expected tune or theory");
  }
  detail::read(pt, "methods.tune_min", c.tune_min);
  detail::read(pt, "methods.tune_max", c.tune_max);
  detail::read(pt, "methods.log_every", c.log_every);
  detail::read(pt, "methods.tau", c.tau);
  detail::read(pt, "methods.dither_levels", c.dither_levels);

  detail::read(pt, "dn_plane.log2_dmin", c.log2_dmin);
  detail::read(pt, "dn_plane.log2_dmax", c.log2_dmax);
  detail::read(pt, "dn_plane.log2_nmin", c.log2_nmin);
  detail::read(pt, "dn_plane.log2_nmax", c.log2_nmax);
  detail::read(pt, "mse.trials", c.trials);

  // Kind-specific requirements.
  const bool optimizes = c.kind != ExperimentKind::kDnPlane && c.kind != ExperimentKind::kMseSuite;
  if (optimizes) {
    if (c.methods.empty()) throw ConfigError("methods.list: missing");
    if (c.kind != ExperimentKind::kLogistic && (c.n == 0 || c.d == 0))
      throw ConfigError("problem.n/problem.d: must be positive");
    if (c.kind == ExperimentKind::kLogistic && c.n == 0) throw ConfigError("problem.n: must be positive");
    if (c.p && !(*c.p > 0.0 && *c.p <= 1.0)) throw ConfigError("methods.p: must be in (0, 1]");
    if (c.tune_min > c.tune_max) throw ConfigError("methods.tune_min: exceeds tune_max");
    if (c.log_every == 0) throw ConfigError("methods.log_every: must be positive");
    if (c.noise_scales.empty()) throw ConfigError("problem.noise_scales: must not be empty");
  }
  if (c.kind == ExperimentKind::kLogistic) {
    if (c.dataset.empty()) throw ConfigError("problem.dataset: missing");
    if (!std::filesystem::exists(c.dataset)) throw ConfigError("problem.dataset: file not found: " + c.dataset);
  }
  if (c.kind == ExperimentKind::kDnPlane &&
      (c.log2_dmin < 0 || c.log2_nmin < 0 || c.log2_dmin > c.log2_dmax || c.log2_nmin > c.log2_nmax ||
       c.log2_dmax > 40 || c.log2_nmax > 40))
    throw ConfigError("dn_plane: invalid exponent range");
  if (c.kind == ExperimentKind::kMseSuite && c.trials < 1000) throw ConfigError("mse.trials: need at least 1000");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_config(in, std::filesystem::path(path).parent_path());
}

}  // namespace cqsim::cli
