#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cqsim/compressors/constants.hpp"
#include "cqsim/compressors/spec.hpp"
#include "cqsim/numkit/format.hpp"

namespace cqsim::analysis {

/// Inputs of the communication complexity C(p). alpha is the expected
/// number of bits a client sends in a compressed round.
struct ComplexityInputs {
  std::size_t d = 1;
  std::size_t n = 1;
  double delta0 = 1.0;
  double eps = 1.0;
  double L_minus = 1.0;
  double L_plus = 1.0;
  double L_pm = 0.0;
  double A = 0.0;
  double B = 0.0;
  double alpha = 0.0;

  void validate() const {
    if (d == 0 || n == 0) throw std::invalid_argument("ComplexityInputs: d and n must be positive");
    if (!(delta0 > 0.0) || !(eps > 0.0)) throw std::invalid_argument("ComplexityInputs: delta0 and eps must be positive");
    if (!(L_minus > 0.0) || !(L_plus >= 0.0) || !(L_pm >= 0.0))
      throw std::invalid_argument("ComplexityInputs: invalid smoothness constants");
    if (!(A >= 0.0) || !(B >= 0.0) || !(alpha >= 0.0))
      throw std::invalid_argument("ComplexityInputs: A, B and alpha must be nonnegative");
  }
};

/// (2 delta0 / eps^2) (32 d p + alpha (1-p)) (L- + sqrt((1-p)/p ((A-B) L+^2 + B L+-^2)))
inline double complexity(const ComplexityInputs& in, double p) {
  in.validate();
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("complexity: p must be in (0, 1]");
  const double d = static_cast<double>(in.d);
  const double mix = std::max(0.0, (in.A - in.B) * in.L_plus * in.L_plus + in.B * in.L_pm * in.L_pm);
  const double rate = in.L_minus + std::sqrt((1.0 - p) / p * mix);
  return 2.0 * in.delta0 / (in.eps * in.eps) * (32.0 * d * p + in.alpha * (1.0 - p)) * rate;
}

/// GD baseline (2 delta0 / eps^2) L- 32 d, equal to complexity(in, 1).
inline double gd_complexity(const ComplexityInputs& in) {
  in.validate();
  return 2.0 * in.delta0 / (in.eps * in.eps) * in.L_minus * 32.0 * static_cast<double>(in.d);
}

struct OptimalP {
  double p = 1.0;
  double value = 0.0;
};

inline constexpr double kMinP = 1e-8;
inline constexpr std::size_t kGridPoints = 10000;

/// Minimizes C over [1e-8, 1]: log-spaced grid, then golden section on the
/// bracket around the best grid point.
inline OptimalP optimize_p(const ComplexityInputs& in) {
  in.validate();
  const double lo = std::log(kMinP);
  auto grid = [&](std::size_t k) {
    if (k + 1 == kGridPoints) return 1.0;
    return std::exp(lo * (1.0 - static_cast<double>(k) / static_cast<double>(kGridPoints - 1)));
  };
  std::size_t best = 0;
  double best_val = complexity(in, grid(0));
  for (std::size_t k = 1; k < kGridPoints; ++k) {
    const double v = complexity(in, grid(k));
    if (v < best_val) {
      best = k;
      best_val = v;
    }
  }
  OptimalP out{grid(best), best_val};
  double a = grid(best == 0 ? 0 : best - 1), b = grid(std::min(best + 1, kGridPoints - 1));
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = complexity(in, x1), f2 = complexity(in, x2);
  for (int it = 0; it < 200; ++it) {
    if (std::abs(f1 - f2) <= 1e-10 * std::abs(f1) && (b - a) <= 1e-10 * b) break;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = complexity(in, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = complexity(in, x2);
    }
  }
  const double xm = f1 <= f2 ? x1 : x2, fm = std::min(f1, f2);
  if (fm < out.value) out = {xm, fm};
  return out;
}

inline double optimal_p(const ComplexityInputs& in) { return optimize_p(in).p; }

/// C(p*) / C_GD. delta0, eps and L- cancel.
inline double improvement_factor(const ComplexityInputs& in) { return optimize_p(in).value / gd_complexity(in); }

/// Zero-Hessian-variance inputs for a scheme with unit delta0, eps and L.
/// The tabulated A is used unchanged when L+- would be nonzero.
inline ComplexityInputs scheme_inputs(const compressors::CompressorSpec& spec) {
  const auto ab = compressors::ab_constants(spec);
  ComplexityInputs in;
  in.d = spec.d;
  in.n = spec.n;
  in.A = ab.A;
  in.B = ab.B;
  in.alpha = static_cast<double>(compressors::bits_per_client(spec, true));
  return in;
}

/// Reference row for DRIVE: A = (pi/2 - 1)/n and 32 + 2^ceil(log2 d) bits.
inline ComplexityInputs drive_inputs(std::size_t d, std::size_t n) {
  const auto ab = compressors::drive_reference_ab(n);
  ComplexityInputs in;
  in.d = d;
  in.n = n;
  in.A = ab.A;
  in.B = ab.B;
  in.alpha = static_cast<double>(compressors::drive_reference_bits(d));
  return in;
}

/// C_ind / C_cor for the rate factors at fixed p.
inline double complexity_ratio_cq_iq(double d, double n, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("complexity_ratio_cq_iq: p must be in (0, 1]");
  if (!(d > 0.0) || !(n > 0.0)) throw std::invalid_argument("complexity_ratio_cq_iq: d and n must be positive");
  const double r = (1.0 - p) / p;
  return (1.0 + std::sqrt(r * d / (4.0 * n))) / (1.0 + std::sqrt(r * d / (4.0 * n * n)));
}

/// Approximate optimal p for CQ when d = n is large:
/// (a / (2 (1 - a)))^(2/3) b^(1/3), a = (32 + d)/(32 d), b = 1/(4 n).
inline double cq_asymptotic_p(double d, double n) {
  const double a = (32.0 + d) / (32.0 * d), b = 1.0 / (4.0 * n);
  return std::pow(a / (2.0 * (1.0 - a)), 2.0 / 3.0) * std::cbrt(b);
}

struct PlanePoint {
  std::size_t d = 0;
  std::size_t n = 0;
  double log2_speedup = 0.0;
};

/// log2(1/IF) over all (d, n) with d, n powers of two in [2^lo, 2^hi].
inline std::vector<PlanePoint> dn_plane(compressors::Kind kind, int d_lo, int d_hi, int n_lo, int n_hi) {
  if (kind != compressors::Kind::kCQ && kind != compressors::Kind::kIQ)
    throw std::invalid_argument("dn_plane: scheme must be cq or iq");
  if (d_lo < 0 || n_lo < 0 || d_lo > d_hi || n_lo > n_hi || d_hi > 40 || n_hi > 40)
    throw std::invalid_argument("dn_plane: invalid exponent range");
  std::vector<PlanePoint> out;
  for (int de = d_lo; de <= d_hi; ++de) {
    for (int ne = n_lo; ne <= n_hi; ++ne) {
      const std::size_t d = std::size_t{1} << de, n = std::size_t{1} << ne;
      const auto spec = kind == compressors::Kind::kCQ ? compressors::CompressorSpec::cq(n, d)
                                                       : compressors::CompressorSpec::iq(n, d);
      out.push_back({d, n, -std::log2(improvement_factor(scheme_inputs(spec)))});
    }
  }
  return out;
}

/// Pointwise first minus second; the grids must cover the same (d, n).
inline std::vector<PlanePoint> plane_difference(const std::vector<PlanePoint>& a, const std::vector<PlanePoint>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("plane_difference: grid size mismatch");
  std::vector<PlanePoint> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].d != b[k].d || a[k].n != b[k].n) throw std::invalid_argument("plane_difference: grid mismatch");
    out[k] = {a[k].d, a[k].n, a[k].log2_speedup - b[k].log2_speedup};
  }
  return out;
}

inline constexpr const char* kPlaneHeader = "d,n,log2_speedup";

inline void write_plane_csv(std::ostream& os, const std::vector<PlanePoint>& grid) {
  os << kPlaneHeader << '\n';
  for (const auto& p : grid) os << p.d << ',' << p.n << ',' << numkit::format_double(p.log2_speedup) << '\n';
}

}  // namespace cqsim::analysis
