#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cqsim/compressors/constants.hpp"
#include "cqsim/compressors/quantizers.hpp"
#include "cqsim/compressors/round.hpp"
#include "cqsim/compressors/wire.hpp"
#include "cqsim/numkit/linalg.hpp"
#include "cqsim/numkit/random.hpp"

using namespace cqsim;
using namespace cqsim::compressors;
using numkit::RandomStream;

namespace {

std::vector<CompressorSpec> all_schemes(std::size_t n, std::size_t d) {
  return {CompressorSpec::identity(n, d),      CompressorSpec::iq(n, d),
          CompressorSpec::cq(n, d),            CompressorSpec::std_dither(n, d, 2.0, 2),
          CompressorSpec::nat_dither(n, d, 2.0, 3), CompressorSpec::ternary(n, d),
          CompressorSpec::permk(n, d, 2),      CompressorSpec::permk_cq(n, d, 2)};
}

std::vector<Vector> random_inputs(std::size_t n, std::size_t d, RandomStream& rng) {
  std::vector<Vector> rows(n, Vector(d));
  for (auto& r : rows)
    for (auto& v : r) v = rng.normal();
  return rows;
}

}  // namespace

TEST(RoundUpF32, CoversValue) {
  auto s = RandomStream(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::exp(40.0 * (s.uniform01() - 0.5));
    const float f = round_up_f32(v);
    EXPECT_GE(static_cast<double>(f), v);
    EXPECT_LT(static_cast<double>(std::nextafter(f, 0.0f)), v);
  }
  EXPECT_EQ(round_up_f32(0.0), 0.0f);
  EXPECT_THROW(round_up_f32(1e300), std::overflow_error);
  EXPECT_THROW(round_up_f32(-1.0), std::invalid_argument);
}

TEST(CompressRound, IdentityIsExact) {
  auto s = RandomStream(2);
  const auto in = random_inputs(3, 5, s);
  const auto out = compress_round(CompressorSpec::identity(3, 5), std::span<const Vector>(in), s.child(1));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(out.decoded[i], in[i]);
    EXPECT_EQ(out.messages[i].bit_count, 32u * 5);
  }
}

TEST(CompressRound, PermKTwoByTwo) {
  const std::vector<Vector> in = {{1.0, 2.0}, {1.0, 2.0}};
  const auto spec = CompressorSpec::permk(2, 2, 2);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto out = compress_round(spec, std::span<const Vector>(in), RandomStream(3).child(t));
    const Vector& a = out.decoded[0];
    const Vector& b = out.decoded[1];
    // Each client keeps one coordinate, scaled by tau, and the two are disjoint.
    EXPECT_TRUE((a == Vector{2.0, 0.0} && b == Vector{0.0, 4.0}) || (a == Vector{0.0, 4.0} && b == Vector{2.0, 0.0}));
    EXPECT_EQ((a[0] + b[0]) / 2, 1.0);
    EXPECT_EQ((a[1] + b[1]) / 2, 2.0);
  }
}

TEST(CompressRound, PermKDivisibility) {
  EXPECT_THROW(CompressorSpec::permk(4, 6, 4).validate(), std::invalid_argument);
  EXPECT_THROW(CompressorSpec::permk_cq(3, 6, 2).validate(), std::invalid_argument);
  EXPECT_NO_THROW(CompressorSpec::permk_cq(4, 8, 2).validate());
}

TEST(CompressRound, ZeroVectorIsExactZero) {
  const std::size_t n = 3, d = 6;
  const std::vector<Vector> in(n, Vector(d, 0.0));
  for (const auto& spec : all_schemes(n, d)) {
    if (spec.is_permk()) continue;
    const auto out = compress_round(spec, std::span<const Vector>(in), RandomStream(4));
    for (const auto& v : out.decoded) EXPECT_EQ(v, Vector(d, 0.0)) << describe(spec);
  }
}

TEST(CompressRound, BitCountsMatchAccounting) {
  auto s = RandomStream(5);
  const std::size_t n = 4, d = 8;
  const auto in = random_inputs(n, d, s);
  for (const auto& spec : all_schemes(n, d)) {
    const auto out = compress_round(spec, std::span<const Vector>(in), s.child(1));
    for (const auto& m : out.messages) EXPECT_EQ(m.bit_count, bits_per_client(spec, true)) << describe(spec);
  }
}

TEST(CompressRound, EveryClientUnbiased) {
  auto s = RandomStream(6);
  const std::size_t n = 4, d = 4, trials = 20000;
  const auto in = random_inputs(n, d, s);
  for (const auto& spec : all_schemes(n, d)) {
    std::vector<Vector> sum(n, Vector(d, 0.0)), sum_sq(n, Vector(d, 0.0));
    for (std::size_t t = 0; t < trials; ++t) {
      const auto out = compress_round(spec, std::span<const Vector>(in), s.child(100, t));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          sum[i][j] += out.decoded[i][j];
          sum_sq[i][j] += out.decoded[i][j] * out.decoded[i][j];
        }
    }
    const double T = static_cast<double>(trials);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double m = sum[i][j] / T;
        const double var = std::max(sum_sq[i][j] / T - m * m, 0.0);
        const double se = std::sqrt(var / T);
        // The float32 scale leaves the largest ternary coordinate a zero
        // outcome of probability ~1e-7 that 20000 trials never see.
        EXPECT_NEAR(m, in[i][j], 5.0 * se + 1e-6 * std::abs(in[i][j])) << describe(spec) << " client " << i << " coord " << j;
      }
  }
}

TEST(CompressMean, MatchesAverageOfDecoded) {
  auto s = RandomStream(7);
  const std::size_t n = 4, d = 6;
  const auto rows = random_inputs(n, d, s);
  const auto in = ClientInputs::distinct(rows);
  for (const auto& spec : all_schemes(n, d)) {
    const auto out = compress_round(spec, std::span<const Vector>(rows), s.child(9));
    const Vector mean = compress_mean(spec, in, s.child(9));
    for (std::size_t j = 0; j < d; ++j) {
      double m = 0;
      for (const auto& v : out.decoded) m += v[j];
      EXPECT_DOUBLE_EQ(mean[j], m / n) << describe(spec);
    }
  }
}

TEST(CompressMean, ReplicatedIqMatchesPerClientPath) {
  auto s = RandomStream(8);
  const std::size_t n = 16, d = 10;
  Vector a(d);
  for (auto& v : a) v = s.normal();
  const auto spec = CompressorSpec::iq(n, d);
  for (std::uint64_t t = 0; t < 20; ++t) {
    const Vector fast = compress_mean(spec, ClientInputs::replicated(a, n), s.child(t));
    const Vector slow = compress_mean(spec, ClientInputs::distinct(std::vector<Vector>(n, a)), s.child(t));
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(fast[j], slow[j], 1e-12);
  }
}

TEST(CompressMean, ReplicatedCqHasSameLawAsPerClientPath) {
  auto s = RandomStream(9);
  const std::size_t n = 8, d = 4, trials = 40000;
  const Vector a = {0.3, -1.1, 0.7, 0.05};
  for (const auto& spec : {CompressorSpec::cq(n, d), CompressorSpec::permk_cq(n, d, 2)}) {
    double fast = 0, slow = 0, fast_sq = 0, slow_sq = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const double e1 = numkit::dist_sq(compress_mean(spec, ClientInputs::replicated(a, n), s.child(1, t)), a);
      const double e2 = numkit::dist_sq(
          compress_mean(spec, ClientInputs::distinct(std::vector<Vector>(n, a)), s.child(2, t)), a);
      fast += e1;
      slow += e2;
      fast_sq += e1 * e1;
      slow_sq += e2 * e2;
    }
    const double T = trials;
    const double se = std::sqrt((fast_sq / T - fast * fast / T / T + slow_sq / T - slow * slow / T / T) / T);
    EXPECT_NEAR(fast / T, slow / T, 5 * se) << describe(spec);
  }
}

TEST(CqScalar, AllAtLowerEnd) {
  auto s = RandomStream(10);
  const std::vector<double> a(5, -1.0);
  EXPECT_EQ(cq_scalar(a, -1.0, 2.0, s), std::vector<double>(5, -1.0));
}

TEST(CqScalar, DegenerateRange) {
  auto s = RandomStream(11);
  const std::vector<double> a(3, 0.4);
  EXPECT_EQ(cq_scalar(a, 0.4, 0.4, s), a);
  EXPECT_THROW(cq_scalar(std::vector<double>{2.0}, 0.0, 1.0, s), std::invalid_argument);
}

TEST(CqScalar, HalfIsExactEveryDraw) {
  auto s = RandomStream(12);
  const std::vector<double> a(4, 0.5);
  for (int t = 0; t < 10000; ++t) {
    const auto out = cq_scalar(a, 0.0, 1.0, s);
    EXPECT_EQ((out[0] + out[1] + out[2] + out[3]) / 4.0, 0.5);
  }
}

TEST(CqScalar, FiveEighthsMse) {
  auto s = RandomStream(13);
  const std::vector<double> a(4, 0.625);
  const int trials = 1000000;
  double acc = 0;
  for (int t = 0; t < trials; ++t) {
    const auto out = cq_scalar(a, 0.0, 1.0, s);
    const double e = (out[0] + out[1] + out[2] + out[3]) / 4.0 - 0.625;
    acc += e * e;
  }
  EXPECT_NEAR(acc / trials, 0.015625, 0.02 * 0.015625);
}

TEST(CqScalar, ExplicitRandomness) {
  // n = 2, y = 0.75: slot 0 always rounds up, slot 1 rounds up when u < 0.5.
  const std::vector<double> a = {0.75, 0.75};
  const std::vector<std::uint32_t> perm = {1, 0};
  EXPECT_EQ(cq_scalar(a, 0.0, 1.0, perm, std::vector<double>{0.49, 0.99}), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(cq_scalar(a, 0.0, 1.0, perm, std::vector<double>{0.51, 0.0}), (std::vector<double>{0.0, 1.0}));
}

TEST(IqScalar, TopOfRange) {
  auto s = RandomStream(14);
  for (int t = 0; t < 1000; ++t) EXPECT_EQ(iq_scalar(1.0, -1.0, 1.0, s.uniform01()), 1.0);
}

TEST(IqScalar, BernoulliVariance) {
  auto s = RandomStream(15);
  const int trials = 200000;
  double m = 0, m2 = 0;
  for (int t = 0; t < trials; ++t) {
    const double v = iq_scalar(0.5, 0.0, 1.0, s.uniform01());
    m += v;
    m2 += v * v;
  }
  m /= trials;
  EXPECT_NEAR(m2 / trials - m * m, 0.25, 0.003);
}

TEST(IqScalar, HomogeneousMeanBound) {
  auto s = RandomStream(16);
  const std::size_t n = 8;
  const int trials = 100000;
  const std::vector<double> a(n, 0.3);
  double acc = 0;
  for (int t = 0; t < trials; ++t) {
    const auto out = iq_scalar(a, 0.0, 1.0, s);
    double m = 0;
    for (double v : out) m += v;
    acc += std::pow(m / n - 0.3, 2);
  }
  EXPECT_LE(acc / trials, 1.0 / (4.0 * n) * 1.02);
}

TEST(Dither, StandardTopLevelIsDeterministic) {
  const std::size_t d = 4;
  const std::vector<Vector> in = {{3.0, 0.0, 0.0, 0.0}};
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto out = compress_round(CompressorSpec::std_dither(1, d, 2.0, 3), std::span<const Vector>(in),
                                    RandomStream(17).child(t));
    EXPECT_EQ(out.decoded[0], in[0]);
  }
}

TEST(Dither, NaturalTwoPointLaw) {
  auto s = RandomStream(18);
  int half = 0;
  double sum = 0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    const auto v = dither_magnitude(Ladder::kNatural, 2, 0.3, s.uniform01());
    ASSERT_TRUE(v == 0 || v == 1);
    const double xi = level_value(Ladder::kNatural, 2, v);
    half += v == 1;
    sum += xi;
  }
  EXPECT_NEAR(half / double(trials), 0.6, 0.005);
  EXPECT_NEAR(sum / trials, 0.3, 0.005);
}

TEST(Dither, NaturalLevelsArePowersOfTwo) {
  EXPECT_EQ(level_value(Ladder::kNatural, 3, 0), 0.0);
  EXPECT_EQ(level_value(Ladder::kNatural, 3, 1), 0.25);
  EXPECT_EQ(level_value(Ladder::kNatural, 3, 3), 1.0);
  EXPECT_EQ(level_value(Ladder::kStandard, 4, 3), 0.75);
}

TEST(Dither, InvalidParameters) {
  EXPECT_THROW(CompressorSpec::std_dither(1, 4, 0.5, 2).validate(), std::invalid_argument);
  EXPECT_THROW(CompressorSpec::nat_dither(1, 4, 2.0, 0).validate(), std::invalid_argument);
}

TEST(PermKCQ, TauOneIsCQ) {
  auto s = RandomStream(19);
  const auto in = random_inputs(4, 6, s);
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto a = compress_round(CompressorSpec::permk_cq(4, 6, 1), std::span<const Vector>(in), s.child(t));
    const auto b = compress_round(CompressorSpec::cq(4, 6), std::span<const Vector>(in), s.child(t));
    EXPECT_EQ(a.decoded, b.decoded);
  }
}

TEST(PermKCQ, TauNMasksMatchPermK) {
  auto s = RandomStream(20);
  const std::size_t n = 4, d = 8;
  const auto in = random_inputs(n, d, s);
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto a = compress_round(CompressorSpec::permk_cq(n, d, n), std::span<const Vector>(in), s.child(t));
    const auto b = compress_round(CompressorSpec::permk(n, d, n), std::span<const Vector>(in), s.child(t));
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(a.randomness.support(i), b.randomness.support(i));
  }
}

TEST(PermKCQ, HomogeneousMseBound) {
  auto s = RandomStream(21);
  const std::size_t n = 4, d = 4, tau = 2;
  const Vector a = {0.5, -1.0, 0.25, 2.0};
  const auto spec = CompressorSpec::permk_cq(n, d, tau);
  const int trials = 50000;
  double acc = 0, acc2 = 0;
  for (int t = 0; t < trials; ++t) {
    const double e = numkit::dist_sq(compress_mean(spec, ClientInputs::distinct(std::vector<Vector>(n, a)), s.child(t)), a);
    acc += e;
    acc2 += e * e;
  }
  const double m = acc / trials;
  const double se = std::sqrt((acc2 / trials - m * m) / trials);
  EXPECT_LE(m, numkit::norm_sq(a) + 3 * se);
}

TEST(AbConstants, TableValues) {
  auto iq = ab_constants(CompressorSpec::iq(128, 1024));
  EXPECT_DOUBLE_EQ(iq.A, 2.0);
  EXPECT_DOUBLE_EQ(iq.B, 0.0);
  auto cq = ab_constants(CompressorSpec::cq(128, 1024));
  EXPECT_DOUBLE_EQ(cq.A, 0.015625);
  EXPECT_DOUBLE_EQ(cq.B, 0.0);
  auto id = ab_constants(CompressorSpec::identity(3, 3));
  EXPECT_EQ(id.A, 0.0);
  EXPECT_EQ(id.B, 0.0);
  EXPECT_DOUBLE_EQ(ab_certified(CompressorSpec::iq(128, 1024)).A, 8.0);
  EXPECT_DOUBLE_EQ(ab_certified(CompressorSpec::cq(128, 1024)).A, 0.0625);
  EXPECT_DOUBLE_EQ(ab_constants(CompressorSpec::permk_cq(64, 1024, 8)).A, 1024.0 * 64 / (64.0 * 64));
  const auto pk = ab_constants(CompressorSpec::permk(4, 8, 4));
  EXPECT_EQ(pk.A, 1.0);
  EXPECT_EQ(pk.B, 1.0);
  EXPECT_THROW(ab_constants(CompressorSpec::permk(4, 8, 2)), UnsupportedScheme);
}

TEST(AbConstants, DitherUsesOmegaOverN) {
  const auto spec = CompressorSpec::std_dither(10, 100, 2.0, 4);
  EXPECT_DOUBLE_EQ(omega(spec), std::min(100.0 / 64.0, 10.0 / 4.0));
  EXPECT_DOUBLE_EQ(ab_constants(spec).A, omega(spec) / 10.0);
  EXPECT_THROW(omega(CompressorSpec::std_dither(10, 100, 1.0, 4)), UnsupportedScheme);
}

TEST(BitsPerClient, Examples) {
  EXPECT_EQ(bits_per_client(CompressorSpec::cq(1, 1024), true), 1056u);
  EXPECT_EQ(bits_per_client(CompressorSpec::cq(1, 1024), false), 32768u);
  EXPECT_EQ(bits_per_client(CompressorSpec::permk_cq(32, 1024, 32), true), 64u);
  EXPECT_EQ(bits_per_client(CompressorSpec::ternary(1, 100), true),
            31u + static_cast<std::uint64_t>(std::ceil(100 * std::log2(3.0))));
  EXPECT_EQ(bits_per_client(CompressorSpec::nat_dither(1, 100, 2.0, 3), true),
            31u + static_cast<std::uint64_t>(std::ceil(100 * std::log2(7.0))));
  EXPECT_EQ(drive_reference_bits(1000), 32u + 1024u);
}

TEST(Wire, RoundTripEveryScheme) {
  auto s = RandomStream(22);
  const std::size_t n = 4, d = 8;
  const auto in = random_inputs(n, d, s);
  for (const auto& spec : all_schemes(n, d)) {
    const auto out = compress_round(spec, std::span<const Vector>(in), s.child(1));
    for (std::size_t i = 0; i < n; ++i) {
      const auto bytes = serialize(spec, out.messages[i]);
      const auto w = deserialize(bytes, d);
      EXPECT_EQ(w.spec.kind, spec.kind);
      EXPECT_EQ(w.message, out.messages[i]) << describe(spec);
      EXPECT_EQ(decode(spec, w.message, out.randomness, i), out.decoded[i]);
    }
  }
}

TEST(Wire, RejectsMalformed) {
  EXPECT_THROW(deserialize(std::vector<std::uint8_t>{}, 4), std::invalid_argument);
  EXPECT_THROW(deserialize(std::vector<std::uint8_t>{42}, 4), std::invalid_argument);
  EXPECT_THROW(deserialize(std::vector<std::uint8_t>{1, 0, 0}, 4), std::invalid_argument);
}
