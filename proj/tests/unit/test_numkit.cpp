#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <vector>

#include "cqsim/numkit/bits.hpp"
#include "cqsim/numkit/format.hpp"
#include "cqsim/numkit/linalg.hpp"
#include "cqsim/numkit/random.hpp"

using namespace cqsim;
using numkit::RandomStream;

TEST(RandomStream, SamePathSameSequence) {
  auto a = RandomStream(42).child(3, 7);
  auto b = RandomStream(42).child(3).child(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, ChildDoesNotConsumeParent) {
  RandomStream a(5), b(5);
  (void)a.child(1).next_u64();
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, DistinctPathsDiffer) {
  std::set<std::uint64_t> first;
  const RandomStream root(1);
  for (std::uint64_t k = 0; k < 1000; ++k) first.insert(root.child(k).next_u64());
  EXPECT_EQ(first.size(), 1000u);
  EXPECT_NE(RandomStream(1).child(2, 3).next_u64(), RandomStream(1).child(3, 2).next_u64());
  EXPECT_NE(RandomStream(1).next_u64(), RandomStream(2).next_u64());
}

TEST(RandomStream, DescribeShowsPath) {
  EXPECT_EQ(RandomStream(0).child(1).describe(), "seed=0 path=[1]");
  EXPECT_EQ(RandomStream(7).child(2, 3).describe(), "seed=7 path=[2,3]");
}

TEST(RandomStream, UniformMoments) {
  auto s = RandomStream(9).child(1);
  const int N = 200000;
  double m = 0, m2 = 0;
  for (int i = 0; i < N; ++i) {
    const double u = s.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    m += u;
    m2 += u * u;
  }
  m /= N;
  m2 /= N;
  EXPECT_NEAR(m, 0.5, 0.005);
  EXPECT_NEAR(m2 - m * m, 1.0 / 12.0, 0.002);
}

TEST(RandomStream, NormalAndExponentialMoments) {
  auto s = RandomStream(10);
  const int N = 200000;
  double nm = 0, nv = 0, em = 0;
  for (int i = 0; i < N; ++i) {
    const double z = s.normal();
    nm += z;
    nv += z * z;
    const double e = s.exponential();
    ASSERT_GE(e, 0.0);
    em += e;
  }
  EXPECT_NEAR(nm / N, 0.0, 0.01);
  EXPECT_NEAR(nv / N, 1.0, 0.02);
  EXPECT_NEAR(em / N, 1.0, 0.02);
}

TEST(RandomStream, UniformBelowRangeAndBalance) {
  auto s = RandomStream(11);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[s.uniform_below(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
  EXPECT_THROW(s.uniform_below(0), std::invalid_argument);
}

TEST(SamplePermutation, SingleElement) {
  auto s = RandomStream(1);
  EXPECT_EQ(numkit::sample_permutation(1, s), std::vector<std::uint32_t>{0});
}

TEST(SamplePermutation, ZeroThrows) {
  auto s = RandomStream(1);
  EXPECT_THROW(numkit::sample_permutation(0, s), std::invalid_argument);
}

TEST(SamplePermutation, TwoElementsUniform) {
  auto s = RandomStream(2);
  int identity = 0;
  const int N = 100000;
  for (int i = 0; i < N; ++i) identity += numkit::sample_permutation(2, s)[0] == 0;
  EXPECT_NEAR(static_cast<double>(identity) / N, 0.5, 0.01);
}

TEST(SamplePermutation, ThreeElementsUniform) {
  auto s = RandomStream(3);
  std::map<std::vector<std::uint32_t>, int> counts;
  const int N = 300000;
  for (int i = 0; i < N; ++i) ++counts[numkit::sample_permutation(3, s)];
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [perm, c] : counts) EXPECT_NEAR(static_cast<double>(c) / N, 1.0 / 6.0, 0.01);
}

TEST(SamplePermutation, IsPermutation) {
  auto s = RandomStream(4);
  for (std::size_t n : {5u, 64u, 1000u}) {
    auto p = numkit::sample_permutation(n, s);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(p[i], i);
  }
}

TEST(SampleCategorical, FollowsWeights) {
  const std::vector<double> cum = {0.1, 0.4, 1.0};
  auto s = RandomStream(5);
  std::vector<int> counts(3, 0);
  const int N = 100000;
  for (int i = 0; i < N; ++i) ++counts[numkit::sample_categorical(cum, s)];
  EXPECT_NEAR(counts[0] / double(N), 0.1, 0.005);
  EXPECT_NEAR(counts[1] / double(N), 0.3, 0.007);
  EXPECT_NEAR(counts[2] / double(N), 0.6, 0.007);
}

TEST(BitBuffer, EmptyPack) {
  const auto b = numkit::pack_bits(std::vector<std::uint8_t>{});
  EXPECT_EQ(b.size(), 0u);
  EXPECT_TRUE(b.bytes().empty());
}

TEST(BitBuffer, LsbFirst) {
  const auto b = numkit::pack_bits(std::vector<std::uint8_t>{1, 0, 1, 1});
  EXPECT_EQ(b.size(), 4u);
  ASSERT_EQ(b.bytes().size(), 1u);
  EXPECT_EQ(b.bytes()[0], 0b00001101);
}

TEST(BitBuffer, RejectsNonBinary) {
  EXPECT_THROW(numkit::pack_bits(std::vector<std::uint8_t>{0, 2}), std::invalid_argument);
}

TEST(BitBuffer, RoundTripAllLengths) {
  auto s = RandomStream(6);
  for (std::size_t len = 0; len <= 4096; ++len) {
    std::vector<std::uint8_t> v(len);
    for (auto& x : v) x = static_cast<std::uint8_t>(s.next_u64() & 1u);
    const auto b = numkit::pack_bits(v);
    ASSERT_EQ(b.size(), len);
    ASSERT_EQ(numkit::unpack_bits(b), v);
    ASSERT_EQ(numkit::BitBuffer::from_bytes(b.bytes(), len), b);
  }
}

TEST(BitBuffer, Float32RoundTrip) {
  numkit::BitBuffer b;
  b.push_back(true);
  numkit::push_float32(b, 3.25f);
  numkit::push_float32(b, -0.0f);
  EXPECT_EQ(b.size(), 65u);
  EXPECT_EQ(numkit::read_float32(b, 1), 3.25f);
  EXPECT_TRUE(std::signbit(numkit::read_float32(b, 33)));
  EXPECT_THROW(b.read_bits(60, 8), std::out_of_range);
}

TEST(MixedRadix, BitCountMatchesCeilLog) {
  for (std::uint32_t radix : {3u, 5u, 7u, 9u}) {
    for (std::size_t count : {1u, 2u, 10u, 100u, 1024u}) {
      const double want = std::ceil(static_cast<double>(count) * std::log2(static_cast<double>(radix)));
      EXPECT_EQ(numkit::mixed_radix_bits(count, radix), static_cast<std::size_t>(want)) << radix << " " << count;
    }
  }
  EXPECT_EQ(numkit::mixed_radix_bits(0, 3), 0u);
  EXPECT_EQ(numkit::mixed_radix_bits(8, 2), 8u);
}

TEST(MixedRadix, RoundTrip) {
  auto s = RandomStream(7);
  for (std::uint32_t radix : {3u, 5u, 17u}) {
    for (std::size_t count : {0u, 1u, 33u, 500u}) {
      std::vector<std::uint32_t> sym(count);
      for (auto& v : sym) v = static_cast<std::uint32_t>(s.uniform_below(radix));
      numkit::BitBuffer b;
      b.push_bits(0b101, 3);
      numkit::push_mixed_radix(b, sym, radix);
      EXPECT_EQ(b.size(), 3 + numkit::mixed_radix_bits(count, radix));
      EXPECT_EQ(numkit::read_mixed_radix(b, 3, count, radix), sym);
    }
  }
  numkit::BitBuffer b;
  const std::vector<std::uint32_t> bad = {3};
  EXPECT_THROW(numkit::push_mixed_radix(b, bad, 3), std::invalid_argument);
}

TEST(Linalg, VectorHelpers) {
  const Vector a = {3.0, 4.0};
  EXPECT_DOUBLE_EQ(numkit::norm2(a), 5.0);
  EXPECT_DOUBLE_EQ(numkit::norm_sq(a), 25.0);
  EXPECT_DOUBLE_EQ(numkit::norm_q(a, 1.0), 7.0);
  EXPECT_DOUBLE_EQ(numkit::norm_q(a, INFINITY), 4.0);
  const Vector huge = {1e200, 1e200};
  EXPECT_NEAR(numkit::norm2(huge) / 1e200, std::sqrt(2.0), 1e-12);
  EXPECT_TRUE(numkit::all_finite(a));
  EXPECT_FALSE(numkit::all_finite(Vector{1.0, NAN}));
  const std::vector<Vector> rows = {{1.0, 0.0}, {-1.0, 2.0}};
  EXPECT_EQ(numkit::mean_of(rows), (Vector{0.0, 1.0}));
}

TEST(SpectralNorm, Examples) {
  EXPECT_NEAR(numkit::spectral_norm(numkit::SymmetricMatrix::identity(2)), 1.0, 1e-12);
  const auto m = numkit::SymmetricMatrix::from_rows({{2, -1}, {-1, 2}});
  EXPECT_NEAR(numkit::spectral_norm(m), 3.0, 1e-12);
  EXPECT_NEAR(numkit::spectral_norm(numkit::SymmetricMatrix(2)), 0.0, 1e-15);
  const auto neg = numkit::SymmetricMatrix::from_rows({{-5, 0}, {0, 1}});
  EXPECT_NEAR(numkit::spectral_norm(neg), 5.0, 1e-12);
}

TEST(MinEigenvalue, Examples) {
  EXPECT_NEAR(numkit::min_eigenvalue(numkit::SymmetricMatrix::identity(3)), 1.0, 1e-12);
  EXPECT_NEAR(numkit::min_eigenvalue(numkit::SymmetricMatrix::from_rows({{2, -1}, {-1, 2}})), 1.0, 1e-12);
  EXPECT_NEAR(numkit::min_eigenvalue(numkit::SymmetricMatrix(2)), 0.0, 1e-15);
}

TEST(SymmetricMatrix, RejectsAsymmetricAndNonFinite) {
  EXPECT_THROW(numkit::SymmetricMatrix::from_rows({{1, 2}, {3, 1}}), std::invalid_argument);
  auto m = numkit::SymmetricMatrix(2);
  m.set(0, 1, NAN);
  EXPECT_THROW(numkit::spectral_norm(m), std::invalid_argument);
  EXPECT_TRUE(std::isnan(m(1, 0)));
}

TEST(TridiagonalMatrix, SecondDifferenceSpectrum) {
  // Eigenvalues of tridiag(-1, 2, -1) are 2 - 2 cos(k pi / (d + 1)).
  for (std::size_t d : {1u, 2u, 7u, 64u, 1024u}) {
    const auto t = numkit::TridiagonalMatrix::second_difference(d, 1.0);
    const double pi = std::numbers::pi;
    const double dd = static_cast<double>(d);
    EXPECT_NEAR(numkit::min_eigenvalue(t), 2.0 - 2.0 * std::cos(pi / (dd + 1.0)), 1e-12);
    EXPECT_NEAR(numkit::max_eigenvalue(t), 2.0 - 2.0 * std::cos(dd * pi / (dd + 1.0)), 1e-12);
  }
}

TEST(TridiagonalMatrix, AgreesWithDense) {
  auto s = RandomStream(8);
  const std::size_t d = 9;
  Vector diag(d), off(d - 1);
  for (auto& v : diag) v = 3.0 + s.uniform01();
  for (auto& v : off) v = s.normal();
  const numkit::TridiagonalMatrix t(diag, off);
  const auto dense = t.to_dense();
  EXPECT_NEAR(numkit::max_eigenvalue(t), numkit::max_eigenvalue(dense), 1e-10);
  EXPECT_NEAR(numkit::min_eigenvalue(t), numkit::min_eigenvalue(dense), 1e-10);

  Vector x(d), y1(d), y2(d);
  for (auto& v : x) v = s.normal();
  t.apply(x, y1);
  dense.apply(x, y2);
  for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-12);

  numkit::SymmetricMatrix sq1(d), sq2(d);
  t.accumulate_square(sq1, 0.5);
  dense.accumulate_square(sq2, 0.5);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(sq1(i, j), sq2(i, j), 1e-12);

  const Vector sol_t = numkit::solve(t, x);
  const Vector sol_d = numkit::solve(dense, x);
  for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(sol_t[i], sol_d[i], 1e-10);
}

TEST(SpectralNorm, RayleighLowerBoundWitness) {
  auto s = RandomStream(12);
  const std::size_t d = 12;
  numkit::SymmetricMatrix m(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) m.set(i, j, s.normal());
  const double norm = numkit::spectral_norm(m);
  for (int trial = 0; trial < 200; ++trial) {
    Vector v(d), mv(d);
    for (auto& x : v) x = s.normal();
    m.apply(v, mv);
    EXPECT_GE(norm * (1 + 1e-12), std::abs(numkit::dot(v, mv)) / numkit::norm_sq(v));
  }
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(numkit::format_double(0.1), "0.1");
  EXPECT_EQ(numkit::format_double(2.0), "2");
  EXPECT_EQ(numkit::format_double(-1.5e-300), "-1.5e-300");
  EXPECT_EQ(numkit::format_double(INFINITY), "inf");
  EXPECT_EQ(numkit::format_double(NAN), "nan");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(numkit::format_double(x)), x);
}
