#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "support.hpp"

using namespace nml;
using nml::test::bits;
using nml::test::from_bits;

namespace {

F32Bits F(std::uint32_t b) { return F32Bits{b}; }
F32Bits Ff(float f) { return F32Bits::from_float(f); }

using Big = boost::multiprecision::cpp_bin_float_50;

// |y - exp(x)| in units of y's last place, from a 50-digit oracle.
double exp_ulp_error(float x, float y) {
  const Big exact = boost::multiprecision::exp(Big(x));
  int e = 0;
  std::frexp(y, &e);
  const int ulp_exp = std::max(e - 24, -149);
  const Big err = boost::multiprecision::abs(Big(y) - exact) / boost::multiprecision::ldexp(Big(1), ulp_exp);
  return err.convert_to<double>();
}

}  // namespace

TEST(SoftFloat, AddExample) { EXPECT_EQ(sf_add(F(0x3F800000), F(0x40000000)).bits, 0x40400000u); }

TEST(SoftFloat, MultiplyByOneIsIdentity) {
  for (auto p : special_patterns()) {
    if (F32Bits{p}.is_nan()) continue;
    EXPECT_EQ(sf_mul(F(p), F(0x3F800000)).bits, p) << std::hex << p;
  }
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100000; ++i) {
    const auto p = static_cast<std::uint32_t>(rng());
    if (F32Bits{p}.is_nan()) continue;
    ASSERT_EQ(sf_mul(F(p), F(0x3F800000)).bits, p) << std::hex << p;
  }
}

TEST(SoftFloat, DivideByZeroGivesInfinity) {
  EXPECT_EQ(sf_div(F(0x3F800000), F(0x00000000)).bits, 0x7F800000u);
  EXPECT_EQ(sf_div(F(0xBF800000), F(0x00000000)).bits, 0xFF800000u);
  EXPECT_EQ(sf_div(F(0x3F800000), F(0x80000000)).bits, 0xFF800000u);
  EXPECT_EQ(sf_div(F(0), F(0)).bits, kQuietNaN.bits);
}

TEST(SoftFloat, ComparisonExamples) {
  EXPECT_TRUE(sf_le(F(0x80000000), F(0x00000000)));
  EXPECT_TRUE(sf_eq(F(0x80000000), F(0x00000000)));
  EXPECT_FALSE(sf_lt(F(0x80000000), F(0x00000000)));
  EXPECT_FALSE(sf_le(F(0x7FC00000), F(0x3F800000)));
  EXPECT_FALSE(sf_lt(F(0x7FC00000), F(0x3F800000)));
  EXPECT_FALSE(sf_eq(F(0x7FC00000), F(0x7FC00000)));
  EXPECT_FALSE(sf_le(F(0x3F800000), F(0x7F800001)));
  EXPECT_TRUE(sf_lt(F(0xFF800000), F(0xFF7FFFFF)));
  EXPECT_TRUE(sf_lt(F(0x80000001), F(0x00000000)));
}

TEST(SoftFloat, ProducedNaNsAreCanonical) {
  EXPECT_EQ(sf_add(F(0x7F800000), F(0xFF800000)).bits, 0x7FC00000u);
  EXPECT_EQ(sf_mul(F(0x7F800000), F(0)).bits, 0x7FC00000u);
  EXPECT_EQ(sf_add(F(0x7F800001), F(0x3F800000)).bits, 0x7FC00000u);
  EXPECT_EQ(sf_div(F(0xFFC12345), F(0x3F800000)).bits, 0x7FC00000u);
  EXPECT_EQ(sf_exp(F(0xFFFFFFFF)).bits, 0x7FC00000u);
}

TEST(SoftFloat, SubnormalResultsAreKept) {
  // 2^-126 * 2^-1 is subnormal, not flushed.
  EXPECT_EQ(sf_mul(F(0x00800000), F(0x3F000000)).bits, 0x00400000u);
  EXPECT_EQ(sf_sub(F(0x00800001), F(0x00800000)).bits, 0x00000001u);
  EXPECT_EQ(sf_div(F(0x00000001), F(0x40000000)).bits, 0x00000000u);  // ties to even
  EXPECT_EQ(sf_div(F(0x00000003), F(0x40000000)).bits, 0x00000002u);
}

TEST(SoftFloat, DirectedMatrixMatchesHost) {
  for (const auto& r : run_conformance(0, 1)) {
    EXPECT_TRUE(r.passed()) << r.op << " mismatches=" << r.mismatches;
    EXPECT_EQ(r.directed_cases, special_patterns().size() * special_patterns().size());
  }
}

TEST(SoftFloat, RandomPairsMatchHost) {
  for (const auto& r : run_conformance(1'000'000, 20240607)) {
    EXPECT_TRUE(r.passed()) << r.op << " mismatches=" << r.mismatches;
    EXPECT_EQ(r.random_cases, 1'000'000u);
  }
}

TEST(SoftFloat, AddAndMulCommute) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300000; ++i) {
    const auto a = static_cast<std::uint32_t>(rng()), b = static_cast<std::uint32_t>(rng());
    if (F32Bits{a}.is_nan() || F32Bits{b}.is_nan()) continue;
    ASSERT_EQ(sf_add(F(a), F(b)).bits, sf_add(F(b), F(a)).bits);
    ASSERT_EQ(sf_mul(F(a), F(b)).bits, sf_mul(F(b), F(a)).bits);
  }
}

TEST(SoftFloat, SubIsAddOfNegation) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 300000; ++i) {
    const auto a = static_cast<std::uint32_t>(rng()), b = static_cast<std::uint32_t>(rng());
    if (F32Bits{a}.is_nan() || F32Bits{b}.is_nan()) continue;
    ASSERT_EQ(sf_sub(F(a), F(b)).bits, sf_add(F(a), sf_neg(F(b))).bits);
  }
  for (auto a : special_patterns())
    for (auto b : special_patterns()) {
      if (F32Bits{a}.is_nan() || F32Bits{b}.is_nan()) continue;
      ASSERT_EQ(sf_sub(F(a), F(b)).bits, sf_add(F(a), sf_neg(F(b))).bits);
    }
}

TEST(SoftFloat, FromInt) {
  EXPECT_EQ(sf_from_i32(1).bits, 0x3F800000u);
  EXPECT_EQ(sf_from_i32(0).bits, 0x00000000u);
  EXPECT_EQ(sf_from_i32(16777217).bits, bits(16777216.0f));
  EXPECT_EQ(sf_from_i32(16777219).bits, bits(16777220.0f));
  EXPECT_EQ(sf_from_i32(-3).bits, bits(-3.0f));
  EXPECT_EQ(sf_from_i32(INT32_MIN).bits, 0xCF000000u);
  EXPECT_EQ(sf_from_i32(INT32_MAX).bits, 0x4F000000u);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200000; ++i) {
    const auto n = static_cast<std::int32_t>(rng());
    ASSERT_EQ(sf_from_i32(n).bits, bits(static_cast<float>(n))) << n;
  }
}

TEST(SoftFloatExp, Examples) {
  EXPECT_EQ(sf_exp(F(0x00000000)).bits, 0x3F800000u);
  EXPECT_EQ(sf_exp(F(0x80000000)).bits, 0x3F800000u);
  EXPECT_LE(test::ulp_distance(sf_exp(Ff(1.0f)).to_float(), from_bits(0x402DF854)), 2);
  EXPECT_EQ(sf_exp(Ff(100.0f)).bits, 0x7F800000u);
  EXPECT_EQ(sf_exp(F(0x7F800000)).bits, 0x7F800000u);
  EXPECT_EQ(sf_exp(F(0xFF800000)).bits, 0x00000000u);
  EXPECT_EQ(sf_exp(Ff(-200.0f)).bits, 0x00000000u);
  EXPECT_EQ(sf_exp(F(0x42B17217)).bits, 0x7F7FFF84u);  // largest finite result
  EXPECT_TRUE(sf_exp(Ff(-100.0f)).is_subnormal());
}

TEST(SoftFloatExp, WithinTwoUlpOfHighPrecisionOracle) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<float> wide(-104.0f, 88.7f), narrow(-1.0f, 1.0f);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const float x = i % 2 ? wide(rng) : narrow(rng);
    const float y = sf_exp(Ff(x)).to_float();
    const double e = exp_ulp_error(x, y);
    worst = std::max(worst, e);
    ASSERT_LE(e, 2.0) << "x=" << x;
  }
  // Around the underflow edge results are subnormal; error is measured in
  // the fixed 2^-149 quantum there.
  for (float x = -103.98f; x < -87.0f; x += 0.0371f) ASSERT_LE(exp_ulp_error(x, sf_exp(Ff(x)).to_float()), 2.0) << x;
  RecordProperty("max_ulp_error", std::to_string(worst));
}

TEST(SoftFloatExp, MonotoneNonDecreasing) {
  auto check_run = [](float start, int steps) {
    float x = start;
    float prev = sf_exp(Ff(x)).to_float();
    for (int i = 0; i < steps; ++i) {
      x = std::nextafter(x, INFINITY);
      const float y = sf_exp(Ff(x)).to_float();
      ASSERT_GE(y, prev) << "x=" << x;
      prev = y;
    }
  };
  // Dense runs across range-reduction boundaries (n + 1/2) ln 2, zero, the
  // tiny-argument cutoff, and both ends of the finite range.
  for (int n = -150; n <= 127; n += 7) check_run(static_cast<float>((n + 0.5) * std::numbers::ln2) - 1e-4f, 4000);
  check_run(-1e-6f, 20000);
  check_run(-std::ldexp(1.0f, -26) * 1.01f, 3000);
  check_run(std::ldexp(1.0f, -26) * 0.99f, 3000);
  check_run(-104.001f, 3000);
  check_run(88.72f, 3000);
  // Coarse sweep of the whole finite input range in bit order.
  float prev = 0.0f;
  for (std::uint32_t b = 0xC2D00010u; b > 0x80000000u; b -= 4099) {
    const float y = sf_exp(F(b)).to_float();
    ASSERT_GE(y, prev) << std::hex << b;
    prev = y;
  }
  for (std::uint32_t b = 0; b < 0x42B17300u; b += 4099) {
    const float y = sf_exp(F(b)).to_float();
    ASSERT_GE(y, prev) << std::hex << b;
    prev = y;
  }
}

TEST(Backend, NativeAndEmulatedAgreeOnExp) {
  std::mt19937_64 rng(15);
  const NativeBackend n;
  const EmulatedBackend e;
  for (int i = 0; i < 20000; ++i) {
    const float x = from_bits(static_cast<std::uint32_t>(rng()));
    ASSERT_EQ(bits(n.exp(x)), bits(e.exp(x)));
  }
}

TEST(Backend, EachCallBumpsExactlyOneTally) {
  auto check = [](auto be_type) {
    using B = decltype(be_type);
    OpCounters c;
    const B be(&c);
    auto expect_one = [&](auto&& call, std::uint64_t OpCounters::*field) {
      const OpCounters before = c;
      call();
      EXPECT_EQ(c.total(), before.total() + 1);
      EXPECT_EQ(c.*field, before.*field + 1);
    };
    expect_one([&] { (void)be.add(1.0f, 2.0f); }, &OpCounters::fp_add);
    expect_one([&] { (void)be.sub(1.0f, 2.0f); }, &OpCounters::fp_sub);
    expect_one([&] { (void)be.mul(1.0f, 2.0f); }, &OpCounters::fp_mul);
    expect_one([&] { (void)be.div(1.0f, 2.0f); }, &OpCounters::fp_div);
    expect_one([&] { (void)be.lt(1.0f, 2.0f); }, &OpCounters::fp_cmp);
    expect_one([&] { (void)be.le(1.0f, 2.0f); }, &OpCounters::fp_cmp);
    expect_one([&] { (void)be.eq(1.0f, 2.0f); }, &OpCounters::fp_cmp);
    expect_one([&] { (void)be.exp(1.0f); }, &OpCounters::fp_exp);
    expect_one([&] { (void)be.from_i32(5); }, &OpCounters::other_ops);
    expect_one([&] { be.other(); }, &OpCounters::other_ops);
  };
  check(NativeBackend{});
  check(EmulatedBackend{});
}

TEST(Backend, WithoutSinkNothingIsCounted) {
  const EmulatedBackend be;
  EXPECT_EQ(bits(be.add(1.0f, 2.0f)), bits(3.0f));
}

TEST(Backend, ParseNames) {
  EXPECT_EQ(parse_backend("native"), BackendMode::Native);
  EXPECT_EQ(parse_backend("emulated"), BackendMode::Emulated);
  EXPECT_THROW(parse_backend("fpu"), Error);
}

TEST(Counters, MergeIsAssociativeAndCommutative) {
  std::mt19937_64 rng(16);
  auto random_counters = [&] {
    OpCounters c;
    for (auto f : {&OpCounters::fp_add, &OpCounters::fp_sub, &OpCounters::fp_mul, &OpCounters::fp_div,
                   &OpCounters::fp_cmp, &OpCounters::fp_exp, &OpCounters::other_ops})
      c.*f = rng() % 1000000;
    return c;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_counters(), b = random_counters(), c = random_counters();
    EXPECT_EQ(a + b, b + a);
    EXPECT_EQ((a + b) + c, a + (b + c));
    EXPECT_EQ((a + b).total(), a.total() + b.total());
  }
}
