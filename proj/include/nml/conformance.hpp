#pragma once

// Differential conformance of the soft-float routines against the host
// FPU (IEEE-754 binary32, round-to-nearest-even). Any two NaNs compare
// equal; payloads are not part of the contract.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nml/softfloat.hpp"

namespace nml {

struct ConformanceFailure {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint32_t got = 0;
  std::uint32_t want = 0;
};

struct ConformanceResult {
  std::string op;
  std::uint64_t directed_cases = 0;
  std::uint64_t random_cases = 0;
  std::uint64_t mismatches = 0;
  std::optional<ConformanceFailure> first_failure;

  bool passed() const noexcept { return mismatches == 0; }
};

/// Boundary patterns of binary32 with both signs: zeros, subnormal and
/// normal extremes, infinities, quiet and signalling NaNs, and a few
/// ordinary values around 1.
inline std::vector<std::uint32_t> special_patterns() {
  const std::uint32_t magnitudes[] = {
      0x00000000u,  // 0
      0x00000001u,  // min subnormal
      0x00000002u,
      0x00400000u,  // mid subnormal
      0x007FFFFFu,  // max subnormal
      0x00800000u,  // min normal
      0x00800001u,
      0x01000000u,
      0x33800000u,  // 2^-24
      0x34000000u,  // 2^-23
      0x3F000000u,  // 0.5
      0x3F7FFFFFu,  // 1 - ulp
      0x3F800000u,  // 1
      0x3F800001u,  // 1 + ulp
      0x3FC00000u,  // 1.5
      0x40000000u,  // 2
      0x4B7FFFFFu,  // 2^24 - 1
      0x4B800000u,  // 2^24
      0x7E800000u,
      0x7F000000u,  // 2^127
      0x7F7FFFFEu,
      0x7F7FFFFFu,  // max finite
      0x7F800000u,  // inf
      0x7F800001u,  // signalling NaN
      0x7FBFFFFFu,  // signalling NaN, full payload
      0x7FC00000u,  // canonical quiet NaN
      0x7FC00001u,  // quiet NaN with payload
      0x7FFFFFFFu,
  };
  std::vector<std::uint32_t> out;
  for (auto m : magnitudes) {
    out.push_back(m);
    out.push_back(m | 0x80000000u);
  }
  return out;
}

namespace conformance_detail {

inline bool same_result(std::uint32_t got, std::uint32_t want) {
  if (F32Bits{got}.is_nan() && F32Bits{want}.is_nan()) return true;
  return got == want;
}

inline float as_float(std::uint32_t b) { return std::bit_cast<float>(b); }
inline std::uint32_t as_bits(float f) { return std::bit_cast<std::uint32_t>(f); }

struct OpSpec {
  const char* name;
  std::function<std::uint32_t(std::uint32_t, std::uint32_t)> emulated;
  std::function<std::uint32_t(std::uint32_t, std::uint32_t)> native;
};

inline std::vector<OpSpec> op_specs() {
  using namespace conformance_detail;
  return {
      {"add", [](auto a, auto b) { return sf_add({a}, {b}).bits; },
       [](auto a, auto b) { return as_bits(as_float(a) + as_float(b)); }},
      {"sub", [](auto a, auto b) { return sf_sub({a}, {b}).bits; },
       [](auto a, auto b) { return as_bits(as_float(a) - as_float(b)); }},
      {"mul", [](auto a, auto b) { return sf_mul({a}, {b}).bits; },
       [](auto a, auto b) { return as_bits(as_float(a) * as_float(b)); }},
      {"div", [](auto a, auto b) { return sf_div({a}, {b}).bits; },
       [](auto a, auto b) { return as_bits(as_float(a) / as_float(b)); }},
      {"lt", [](auto a, auto b) -> std::uint32_t { return sf_lt({a}, {b}); },
       [](auto a, auto b) -> std::uint32_t { return as_float(a) < as_float(b); }},
      {"le", [](auto a, auto b) -> std::uint32_t { return sf_le({a}, {b}); },
       [](auto a, auto b) -> std::uint32_t { return as_float(a) <= as_float(b); }},
      {"eq", [](auto a, auto b) -> std::uint32_t { return sf_eq({a}, {b}); },
       [](auto a, auto b) -> std::uint32_t { return as_float(a) == as_float(b); }},
  };
}

// Operand pairs cycling through four shapes: uniform bit patterns, close
// exponents (cancellation and alignment), subnormal-heavy operands, and
// operands near the overflow boundary.
class PairSource {
 public:
  explicit PairSource(std::uint64_t seed) : rng_(seed) {}

  std::pair<std::uint32_t, std::uint32_t> next() {
    const auto a = static_cast<std::uint32_t>(rng_());
    auto b = static_cast<std::uint32_t>(rng_());
    switch (n_++ % 4) {
      case 0: return {a, b};
      case 1: {
        const std::int32_t ea = static_cast<std::int32_t>((a >> 23) & 0xFF);
        const std::int32_t delta = static_cast<std::int32_t>(b % 61) - 30;
        const std::uint32_t eb = static_cast<std::uint32_t>(std::clamp(ea + delta, 0, 254));
        return {a, (b & 0x807FFFFFu) | (eb << 23)};
      }
      case 2: return {a & 0x80FFFFFFu, b & 0x81FFFFFFu};
      default: return {(a & 0x81FFFFFFu) | 0x7E000000u, (b & 0x80FFFFFFu) | (b & 1 ? 0x3F000000u : 0x40000000u)};
    }
  }

 private:
  std::mt19937_64 rng_;
  std::uint64_t n_ = 0;
};

}  // namespace conformance_detail

/// Runs add/sub/mul/div/lt/le/eq over all ordered pairs of
/// `special_patterns()` plus `random_pairs` seeded pairs each.
inline std::vector<ConformanceResult> run_conformance(std::uint64_t random_pairs, std::uint64_t seed) {
  using namespace conformance_detail;
  const auto specials = special_patterns();
  std::vector<ConformanceResult> results;
  for (const auto& op : op_specs()) {
    ConformanceResult r;
    r.op = op.name;
    auto check = [&](std::uint32_t a, std::uint32_t b) {
      const auto got = op.emulated(a, b);
      const auto want = op.native(a, b);
      if (same_result(got, want)) return;
      if (!r.first_failure) r.first_failure = ConformanceFailure{a, b, got, want};
      ++r.mismatches;
    };
    for (auto a : specials)
      for (auto b : specials) {
        check(a, b);
        ++r.directed_cases;
      }
    PairSource pairs(seed);
    for (std::uint64_t i = 0; i < random_pairs; ++i) {
      const auto [a, b] = pairs.next();
      check(a, b);
      ++r.random_cases;
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace nml
