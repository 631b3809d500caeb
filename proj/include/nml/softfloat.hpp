#pragma once

// IEEE-754 binary32 arithmetic over integer operations only.
//
// Round-to-nearest-even, subnormals kept (no flush-to-zero), no exception
// flags. Every NaN produced is the canonical quiet pattern 0x7FC00000.

#include <array>
#include <bit>
#include <cstdint>
#include <limits>

namespace nml {

/// A binary32 value held as its raw bit pattern.
struct F32Bits {
  std::uint32_t bits = 0;

  static constexpr std::uint32_t kSignMask = 0x80000000u;
  static constexpr std::uint32_t kExpMask = 0x7F800000u;
  static constexpr std::uint32_t kFracMask = 0x007FFFFFu;

  constexpr bool sign() const noexcept { return (bits & kSignMask) != 0; }
  constexpr std::uint32_t exponent() const noexcept { return (bits & kExpMask) >> 23; }
  constexpr std::uint32_t mantissa() const noexcept { return bits & kFracMask; }

  constexpr bool is_nan() const noexcept { return (bits & ~kSignMask) > kExpMask; }
  constexpr bool is_inf() const noexcept { return (bits & ~kSignMask) == kExpMask; }
  constexpr bool is_zero() const noexcept { return (bits & ~kSignMask) == 0; }
  constexpr bool is_subnormal() const noexcept { return exponent() == 0 && mantissa() != 0; }

  static constexpr F32Bits from_float(float f) noexcept { return {std::bit_cast<std::uint32_t>(f)}; }
  constexpr float to_float() const noexcept { return std::bit_cast<float>(bits); }

  friend constexpr bool operator==(F32Bits, F32Bits) = default;
};

inline constexpr F32Bits kQuietNaN{0x7FC00000u};
inline constexpr F32Bits kPosInf{0x7F800000u};
inline constexpr F32Bits kNegInf{0xFF800000u};

namespace sf_detail {

constexpr F32Bits pack(bool sign, std::uint32_t exp_field, std::uint32_t frac) noexcept {
  return {(sign ? F32Bits::kSignMask : 0u) | (exp_field << 23) | frac};
}

constexpr std::uint64_t shift_right_sticky(std::uint64_t v, int shift) noexcept {
  if (shift <= 0) return v;
  if (shift >= 64) return v != 0 ? 1u : 0u;
  return (v >> shift) | ((v << (64 - shift)) != 0 ? 1u : 0u);
}

// Rounds and packs sign * sig * 2^(exp - 127 - 63). `sig` must be nonzero.
constexpr F32Bits round_pack(bool sign, int exp, std::uint64_t sig) noexcept {
  const int lz = std::countl_zero(sig);
  sig <<= lz;
  exp -= lz;
  if (exp >= 255) return sign ? kNegInf : kPosInf;

  std::uint32_t exp_field = 0;
  if (exp <= 0) {
    sig = shift_right_sticky(sig, 1 - exp);
  } else {
    exp_field = static_cast<std::uint32_t>(exp);
  }

  constexpr std::uint64_t kRoundMask = (std::uint64_t{1} << 40) - 1;
  constexpr std::uint64_t kHalf = std::uint64_t{1} << 39;
  auto keep = static_cast<std::uint32_t>(sig >> 40);
  const std::uint64_t rem = sig & kRoundMask;
  if (rem > kHalf || (rem == kHalf && (keep & 1u) != 0)) ++keep;

  // For normals `keep` carries the implicit bit, which bumps the exponent
  // field by one; a rounding carry out of the significand lands there too.
  std::uint32_t bits = exp_field == 0 ? keep : ((exp_field - 1) << 23) + keep;
  if (sign) bits |= F32Bits::kSignMask;
  return {bits};
}

struct Unpacked {
  bool sign;
  int exp;             // biased, subnormals reported as 1
  std::uint32_t sig;   // with implicit bit for normals
};

constexpr Unpacked unpack(F32Bits a) noexcept {
  const std::uint32_t e = a.exponent();
  if (e == 0) return {a.sign(), 1, a.mantissa()};
  return {a.sign(), static_cast<int>(e), a.mantissa() | 0x00800000u};
}

// Shifts a nonzero finite significand until the implicit bit is set.
constexpr void normalize(Unpacked& u) noexcept {
  while ((u.sig & 0x00800000u) == 0) {
    u.sig <<= 1;
    --u.exp;
  }
}

}  // namespace sf_detail

constexpr F32Bits sf_neg(F32Bits a) noexcept { return {a.bits ^ F32Bits::kSignMask}; }

constexpr F32Bits sf_add(F32Bits a, F32Bits b) noexcept {
  using namespace sf_detail;
  if (a.is_nan() || b.is_nan()) return kQuietNaN;
  if (a.is_inf()) {
    if (b.is_inf() && a.sign() != b.sign()) return kQuietNaN;
    return a;
  }
  if (b.is_inf()) return b;
  if (a.is_zero() && b.is_zero()) return pack(a.sign() && b.sign(), 0, 0);
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;

  // Order by magnitude so the result takes the sign of `big`.
  const std::uint32_t mag_a = a.bits & ~F32Bits::kSignMask;
  const std::uint32_t mag_b = b.bits & ~F32Bits::kSignMask;
  const F32Bits big = mag_a >= mag_b ? a : b;
  const F32Bits small = mag_a >= mag_b ? b : a;
  const Unpacked ub = unpack(big);
  const Unpacked us = unpack(small);

  const std::uint64_t sig_big = std::uint64_t{ub.sig} << 39;
  const std::uint64_t sig_small = shift_right_sticky(std::uint64_t{us.sig} << 39, ub.exp - us.exp);
  std::uint64_t sig = 0;
  if (ub.sign == us.sign) {
    sig = sig_big + sig_small;
  } else {
    sig = sig_big - sig_small;
    if (sig == 0) return {0u};
  }
  return round_pack(ub.sign, ub.exp + 1, sig);
}

constexpr F32Bits sf_sub(F32Bits a, F32Bits b) noexcept {
  if (b.is_nan()) return kQuietNaN;
  return sf_add(a, sf_neg(b));
}

constexpr F32Bits sf_mul(F32Bits a, F32Bits b) noexcept {
  using namespace sf_detail;
  if (a.is_nan() || b.is_nan()) return kQuietNaN;
  const bool sign = a.sign() != b.sign();
  if (a.is_inf() || b.is_inf()) {
    if (a.is_zero() || b.is_zero()) return kQuietNaN;
    return sign ? kNegInf : kPosInf;
  }
  if (a.is_zero() || b.is_zero()) return pack(sign, 0, 0);

  const Unpacked ua = unpack(a);
  const Unpacked ub = unpack(b);
  const std::uint64_t product = std::uint64_t{ua.sig} * ub.sig;
  // product * 2^(ea + eb - 300) == product * 2^(exp - 190)
  return round_pack(sign, ua.exp + ub.exp - 110, product);
}

constexpr F32Bits sf_div(F32Bits a, F32Bits b) noexcept {
  using namespace sf_detail;
  if (a.is_nan() || b.is_nan()) return kQuietNaN;
  const bool sign = a.sign() != b.sign();
  if (a.is_inf()) {
    if (b.is_inf()) return kQuietNaN;
    return sign ? kNegInf : kPosInf;
  }
  if (b.is_inf()) return pack(sign, 0, 0);
  if (b.is_zero()) {
    if (a.is_zero()) return kQuietNaN;
    return sign ? kNegInf : kPosInf;
  }
  if (a.is_zero()) return pack(sign, 0, 0);

  Unpacked ua = unpack(a);
  Unpacked ub = unpack(b);
  normalize(ua);
  normalize(ub);
  const std::uint64_t num = std::uint64_t{ua.sig} << 40;
  std::uint64_t quot = num / ub.sig;
  if (num % ub.sig != 0) quot |= 1u;
  // quot ~ (sa / sb) * 2^40, value == quot * 2^(ea - eb - 40)
  return round_pack(sign, ua.exp - ub.exp + 150, quot);
}

constexpr bool sf_eq(F32Bits a, F32Bits b) noexcept {
  if (a.is_nan() || b.is_nan()) return false;
  if (a.is_zero() && b.is_zero()) return true;
  return a.bits == b.bits;
}

constexpr bool sf_lt(F32Bits a, F32Bits b) noexcept {
  if (a.is_nan() || b.is_nan()) return false;
  if (a.is_zero() && b.is_zero()) return false;
  if (a.sign() != b.sign()) return a.sign();
  if (!a.sign()) return a.bits < b.bits;
  return a.bits > b.bits;
}

constexpr bool sf_le(F32Bits a, F32Bits b) noexcept { return sf_lt(a, b) || sf_eq(a, b); }

constexpr F32Bits sf_from_i32(std::int32_t n) noexcept {
  if (n == 0) return {0u};
  const bool sign = n < 0;
  const std::uint64_t mag = sign ? std::uint64_t{0} - static_cast<std::uint64_t>(static_cast<std::int64_t>(n))
                                 : static_cast<std::uint64_t>(n);
  return sf_detail::round_pack(sign, 190, mag);
}

namespace sf_detail {

__extension__ using i128 = __int128;

inline constexpr std::uint32_t kExpOverflow = 0x42B17218u;   // 88.7228394, first input rounding to +inf
inline constexpr std::uint32_t kExpUnderflow = 0xC2D00000u;  // -104, below it exp rounds to 0
inline constexpr std::uint32_t kExpTiny = 0x32800000u;       // 2^-26, below it exp rounds to 1
inline constexpr std::uint32_t kOne = 0x3F800000u;

inline constexpr int kExpFrac = 62;
inline constexpr i128 kExpOneQ = i128{1} << kExpFrac;
inline constexpr i128 kInvLn2Q32 = 6196328019;  // 2^32 / ln2
inline constexpr i128 kLn2Q68 = (i128{11} << 64) | i128{1666753512437422781u};
inline constexpr int kExpTerms = 15;  // Taylor remainder on |r| <= 0.35 is below 2^-66

// 2^62 / k! for k = 0..kExpTerms, truncated.
inline constexpr auto kExpTaylor = [] {
  std::array<i128, kExpTerms + 1> c{};
  i128 fact = 1;
  for (int k = 0; k <= kExpTerms; ++k) {
    if (k > 0) fact *= k;
    c[k] = kExpOneQ / fact;
  }
  return c;
}();

/// exp(x) in Q62 fixed point: x = n ln2 + r with |r| <= ln2/2 (plus
/// rounding slack), a degree-15 Taylor polynomial on r in Horner form,
/// then the power of two goes into the exponent field. The total error
/// stays near 2^-57 relative, far below the 2^-49 relative step between
/// adjacent inputs, so the result is monotone and in practice correctly
/// rounded.
constexpr std::uint32_t exp_fixed(std::uint32_t x) noexcept {
  const F32Bits fx{x};
  if (fx.is_nan()) return kQuietNaN.bits;
  if (sf_le(F32Bits{kExpOverflow}, fx)) return kPosInf.bits;
  if (sf_lt(fx, F32Bits{kExpUnderflow})) return 0u;
  if ((x & ~F32Bits::kSignMask) < kExpTiny) return kOne;

  // Exact Q68 image of x: sig * 2^(e - 150) * 2^68.
  const Unpacked u = unpack(fx);
  i128 xq = i128{u.sig} << (u.exp - 82);
  if (u.sign) xq = -xq;

  const i128 t = (xq >> 36) * kInvLn2Q32;  // x / ln2 in Q64
  const auto n = static_cast<int>((t + (i128{1} << 63)) >> 64);
  const i128 r = (xq - n * kLn2Q68) >> 6;  // Q62

  i128 p = kExpTaylor[kExpTerms];
  for (int k = kExpTerms - 1; k >= 0; --k) p = kExpTaylor[k] + ((p * r) >> kExpFrac);

  return round_pack(false, n + 128, static_cast<std::uint64_t>(p)).bits;
}

}  // namespace sf_detail

constexpr F32Bits sf_exp(F32Bits x) noexcept { return {sf_detail::exp_fixed(x.bits)}; }

}  // namespace nml
