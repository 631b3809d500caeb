#pragma once

// Numeric backends the kernels are written against. Both produce identical
// binary32 bits: Native uses the host FPU (NaNs canonicalized), Emulated
// routes every operation through the integer-only soft-float routines.
// exp has no bit-exact host counterpart, so both use the soft-float one.

#include <bit>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>

#include "nml/counters.hpp"
#include "nml/error.hpp"
#include "nml/softfloat.hpp"

namespace nml {

enum class BackendMode { Native, Emulated };

constexpr std::string_view to_string(BackendMode m) noexcept {
  return m == BackendMode::Native ? "native" : "emulated";
}

namespace backend_detail {

constexpr std::uint32_t canonical(float f) noexcept {
  return f != f ? kQuietNaN.bits : std::bit_cast<std::uint32_t>(f);
}

struct NativeArith {
  static float f(std::uint32_t b) noexcept { return std::bit_cast<float>(b); }
  static std::uint32_t add(std::uint32_t a, std::uint32_t b) noexcept { return canonical(f(a) + f(b)); }
  static std::uint32_t sub(std::uint32_t a, std::uint32_t b) noexcept { return canonical(f(a) - f(b)); }
  static std::uint32_t mul(std::uint32_t a, std::uint32_t b) noexcept { return canonical(f(a) * f(b)); }
  static std::uint32_t div(std::uint32_t a, std::uint32_t b) noexcept { return canonical(f(a) / f(b)); }
  static bool lt(std::uint32_t a, std::uint32_t b) noexcept { return f(a) < f(b); }
  static bool le(std::uint32_t a, std::uint32_t b) noexcept { return f(a) <= f(b); }
  static bool eq(std::uint32_t a, std::uint32_t b) noexcept { return f(a) == f(b); }
  static std::uint32_t from_i32(std::int32_t n) noexcept { return std::bit_cast<std::uint32_t>(static_cast<float>(n)); }
  static std::uint32_t exp(std::uint32_t x) noexcept { return sf_exp({x}).bits; }
};

struct EmulatedArith {
  static constexpr std::uint32_t add(std::uint32_t a, std::uint32_t b) noexcept { return sf_add({a}, {b}).bits; }
  static constexpr std::uint32_t sub(std::uint32_t a, std::uint32_t b) noexcept { return sf_sub({a}, {b}).bits; }
  static constexpr std::uint32_t mul(std::uint32_t a, std::uint32_t b) noexcept { return sf_mul({a}, {b}).bits; }
  static constexpr std::uint32_t div(std::uint32_t a, std::uint32_t b) noexcept { return sf_div({a}, {b}).bits; }
  static constexpr bool lt(std::uint32_t a, std::uint32_t b) noexcept { return sf_lt({a}, {b}); }
  static constexpr bool le(std::uint32_t a, std::uint32_t b) noexcept { return sf_le({a}, {b}); }
  static constexpr bool eq(std::uint32_t a, std::uint32_t b) noexcept { return sf_eq({a}, {b}); }
  static constexpr std::uint32_t from_i32(std::int32_t n) noexcept { return sf_from_i32(n).bits; }
  static constexpr std::uint32_t exp(std::uint32_t x) noexcept { return sf_exp({x}).bits; }
};

}  // namespace backend_detail

/// Binary32 arithmetic on `float` values with an optional counter sink.
/// Each arithmetic call bumps exactly one FP tally; `other()` records
/// non-FP bookkeeping reported by the kernels.
template <BackendMode M>
class Backend {
  using Arith = std::conditional_t<M == BackendMode::Native, backend_detail::NativeArith,
                                   backend_detail::EmulatedArith>;

 public:
  static constexpr BackendMode mode = M;

  Backend() = default;
  explicit Backend(OpCounters* counters) noexcept : counters_(counters) {}

  OpCounters* counters() const noexcept { return counters_; }

  float add(float a, float b) const noexcept { return tally(&OpCounters::fp_add), wrap(Arith::add(bits(a), bits(b))); }
  float sub(float a, float b) const noexcept { return tally(&OpCounters::fp_sub), wrap(Arith::sub(bits(a), bits(b))); }
  float mul(float a, float b) const noexcept { return tally(&OpCounters::fp_mul), wrap(Arith::mul(bits(a), bits(b))); }
  float div(float a, float b) const noexcept { return tally(&OpCounters::fp_div), wrap(Arith::div(bits(a), bits(b))); }
  bool lt(float a, float b) const noexcept { return tally(&OpCounters::fp_cmp), Arith::lt(bits(a), bits(b)); }
  bool le(float a, float b) const noexcept { return tally(&OpCounters::fp_cmp), Arith::le(bits(a), bits(b)); }
  bool eq(float a, float b) const noexcept { return tally(&OpCounters::fp_cmp), Arith::eq(bits(a), bits(b)); }
  float exp(float x) const noexcept { return tally(&OpCounters::fp_exp), wrap(Arith::exp(bits(x))); }

  // Integer to float conversion is bookkept with the non-FP operations.
  float from_i32(std::int32_t n) const noexcept { return tally(&OpCounters::other_ops), wrap(Arith::from_i32(n)); }

  void other(std::uint64_t n = 1) const noexcept {
    if (counters_) counters_->other_ops += n;
  }

 private:
  static std::uint32_t bits(float f) noexcept { return std::bit_cast<std::uint32_t>(f); }
  static float wrap(std::uint32_t b) noexcept { return std::bit_cast<float>(b); }
  void tally(std::uint64_t OpCounters::*field) const noexcept {
    if (counters_) ++(counters_->*field);
  }

  OpCounters* counters_ = nullptr;
};

using NativeBackend = Backend<BackendMode::Native>;
using EmulatedBackend = Backend<BackendMode::Emulated>;

template <class B>
concept NumericBackend = requires(const B& b, float x, std::int32_t n) {
  { b.add(x, x) } -> std::same_as<float>;
  { b.sub(x, x) } -> std::same_as<float>;
  { b.mul(x, x) } -> std::same_as<float>;
  { b.div(x, x) } -> std::same_as<float>;
  { b.lt(x, x) } -> std::same_as<bool>;
  { b.le(x, x) } -> std::same_as<bool>;
  { b.eq(x, x) } -> std::same_as<bool>;
  { b.exp(x) } -> std::same_as<float>;
  { b.from_i32(n) } -> std::same_as<float>;
  b.other(1u);
  { B(static_cast<OpCounters*>(nullptr)) };
};

/// Calls `fn(backend_tag)` where the tag is a value of the backend type
/// selected at runtime, letting callers instantiate kernels for either.
template <class Fn>
decltype(auto) with_backend(BackendMode mode, Fn&& fn) {
  if (mode == BackendMode::Native) return std::forward<Fn>(fn)(NativeBackend{});
  return std::forward<Fn>(fn)(EmulatedBackend{});
}

inline BackendMode parse_backend(std::string_view name) {
  if (name == "native") return BackendMode::Native;
  if (name == "emulated") return BackendMode::Emulated;
  fail(Errc::BadArgs, "unknown backend '" + std::string(name) + "'");
}

}  // namespace nml
