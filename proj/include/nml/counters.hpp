#pragma once

#include <cstdint>

namespace nml {

/// Per-worker operation tallies. FP fields count backend calls; `other_ops`
/// counts the integer bookkeeping the kernels report explicitly (tree node
/// tests, vote increments, swaps, index tie-breaks, int->float conversions).
struct OpCounters {
  std::uint64_t fp_add = 0;
  std::uint64_t fp_sub = 0;
  std::uint64_t fp_mul = 0;
  std::uint64_t fp_div = 0;
  std::uint64_t fp_cmp = 0;
  std::uint64_t fp_exp = 0;
  std::uint64_t other_ops = 0;

  constexpr std::uint64_t fp_total() const noexcept {
    return fp_add + fp_sub + fp_mul + fp_div + fp_cmp + fp_exp;
  }
  constexpr std::uint64_t total() const noexcept { return fp_total() + other_ops; }

  constexpr OpCounters& operator+=(const OpCounters& o) noexcept {
    fp_add += o.fp_add;
    fp_sub += o.fp_sub;
    fp_mul += o.fp_mul;
    fp_div += o.fp_div;
    fp_cmp += o.fp_cmp;
    fp_exp += o.fp_exp;
    other_ops += o.other_ops;
    return *this;
  }

  friend constexpr OpCounters operator+(OpCounters a, const OpCounters& b) noexcept { return a += b; }
  friend constexpr bool operator==(const OpCounters&, const OpCounters&) = default;
};

}  // namespace nml
