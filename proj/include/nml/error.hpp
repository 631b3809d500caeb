#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nml {

enum class Errc {
  BadMagic,
  UnsupportedVersion,
  LengthMismatch,
  InvariantViolation,
  DimensionMismatch,
  KTooLarge,
  KTooLargeForChunk,
  MalformedTree,
  BadCoreId,
  BadFraction,
  BadArgs,
  EmptyCounters,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::KTooLargeForChunk: return "KTooLargeForChunk";
    case Errc::MalformedTree: return "MalformedTree";
    case Errc::BadCoreId: return "BadCoreId";
    case Errc::BadFraction: return "BadFraction";
    case Errc::BadArgs: return "BadArgs";
    case Errc::EmptyCounters: return "EmptyCounters";
  }
  return "Unknown";
}

/// Domain error carrying a typed code. `detail()` names the violated
/// invariant for InvariantViolation, or describes the offending value.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail)
      : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)),
        code_(code),
        detail_(std::move(detail)) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

[[noreturn]] inline void fail(Errc code, std::string detail = {}) {
  throw Error(code, std::move(detail));
}

inline void require(bool cond, Errc code, std::string_view detail = {}) {
  if (!cond) fail(code, std::string(detail));
}

}  // namespace nml
