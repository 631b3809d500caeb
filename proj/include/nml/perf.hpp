#pragma once

// Speedup accounting at operation-count granularity: Amdahl's law, the
// achieved speedup of a profiled fork-join run, FLOP intensity, and the
// analytical selection-sort vs quicksort advisor for partial top-k.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "nml/cluster.hpp"
#include "nml/counters.hpp"
#include "nml/error.hpp"

namespace nml {

/// 1 / ((1 - p) + p / n)
inline double amdahl(double p, double n) {
  if (!(p >= 0.0 && p <= 1.0)) fail(Errc::BadFraction, "p must be in [0, 1]");
  if (!(n >= 1.0)) fail(Errc::BadArgs, "core count must be >= 1");
  return 1.0 / ((1.0 - p) + p / n);
}

/// Parallel fraction that yields `speedup` on `n` cores.
inline double amdahl_fraction(double speedup, double n) {
  if (!(n > 1.0)) fail(Errc::BadArgs, "core count must be > 1");
  if (!(speedup >= 1.0 && speedup <= n)) fail(Errc::BadArgs, "speedup must be in [1, n]");
  return (1.0 - 1.0 / speedup) / (1.0 - 1.0 / n);
}

inline double flop_intensity(const OpCounters& c) {
  if (c.total() == 0) fail(Errc::EmptyCounters);
  return 100.0 * static_cast<double>(c.fp_total()) / static_cast<double>(c.total());
}

struct SpeedupReport {
  std::size_t n_cores = 1;
  std::uint64_t seq_ops = 0;
  std::vector<std::uint64_t> per_worker_ops;
  std::uint64_t serial_ops = 0;
  std::uint64_t critical_path_ops = 0;
  double parallel_fraction = 0.0;
  double theoretical = 1.0;
  double achieved = 1.0;
  double flop_intensity = 0.0;

  std::uint64_t max_worker_ops() const {
    return per_worker_ops.empty() ? 0 : *std::max_element(per_worker_ops.begin(), per_worker_ops.end());
  }
};

/// Compares a sequential tally against a profiled parallel run. Ops of
/// master-only phases are the serial fraction. The parallel time is the
/// profile's critical path: each barrier-delimited phase costs as much as
/// its busiest worker.
inline SpeedupReport speedup_report(const OpCounters& sequential, const ParallelProfile& parallel) {
  SpeedupReport r;
  r.n_cores = parallel.workers.size();
  r.seq_ops = sequential.total();
  if (r.seq_ops == 0) fail(Errc::EmptyCounters, "sequential run counted no operations");
  for (const auto& w : parallel.workers) r.per_worker_ops.push_back(w.total());
  r.serial_ops = parallel.serial.total();
  r.critical_path_ops = parallel.critical_path;
  if (r.critical_path_ops == 0) fail(Errc::EmptyCounters, "parallel run recorded no critical path");

  const double seq = static_cast<double>(r.seq_ops);
  const double serial = static_cast<double>(std::min(r.serial_ops, r.seq_ops));
  r.parallel_fraction = (seq - serial) / seq;
  r.theoretical = amdahl(r.parallel_fraction, static_cast<double>(r.n_cores));
  r.achieved = seq / static_cast<double>(r.critical_path_ops);
  r.flop_intensity = flop_intensity(sequential);
  return r;
}

enum class SortKind { SS, QS };

constexpr std::string_view to_string(SortKind s) noexcept { return s == SortKind::SS ? "SS" : "QS"; }

struct SortChoice {
  SortKind choice = SortKind::SS;
  double ss_cost = 0.0;
  double qs_cost = 0.0;
};

/// Comparison-count model for selecting the k smallest of n candidates on
/// c cores: SS = (n/c) k + c k, QS = (n/c) log2(n/c) + c k. The c k merge
/// term is shared; SS wins ties.
inline SortChoice sort_advisor(std::uint64_t n, std::uint64_t c, std::uint64_t k) {
  if (n == 0 || c == 0 || k == 0) fail(Errc::BadArgs, "n, cores and k must be >= 1");
  const double per_core = static_cast<double>(n) / static_cast<double>(c);
  const double merge = static_cast<double>(c) * static_cast<double>(k);
  SortChoice s;
  s.ss_cost = per_core * static_cast<double>(k) + merge;
  s.qs_cost = per_core * std::log2(per_core) + merge;
  s.choice = s.ss_cost <= s.qs_cost ? SortKind::SS : SortKind::QS;
  return s;
}

}  // namespace nml
