#pragma once

// SPMD fork-join engine. A run executes a fixed sequence of phases on every
// worker, with a barrier after each phase. Master phases execute on core 0
// only and are the serial portion of a kernel. In Virtual mode the phases
// run round-robin on the calling thread, core 0 first, which yields the same
// results because workers only write their own regions between barriers.

#include <algorithm>
#include <barrier>
#include <cstddef>
#include <exception>
#include <initializer_list>
#include <mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "nml/counters.hpp"
#include "nml/error.hpp"

namespace nml {

enum class ExecutionMode { Threads, Virtual };

struct ClusterConfig {
  std::size_t n_cores = 8;
  ExecutionMode mode = ExecutionMode::Threads;

  void validate() const {
    require(n_cores >= 1 && n_cores <= 64, Errc::BadArgs, "n_cores must be in [1, 64]");
  }
};

enum class Axis { Rows, Columns };

/// A worker's half-open index range [lb, ub) of a decomposed dimension.
struct Partition {
  std::size_t chunk = 0;
  std::size_t lb = 0;
  std::size_t ub = 0;

  std::size_t size() const noexcept { return ub - lb; }
  friend bool operator==(const Partition&, const Partition&) = default;
};

/// chunk = total / n_cores; the last core absorbs the remainder. The axis
/// names which dimension is split (rows: horizontal, columns: vertical);
/// the bounds arithmetic is the same for both.
inline Partition partition(std::size_t total, std::size_t n_cores, std::size_t core_id, Axis axis = Axis::Rows) {
  (void)axis;
  if (n_cores == 0 || core_id >= n_cores)
    fail(Errc::BadCoreId, "core " + std::to_string(core_id) + " of " + std::to_string(n_cores));
  Partition p;
  p.chunk = total / n_cores;
  p.lb = core_id * p.chunk;
  p.ub = core_id + 1 == n_cores ? total : p.lb + p.chunk;
  return p;
}

/// Per-worker tallies of the parallel phases plus the master-only tally.
/// `critical_path` is the op count of the slowest possible schedule: for
/// every all-worker phase the busiest worker's ops, plus every master
/// phase, summed over all runs recorded into this profile.
struct ParallelProfile {
  std::vector<OpCounters> workers;
  OpCounters serial;
  std::uint64_t critical_path = 0;

  explicit ParallelProfile(std::size_t n_cores = 1) : workers(n_cores) {}

  OpCounters parallel_total() const {
    OpCounters sum;
    for (const auto& w : workers) sum += w;
    return sum;
  }
};

class Worker {
 public:
  Worker(std::size_t core_id, std::size_t n_cores, std::mutex& critical) noexcept
      : core_id_(core_id), n_cores_(n_cores), critical_(&critical) {}

  std::size_t core_id() const noexcept { return core_id_; }
  std::size_t n_cores() const noexcept { return n_cores_; }
  bool is_master() const noexcept { return core_id_ == 0; }

  /// Counter sink of the phase being executed, or null when not profiling.
  OpCounters* counters() const noexcept { return counters_; }

  Partition partition(std::size_t total, Axis axis = Axis::Rows) const {
    return nml::partition(total, n_cores_, core_id_, axis);
  }

  /// Runs `fn` while holding the cluster-wide critical section.
  template <class Fn>
  void critical(Fn&& fn) const {
    std::lock_guard lock(*critical_);
    std::forward<Fn>(fn)();
  }

 private:
  friend class Cluster;

  std::size_t core_id_;
  std::size_t n_cores_;
  std::mutex* critical_;
  OpCounters* counters_ = nullptr;
};

template <class Fn>
struct AllPhase {
  Fn fn;
};

template <class Fn>
struct MasterPhase {
  Fn fn;
};

/// Phase executed by every worker.
template <class Fn>
AllPhase<Fn> on_all(Fn fn) {
  return {std::move(fn)};
}

/// Phase executed by core 0 only; its operations count as serial.
template <class Fn>
MasterPhase<Fn> on_master(Fn fn) {
  return {std::move(fn)};
}

class Cluster {
 public:
  explicit Cluster(ClusterConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  const ClusterConfig& config() const noexcept { return cfg_; }
  std::size_t n_cores() const noexcept { return cfg_.n_cores; }

  /// Forks n_cores workers, runs `phases` in order with a barrier after
  /// each, and joins. The first exception (lowest core id) is rethrown
  /// after every worker has left.
  template <class... Phases>
  void run(ParallelProfile* profile, const Phases&... phases) const {
    if (profile) require(profile->workers.size() == cfg_.n_cores, Errc::BadArgs, "profile size");
    const std::size_t n = cfg_.n_cores;
    // Per-phase tallies, indexed [phase * n + core], folded into the
    // profile after the join.
    std::vector<OpCounters> tallies(profile ? sizeof...(Phases) * n : 0);
    OpCounters* sink = profile ? tallies.data() : nullptr;
    std::mutex critical;

    if (cfg_.mode == ExecutionMode::Virtual) {
      std::size_t phase = 0;
      (run_virtual(phases, phase++, sink, critical), ...);
    } else {
      std::barrier sync(static_cast<std::ptrdiff_t>(n));
      std::vector<std::exception_ptr> errors(n);
      auto body = [&](std::size_t core) {
        Worker w(core, n, critical);
        std::size_t phase = 0;
        (run_phase(phases, phase++, w, sink, errors[core], sync), ...);
      };
      {
        std::vector<std::jthread> threads;
        threads.reserve(n - 1);
        for (std::size_t core = 1; core < n; ++core) threads.emplace_back(body, core);
        body(0);
      }
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    if (profile) fold(*profile, tallies, {is_master_phase<Phases>::value...});
  }

  template <class... Phases>
  void run(const Phases&... phases) const {
    run(static_cast<ParallelProfile*>(nullptr), phases...);
  }

 private:
  template <class P>
  struct is_master_phase : std::false_type {};
  template <class Fn>
  struct is_master_phase<MasterPhase<Fn>> : std::true_type {};

  void fold(ParallelProfile& profile, const std::vector<OpCounters>& tallies,
            std::initializer_list<bool> master) const {
    const std::size_t n = cfg_.n_cores;
    std::size_t phase = 0;
    for (bool is_master : master) {
      const OpCounters* t = tallies.data() + phase * n;
      if (is_master) {
        profile.serial += t[0];
        profile.critical_path += t[0].total();
      } else {
        std::uint64_t busiest = 0;
        for (std::size_t core = 0; core < n; ++core) {
          profile.workers[core] += t[core];
          busiest = std::max(busiest, t[core].total());
        }
        profile.critical_path += busiest;
      }
      ++phase;
    }
  }

  OpCounters* slot(OpCounters* sink, std::size_t phase, std::size_t core) const noexcept {
    return sink ? sink + phase * cfg_.n_cores + core : nullptr;
  }

  template <class Fn>
  void invoke(const AllPhase<Fn>& phase, std::size_t index, Worker& w, OpCounters* sink) const {
    w.counters_ = slot(sink, index, w.core_id());
    phase.fn(w);
  }

  template <class Fn>
  void invoke(const MasterPhase<Fn>& phase, std::size_t index, Worker& w, OpCounters* sink) const {
    if (!w.is_master()) return;
    w.counters_ = slot(sink, index, 0);
    phase.fn(w);
  }

  template <class Phase, class Barrier>
  void run_phase(const Phase& phase, std::size_t index, Worker& w, OpCounters* sink, std::exception_ptr& error,
                 Barrier& sync) const {
    if (!error) {
      try {
        invoke(phase, index, w, sink);
      } catch (...) {
        error = std::current_exception();
      }
    }
    sync.arrive_and_wait();
  }

  template <class Phase>
  void run_virtual(const Phase& phase, std::size_t index, OpCounters* sink, std::mutex& critical) const {
    for (std::size_t core = 0; core < cfg_.n_cores; ++core) {
      Worker w(core, cfg_.n_cores, critical);
      invoke(phase, index, w, sink);
    }
  }

  ClusterConfig cfg_;
};

}  // namespace nml
