#pragma once

// Fork-join versions of the six kernels. Each follows the same skeleton: a
// decomposed compute phase writing worker-private regions of a shared
// intermediate buffer, a barrier, a combination step in fixed core order,
// and a master-only finishing step.

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "nml/backend.hpp"
#include "nml/cluster.hpp"
#include "nml/kernels.hpp"
#include "nml/model.hpp"

namespace nml {

namespace par_detail {

// Vertical decomposition of the feature axis (OP1), horizontal reduction of
// the n_class x n_cores partial matrix R (OP2), master finish (OP3).
template <NumericBackend B, class Partial, class Finish>
Prediction class_score_kernel(std::size_t n_class, std::size_t d, std::span<const float> offsets,
                              const Cluster& cluster, ParallelProfile* profile, Partial partial, Finish finish) {
  const std::size_t n = cluster.n_cores();
  std::vector<float> partials(n_class * n);
  Prediction out;
  out.scores.resize(n_class);

  cluster.run(
      profile,
      on_all([&](const Worker& w) {
        const B be(w.counters());
        const Partition cols = w.partition(d, Axis::Columns);
        for (std::size_t c = 0; c < n_class; ++c) partials[c * n + w.core_id()] = partial(c, cols, be);
      }),
      on_all([&](const Worker& w) {
        const B be(w.counters());
        const Partition rows = w.partition(n_class, Axis::Rows);
        for (std::size_t c = rows.lb; c < rows.ub; ++c) {
          float acc = partials[c * n];
          for (std::size_t core = 1; core < n; ++core) acc = be.add(acc, partials[c * n + core]);
          out.scores[c] = be.add(acc, offsets[c]);
        }
      }),
      on_master([&](const Worker& w) { out.label = finish(out.scores, B(w.counters())); }));
  return out;
}

}  // namespace par_detail

/// Parallel LR (softmax + argmax) or SVM (argmax) according to `kind`.
template <NumericBackend B>
Prediction par_linear_infer(const LinearModel& m, std::span<const float> x, LinearKind kind, const Cluster& cluster,
                            ParallelProfile* profile = nullptr) {
  check_dim(x.size(), m.d, "input");
  auto partial = [&](std::size_t c, const Partition& cols, const B& be) {
    return dot_accumulate(0.0f, m.row(c).subspan(cols.lb, cols.size()), x.subspan(cols.lb, cols.size()), be);
  };
  auto finish = [kind](std::span<const float> scores, const B& be) {
    return kind == LinearKind::LR ? argmax(softmax(scores, be), be) : argmax(scores, be);
  };
  return par_detail::class_score_kernel<B>(m.n_class, m.d, m.bias, cluster, profile, partial, finish);
}

template <NumericBackend B>
Prediction par_linear_infer(const LinearModel& m, std::span<const float> x, const Cluster& cluster,
                            ParallelProfile* profile = nullptr) {
  return par_linear_infer<B>(m, x, m.kind, cluster, profile);
}

template <NumericBackend B>
Prediction par_gnb_infer(const GnbModel& m, std::span<const float> x, const Cluster& cluster,
                         ParallelProfile* profile = nullptr) {
  check_dim(x.size(), m.d, "input");
  auto partial = [&](std::size_t c, const Partition& cols, const B& be) {
    return gnb_partial(m, c, x, cols.lb, cols.ub, be);
  };
  auto finish = [](std::span<const float> scores, const B& be) { return argmax(scores, be); };
  return par_detail::class_score_kernel<B>(m.n_class, m.d, m.log_prior, cluster, profile, partial, finish);
}

struct KnnOutcome {
  std::size_t label = 0;
  NeighborList neighbors;
};

/// Parallel kNN: per-worker distances and local k-selection over a
/// horizontal split of the training set, then a master k-way merge of the
/// sorted local lists (k * (n_cores - 1) key comparisons) and the vote.
template <NumericBackend B>
KnnOutcome par_knn(const KnnModel& m, std::span<const float> x, const Cluster& cluster,
                   ParallelProfile* profile = nullptr) {
  check_dim(x.size(), m.train.d, "input");
  const std::size_t n = cluster.n_cores();
  const std::size_t n_train = m.train.n_samples;
  const std::size_t k = m.k;
  for (std::size_t core = 0; core < n; ++core) {
    if (partition(n_train, n, core).size() < k)
      fail(Errc::KTooLargeForChunk, "k=" + std::to_string(k) + " exceeds the chunk of core " + std::to_string(core));
  }

  std::vector<float> dists(n_train);
  std::vector<std::uint32_t> ids(n_train);
  std::iota(ids.begin(), ids.end(), 0u);
  std::vector<Neighbor> local(n * k);
  KnnOutcome out;

  cluster.run(
      profile,
      on_all([&](const Worker& w) {
        const B be(w.counters());
        const Partition rows = w.partition(n_train);
        for (std::size_t i = rows.lb; i < rows.ub; ++i) dists[i] = sq_euclidean(m.train.row(i), x, be);
      }),
      on_all([&](const Worker& w) {
        const B be(w.counters());
        const Partition rows = w.partition(n_train);
        const auto sel = partial_select_k(std::span<const float>(dists).subspan(rows.lb, rows.size()),
                                          std::span<const std::uint32_t>(ids).subspan(rows.lb, rows.size()), k, be);
        std::copy(sel.begin(), sel.end(), local.begin() + static_cast<std::ptrdiff_t>(w.core_id() * k));
      }),
      on_master([&](const Worker& w) {
        const B be(w.counters());
        std::vector<std::size_t> head(n, 0);
        out.neighbors.reserve(k);
        for (std::size_t taken = 0; taken < k; ++taken) {
          std::size_t best = n;
          for (std::size_t core = 0; core < n; ++core) {
            if (head[core] == k) continue;
            if (best == n) {
              best = core;
              continue;
            }
            const Neighbor& a = local[core * k + head[core]];
            const Neighbor& b = local[best * k + head[best]];
            if (precedes(a.distance, a.index, b.distance, b.index, be)) best = core;
          }
          Neighbor pick = local[best * k + head[best]];
          ++head[best];
          pick.label = (*m.train.labels)[pick.index];
          out.neighbors.push_back(pick);
        }
        out.label = majority_vote(out.neighbors, m.n_class, be);
      }));
  return out;
}

template <NumericBackend B>
std::size_t par_knn_infer(const KnnModel& m, std::span<const float> x, const Cluster& cluster,
                          ParallelProfile* profile = nullptr) {
  return par_knn<B>(m, x, cluster, profile).label;
}

/// Parallel Lloyd iterations. Per iteration: distances, cluster-id
/// allocation and local centroid accumulation on a horizontal split of the
/// data (OP1-OP3); cluster j reduced across workers by core j mod n_cores
/// (OP4); convergence test on the master. Buffers live for the whole run.
template <NumericBackend B>
KMeansResult par_kmeans_run(KMeansState& s, const Dataset& data, const Cluster& cluster,
                            ParallelProfile* profile = nullptr, const KMeansObserver& observer = {}) {
  kmeans_init(s, data);
  const std::size_t n = cluster.n_cores();
  const std::size_t n_samples = data.n_samples;
  const std::size_t k = s.k;
  const std::size_t d = s.d;

  std::vector<float> dists(n_samples * k);
  std::vector<float> local_sums(n * k * d);
  std::vector<std::int32_t> local_counts(n * k);
  std::vector<float> next(k * d);
  KMeansResult result;
  bool converged = false;

  auto local_step = on_all([&](const Worker& w) {
    const B be(w.counters());
    const Partition rows = w.partition(n_samples);
    for (std::size_t i = rows.lb; i < rows.ub; ++i) {
      const auto x = data.row(i);
      for (std::size_t j = 0; j < k; ++j) dists[i * k + j] = sq_euclidean(x, s.centroid(j), be);
      std::uint32_t best = 0;
      for (std::size_t j = 1; j < k; ++j)
        if (be.lt(dists[i * k + j], dists[i * k + best])) best = static_cast<std::uint32_t>(j);
      s.assignments[i] = best;
    }
    float* sums = local_sums.data() + w.core_id() * k * d;
    std::int32_t* counts = local_counts.data() + w.core_id() * k;
    std::fill(sums, sums + k * d, 0.0f);
    std::fill(counts, counts + k, 0);
    for (std::size_t i = rows.lb; i < rows.ub; ++i) {
      const std::size_t c = s.assignments[i];
      ++counts[c];
      be.other();
      const auto x = data.row(i);
      for (std::size_t f = 0; f < d; ++f) sums[c * d + f] = be.add(sums[c * d + f], x[f]);
    }
  });

  auto global_step = on_all([&](const Worker& w) {
    const B be(w.counters());
    for (std::size_t j = w.core_id(); j < k; j += n) {
      std::int32_t total = local_counts[j];
      for (std::size_t core = 1; core < n; ++core) {
        total += local_counts[core * k + j];
        be.other();
      }
      if (total == 0) {
        std::copy_n(s.centroids.begin() + static_cast<std::ptrdiff_t>(j * d), d,
                    next.begin() + static_cast<std::ptrdiff_t>(j * d));
        continue;
      }
      const float count = be.from_i32(total);
      for (std::size_t f = 0; f < d; ++f) {
        float acc = local_sums[j * d + f];
        for (std::size_t core = 1; core < n; ++core) acc = be.add(acc, local_sums[(core * k + j) * d + f]);
        next[j * d + f] = be.div(acc, count);
      }
    }
  });

  auto convergence = on_master([&](const Worker& w) {
    const B be(w.counters());
    float worst = 0.0f;
    for (std::size_t j = 0; j < k; ++j) {
      const float shift = sq_euclidean(std::span<const float>(next).subspan(j * d, d), s.centroid(j), be);
      if (be.lt(worst, shift)) worst = shift;
    }
    s.centroids.swap(next);
    converged = be.lt(worst, s.epsilon);
  });

  while (result.iterations < s.max_iters) {
    cluster.run(profile, local_step, global_step, convergence);
    ++result.iterations;
    if (observer) observer(s, result.iterations);
    if (converged) {
      result.converged = true;
      break;
    }
  }
  return result;
}

struct VoteOutcome {
  std::size_t label = 0;
  std::vector<std::uint32_t> votes;
};

/// Parallel RF: static assignment of trees to cores, vote updates inside
/// the critical section, master argmax after the barrier.
template <NumericBackend B>
VoteOutcome par_rf(const RfModel& m, std::span<const float> x, const Cluster& cluster,
                   ParallelProfile* profile = nullptr) {
  check_dim(x.size(), m.d, "input");
  VoteOutcome out;
  out.votes.assign(m.n_class, 0);
  cluster.run(
      profile,
      on_all([&](const Worker& w) {
        const B be(w.counters());
        const Partition trees = w.partition(m.n_trees());
        for (std::size_t t = trees.lb; t < trees.ub; ++t) {
          const std::size_t cls = dt_infer(m.trees[t], x, be);
          if (cls >= m.n_class) fail(Errc::MalformedTree, "leaf class out of range");
          w.critical([&] { ++out.votes[cls]; });
          be.other();
        }
      }),
      on_master([&](const Worker& w) { out.label = vote_argmax(out.votes, B(w.counters())); }));
  return out;
}

template <NumericBackend B>
std::size_t par_rf_infer(const RfModel& m, std::span<const float> x, const Cluster& cluster,
                         ParallelProfile* profile = nullptr) {
  return par_rf<B>(m, x, cluster, profile).label;
}

}  // namespace nml
