#pragma once

// Sequential reference kernels. Every floating-point operation goes through
// the backend and accumulations run left to right, which defines the bit
// pattern the parallel kernels reproduce at one core.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "nml/backend.hpp"
#include "nml/error.hpp"
#include "nml/model.hpp"

namespace nml {

/// Winning class plus the per-class scores it was chosen from (raw linear
/// scores, or GNB log-likelihoods).
struct Prediction {
  std::size_t label = 0;
  std::vector<float> scores;
};

struct Neighbor {
  float distance = 0.0f;
  std::uint32_t index = 0;
  std::uint16_t label = 0;
};

/// Up to k neighbours ascending by (distance, index).
using NeighborList = std::vector<Neighbor>;

inline void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) fail(Errc::DimensionMismatch, std::string(what) + ": got " + std::to_string(got) +
                                                     ", expected " + std::to_string(want));
}

// acc + sum_j a[j] * b[j], left to right.
template <NumericBackend B>
float dot_accumulate(float acc, std::span<const float> a, std::span<const float> b, const B& be) {
  for (std::size_t j = 0; j < a.size(); ++j) acc = be.add(acc, be.mul(a[j], b[j]));
  return acc;
}

template <NumericBackend B>
std::vector<float> gemv_bias(std::span<const float> weights, std::span<const float> x, std::span<const float> bias,
                             const B& be) {
  const std::size_t rows = bias.size();
  const std::size_t d = x.size();
  check_dim(weights.size(), rows * d, "weights");
  std::vector<float> scores(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const float dot = dot_accumulate(0.0f, weights.subspan(i * d, d), x, be);
    scores[i] = be.add(dot, bias[i]);
  }
  return scores;
}

template <NumericBackend B>
float sigmoid(float s, const B& be) {
  return be.div(1.0f, be.add(1.0f, be.exp(be.sub(0.0f, s))));
}

/// Index of the largest score; ties resolve to the lowest index.
template <NumericBackend B>
std::size_t argmax(std::span<const float> v, const B& be) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (be.lt(v[best], v[i])) best = i;
  }
  return best;
}

inline std::size_t argmax(std::span<const float> v) { return argmax(v, NativeBackend{}); }

template <NumericBackend B>
std::vector<float> softmax(std::span<const float> v, const B& be) {
  const float top = v[argmax(v, be)];
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = be.exp(be.sub(v[i], top));
  float sum = out[0];
  for (std::size_t i = 1; i < out.size(); ++i) sum = be.add(sum, out[i]);
  for (auto& o : out) o = be.div(o, sum);
  return out;
}

template <NumericBackend B>
Prediction lr_infer(const LinearModel& m, std::span<const float> x, const B& be) {
  check_dim(x.size(), m.d, "input");
  Prediction p;
  p.scores = gemv_bias(m.weights, x, m.bias, be);
  p.label = argmax(softmax(p.scores, be), be);
  return p;
}

/// One-vs-all SVM: the class with the largest raw margin.
template <NumericBackend B>
Prediction svm_infer(const LinearModel& m, std::span<const float> x, const B& be) {
  check_dim(x.size(), m.d, "input");
  Prediction p;
  p.scores = gemv_bias(m.weights, x, m.bias, be);
  p.label = argmax(p.scores, be);
  return p;
}

/// Binary sign(w.x + b) decision of a single-row SVM, as argmax over
/// {-s, s}: class 1 iff s > 0.
template <NumericBackend B>
std::size_t svm_sign_infer(std::span<const float> w, float b, std::span<const float> x, const B& be) {
  check_dim(x.size(), w.size(), "input");
  const float s = be.add(dot_accumulate(0.0f, w, x, be), b);
  return be.lt(0.0f, s) ? 1 : 0;
}

template <NumericBackend B>
Prediction linear_infer(const LinearModel& m, std::span<const float> x, const B& be) {
  return m.kind == LinearKind::LR ? lr_infer(m, x, be) : svm_infer(m, x, be);
}

// log_norm - (x - mu)^2 / (2 sigma2)
template <NumericBackend B>
float gnb_term(float x, float mu, float sigma2, float log_norm, const B& be) {
  const float diff = be.sub(x, mu);
  return be.sub(log_norm, be.div(be.mul(diff, diff), be.add(sigma2, sigma2)));
}

// Sum of per-feature log densities of class `c` over features [lb, ub).
template <NumericBackend B>
float gnb_partial(const GnbModel& m, std::size_t c, std::span<const float> x, std::size_t lb, std::size_t ub,
                  const B& be) {
  float acc = 0.0f;
  const std::size_t base = c * m.d;
  for (std::size_t k = lb; k < ub; ++k)
    acc = be.add(acc, gnb_term(x[k], m.mu[base + k], m.sigma2[base + k], m.log_norm[base + k], be));
  return acc;
}

/// Per-class joint log-likelihood log P(c) + sum_k log N(x_k; mu, sigma2).
template <NumericBackend B>
std::vector<float> gnb_scores(const GnbModel& m, std::span<const float> x, const B& be) {
  check_dim(x.size(), m.d, "input");
  std::vector<float> scores(m.n_class);
  for (std::size_t c = 0; c < m.n_class; ++c) scores[c] = be.add(gnb_partial(m, c, x, 0, m.d, be), m.log_prior[c]);
  return scores;
}

/// Product-domain likelihoods P(c) * prod_k N(x_k; mu, sigma2). Underflows
/// for high-dimensional inputs; the log-domain scores are canonical.
template <NumericBackend B>
std::vector<float> gnb_likelihoods(const GnbModel& m, std::span<const float> x, const B& be) {
  check_dim(x.size(), m.d, "input");
  std::vector<float> out(m.n_class);
  for (std::size_t c = 0; c < m.n_class; ++c) {
    float prod = be.exp(m.log_prior[c]);
    const std::size_t base = c * m.d;
    for (std::size_t k = 0; k < m.d; ++k)
      prod = be.mul(prod, be.exp(gnb_term(x[k], m.mu[base + k], m.sigma2[base + k], m.log_norm[base + k], be)));
    out[c] = prod;
  }
  return out;
}

template <NumericBackend B>
Prediction gnb_infer(const GnbModel& m, std::span<const float> x, const B& be) {
  Prediction p;
  p.scores = gnb_scores(m, x, be);
  p.label = argmax(p.scores, be);
  return p;
}

/// Squared Euclidean distance; the square root is never needed for ranking.
template <NumericBackend B>
float sq_euclidean(std::span<const float> p, std::span<const float> q, const B& be) {
  check_dim(q.size(), p.size(), "vector");
  float acc = 0.0f;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const float diff = be.sub(p[i], q[i]);
    acc = be.add(acc, be.mul(diff, diff));
  }
  return acc;
}

// Strict (distance, index) ordering.
template <NumericBackend B>
bool precedes(float da, std::uint32_t ia, float db, std::uint32_t ib, const B& be) {
  if (be.lt(da, db)) return true;
  if (!be.eq(da, db)) return false;
  be.other();
  return ia < ib;
}

/// Selection sort truncated after k passes over a private copy: the k
/// smallest (distance, id) pairs in ascending order, using fewer than n*k
/// key comparisons. `comparisons`, when given, receives the count.
template <NumericBackend B>
NeighborList partial_select_k(std::span<const float> dists, std::span<const std::uint32_t> ids, std::size_t k,
                              const B& be, std::size_t* comparisons = nullptr) {
  check_dim(ids.size(), dists.size(), "ids");
  const std::size_t n = dists.size();
  if (k > n) fail(Errc::KTooLarge, "k=" + std::to_string(k) + " > n=" + std::to_string(n));
  std::vector<float> d(dists.begin(), dists.end());
  std::vector<std::uint32_t> id(ids.begin(), ids.end());
  std::size_t count = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < n; ++j) {
      ++count;
      if (precedes(d[j], id[j], d[best], id[best], be)) best = j;
    }
    std::swap(d[i], d[best]);
    std::swap(id[i], id[best]);
    be.other();
  }
  if (comparisons) *comparisons = count;
  NeighborList out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = {d[i], id[i], 0};
  return out;
}

/// Class with the most votes; ties go to the lowest class.
template <NumericBackend B>
std::size_t vote_argmax(std::span<const std::uint32_t> votes, const B& be) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    be.other();
    if (votes[c] > votes[best]) best = c;
  }
  return best;
}

/// Majority class among the neighbours; vote ties go to the lowest class.
template <NumericBackend B>
std::size_t majority_vote(const NeighborList& nn, std::size_t n_class, const B& be) {
  std::vector<std::uint32_t> votes(n_class, 0);
  for (const auto& n : nn) {
    ++votes[n.label];
    be.other();
  }
  return vote_argmax(votes, be);
}

template <NumericBackend B>
NeighborList knn_neighbors(const KnnModel& m, std::span<const float> x, const B& be) {
  check_dim(x.size(), m.train.d, "input");
  const std::size_t n = m.train.n_samples;
  std::vector<float> dists(n);
  for (std::size_t i = 0; i < n; ++i) dists[i] = sq_euclidean(m.train.row(i), x, be);
  std::vector<std::uint32_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0u);
  NeighborList nn = partial_select_k(dists, ids, m.k, be);
  for (auto& e : nn) e.label = (*m.train.labels)[e.index];
  return nn;
}

template <NumericBackend B>
std::size_t knn_infer(const KnnModel& m, std::span<const float> x, const B& be) {
  return majority_vote(knn_neighbors(m, x, be), m.n_class, be);
}

// ---------------------------------------------------------------------------
// k-Means

struct KMeansResult {
  std::size_t iterations = 0;
  bool converged = false;
};

/// Seeds centroids with the first k samples and clears assignments.
inline void kmeans_init(KMeansState& s, const Dataset& data) {
  check_dim(data.d, s.d, "data");
  if (s.k > data.n_samples) fail(Errc::KTooLarge, "k=" + std::to_string(s.k) + " > n_samples");
  s.centroids.assign(data.features.begin(), data.features.begin() + static_cast<std::ptrdiff_t>(s.k * s.d));
  s.assignments.assign(data.n_samples, 0);
}

// Nearest centroid of one sample; ties go to the lower cluster id.
template <NumericBackend B>
std::uint32_t nearest_centroid(const KMeansState& s, std::span<const float> x, const B& be) {
  std::uint32_t best = 0;
  float best_d = sq_euclidean(x, s.centroid(0), be);
  for (std::size_t j = 1; j < s.k; ++j) {
    const float dj = sq_euclidean(x, s.centroid(j), be);
    if (be.lt(dj, best_d)) {
      best_d = dj;
      best = static_cast<std::uint32_t>(j);
    }
  }
  return best;
}

template <NumericBackend B>
void kmeans_assign(KMeansState& s, const Dataset& data, const B& be) {
  check_dim(data.d, s.d, "data");
  if (s.k > data.n_samples) fail(Errc::KTooLarge);
  s.assignments.resize(data.n_samples);
  for (std::size_t i = 0; i < data.n_samples; ++i) s.assignments[i] = nearest_centroid(s, data.row(i), be);
}

/// Moves each centroid to the mean of its samples; empty clusters keep
/// their previous centroid.
template <NumericBackend B>
void kmeans_update(KMeansState& s, const Dataset& data, const B& be) {
  check_dim(data.d, s.d, "data");
  check_dim(s.assignments.size(), data.n_samples, "assignments");
  std::vector<float> sums(s.k * s.d, 0.0f);
  std::vector<std::int32_t> counts(s.k, 0);
  for (std::size_t i = 0; i < data.n_samples; ++i) {
    const std::size_t c = s.assignments[i];
    ++counts[c];
    be.other();
    const auto x = data.row(i);
    for (std::size_t f = 0; f < s.d; ++f) sums[c * s.d + f] = be.add(sums[c * s.d + f], x[f]);
  }
  for (std::size_t c = 0; c < s.k; ++c) {
    if (counts[c] == 0) continue;
    const float n = be.from_i32(counts[c]);
    for (std::size_t f = 0; f < s.d; ++f) s.centroids[c * s.d + f] = be.div(sums[c * s.d + f], n);
  }
}

/// Largest squared displacement between two centroid sets.
template <NumericBackend B>
float max_shift(const KMeansState& s, std::span<const float> previous, const B& be) {
  float worst = 0.0f;
  for (std::size_t j = 0; j < s.k; ++j) {
    const float shift = sq_euclidean(s.centroid(j), previous.subspan(j * s.d, s.d), be);
    if (be.lt(worst, shift)) worst = shift;
  }
  return worst;
}

using KMeansObserver = std::function<void(const KMeansState&, std::size_t iteration)>;

/// Lloyd iterations from the first-k seeding until the largest squared
/// centroid displacement drops below epsilon or max_iters is reached.
template <NumericBackend B>
KMeansResult kmeans_run(KMeansState& s, const Dataset& data, const B& be, const KMeansObserver& observer = {}) {
  kmeans_init(s, data);
  KMeansResult result;
  std::vector<float> previous(s.centroids.size());
  while (result.iterations < s.max_iters) {
    kmeans_assign(s, data, be);
    previous = s.centroids;
    kmeans_update(s, data, be);
    ++result.iterations;
    if (observer) observer(s, result.iterations);
    if (be.lt(max_shift(s, previous, be), s.epsilon)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Decision trees and random forests

/// Walks the tree from the root: left when x[feature] <= threshold.
template <NumericBackend B>
std::size_t dt_infer(const DecisionTree& t, std::span<const float> x, const B& be) {
  std::size_t node = 0;
  for (std::size_t steps = 0; steps <= t.size(); ++steps) {
    const std::int32_t f = t.feature[node];
    be.other();
    if (f < 0) return DecisionTree::leaf_class(f);
    if (static_cast<std::size_t>(f) >= x.size()) fail(Errc::MalformedTree, "feature index out of range");
    const std::int32_t next = be.le(x[static_cast<std::size_t>(f)], t.threshold[node]) ? t.left[node] : t.right[node];
    if (next < 0 || static_cast<std::size_t>(next) >= t.size()) fail(Errc::MalformedTree, "child index out of range");
    node = static_cast<std::size_t>(next);
  }
  fail(Errc::MalformedTree, "path does not terminate");
}

template <NumericBackend B>
void rf_vote_range(const RfModel& m, std::span<const float> x, std::size_t lb, std::size_t ub,
                   std::vector<std::uint32_t>& votes, const B& be) {
  for (std::size_t t = lb; t < ub; ++t) {
    const std::size_t cls = dt_infer(m.trees[t], x, be);
    if (cls >= m.n_class) fail(Errc::MalformedTree, "leaf class out of range");
    ++votes[cls];
    be.other();
  }
}

template <NumericBackend B>
std::vector<std::uint32_t> rf_votes(const RfModel& m, std::span<const float> x, const B& be) {
  check_dim(x.size(), m.d, "input");
  std::vector<std::uint32_t> votes(m.n_class, 0);
  rf_vote_range(m, x, 0, m.n_trees(), votes, be);
  return votes;
}

template <NumericBackend B>
std::size_t rf_infer(const RfModel& m, std::span<const float> x, const B& be) {
  return vote_argmax(rf_votes(m, x, be), be);
}

}  // namespace nml
