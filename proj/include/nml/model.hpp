#pragma once

// Parameter containers for the six inference kernels, with invariant checks.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nml/error.hpp"

namespace nml {

enum class KernelId : std::uint8_t { LR = 0, SVM = 1, GNB = 2, KNN = 3, KMEANS = 4, RF = 5 };

constexpr std::string_view kernel_name(KernelId id) noexcept {
  switch (id) {
    case KernelId::LR: return "lr";
    case KernelId::SVM: return "svm";
    case KernelId::GNB: return "gnb";
    case KernelId::KNN: return "knn";
    case KernelId::KMEANS: return "kmeans";
    case KernelId::RF: return "rf";
  }
  return "unknown";
}

/// Row-major n_samples x d features with optional per-sample class labels.
struct Dataset {
  std::size_t n_samples = 0;
  std::size_t d = 0;
  std::size_t n_class = 0;
  std::vector<float> features;
  std::optional<std::vector<std::uint16_t>> labels;

  std::span<const float> row(std::size_t i) const { return {features.data() + i * d, d}; }
  bool has_labels() const noexcept { return labels.has_value(); }

  void validate() const {
    require(n_samples >= 1, Errc::InvariantViolation, "dataset.n_samples");
    require(d >= 1, Errc::InvariantViolation, "dataset.d");
    require(features.size() == n_samples * d, Errc::InvariantViolation, "dataset.features");
    if (labels) {
      require(labels->size() == n_samples, Errc::InvariantViolation, "dataset.labels");
      for (auto l : *labels) require(l < n_class, Errc::InvariantViolation, "dataset.label_range");
    }
  }
};

enum class LinearKind : std::uint8_t { LR, SVM };

/// One-vs-all linear classifier: scores = W x + b.
struct LinearModel {
  LinearKind kind = LinearKind::LR;
  std::size_t n_class = 0;
  std::size_t d = 0;
  std::vector<float> weights;  // n_class x d
  std::vector<float> bias;     // n_class

  std::span<const float> row(std::size_t c) const { return {weights.data() + c * d, d}; }

  void validate() const {
    require(n_class >= 2, Errc::InvariantViolation, "linear.n_class");
    require(d >= 1, Errc::InvariantViolation, "linear.d");
    require(weights.size() == n_class * d, Errc::InvariantViolation, "linear.weights");
    require(bias.size() == n_class, Errc::InvariantViolation, "linear.bias");
  }
};

/// Gaussian naive Bayes in log domain. `log_norm[c, k]` holds
/// -0.5 * log(2 * pi * sigma2[c, k]) computed offline.
struct GnbModel {
  std::size_t n_class = 0;
  std::size_t d = 0;
  std::vector<float> mu;
  std::vector<float> sigma2;
  std::vector<float> log_prior;
  std::vector<float> log_norm;

  void validate() const {
    require(n_class >= 1, Errc::InvariantViolation, "gnb.n_class");
    require(d >= 1, Errc::InvariantViolation, "gnb.d");
    const std::size_t n = n_class * d;
    require(mu.size() == n, Errc::InvariantViolation, "gnb.mu");
    require(sigma2.size() == n, Errc::InvariantViolation, "gnb.sigma2");
    require(log_norm.size() == n, Errc::InvariantViolation, "gnb.log_norm");
    require(log_prior.size() == n_class, Errc::InvariantViolation, "gnb.log_prior");
    for (float s : sigma2) require(s > 0.0f, Errc::InvariantViolation, "gnb.sigma2_positive");
  }
};

struct KnnModel {
  Dataset train;
  std::size_t k = 1;
  std::size_t n_class = 0;

  void validate() const {
    train.validate();
    require(train.has_labels(), Errc::InvariantViolation, "knn.labels");
    require(k >= 1 && k <= train.n_samples, Errc::InvariantViolation, "knn.k");
    require(n_class >= 1 && train.n_class <= n_class, Errc::InvariantViolation, "knn.n_class");
  }
};

/// k-Means state; `kmeans_run` owns and mutates centroids and assignments.
struct KMeansState {
  std::size_t k = 1;
  std::size_t d = 0;
  std::vector<float> centroids;               // k x d
  std::vector<std::uint32_t> assignments;     // one cluster id per sample
  float epsilon = 1e-4f;
  std::size_t max_iters = 100;

  std::span<const float> centroid(std::size_t j) const { return {centroids.data() + j * d, d}; }

  void validate() const {
    require(k >= 1, Errc::InvariantViolation, "kmeans.k");
    require(d >= 1, Errc::InvariantViolation, "kmeans.d");
    require(centroids.size() == k * d, Errc::InvariantViolation, "kmeans.centroids");
    for (auto a : assignments) require(a < k, Errc::InvariantViolation, "kmeans.assignments");
    require(epsilon > 0.0f, Errc::InvariantViolation, "kmeans.epsilon");
    require(max_iters >= 1, Errc::InvariantViolation, "kmeans.max_iters");
  }
};

/// Array-encoded decision tree. A node with feature[i] < 0 is a leaf whose
/// class is -(feature[i] + 1); children of leaves are ignored (written as -1).
struct DecisionTree {
  std::vector<std::int32_t> feature;
  std::vector<float> threshold;
  std::vector<std::int32_t> left;
  std::vector<std::int32_t> right;

  std::size_t size() const noexcept { return feature.size(); }
  static constexpr std::int32_t leaf(std::size_t cls) { return -static_cast<std::int32_t>(cls) - 1; }
  static constexpr std::size_t leaf_class(std::int32_t f) { return static_cast<std::size_t>(-(f + 1)); }
};

namespace detail {

// Rejects out-of-range references and any cycle reachable from the root.
inline void validate_tree(const DecisionTree& t, std::size_t d, std::size_t n_class) {
  const std::size_t n = t.size();
  require(n >= 1, Errc::InvariantViolation, "rf.tree_empty");
  require(t.threshold.size() == n && t.left.size() == n && t.right.size() == n, Errc::InvariantViolation,
          "rf.tree_arrays");
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = t.feature[i];
    if (f < 0) {
      require(DecisionTree::leaf_class(f) < n_class, Errc::InvariantViolation, "rf.leaf_class");
      continue;
    }
    require(static_cast<std::size_t>(f) < d, Errc::InvariantViolation, "rf.feature_index");
    for (auto c : {t.left[i], t.right[i]}) {
      require(c >= 0 && static_cast<std::size_t>(c) < n, Errc::InvariantViolation, "rf.child_index");
    }
  }

  // Iterative DFS with white/grey/black colouring.
  enum : std::uint8_t { White, Grey, Black };
  std::vector<std::uint8_t> colour(n, White);
  std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
  colour[0] = Grey;
  while (!stack.empty()) {
    auto& [node, next_child] = stack.back();
    if (t.feature[node] < 0 || next_child == 2) {
      colour[node] = Black;
      stack.pop_back();
      continue;
    }
    const auto child = static_cast<std::size_t>(next_child == 0 ? t.left[node] : t.right[node]);
    ++next_child;
    if (colour[child] == Grey) fail(Errc::InvariantViolation, "rf.cycle");
    if (colour[child] == White) {
      colour[child] = Grey;
      stack.emplace_back(child, 0);
    }
  }
}

}  // namespace detail

struct RfModel {
  std::size_t n_class = 0;
  std::size_t d = 0;
  std::vector<DecisionTree> trees;

  std::size_t n_trees() const noexcept { return trees.size(); }

  void validate() const {
    require(!trees.empty(), Errc::InvariantViolation, "rf.n_trees");
    require(n_class >= 1, Errc::InvariantViolation, "rf.n_class");
    require(d >= 1, Errc::InvariantViolation, "rf.d");
    for (const auto& t : trees) detail::validate_tree(t, d, n_class);
  }
};

using Model = std::variant<LinearModel, GnbModel, KnnModel, KMeansState, RfModel>;

inline KernelId kernel_of(const Model& m) {
  struct {
    KernelId operator()(const LinearModel& l) const { return l.kind == LinearKind::LR ? KernelId::LR : KernelId::SVM; }
    KernelId operator()(const GnbModel&) const { return KernelId::GNB; }
    KernelId operator()(const KnnModel&) const { return KernelId::KNN; }
    KernelId operator()(const KMeansState&) const { return KernelId::KMEANS; }
    KernelId operator()(const RfModel&) const { return KernelId::RF; }
  } visitor;
  return std::visit(visitor, m);
}

inline std::size_t input_dim(const Model& m) {
  return std::visit(
      [](const auto& x) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, KnnModel>) return x.train.d;
        else return x.d;
      },
      m);
}

inline void validate(const Model& m) {
  std::visit([](const auto& x) { x.validate(); }, m);
}

}  // namespace nml
