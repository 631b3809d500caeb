#pragma once

// Deterministic synthetic datasets and desk-scale trainers used to produce
// the committed test fixtures. Training runs in double precision; values
// are rounded to binary32 once, when the model is assembled.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "nml/model.hpp"

namespace nml::fixtures {

/// splitmix64; portable where the std distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

struct Split {
  Dataset train;
  Dataset test;
};

inline Dataset make_dataset(std::size_t n, std::size_t d, std::size_t n_class) {
  Dataset ds;
  ds.n_samples = n;
  ds.d = d;
  ds.n_class = n_class;
  ds.features.resize(n * d);
  ds.labels = std::vector<std::uint16_t>(n);
  return ds;
}

// Class prototypes on a side x side grid with pixel values in [0, 16];
// samples add Gaussian noise, clamp and round to integers.
inline Split make_image_blobs(std::size_t side, std::size_t n_class, std::size_t n_train, std::size_t n_test,
                              double density, double noise, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = side * side;
  std::vector<double> proto(n_class * d);
  for (auto& p : proto) p = rng.uniform() < density ? 12.0 + 4.0 * rng.uniform() : 2.0 * rng.uniform();

  auto fill = [&](Dataset& ds) {
    for (std::size_t i = 0; i < ds.n_samples; ++i) {
      const std::size_t c = i % n_class;
      (*ds.labels)[i] = static_cast<std::uint16_t>(c);
      for (std::size_t f = 0; f < d; ++f) {
        const double v = std::clamp(proto[c * d + f] + noise * rng.normal(), 0.0, 16.0);
        ds.features[i * d + f] = static_cast<float>(std::round(v));
      }
    }
  };
  Split s{make_dataset(n_train, d, n_class), make_dataset(n_test, d, n_class)};
  fill(s.train);
  fill(s.test);
  return s;
}

/// 8x8 "digits": 10 classes, integer pixels 0..16.
inline Split make_digits(std::uint64_t seed) { return make_image_blobs(8, 10, 500, 100, 0.35, 5.0, seed); }

/// 28x28 MNIST-scale stand-in: 784 features, 10 classes.
inline Split make_mnist_like(std::uint64_t seed) { return make_image_blobs(28, 10, 1000, 100, 0.2, 6.0, seed); }

/// 21-dimensional binary instances from two class-conditional Bernoulli
/// profiles, matching the 1000 x 21 shape of the screening data.
inline Split make_asd(std::uint64_t seed) {
  Rng rng(seed);
  constexpr std::size_t d = 21;
  std::vector<double> profile(2 * d);
  for (std::size_t f = 0; f < d; ++f) {
    profile[f] = 0.15 + 0.35 * rng.uniform();
    profile[d + f] = 0.5 + 0.35 * rng.uniform();
  }
  auto fill = [&](Dataset& ds) {
    for (std::size_t i = 0; i < ds.n_samples; ++i) {
      const std::size_t c = rng.uniform() < 0.4 ? 1 : 0;
      (*ds.labels)[i] = static_cast<std::uint16_t>(c);
      for (std::size_t f = 0; f < d; ++f) ds.features[i * d + f] = rng.uniform() < profile[c * d + f] ? 1.0f : 0.0f;
    }
  };
  Split s{make_dataset(1000, d, 2), make_dataset(100, d, 2)};
  fill(s.train);
  fill(s.test);
  return s;
}

// ---------------------------------------------------------------------------
// Linear models. Inputs are scaled by 1/16 during training and the scale is
// folded back into W.

inline LinearModel assemble_linear(LinearKind kind, std::size_t n_class, std::size_t d, const std::vector<double>& w,
                                   const std::vector<double>& b, double scale) {
  LinearModel m;
  m.kind = kind;
  m.n_class = n_class;
  m.d = d;
  m.weights.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) m.weights[i] = static_cast<float>(w[i] * scale);
  m.bias.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) m.bias[i] = static_cast<float>(b[i]);
  return m;
}

/// Multinomial logistic regression by full-batch gradient descent.
inline LinearModel train_softmax(const Dataset& ds, std::size_t epochs, double rate, double l2) {
  const std::size_t n = ds.n_samples, d = ds.d, nc = ds.n_class;
  const double scale = 1.0 / 16.0;
  std::vector<double> w(nc * d, 0.0), b(nc, 0.0), gw(nc * d), gb(nc), z(nc);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const float* x = ds.features.data() + i * d;
      double top = -1e300;
      for (std::size_t c = 0; c < nc; ++c) {
        double s = b[c];
        for (std::size_t f = 0; f < d; ++f) s += w[c * d + f] * x[f] * scale;
        z[c] = s;
        top = std::max(top, s);
      }
      double sum = 0.0;
      for (auto& v : z) sum += (v = std::exp(v - top));
      for (std::size_t c = 0; c < nc; ++c) {
        const double g = z[c] / sum - ((*ds.labels)[i] == c ? 1.0 : 0.0);
        gb[c] += g;
        for (std::size_t f = 0; f < d; ++f) gw[c * d + f] += g * x[f] * scale;
      }
    }
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= rate * (gw[j] / n + l2 * w[j]);
    for (std::size_t c = 0; c < nc; ++c) b[c] -= rate * gb[c] / n;
  }
  return assemble_linear(LinearKind::LR, nc, d, w, b, scale);
}

/// One-vs-all linear SVM: per class, full-batch subgradient descent on the
/// L2-regularized hinge loss.
inline LinearModel train_ovr_svm(const Dataset& ds, std::size_t epochs, double rate, double l2) {
  const std::size_t n = ds.n_samples, d = ds.d, nc = ds.n_class;
  const double scale = 1.0 / 16.0;
  std::vector<double> w(nc * d, 0.0), b(nc, 0.0), gw(d);
  for (std::size_t c = 0; c < nc; ++c) {
    double* wc = w.data() + c * d;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
      std::fill(gw.begin(), gw.end(), 0.0);
      double gb = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const float* x = ds.features.data() + i * d;
        const double y = (*ds.labels)[i] == c ? 1.0 : -1.0;
        double s = b[c];
        for (std::size_t f = 0; f < d; ++f) s += wc[f] * x[f] * scale;
        if (y * s < 1.0) {
          for (std::size_t f = 0; f < d; ++f) gw[f] -= y * x[f] * scale;
          gb -= y;
        }
      }
      for (std::size_t f = 0; f < d; ++f) wc[f] -= rate * (gw[f] / n + l2 * wc[f]);
      b[c] -= rate * gb / n;
    }
  }
  return assemble_linear(LinearKind::SVM, nc, d, w, b, scale);
}

/// Closed-form Gaussian naive Bayes with variances floored at 1e-9 and
/// log terms precomputed in double.
inline GnbModel fit_gnb(const Dataset& ds) {
  const std::size_t n = ds.n_samples, d = ds.d, nc = ds.n_class;
  std::vector<double> sum(nc * d, 0.0), sq(nc * d, 0.0), count(nc, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = (*ds.labels)[i];
    count[c] += 1.0;
    for (std::size_t f = 0; f < d; ++f) {
      const double x = ds.features[i * d + f];
      sum[c * d + f] += x;
      sq[c * d + f] += x * x;
    }
  }
  GnbModel m;
  m.n_class = nc;
  m.d = d;
  m.mu.resize(nc * d);
  m.sigma2.resize(nc * d);
  m.log_norm.resize(nc * d);
  m.log_prior.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    m.log_prior[c] = static_cast<float>(std::log(count[c] / static_cast<double>(n)));
    for (std::size_t f = 0; f < d; ++f) {
      const std::size_t j = c * d + f;
      const double mean = sum[j] / count[c];
      const double var = std::max(sq[j] / count[c] - mean * mean, 1e-9);
      m.mu[j] = static_cast<float>(mean);
      m.sigma2[j] = static_cast<float>(var);
      m.log_norm[j] = static_cast<float>(-0.5 * std::log(2.0 * std::numbers::pi * var));
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Random forest: CART trees on bootstrap samples with Gini splits over a
// random feature subset per node.

// scikit-learn RandomForestClassifier defaults: 100 bootstrapped trees
// grown until pure, sqrt(d) candidate features per node (0 here).
struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = std::numeric_limits<std::size_t>::max();
  std::size_t min_split = 2;
  std::size_t features_per_node = 0;
};

namespace detail {

inline double gini(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    g -= p * p;
  }
  return g;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& ds, const ForestParams& params, Rng& rng) : ds_(ds), params_(params), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  std::size_t candidates() const {
    if (params_.features_per_node != 0) return std::min(params_.features_per_node, ds_.d);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(ds_.d))));
  }

  std::size_t add_node() {
    tree_.feature.push_back(0);
    tree_.threshold.push_back(0.0f);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    return tree_.size() - 1;
  }

  std::size_t grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    const std::size_t node = add_node();
    std::vector<std::size_t> counts(ds_.n_class, 0);
    for (auto r : rows) ++counts[(*ds_.labels)[r]];
    const std::size_t majority = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    const bool pure = counts[majority] == rows.size();

    std::size_t best_feature = 0;
    double best_threshold = 0.0, best_score = gini(counts, rows.size()) - 1e-12;
    bool found = false;
    if (!pure && depth < params_.max_depth && rows.size() >= params_.min_split) {
      // Candidate features drawn without replacement.
      std::vector<std::size_t> features(ds_.d);
      std::iota(features.begin(), features.end(), std::size_t{0});
      for (std::size_t t = 0; t < candidates(); ++t) {
        std::swap(features[t], features[t + rng_.below(ds_.d - t)]);
        const std::size_t f = features[t];
        std::vector<std::pair<float, std::uint16_t>> vals;
        vals.reserve(rows.size());
        for (auto r : rows) vals.emplace_back(ds_.features[r * ds_.d + f], (*ds_.labels)[r]);
        std::sort(vals.begin(), vals.end());
        std::vector<std::size_t> left(ds_.n_class, 0), right = counts;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
          ++left[vals[i].second];
          --right[vals[i].second];
          if (vals[i].first == vals[i + 1].first) continue;
          const std::size_t nl = i + 1, nr = vals.size() - nl;
          const double score = (nl * gini(left, nl) + nr * gini(right, nr)) / static_cast<double>(vals.size());
          if (score < best_score) {
            best_score = score;
            best_feature = f;
            best_threshold = 0.5 * (static_cast<double>(vals[i].first) + vals[i + 1].first);
            found = true;
          }
        }
      }
    }
    if (!found) {
      tree_.feature[node] = DecisionTree::leaf(majority);
      return node;
    }
    const float thr = static_cast<float>(best_threshold);
    std::vector<std::size_t> lrows, rrows;
    for (auto r : rows) (ds_.features[r * ds_.d + best_feature] <= thr ? lrows : rrows).push_back(r);
    if (lrows.empty() || rrows.empty()) {  // midpoint rounded onto a sample value
      tree_.feature[node] = DecisionTree::leaf(majority);
      return node;
    }
    tree_.feature[node] = static_cast<std::int32_t>(best_feature);
    tree_.threshold[node] = thr;
    const std::size_t l = grow(lrows, depth + 1);
    const std::size_t r = grow(rrows, depth + 1);
    tree_.left[node] = static_cast<std::int32_t>(l);
    tree_.right[node] = static_cast<std::int32_t>(r);
    return node;
  }

  const Dataset& ds_;
  const ForestParams& params_;
  Rng& rng_;
  DecisionTree tree_;
};

}  // namespace detail

inline RfModel train_forest(const Dataset& ds, const ForestParams& params, std::uint64_t seed) {
  Rng rng(seed);
  RfModel m;
  m.n_class = ds.n_class;
  m.d = ds.d;
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    std::vector<std::size_t> rows(ds.n_samples);
    for (auto& r : rows) r = rng.below(ds.n_samples);
    m.trees.push_back(detail::TreeBuilder(ds, params, rng).build(std::move(rows)));
  }
  return m;
}

inline KnnModel make_knn(const Dataset& train, std::size_t k) {
  KnnModel m;
  m.train = train;
  m.k = k;
  m.n_class = train.n_class;
  return m;
}

/// k-Means hyperparameters; centroids hold the first-k seeding.
inline KMeansState make_kmeans(const Dataset& data, std::size_t k, float epsilon, std::size_t max_iters) {
  KMeansState s;
  s.k = k;
  s.d = data.d;
  s.epsilon = epsilon;
  s.max_iters = max_iters;
  s.centroids.assign(data.features.begin(), data.features.begin() + static_cast<std::ptrdiff_t>(k * data.d));
  return s;
}

/// Everything written by nml_make_fixtures, keyed by file name.
struct FixtureSet {
  std::vector<std::pair<std::string, Model>> models;
  std::vector<std::pair<std::string, Dataset>> datasets;
};

inline FixtureSet build_all(std::uint64_t seed) {
  FixtureSet out;
  const Split digits = make_digits(seed + 1);
  out.datasets.emplace_back("digits_test.nds", digits.test);
  out.models.emplace_back("digits_lr.nml", train_softmax(digits.train, 200, 0.5, 1e-4));
  out.models.emplace_back("digits_svm.nml", train_ovr_svm(digits.train, 200, 0.1, 1e-3));
  out.models.emplace_back("digits_gnb.nml", fit_gnb(digits.train));
  out.models.emplace_back("digits_rf.nml", train_forest(digits.train, ForestParams{}, seed + 2));

  const Split asd = make_asd(seed + 3);
  out.datasets.emplace_back("asd_train.nds", asd.train);
  out.datasets.emplace_back("asd_query.nds", asd.test);
  out.models.emplace_back("asd_knn.nml", make_knn(asd.train, 4));
  out.models.emplace_back("asd_kmeans.nml", make_kmeans(asd.train, 2, 1e-4f, 100));

  const Split mnist = make_mnist_like(seed + 4);
  out.datasets.emplace_back("mnist_test.nds", mnist.test);
  out.models.emplace_back("mnist_lr.nml", train_softmax(mnist.train, 60, 0.5, 1e-4));
  out.models.emplace_back("mnist_svm.nml", train_ovr_svm(mnist.train, 60, 0.1, 1e-3));
  out.models.emplace_back("mnist_gnb.nml", fit_gnb(mnist.train));
  return out;
}

}  // namespace nml::fixtures
