#pragma once

// Whole-dataset drivers shared by the CLI, the benchmarks and the tests:
// batch prediction through the parallel kernels, and `measure`, which runs
// the sequential and parallel paths side by side with operation counting.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nml/backend.hpp"
#include "nml/cluster.hpp"
#include "nml/kernels.hpp"
#include "nml/model.hpp"
#include "nml/parallel.hpp"
#include "nml/perf.hpp"

namespace nml {

/// Hyperparameter and kernel overrides applied on top of a loaded model.
struct RunOptions {
  std::optional<KernelId> kernel;
  std::optional<std::size_t> k;
  std::optional<float> epsilon;
  std::optional<std::size_t> max_iters;
};

inline KernelId parse_kernel(std::string_view name) {
  for (auto id : {KernelId::LR, KernelId::SVM, KernelId::GNB, KernelId::KNN, KernelId::KMEANS, KernelId::RF})
    if (kernel_name(id) == name) return id;
  fail(Errc::BadArgs, "unknown kernel '" + std::string(name) + "'");
}

/// Returns a copy of `model` with `opts` applied. The only kernel change
/// allowed is running a linear model as LR or as SVM.
inline Model apply_options(Model model, const RunOptions& opts) {
  if (opts.kernel && *opts.kernel != kernel_of(model)) {
    auto* linear = std::get_if<LinearModel>(&model);
    const bool linear_target = *opts.kernel == KernelId::LR || *opts.kernel == KernelId::SVM;
    if (!linear || !linear_target)
      fail(Errc::BadArgs, std::string("cannot run a ") + std::string(kernel_name(kernel_of(model))) + " model as " +
                              std::string(kernel_name(*opts.kernel)));
    linear->kind = *opts.kernel == KernelId::LR ? LinearKind::LR : LinearKind::SVM;
  }
  if (opts.k) {
    if (auto* knn = std::get_if<KnnModel>(&model)) knn->k = *opts.k;
    else if (auto* km = std::get_if<KMeansState>(&model)) {
      km->k = *opts.k;
      km->centroids.assign(km->k * km->d, 0.0f);
      km->assignments.clear();
    } else {
      fail(Errc::BadArgs, "--k applies to knn and kmeans models only");
    }
  }
  if (opts.epsilon || opts.max_iters) {
    auto* km = std::get_if<KMeansState>(&model);
    if (!km) fail(Errc::BadArgs, "--epsilon/--max-iters apply to kmeans models only");
    if (opts.epsilon) km->epsilon = *opts.epsilon;
    if (opts.max_iters) km->max_iters = *opts.max_iters;
  }
  validate(model);
  return model;
}

inline void check_compatible(const Model& model, const Dataset& data) {
  check_dim(data.d, input_dim(model), "dataset feature dimension");
}

/// Sequential prediction of every dataset row (cluster ids for k-Means).
/// With `counters`, all operations are tallied there.
template <NumericBackend B>
std::vector<std::size_t> predict_sequential(const Model& model, const Dataset& data, OpCounters* counters = nullptr) {
  check_compatible(model, data);
  const B be(counters);
  std::vector<std::size_t> labels;
  if (const auto* km = std::get_if<KMeansState>(&model)) {
    KMeansState state = *km;
    kmeans_run(state, data, be);
    labels.assign(state.assignments.begin(), state.assignments.end());
    return labels;
  }
  labels.reserve(data.n_samples);
  for (std::size_t i = 0; i < data.n_samples; ++i) {
    const auto x = data.row(i);
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, LinearModel>) labels.push_back(linear_infer(m, x, be).label);
          else if constexpr (std::is_same_v<T, GnbModel>) labels.push_back(gnb_infer(m, x, be).label);
          else if constexpr (std::is_same_v<T, KnnModel>) labels.push_back(knn_infer(m, x, be));
          else if constexpr (std::is_same_v<T, RfModel>) labels.push_back(rf_infer(m, x, be));
        },
        model);
  }
  return labels;
}

/// Fork-join prediction of every dataset row. With `profile`, per-worker
/// and serial tallies accumulate across rows.
template <NumericBackend B>
std::vector<std::size_t> predict_parallel(const Model& model, const Dataset& data, const Cluster& cluster,
                                          ParallelProfile* profile = nullptr) {
  check_compatible(model, data);
  std::vector<std::size_t> labels;
  if (const auto* km = std::get_if<KMeansState>(&model)) {
    KMeansState state = *km;
    par_kmeans_run<B>(state, data, cluster, profile);
    labels.assign(state.assignments.begin(), state.assignments.end());
    return labels;
  }
  labels.reserve(data.n_samples);
  for (std::size_t i = 0; i < data.n_samples; ++i) {
    const auto x = data.row(i);
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, LinearModel>) labels.push_back(par_linear_infer<B>(m, x, cluster, profile).label);
          else if constexpr (std::is_same_v<T, GnbModel>) labels.push_back(par_gnb_infer<B>(m, x, cluster, profile).label);
          else if constexpr (std::is_same_v<T, KnnModel>) labels.push_back(par_knn_infer<B>(m, x, cluster, profile));
          else if constexpr (std::is_same_v<T, RfModel>) labels.push_back(par_rf_infer<B>(m, x, cluster, profile));
        },
        model);
  }
  return labels;
}

struct RunReport {
  KernelId kernel = KernelId::LR;
  BackendMode backend = BackendMode::Emulated;
  std::size_t n_samples = 0;
  std::size_t d = 0;
  std::size_t n_class = 0;
  OpCounters sequential;
  ParallelProfile parallel;
  SpeedupReport speedup;
  std::vector<std::size_t> labels;
  bool labels_match = false;
};

inline std::size_t class_count(const Model& m) {
  return std::visit(
      [](const auto& x) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, KMeansState>) return x.k;
        else return x.n_class;
      },
      m);
}

/// Runs the sequential and the parallel path once over `data` with
/// operation counting and derives the speedup figures. `labels` are the
/// parallel predictions.
template <NumericBackend B>
RunReport measure(const Model& model, const Dataset& data, const ClusterConfig& cfg) {
  const Cluster cluster(cfg);
  RunReport r;
  r.kernel = kernel_of(model);
  r.backend = B::mode;
  r.n_samples = data.n_samples;
  r.d = data.d;
  r.n_class = class_count(model);
  const auto seq_labels = predict_sequential<B>(model, data, &r.sequential);
  r.parallel = ParallelProfile(cfg.n_cores);
  r.labels = predict_parallel<B>(model, data, cluster, &r.parallel);
  r.labels_match = seq_labels == r.labels;
  r.speedup = speedup_report(r.sequential, r.parallel);
  return r;
}

inline RunReport measure(BackendMode mode, const Model& model, const Dataset& data, const ClusterConfig& cfg) {
  return with_backend(mode, [&](auto be) { return measure<decltype(be)>(model, data, cfg); });
}

}  // namespace nml
