#pragma once

// Command-line front end. `run` takes the streams explicitly so the tests
// can drive it in-process.
//
// Exit codes: 0 success, 1 domain error (bad file, invariant violation,
// failed conformance), 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "nml/conformance.hpp"
#include "nml/report.hpp"
#include "nml/run.hpp"
#include "nml/serialize.hpp"

namespace nml::cli {

struct CliConfig {
  std::string model_path;
  std::string data_path;
  std::string kernel;
  std::size_t cores = 8;
  std::string backend = "emulated";
  bool virtual_cores = false;
  std::optional<std::size_t> k;
  std::optional<float> epsilon;
  std::optional<std::size_t> max_iters;
  std::string report_path;
  std::uint64_t seed = 0;
  std::uint64_t pairs = 1'000'000;
  std::uint64_t n = 0;
};

namespace detail {

inline void write_report(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write report " + path);
  f << text;
  if (!f.flush()) throw std::runtime_error("cannot write report " + path);
}

inline ClusterConfig cluster_config(const CliConfig& c) {
  ClusterConfig cfg{c.cores, c.virtual_cores ? ExecutionMode::Virtual : ExecutionMode::Threads};
  cfg.validate();
  return cfg;
}

inline Model load_configured_model(const CliConfig& c) {
  RunOptions opts;
  if (!c.kernel.empty()) opts.kernel = parse_kernel(c.kernel);
  opts.k = c.k;
  opts.epsilon = c.epsilon;
  opts.max_iters = c.max_iters;
  return apply_options(load_model_file(c.model_path), opts);
}

inline int infer(const CliConfig& c, std::ostream& out) {
  const Model model = load_configured_model(c);
  const Dataset data = load_dataset_file(c.data_path);
  const ClusterConfig cfg = cluster_config(c);
  const BackendMode mode = parse_backend(c.backend);

  std::vector<std::size_t> labels;
  std::string report;
  if (!c.report_path.empty()) {
    const RunReport r = measure(mode, model, data, cfg);
    labels = r.labels;
    report = emit_report(std::span(&r, 1));
  } else {
    const Cluster cluster(cfg);
    labels = with_backend(mode, [&](auto be) { return predict_parallel<decltype(be)>(model, data, cluster); });
  }
  std::ostringstream text;
  for (auto l : labels) text << l << '\n';
  if (!c.report_path.empty()) write_report(c.report_path, report);
  out << text.str();
  return 0;
}

inline int bench(const CliConfig& c, std::ostream& out) {
  const Model model = load_configured_model(c);
  const Dataset data = load_dataset_file(c.data_path);
  const RunReport r = measure(parse_backend(c.backend), model, data, cluster_config(c));
  const std::string report = emit_report(std::span(&r, 1));
  if (c.report_path.empty()) {
    out << report;
  } else {
    write_report(c.report_path, report);
    out << "achieved " << r.speedup.achieved << " theoretical " << r.speedup.theoretical << " on " << r.speedup.n_cores
        << " cores\n";
  }
  return 0;
}

inline int conformance(const CliConfig& c, std::ostream& out) {
  bool ok = true;
  for (const auto& r : run_conformance(c.pairs, c.seed)) {
    out << r.op << ' ' << (r.passed() ? "PASS" : "FAIL") << " directed=" << r.directed_cases
        << " random=" << r.random_cases << " mismatches=" << r.mismatches;
    if (r.first_failure) {
      const auto& f = *r.first_failure;
      out << std::hex << " first=(0x" << f.a << ", 0x" << f.b << ") got=0x" << f.got << " want=0x" << f.want
          << std::dec;
    }
    out << '\n';
    ok = ok && r.passed();
  }
  out << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

inline int advise_sort(const CliConfig& c, std::ostream& out) {
  out << to_string(sort_advisor(c.n, c.cores, *c.k).choice) << '\n';
  return 0;
}

inline void add_model_flags(CLI::App* sub, CliConfig& c) {
  sub->add_option("--model", c.model_path, "NML1 model file")->required()->check(CLI::ExistingFile);
  sub->add_option("--data", c.data_path, "NDS1 dataset file")->required()->check(CLI::ExistingFile);
  sub->add_option("--kernel", c.kernel, "run a linear model as lr or svm")
      ->check(CLI::IsMember({"lr", "svm", "gnb", "knn", "kmeans", "rf"}));
  sub->add_option("--cores", c.cores, "worker count (default $NML_CORES or 8)")
      ->envname("NML_CORES")
      ->check(CLI::Range(1, 64));
  sub->add_option("--backend", c.backend, "arithmetic backend")->check(CLI::IsMember({"native", "emulated"}));
  sub->add_flag("--virtual", c.virtual_cores, "run workers round-robin on one thread");
  sub->add_option("--k", c.k, "neighbours (knn) or clusters (kmeans)")->check(CLI::PositiveNumber);
  sub->add_option("--epsilon", c.epsilon, "k-Means convergence threshold on squared shift")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-iters", c.max_iters, "k-Means iteration cap")->check(CLI::PositiveNumber);
  sub->add_option("--report", c.report_path, "write the JSON report here");
  sub->add_option("--seed", c.seed, "unused by deterministic kernels");
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig c;
  CLI::App app("Non-neural ML inference kernels with op-count speedup analysis", "nml");
  app.require_subcommand(1, 1);

  auto* infer = app.add_subcommand("infer", "print one predicted label per dataset row");
  detail::add_model_flags(infer, c);
  auto* bench = app.add_subcommand("bench", "sequential and parallel run with a JSON speedup report");
  detail::add_model_flags(bench, c);

  auto* conf = app.add_subcommand("conformance", "soft-float differential suite against the host FPU");
  conf->add_option("--pairs", c.pairs, "random operand pairs per operation");
  conf->add_option("--seed", c.seed, "random pair seed");

  auto* advise = app.add_subcommand("advise-sort", "selection sort (SS) or quicksort (QS) for partial top-k");
  advise->add_option("--n", c.n, "candidates")->required()->check(CLI::PositiveNumber);
  advise->add_option("--cores", c.cores, "cores")->required()->check(CLI::Range(1, 64));
  advise->add_option("--k", c.k, "elements to select")->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "usage error: " << e.what() << "\nrun 'nml --help' for usage\n";
    return 2;
  }

  try {
    if (*infer) return detail::infer(c, out);
    if (*bench) return detail::bench(c, out);
    if (*conf) return detail::conformance(c, out);
    return detail::advise_sort(c, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nml::cli
