#pragma once

// JSON serialization of run reports. Field order is fixed; the schema is
// documented in docs/report_schema.md.

#include <span>
#include <string>

#include "json.hpp"

#include "nml/run.hpp"

namespace nml {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const OpCounters& c) {
  ordered_json j;
  j["fp_add"] = c.fp_add;
  j["fp_sub"] = c.fp_sub;
  j["fp_mul"] = c.fp_mul;
  j["fp_div"] = c.fp_div;
  j["fp_cmp"] = c.fp_cmp;
  j["fp_exp"] = c.fp_exp;
  j["other_ops"] = c.other_ops;
  j["total"] = c.total();
  return j;
}

inline ordered_json to_json(const RunReport& r) {
  ordered_json j;
  j["kernel"] = std::string(kernel_name(r.kernel));
  j["backend"] = std::string(to_string(r.backend));
  j["n_cores"] = r.speedup.n_cores;
  j["n_samples"] = r.n_samples;
  j["d"] = r.d;
  j["n_class"] = r.n_class;

  ordered_json counters;
  counters["sequential"] = to_json(r.sequential);
  counters["serial"] = to_json(r.parallel.serial);
  counters["workers"] = ordered_json::array();
  for (const auto& w : r.parallel.workers) counters["workers"].push_back(to_json(w));
  j["counters"] = std::move(counters);

  ordered_json s;
  s["seq_ops"] = r.speedup.seq_ops;
  s["serial_ops"] = r.speedup.serial_ops;
  s["max_worker_ops"] = r.speedup.max_worker_ops();
  s["critical_path_ops"] = r.speedup.critical_path_ops;
  s["parallel_fraction"] = r.speedup.parallel_fraction;
  s["theoretical"] = r.speedup.theoretical;
  s["achieved"] = r.speedup.achieved;
  s["flop_intensity"] = r.speedup.flop_intensity;
  j["speedup"] = std::move(s);

  j["labels_match"] = r.labels_match;
  j["labels"] = r.labels;
  return j;
}

/// Array of reports, pretty-printed with a trailing newline.
inline std::string emit_report(std::span<const RunReport> reports) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr.dump(2) + "\n";
}

}  // namespace nml
