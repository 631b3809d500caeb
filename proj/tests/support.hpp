#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nml/nml.hpp"

namespace nml::test {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(NML_FIXTURE_DIR) / name; }

inline Model load_fixture_model(const std::string& name) { return load_model_file(fixture(name)); }
inline Dataset load_fixture_data(const std::string& name) { return load_dataset_file(fixture(name)); }

template <class T>
T load_fixture_as(const std::string& name) {
  return std::get<T>(load_fixture_model(name));
}

inline std::uint32_t bits(float f) { return std::bit_cast<std::uint32_t>(f); }
inline float from_bits(std::uint32_t b) { return std::bit_cast<float>(b); }

// Distance in representable binary32 values between two finite floats.
inline std::int64_t ulp_distance(float a, float b) {
  auto key = [](float f) {
    const auto u = static_cast<std::int64_t>(bits(f));
    return (u & 0x80000000) ? -(u & 0x7FFFFFFF) : u;
  };
  return std::llabs(key(a) - key(b));
}

inline Dataset make_data(std::size_t n, std::size_t d, std::vector<float> features,
                         std::vector<std::uint16_t> labels = {}, std::size_t n_class = 2) {
  Dataset ds;
  ds.n_samples = n;
  ds.d = d;
  ds.n_class = n_class;
  ds.features = std::move(features);
  if (!labels.empty()) ds.labels = std::move(labels);
  return ds;
}

inline std::vector<float> random_floats(std::mt19937_64& rng, std::size_t n, float lo, float hi) {
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

}  // namespace nml::test
