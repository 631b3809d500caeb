#pragma once

// Binary "NML1" model and "NDS1" dataset files. All multi-byte fields are
// little-endian; binary32 values are stored as raw IEEE bit patterns. The
// field layout of every kernel is documented in docs/file_format.md.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "nml/error.hpp"
#include "nml/model.hpp"

namespace nml {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kFormatVersion = 1;

namespace io_detail {

class Writer {
 public:
  void magic(const char (&m)[5]) { out_.insert(out_.end(), m, m + 4); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void count(std::size_t v) { u32(static_cast<std::uint32_t>(v)); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  void f32s(std::span<const float> v) {
    for (float x : v) f32(x);
  }
  void i32s(std::span<const std::int32_t> v) {
    for (auto x : v) i32(x);
  }

  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t remaining() const noexcept { return in_.size() - pos_; }

  void need(std::uint64_t n) const {
    if (n > remaining()) fail(Errc::LengthMismatch, "truncated payload");
  }

  void magic(const char (&m)[5]) {
    if (in_.size() < 4 || std::memcmp(in_.data(), m, 4) != 0) fail(Errc::BadMagic);
    pos_ = 4;
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }

  std::vector<float> f32s(std::size_t n) {
    need(std::uint64_t{n} * 4);
    std::vector<float> v(n);
    for (auto& x : v) x = f32();
    return v;
  }
  std::vector<std::int32_t> i32s(std::size_t n) {
    need(std::uint64_t{n} * 4);
    std::vector<std::int32_t> v(n);
    for (auto& x : v) x = i32();
    return v;
  }

  void finish() const {
    if (remaining() != 0) fail(Errc::LengthMismatch, "trailing bytes");
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

// Sizes are products of u32 header counts; saturate instead of wrapping so an
// oversized header can never alias a plausible length.
constexpr std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) noexcept {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}
constexpr std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) noexcept {
  return a > UINT64_MAX - b ? UINT64_MAX : a + b;
}

inline void expect_payload(const Reader& r, std::uint64_t bytes) {
  if (bytes != r.remaining()) fail(Errc::LengthMismatch, "payload size does not match header");
}

inline void check_version(Reader& r) {
  if (r.u8() != kFormatVersion) fail(Errc::UnsupportedVersion);
}

inline void write_linear(Writer& w, const LinearModel& m) {
  w.count(m.n_class);
  w.count(m.d);
  w.f32s(m.weights);
  w.f32s(m.bias);
}

inline LinearModel read_linear(Reader& r, LinearKind kind) {
  LinearModel m;
  m.kind = kind;
  m.n_class = r.u32();
  m.d = r.u32();
  const auto cells = sat_mul(m.n_class, m.d);
  expect_payload(r, sat_mul(sat_add(cells, m.n_class), 4));
  m.weights = r.f32s(cells);
  m.bias = r.f32s(m.n_class);
  return m;
}

inline void write_gnb(Writer& w, const GnbModel& m) {
  w.count(m.n_class);
  w.count(m.d);
  w.f32s(m.mu);
  w.f32s(m.sigma2);
  w.f32s(m.log_prior);
  w.f32s(m.log_norm);
}

inline GnbModel read_gnb(Reader& r) {
  GnbModel m;
  m.n_class = r.u32();
  m.d = r.u32();
  const auto cells = sat_mul(m.n_class, m.d);
  expect_payload(r, sat_mul(sat_add(sat_mul(cells, 3), m.n_class), 4));
  m.mu = r.f32s(cells);
  m.sigma2 = r.f32s(cells);
  m.log_prior = r.f32s(m.n_class);
  m.log_norm = r.f32s(cells);
  return m;
}

inline void write_knn(Writer& w, const KnnModel& m) {
  w.count(m.k);
  w.count(m.n_class);
  w.count(m.train.n_samples);
  w.count(m.train.d);
  w.f32s(m.train.features);
  for (auto l : *m.train.labels) w.u32(l);
}

inline KnnModel read_knn(Reader& r) {
  KnnModel m;
  m.k = r.u32();
  m.n_class = r.u32();
  m.train.n_samples = r.u32();
  m.train.d = r.u32();
  m.train.n_class = m.n_class;
  const auto cells = sat_mul(m.train.n_samples, m.train.d);
  expect_payload(r, sat_mul(sat_add(cells, m.train.n_samples), 4));
  m.train.features = r.f32s(cells);
  require(m.n_class <= 65536, Errc::InvariantViolation, "knn.n_class");
  std::vector<std::uint16_t> labels(m.train.n_samples);
  for (auto& l : labels) {
    const auto v = r.u32();
    require(v < m.n_class, Errc::InvariantViolation, "knn.label_range");
    l = static_cast<std::uint16_t>(v);
  }
  m.train.labels = std::move(labels);
  return m;
}

inline void write_kmeans(Writer& w, const KMeansState& m) {
  w.count(m.k);
  w.count(m.d);
  w.count(m.max_iters);
  w.count(m.assignments.size());
  w.f32(m.epsilon);
  w.f32s(m.centroids);
  for (auto a : m.assignments) w.u32(a);
}

inline KMeansState read_kmeans(Reader& r) {
  KMeansState m;
  m.k = r.u32();
  m.d = r.u32();
  m.max_iters = r.u32();
  const std::size_t n_assign = r.u32();
  const auto cells = sat_mul(m.k, m.d);
  expect_payload(r, sat_mul(sat_add(sat_add(cells, n_assign), 1), 4));
  m.epsilon = r.f32();
  m.centroids = r.f32s(cells);
  m.assignments.resize(n_assign);
  for (auto& a : m.assignments) a = r.u32();
  return m;
}

inline void write_rf(Writer& w, const RfModel& m) {
  std::size_t total = 0;
  for (const auto& t : m.trees) total += t.size();
  w.count(m.n_trees());
  w.count(m.n_class);
  w.count(m.d);
  w.count(total);
  for (const auto& t : m.trees) w.count(t.size());
  for (const auto& t : m.trees) {
    w.i32s(t.feature);
    w.f32s(t.threshold);
    w.i32s(t.left);
    w.i32s(t.right);
  }
}

inline RfModel read_rf(Reader& r) {
  RfModel m;
  const std::size_t n_trees = r.u32();
  m.n_class = r.u32();
  m.d = r.u32();
  const std::uint64_t total = r.u32();
  expect_payload(r, sat_add(sat_mul(n_trees, 4), sat_mul(total, 16)));
  std::vector<std::size_t> sizes(n_trees);
  std::uint64_t sum = 0;
  for (auto& n : sizes) {
    n = r.u32();
    sum += n;
  }
  if (sum != total) fail(Errc::LengthMismatch, "tree sizes do not sum to node total");
  m.trees.resize(n_trees);
  for (std::size_t i = 0; i < n_trees; ++i) {
    auto& t = m.trees[i];
    t.feature = r.i32s(sizes[i]);
    t.threshold = r.f32s(sizes[i]);
    t.left = r.i32s(sizes[i]);
    t.right = r.i32s(sizes[i]);
  }
  return m;
}

}  // namespace io_detail

inline Bytes save_model(const Model& model) {
  io_detail::Writer w;
  w.magic("NML1");
  w.u8(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(kernel_of(model)));
  std::visit(
      [&w](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) io_detail::write_linear(w, m);
        else if constexpr (std::is_same_v<T, GnbModel>) io_detail::write_gnb(w, m);
        else if constexpr (std::is_same_v<T, KnnModel>) io_detail::write_knn(w, m);
        else if constexpr (std::is_same_v<T, KMeansState>) io_detail::write_kmeans(w, m);
        else io_detail::write_rf(w, m);
      },
      model);
  return w.take();
}

/// Parses and fully validates an "NML1" model.
inline Model load_model(std::span<const std::uint8_t> bytes) {
  io_detail::Reader r(bytes);
  r.magic("NML1");
  io_detail::check_version(r);
  const auto kernel = r.u8();
  Model model = [&]() -> Model {
    switch (kernel) {
      case 0: return io_detail::read_linear(r, LinearKind::LR);
      case 1: return io_detail::read_linear(r, LinearKind::SVM);
      case 2: return io_detail::read_gnb(r);
      case 3: return io_detail::read_knn(r);
      case 4: return io_detail::read_kmeans(r);
      case 5: return io_detail::read_rf(r);
      default: fail(Errc::InvariantViolation, "kernel_id");
    }
  }();
  r.finish();
  validate(model);
  return model;
}

inline Bytes save_dataset(const Dataset& ds) {
  io_detail::Writer w;
  w.magic("NDS1");
  w.u8(kFormatVersion);
  w.u8(ds.has_labels() ? 1 : 0);
  w.count(ds.n_samples);
  w.count(ds.d);
  w.count(ds.n_class);
  w.f32s(ds.features);
  if (ds.labels)
    for (auto l : *ds.labels) w.u16(l);
  return w.take();
}

inline Dataset load_dataset(std::span<const std::uint8_t> bytes) {
  io_detail::Reader r(bytes);
  r.magic("NDS1");
  io_detail::check_version(r);
  const auto has_labels = r.u8();
  require(has_labels <= 1, Errc::InvariantViolation, "dataset.has_labels");
  Dataset ds;
  ds.n_samples = r.u32();
  ds.d = r.u32();
  ds.n_class = r.u32();
  const auto cells = io_detail::sat_mul(ds.n_samples, ds.d);
  io_detail::expect_payload(
      r, io_detail::sat_add(io_detail::sat_mul(cells, 4), has_labels ? io_detail::sat_mul(ds.n_samples, 2) : 0));
  ds.features = r.f32s(cells);
  if (has_labels) {
    std::vector<std::uint16_t> labels(ds.n_samples);
    for (auto& l : labels) l = r.u16();
    ds.labels = std::move(labels);
  }
  r.finish();
  ds.validate();
  return ds;
}

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline Model load_model_file(const std::filesystem::path& path) { return load_model(read_file(path)); }
inline Dataset load_dataset_file(const std::filesystem::path& path) { return load_dataset(read_file(path)); }

}  // namespace nml
