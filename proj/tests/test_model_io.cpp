#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "support.hpp"

using namespace nml;
using nml::test::bits;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no nml::Error thrown";
  return Errc::BadArgs;
}

void put_u32(Bytes& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

Bytes header(const char* magic, std::uint8_t version, std::uint8_t tag) {
  Bytes b(magic, magic + 4);
  b.push_back(version);
  b.push_back(tag);
  return b;
}

class RandomModels {
 public:
  explicit RandomModels(std::uint64_t seed) : rng_(seed) {}

  std::size_t pick(std::size_t lo, std::size_t hi) { return lo + rng_() % (hi - lo + 1); }
  // Any finite or infinite pattern, NaNs included, to exercise raw storage.
  float any_float() { return std::bit_cast<float>(static_cast<std::uint32_t>(rng_())); }
  float positive() { return std::uniform_real_distribution<float>(1e-6f, 100.0f)(rng_); }

  LinearModel linear() {
    LinearModel m;
    m.kind = rng_() % 2 ? LinearKind::LR : LinearKind::SVM;
    m.n_class = pick(2, 12);
    m.d = pick(1, 40);
    for (std::size_t i = 0; i < m.n_class * m.d; ++i) m.weights.push_back(any_float());
    for (std::size_t i = 0; i < m.n_class; ++i) m.bias.push_back(any_float());
    return m;
  }

  GnbModel gnb() {
    GnbModel m;
    m.n_class = pick(1, 6);
    m.d = pick(1, 20);
    for (std::size_t i = 0; i < m.n_class * m.d; ++i) {
      m.mu.push_back(any_float());
      m.sigma2.push_back(positive());
      m.log_norm.push_back(any_float());
    }
    for (std::size_t i = 0; i < m.n_class; ++i) m.log_prior.push_back(any_float());
    return m;
  }

  Dataset dataset(bool labelled) {
    Dataset ds;
    ds.n_samples = pick(1, 30);
    ds.d = pick(1, 10);
    ds.n_class = pick(1, 5);
    for (std::size_t i = 0; i < ds.n_samples * ds.d; ++i) ds.features.push_back(any_float());
    if (labelled) {
      std::vector<std::uint16_t> l(ds.n_samples);
      for (auto& x : l) x = static_cast<std::uint16_t>(rng_() % ds.n_class);
      ds.labels = l;
    }
    return ds;
  }

  KnnModel knn() {
    KnnModel m;
    m.train = dataset(true);
    m.n_class = m.train.n_class;
    m.k = pick(1, m.train.n_samples);
    return m;
  }

  KMeansState kmeans() {
    KMeansState s;
    s.k = pick(1, 5);
    s.d = pick(1, 6);
    s.epsilon = positive();
    s.max_iters = pick(1, 500);
    for (std::size_t i = 0; i < s.k * s.d; ++i) s.centroids.push_back(any_float());
    s.assignments.resize(pick(0, 20));
    for (auto& a : s.assignments) a = static_cast<std::uint32_t>(rng_() % s.k);
    return s;
  }

  // Random binary trees built top-down so every path terminates.
  DecisionTree tree(std::size_t d, std::size_t n_class) {
    DecisionTree t;
    grow(t, d, n_class, 0);
    return t;
  }

  RfModel forest() {
    RfModel m;
    m.n_class = pick(1, 5);
    m.d = pick(1, 8);
    const std::size_t n = pick(1, 6);
    for (std::size_t i = 0; i < n; ++i) m.trees.push_back(tree(m.d, m.n_class));
    return m;
  }

 private:
  std::int32_t grow(DecisionTree& t, std::size_t d, std::size_t n_class, int depth) {
    const auto node = static_cast<std::int32_t>(t.size());
    t.feature.push_back(0);
    t.threshold.push_back(any_float());
    t.left.push_back(-1);
    t.right.push_back(-1);
    if (depth >= 4 || rng_() % 3 == 0) {
      t.feature[node] = DecisionTree::leaf(rng_() % n_class);
      return node;
    }
    t.feature[node] = static_cast<std::int32_t>(rng_() % d);
    const auto l = grow(t, d, n_class, depth + 1);
    const auto r = grow(t, d, n_class, depth + 1);
    t.left[node] = l;
    t.right[node] = r;
    return node;
  }

  std::mt19937_64 rng_;
};

template <class T>
bool same_floats(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

bool same_dataset(const Dataset& a, const Dataset& b) {
  return a.n_samples == b.n_samples && a.d == b.d && a.n_class == b.n_class &&
         same_floats<float>(a.features, b.features) && a.labels == b.labels;
}

bool same_tree(const DecisionTree& a, const DecisionTree& b) {
  return a.feature == b.feature && same_floats<float>(a.threshold, b.threshold) && a.left == b.left &&
         a.right == b.right;
}

RfModel stump_forest() {
  RfModel m;
  m.n_class = 2;
  m.d = 1;
  DecisionTree t;
  t.feature = {0, DecisionTree::leaf(0), DecisionTree::leaf(1)};
  t.threshold = {0.5f, 0.0f, 0.0f};
  t.left = {1, -1, -1};
  t.right = {2, -1, -1};
  m.trees.push_back(t);
  return m;
}

}  // namespace

TEST(LoadModel, SvmHeaderGivesLinearModel) {
  Bytes b = header("NML1", 1, 1);
  put_u32(b, 10);
  put_u32(b, 784);
  for (int i = 0; i < 10 * 784 + 10; ++i) put_u32(b, bits(0.25f * static_cast<float>(i % 7)));
  const auto m = std::get<LinearModel>(load_model(b));
  EXPECT_EQ(m.kind, LinearKind::SVM);
  EXPECT_EQ(m.n_class, 10u);
  EXPECT_EQ(m.d, 784u);
  EXPECT_EQ(m.weights.size(), 7840u);
  EXPECT_EQ(m.bias.size(), 10u);
  EXPECT_EQ(m.weights[3], 0.75f);
}

TEST(LoadModel, TruncatedPayloadIsLengthMismatch) {
  Bytes b = save_model(stump_forest());
  b.pop_back();
  EXPECT_EQ(code_of([&] { load_model(b); }), Errc::LengthMismatch);
  Bytes t = header("NML1", 1, 0);
  put_u32(t, 2);
  EXPECT_EQ(code_of([&] { load_model(t); }), Errc::LengthMismatch);
  EXPECT_EQ(code_of([&] { load_model(Bytes{'N', 'M', 'L', '1', 1}); }), Errc::LengthMismatch);
}

TEST(LoadModel, TrailingBytesAreLengthMismatch) {
  Bytes b = save_model(stump_forest());
  b.push_back(0);
  EXPECT_EQ(code_of([&] { load_model(b); }), Errc::LengthMismatch);
}

TEST(LoadModel, BadMagic) {
  Bytes b = save_model(stump_forest());
  std::memcpy(b.data(), "XXXX", 4);
  EXPECT_EQ(code_of([&] { load_model(b); }), Errc::BadMagic);
  EXPECT_EQ(code_of([&] { load_dataset(b); }), Errc::BadMagic);
}

TEST(LoadModel, UnsupportedVersion) {
  Bytes b = save_model(stump_forest());
  b[4] = 2;
  EXPECT_EQ(code_of([&] { load_model(b); }), Errc::UnsupportedVersion);
}

TEST(LoadModel, UnknownKernelId) {
  Bytes b = save_model(stump_forest());
  b[5] = 9;
  EXPECT_EQ(code_of([&] { load_model(b); }), Errc::InvariantViolation);
}

TEST(LoadModel, InvariantViolationsAreTyped) {
  LinearModel one_class;
  one_class.n_class = 1;
  one_class.d = 1;
  one_class.weights = {1.0f};
  one_class.bias = {0.0f};
  Bytes b = header("NML1", 1, 0);
  put_u32(b, 1);
  put_u32(b, 1);
  put_u32(b, bits(1.0f));
  put_u32(b, bits(0.0f));
  EXPECT_EQ(code_of([&] { load_model(b); }), Errc::InvariantViolation);

  GnbModel g = RandomModels(1).gnb();
  g.sigma2[0] = 0.0f;
  Bytes gb = save_model(g);
  EXPECT_EQ(code_of([&] { load_model(gb); }), Errc::InvariantViolation);

  KnnModel k = RandomModels(2).knn();
  k.k = k.train.n_samples + 1;
  Bytes kb = save_model(k);
  EXPECT_EQ(code_of([&] { load_model(kb); }), Errc::InvariantViolation);

  KMeansState s = RandomModels(3).kmeans();
  s.epsilon = 0.0f;
  Bytes sb = save_model(s);
  EXPECT_EQ(code_of([&] { load_model(sb); }), Errc::InvariantViolation);
}

TEST(LoadModel, RejectsTreeCycles) {
  RfModel m = stump_forest();
  m.trees[0].feature[1] = 0;  // node 1 becomes internal and points back at the root
  m.trees[0].left[1] = 0;
  m.trees[0].right[1] = 2;
  Bytes b = save_model(m);
  try {
    load_model(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvariantViolation);
    EXPECT_EQ(e.detail(), "rf.cycle");
  }
}

TEST(LoadModel, RejectsSelfLoop) {
  RfModel m = stump_forest();
  m.trees[0].left[0] = 0;
  Bytes b = save_model(m);
  EXPECT_EQ(code_of([&] { load_model(b); }), Errc::InvariantViolation);
}

TEST(LoadModel, RejectsOutOfRangeChildren) {
  for (std::int32_t bad : {3, 100, -1, -7}) {
    RfModel m = stump_forest();
    m.trees[0].right[0] = bad;
    Bytes b = save_model(m);
    try {
      load_model(b);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvariantViolation);
      EXPECT_EQ(e.detail(), "rf.child_index");
    }
  }
}

TEST(LoadModel, RejectsBadFeatureAndLeafClass) {
  RfModel m = stump_forest();
  m.trees[0].feature[0] = 1;  // d = 1
  Bytes b = save_model(m);
  EXPECT_EQ(code_of([&] { load_model(b); }), Errc::InvariantViolation);
  RfModel n = stump_forest();
  n.trees[0].feature[2] = DecisionTree::leaf(2);  // n_class = 2
  Bytes nb = save_model(n);
  EXPECT_EQ(code_of([&] { load_model(nb); }), Errc::InvariantViolation);
}

TEST(LoadModel, RejectsRandomCorruptForests) {
  // Random child rewiring either yields a valid tree or a typed rejection.
  RandomModels gen(4);
  std::mt19937_64 rng(5);
  int rejected = 0;
  for (int i = 0; i < 2000; ++i) {
    RfModel m = gen.forest();
    auto& t = m.trees[rng() % m.trees.size()];
    const std::size_t node = rng() % t.size();
    if (t.feature[node] < 0) t.feature[node] = 0;
    (rng() % 2 ? t.left : t.right)[node] = static_cast<std::int32_t>(rng() % (t.size() + 2)) - 1;
    const Bytes b = save_model(m);
    try {
      const auto loaded = std::get<RfModel>(load_model(b));
      for (std::size_t r = 0; r < 4; ++r) {
        std::vector<float> x(loaded.d, static_cast<float>(r) - 1.5f);
        (void)rf_infer(loaded, x, NativeBackend{});
      }
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvariantViolation);
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 0);
}

TEST(RoundTrip, EveryModelTypeIsBitExact) {
  RandomModels gen(99);
  for (int i = 0; i < 200; ++i) {
    const LinearModel lin = gen.linear();
    const auto l2 = std::get<LinearModel>(load_model(save_model(lin)));
    EXPECT_EQ(l2.kind, lin.kind);
    EXPECT_TRUE(same_floats<float>(l2.weights, lin.weights));
    EXPECT_TRUE(same_floats<float>(l2.bias, lin.bias));

    const GnbModel g = gen.gnb();
    const auto g2 = std::get<GnbModel>(load_model(save_model(g)));
    EXPECT_TRUE(same_floats<float>(g2.mu, g.mu) && same_floats<float>(g2.sigma2, g.sigma2) &&
                same_floats<float>(g2.log_prior, g.log_prior) && same_floats<float>(g2.log_norm, g.log_norm));

    const KnnModel k = gen.knn();
    const auto k2 = std::get<KnnModel>(load_model(save_model(k)));
    EXPECT_EQ(k2.k, k.k);
    EXPECT_EQ(k2.n_class, k.n_class);
    EXPECT_TRUE(same_dataset(k2.train, k.train));

    const KMeansState s = gen.kmeans();
    const auto s2 = std::get<KMeansState>(load_model(save_model(s)));
    EXPECT_EQ(s2.k, s.k);
    EXPECT_EQ(s2.max_iters, s.max_iters);
    EXPECT_EQ(bits(s2.epsilon), bits(s.epsilon));
    EXPECT_TRUE(same_floats<float>(s2.centroids, s.centroids));
    EXPECT_EQ(s2.assignments, s.assignments);

    const RfModel f = gen.forest();
    const auto f2 = std::get<RfModel>(load_model(save_model(f)));
    ASSERT_EQ(f2.trees.size(), f.trees.size());
    for (std::size_t t = 0; t < f.trees.size(); ++t) EXPECT_TRUE(same_tree(f2.trees[t], f.trees[t]));

    for (bool labelled : {false, true}) {
      const Dataset ds = gen.dataset(labelled);
      EXPECT_TRUE(same_dataset(load_dataset(save_dataset(ds)), ds));
    }
  }
}

TEST(RoundTrip, SaveIsDeterministic) {
  const auto m = RandomModels(7).forest();
  EXPECT_EQ(save_model(m), save_model(m));
}

// Byte offsets of the u32 header fields that determine payload length.
TEST(Corruption, EverySingleBitFlipOfALengthFieldIsRejected) {
  RandomModels gen(123);
  struct Case {
    Bytes bytes;
    std::vector<std::size_t> offsets;
  };
  std::vector<Case> cases;
  for (int i = 0; i < 5; ++i) {
    cases.push_back({save_model(gen.linear()), {6, 10}});
    cases.push_back({save_model(gen.gnb()), {6, 10}});
    cases.push_back({save_model(gen.knn()), {14, 18}});
    cases.push_back({save_model(gen.kmeans()), {6, 10, 18}});
    const RfModel f = gen.forest();
    std::vector<std::size_t> rf_offsets = {6, 18};
    for (std::size_t t = 0; t < f.trees.size(); ++t) rf_offsets.push_back(22 + 4 * t);
    cases.push_back({save_model(f), rf_offsets});
  }
  for (const auto& c : cases) {
    for (auto off : c.offsets)
      for (int bit = 0; bit < 32; ++bit) {
        Bytes b = c.bytes;
        b[off + bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        EXPECT_EQ(code_of([&] { load_model(b); }), Errc::LengthMismatch) << "offset " << off << " bit " << bit;
      }
  }
  for (int i = 0; i < 5; ++i) {
    const Bytes d = save_dataset(gen.dataset(true));
    for (std::size_t off : {6u, 10u})
      for (int bit = 0; bit < 32; ++bit) {
        Bytes b = d;
        b[off + bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        EXPECT_THROW(load_dataset(b), Error);
      }
  }
}

TEST(LoadDataset, ScreeningShapedHeader) {
  Bytes b = header("NDS1", 1, 1);
  put_u32(b, 1000);
  put_u32(b, 21);
  put_u32(b, 2);
  for (int i = 0; i < 1000 * 21; ++i) put_u32(b, bits(static_cast<float>(i % 2)));
  for (int i = 0; i < 1000; ++i) {
    b.push_back(static_cast<std::uint8_t>(i % 2));
    b.push_back(0);
  }
  const Dataset ds = load_dataset(b);
  EXPECT_EQ(ds.n_samples, 1000u);
  EXPECT_EQ(ds.d, 21u);
  ASSERT_TRUE(ds.labels.has_value());
  EXPECT_EQ((*ds.labels)[7], 1);
}

TEST(LoadDataset, ZeroSamplesIsInvariantViolation) {
  Bytes b = header("NDS1", 1, 0);
  put_u32(b, 0);
  put_u32(b, 4);
  put_u32(b, 2);
  EXPECT_EQ(code_of([&] { load_dataset(b); }), Errc::InvariantViolation);
}

TEST(LoadDataset, LabelOutOfRangeIsInvariantViolation) {
  Dataset ds = test::make_data(2, 1, {1.0f, 2.0f}, {0, 1}, 2);
  Bytes b = save_dataset(ds);
  b.back() = 0;
  b[b.size() - 2] = 5;
  EXPECT_EQ(code_of([&] { load_dataset(b); }), Errc::InvariantViolation);
}

TEST(LoadDataset, UnlabelledFlag) {
  const Dataset ds = load_dataset(save_dataset(test::make_data(2, 2, {1, 2, 3, 4})));
  EXPECT_FALSE(ds.labels.has_value());
}

TEST(SaveDataset, ThreeByTwoHandEncoding) {
  const Dataset ds = test::make_data(3, 2, {1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.0f}, {}, 1);
  const Bytes b = save_dataset(ds);
  const Bytes expected_header = {'N', 'D', 'S', '1', 1, 0, 3, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0};
  const Bytes expected_payload = {0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0x40, 0x00, 0x00, 0x40, 0x40,
                                  0x00, 0x00, 0x80, 0x40, 0x00, 0x00, 0xA0, 0x40, 0x00, 0x00, 0xC0, 0x40};
  ASSERT_EQ(b.size(), expected_header.size() + 24);
  EXPECT_TRUE(std::equal(expected_header.begin(), expected_header.end(), b.begin()));
  EXPECT_TRUE(std::equal(expected_payload.begin(), expected_payload.end(), b.begin() + 18));
}

TEST(ModelFiles, MissingFileIsAnError) {
  EXPECT_THROW(load_model_file("/nonexistent/model.nml"), std::runtime_error);
}
