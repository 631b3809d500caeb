#include <gtest/gtest.h>

#include <fstream>
#include <numbers>

#include "fixtures.hpp"
#include "support.hpp"

using namespace nml;

namespace {

Bytes read_bytes(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return Bytes(std::istreambuf_iterator<char>(f), {});
}

double accuracy(const std::vector<std::size_t>& pred, const Dataset& data) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == (*data.labels)[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace

// The committed binaries are what the rest of the suite reads; they must
// be reproducible from the generator.
TEST(Fixtures, GeneratorReproducesCommittedFiles) {
  const auto set = fixtures::build_all(0);
  for (const auto& [name, model] : set.models) EXPECT_EQ(save_model(model), read_bytes(test::fixture(name))) << name;
  for (const auto& [name, data] : set.datasets) EXPECT_EQ(save_dataset(data), read_bytes(test::fixture(name))) << name;
}

TEST(Fixtures, AllLoadAndValidate) {
  for (const char* name : {"digits_lr.nml", "digits_svm.nml", "digits_gnb.nml", "digits_rf.nml", "mnist_lr.nml",
                           "mnist_svm.nml", "mnist_gnb.nml", "asd_knn.nml", "asd_kmeans.nml"})
    EXPECT_NO_THROW(validate(test::load_fixture_model(name))) << name;
  for (const char* name : {"digits_test.nds", "mnist_test.nds", "asd_train.nds", "asd_query.nds"})
    EXPECT_TRUE(test::load_fixture_data(name).labels.has_value()) << name;
}

TEST(Fixtures, GnbLogNormMatchesDensityConstant) {
  for (const char* name : {"digits_gnb.nml", "mnist_gnb.nml"}) {
    const auto m = test::load_fixture_as<GnbModel>(name);
    for (std::size_t i = 0; i < m.mu.size(); ++i) {
      const double s2 = m.sigma2[i];
      const double want = 1.0 / std::sqrt(2.0 * std::numbers::pi * s2);
      ASSERT_NEAR(std::exp(static_cast<double>(m.log_norm[i])) / want, 1.0, 1e-6) << name << " " << i;
    }
  }
}

TEST(Fixtures, ClassifiersAreAccurate) {
  const std::pair<const char*, const char*> pairs[] = {
      {"digits_lr.nml", "digits_test.nds"}, {"digits_svm.nml", "digits_test.nds"}, {"digits_gnb.nml", "digits_test.nds"},
      {"digits_rf.nml", "digits_test.nds"}, {"mnist_lr.nml", "mnist_test.nds"},    {"mnist_svm.nml", "mnist_test.nds"},
      {"mnist_gnb.nml", "mnist_test.nds"},  {"asd_knn.nml", "asd_query.nds"}};
  for (const auto& [model, data] : pairs) {
    const Dataset ds = test::load_fixture_data(data);
    const auto pred = predict_sequential<NativeBackend>(test::load_fixture_model(model), ds);
    EXPECT_GE(accuracy(pred, ds), 0.8) << model;
  }
}

TEST(Fixtures, RngIsReproducible) {
  fixtures::Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
  fixtures::Rng c(5);
  for (int i = 0; i < 1000; ++i) {
    const auto v = c.below(7);
    ASSERT_LT(v, 7u);
  }
}
