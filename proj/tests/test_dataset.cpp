#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "rulex/dataset.hpp"
#include "rulex/errors.hpp"

using namespace rulex;

namespace {

int round_bit(double x) { return x >= 0.5 ? 1 : 0; }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("gen_xor produces the declared shape and label rule") {
  auto ds = gen_xor(1000, 10, 7);
  CHECK(ds.size() == 1000);
  CHECK(ds.feature_count() == 10);
  CHECK(ds.feature_names[0] == "input_feat_0");
  for (const auto& inst : ds.instances) {
    CHECK(inst.features.size() == 10);
    CHECK((inst.label == 0 || inst.label == 1));
    CHECK(inst.label ==
          (round_bit(inst.features[0]) ^ round_bit(inst.features[1])));
  }
}

TEST_CASE("gen_xor class balance near one half") {
  auto ds = gen_xor(10000, 10, 3);
  std::size_t ones = 0;
  for (const auto& inst : ds.instances) ones += inst.label;
  double frac = static_cast<double>(ones) / 10000.0;
  CHECK(frac >= 0.47);
  CHECK(frac <= 0.53);
}

TEST_CASE("gen_xor rejects too few features") {
  CHECK_THROWS_AS(gen_xor(10, 1, 0), validation_error);
}

TEST_CASE("gen_modified_xor three-feature label rule") {
  auto ds = gen_modified_xor(10000, 10, 5);
  std::size_t ones = 0;
  for (const auto& inst : ds.instances) {
    int expect = (round_bit(inst.features[0]) ^ round_bit(inst.features[1])) ^
                 round_bit(inst.features[2]);
    CHECK(inst.label == expect);
    ones += inst.label;
  }
  double frac = static_cast<double>(ones) / 10000.0;
  CHECK(frac >= 0.47);
  CHECK(frac <= 0.53);
  CHECK_THROWS_AS(gen_modified_xor(10, 2, 0), validation_error);
}

TEST_CASE("generators are reproducible") {
  CHECK(gen_xor(100, 4, 42) == gen_xor(100, 4, 42));
  CHECK(gen_modified_xor(100, 4, 42) == gen_modified_xor(100, 4, 42));
}

TEST_CASE("csv round trip is exact") {
  auto ds = gen_xor(200, 5, 11);
  auto path = temp_file("rulex_roundtrip.csv");
  save_csv(ds, path.string());
  auto loaded = load_csv(path.string());
  CHECK(loaded == ds);
  std::filesystem::remove(path);
}

TEST_CASE("csv header and row parsing") {
  auto path = temp_file("rulex_small.csv");
  {
    std::ofstream out(path);
    out << "feat_0,feat_1,xor\n0,0,0\n";
  }
  auto ds = load_csv(path.string());
  REQUIRE(ds.size() == 1);
  CHECK(ds.feature_names == std::vector<std::string>{"feat_0", "feat_1"});
  CHECK(ds.instances[0].features == std::vector<double>{0.0, 0.0});
  CHECK(ds.instances[0].label == 0);
  std::filesystem::remove(path);
}

TEST_CASE("csv ragged row reported with its row number") {
  auto path = temp_file("rulex_ragged.csv");
  {
    std::ofstream out(path);
    out << "a,b,c,label\n1,2,3,0\n1,2,0\n";
  }
  CHECK_THROWS_WITH_AS(load_csv(path.string()),
                       doctest::Contains("row 3"), parse_error);
  std::filesystem::remove(path);
}

TEST_CASE("csv non-numeric cells rejected") {
  auto path = temp_file("rulex_badcell.csv");
  {
    std::ofstream out(path);
    out << "a,label\nxyz,0\n";
  }
  CHECK_THROWS_AS(load_csv(path.string()), parse_error);
  {
    std::ofstream out(path);
    out << "a,label\n1.5,zero\n";
  }
  CHECK_THROWS_AS(load_csv(path.string()), parse_error);
  std::filesystem::remove(path);
}

TEST_CASE("stratified kfold partitions with balanced strata") {
  auto ds = gen_xor(1000, 3, 9);
  auto folds = stratified_kfold(ds, 5, 17);
  REQUIRE(folds.size() == 5);

  std::size_t class1 = 0;
  for (const auto& inst : ds.instances) class1 += inst.label;
  double parent_frac = static_cast<double>(class1) / 1000.0;

  std::multiset<std::vector<double>> seen;
  for (const auto& fold : folds) {
    CHECK(fold.test.size() == 200);
    CHECK(fold.train.size() == 800);
    std::size_t fold_class1 = 0;
    for (const auto& inst : fold.test.instances) {
      fold_class1 += inst.label;
      seen.insert(inst.features);
    }
    // per-class proportion within +-1 instance of the parent's
    double expected = parent_frac * 200.0;
    CHECK(std::abs(static_cast<double>(fold_class1) - expected) <= 1.0);
  }
  CHECK(seen.size() == 1000);
  std::multiset<std::vector<double>> parent;
  for (const auto& inst : ds.instances) parent.insert(inst.features);
  CHECK(seen == parent);
}

TEST_CASE("stratified kfold deterministic per seed") {
  auto ds = gen_xor(100, 3, 1);
  auto a = stratified_kfold(ds, 5, 7);
  auto b = stratified_kfold(ds, 5, 7);
  for (std::size_t f = 0; f < a.size(); ++f) {
    CHECK(a[f].train == b[f].train);
    CHECK(a[f].test == b[f].test);
  }
}

TEST_CASE("stratified kfold rejects classes smaller than k") {
  Dataset ds;
  ds.feature_names = {"x"};
  ds.class_count = 2;
  for (int i = 0; i < 10; ++i) ds.instances.push_back({{0.1 * i}, 0});
  ds.instances.push_back({{0.99}, 1});
  CHECK_THROWS_AS(stratified_kfold(ds, 5, 0), validation_error);
}
