#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "mcboost/data.hpp"
#include "mcboost/error.hpp"
#include "mcboost/rng.hpp"
#include "support.hpp"

using namespace mcboost;
using mcboost::testing::data_file;
using mcboost::testing::make_dataset;

namespace {

Dataset from_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

Dataset from_libsvm(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

Dataset balanced(std::vector<std::size_t> counts) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t c = 0; c < counts.size(); ++c)
    for (std::size_t k = 0; k < counts[c]; ++k) {
      rows.push_back({static_cast<double>(rows.size())});
      labels.push_back(static_cast<int>(c) + 1);
    }
  return make_dataset(rows, labels, static_cast<int>(counts.size()));
}

}  // namespace

TEST_CASE("csv parsing") {
  const Dataset d = from_csv("1,2,1\n3,4,2\n");
  CHECK(d.size() == 2);
  CHECK(d.dimension() == 2);
  CHECK(d.num_classes() == 2);
  CHECK(d.label(0) == 1);
  CHECK(d.label(1) == 2);
  CHECK(d.features()(1, 0) == 3.0);

  const Dataset h = from_csv("a,b,class\n0.5,1,7\n2,3,4\n");
  CHECK(h.size() == 2);
  CHECK(h.label(0) == 2);  // 7 sorts after 4
  CHECK(h.original_labels() == std::vector<long long>{4, 7});
}

TEST_CASE("libsvm parsing fills missing entries") {
  const Dataset d = from_libsvm("3 1:0.5 3:1.0\n1 2:2\n");
  CHECK(d.dimension() == 3);
  CHECK(d.features()(0, 0) == 0.5);
  CHECK(d.features()(0, 1) == 0.0);
  CHECK(d.features()(0, 2) == 1.0);
  CHECK(d.original_labels()[static_cast<std::size_t>(d.label(0) - 1)] == 3);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(from_csv("1,2,1\n3,1\n"), DataError);
  CHECK_THROWS_AS(from_csv("1,2,1\n3,4,1\n"), DataError);  // one class
  CHECK_THROWS_AS(from_csv("1,nan,1\n3,4,2\n"), DataError);
  CHECK_THROWS_AS(from_libsvm("1 0:3\n2 1:1\n"), DataError);
  try {
    from_csv("1,2,1\n3,4,2\n5,x,1\n");
    FAIL("expected a parse error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find('3') != std::string::npos);
  }
  CHECK_THROWS_AS(load_dataset(data_file("does_not_exist.csv"), DataFormat::Csv), DataError);
}

TEST_CASE("bundled datasets have the expected shape") {
  const Dataset iris = load_dataset(data_file("iris.csv"), DataFormat::Csv);
  CHECK(iris.size() == 150);
  CHECK(iris.dimension() == 4);
  CHECK(iris.num_classes() == 3);
  const Dataset wine = load_dataset(data_file("wine.csv"), DataFormat::Csv);
  CHECK(wine.size() == 178);
  CHECK(wine.dimension() == 13);
  CHECK(wine.num_classes() == 3);
  const Dataset glass = load_dataset(data_file("glass.csv"), DataFormat::Csv);
  CHECK(glass.size() == 214);
  CHECK(glass.dimension() == 9);
  CHECK(glass.num_classes() == 6);
  CHECK(load_dataset(data_file("iris.csv"), DataFormat::Csv) == iris);
}

TEST_CASE("stratified split on a 5/5 set") {
  const Dataset d = balanced({5, 5});
  // each class keeps floor or ceil of 3.5, so 3 or 4
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Split s = stratified_split(d, {0.7, seed});
    CHECK((s.train.size() == 7 || s.train.size() == 8));
    for (std::size_t n : s.train.class_counts()) CHECK((n == 3 || n == 4));
  }
}

TEST_CASE("stratified split on iris is 35/35/35 and a partition") {
  const Dataset iris = load_dataset(data_file("iris.csv"), DataFormat::Csv);
  const Split s = stratified_split(iris, {0.7, 99});
  CHECK(s.train.class_counts() == std::vector<std::size_t>{35, 35, 35});
  CHECK(s.test.class_counts() == std::vector<std::size_t>{15, 15, 15});
  std::vector<std::size_t> all = s.train_indices;
  all.insert(all.end(), s.test_indices.begin(), s.test_indices.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(150);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(all == expect);
  for (std::size_t k = 0; k < s.train_indices.size(); ++k)
    CHECK(s.train.label(k) == iris.label(s.train_indices[k]));

  const Split again = stratified_split(iris, {0.7, 99});
  CHECK(again.train_indices == s.train_indices);
  CHECK(stratified_split(iris, {0.7, 100}).train_indices != s.train_indices);
}

TEST_CASE("per-class train counts stay within one example of the fraction") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t classes = 2 + rng.below(5);
    std::vector<std::size_t> counts(classes);
    for (auto& n : counts) n = 2 + rng.below(30);
    const double fraction = 0.1 + 0.8 * rng.uniform();
    const auto got = stratified_train_counts(counts, fraction);
    std::size_t total = 0, train = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      CHECK(got[c] >= 1);
      CHECK(got[c] < counts[c]);
      CHECK(std::abs(static_cast<double>(got[c]) - fraction * static_cast<double>(counts[c])) <= 1.0);
      total += counts[c];
      train += got[c];
    }
    CHECK(std::abs(static_cast<double>(train) - fraction * static_cast<double>(total)) <= static_cast<double>(classes));
  }
  CHECK_THROWS_AS(stratified_split(balanced({5, 1}), {0.7, 1}), DataError);
}

TEST_CASE("k-fold assignment") {
  const auto folds = kfold_indices(balanced({5, 5}), 5, 3);
  REQUIRE(folds.size() == 5);
  for (const auto& f : folds) {
    REQUIRE(f.size() == 2);
    CHECK(f[0] / 5 != f[1] / 5);  // one per class
  }

  // 7 members dealt round-robin over 5 folds
  const auto seven = kfold_indices(balanced({7, 5}), 5, 11);
  std::multiset<std::size_t> sizes;
  for (const auto& f : seven) sizes.insert(static_cast<std::size_t>(std::count_if(f.begin(), f.end(), [](std::size_t i) { return i < 7; })));
  CHECK(sizes == std::multiset<std::size_t>{1, 1, 1, 2, 2});

  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> counts(2 + rng.below(3));
    for (auto& n : counts) n = 1 + rng.below(12);
    const Dataset d = balanced(counts);
    const std::size_t k = 2 + rng.below(std::min<std::size_t>(d.size() - 1, 6));
    const auto fs = kfold_indices(d, k, rng.next());
    std::vector<std::size_t> all;
    for (const auto& f : fs) all.insert(all.end(), f.begin(), f.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(d.size());
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(all == expect);
    for (int c = 1; c <= d.num_classes(); ++c) {
      std::size_t lo = d.size(), hi = 0;
      for (const auto& f : fs) {
        const auto n = static_cast<std::size_t>(std::count_if(f.begin(), f.end(), [&](std::size_t i) { return d.label(i) == c; }));
        lo = std::min(lo, n);
        hi = std::max(hi, n);
      }
      CHECK(hi - lo <= 1);
    }
  }
  CHECK_THROWS_AS(kfold_indices(balanced({2, 2}), 5, 1), DataError);
  CHECK_THROWS_AS(kfold_indices(balanced({2, 2}), 1, 1), ConfigError);
}
