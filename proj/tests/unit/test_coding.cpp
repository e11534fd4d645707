#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>

#include "mcboost/coding.hpp"
#include "mcboost/error.hpp"

using namespace mcboost;

namespace {

// independent pairwise Hamming scan
int brute_distance(const CodingMatrix& m) {
  int best = 1 << 30;
  for (int a = 0; a < m.classes(); ++a)
    for (int b = 0; b < m.classes(); ++b) {
      if (a == b) continue;
      int d = 0;
      for (int l = 0; l < m.length(); ++l) d += m(a, l) != m(b, l);
      best = std::min(best, d);
    }
  return best;
}

bool valid_code(const CodingMatrix& m) {
  for (int c = 0; c < m.classes(); ++c)
    for (int l = 0; l < m.length(); ++l)
      if (m(c, l) != 1 && m(c, l) != -1) return false;
  return brute_distance(m) > 0;
}

}  // namespace

TEST_CASE("one-vs-all") {
  const CodingMatrix two = one_vs_all(2);
  CHECK(two == CodingMatrix({{1, -1}, {-1, 1}}));
  const CodingMatrix three = one_vs_all(3);
  CHECK(three == CodingMatrix({{1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}));
  for (int c = 2; c <= 9; ++c) {
    CHECK(brute_distance(one_vs_all(c)) == 2);
    CHECK(min_row_distance(one_vs_all(c)) == 2);
  }
  CHECK_THROWS_AS(one_vs_all(1), ConfigError);
}

TEST_CASE("exhaustive codes") {
  CHECK(exhaustive_ecoc(3) == CodingMatrix({{1, 1, 1}, {-1, -1, 1}, {-1, 1, -1}}));
  CHECK(min_row_distance(exhaustive_ecoc(3)) == 2);
  const CodingMatrix four({{1, 1, 1, 1, 1, 1, 1},
                           {-1, -1, -1, -1, 1, 1, 1},
                           {-1, -1, 1, 1, -1, -1, 1},
                           {-1, 1, -1, 1, -1, 1, -1}});
  CHECK(exhaustive_ecoc(4) == four);
  CHECK(brute_distance(four) == 4);
  for (int c = 3; c <= 7; ++c) {
    const CodingMatrix m = exhaustive_ecoc(c);
    CHECK(m.length() == (1 << (c - 1)) - 1);
    CHECK(valid_code(m));
    CHECK(m.invalid_column_count() == 0);
    CHECK(min_row_distance(m) == brute_distance(m));
  }
  CHECK_THROWS_AS(exhaustive_ecoc(2), ConfigError);
  CHECK_THROWS_AS(exhaustive_ecoc(8), ConfigError);
}

TEST_CASE("min row distance") {
  CHECK(min_row_distance(one_vs_all(4)) == 2);
  CHECK(min_row_distance(CodingMatrix({{1, -1, 1}, {1, -1, 1}, {-1, -1, 1}})) == 0);
}

TEST_CASE("random dense codes") {
  const CodingMatrix tiny = random_dense_code(2, 1, 4);
  CHECK((tiny == CodingMatrix(std::vector<std::vector<int>>{{1}, {-1}}) || tiny == CodingMatrix(std::vector<std::vector<int>>{{-1}, {1}})));
  CHECK(random_dense_code(5, 10, 77) == random_dense_code(5, 10, 77));
  CHECK_THROWS_AS(random_dense_code(5, 2, 1), ConfigError);

  // rebuild the candidate pool and compare against its median distance
  const std::uint64_t seed = 31337;
  const CodingMatrix chosen = random_dense_code(5, 10, seed);
  Rng rng(seed);
  std::vector<int> pool;
  for (int k = 0; k < kRandomCodeCandidates; ++k) pool.push_back(brute_distance(draw_code_candidate(5, 10, rng)));
  std::sort(pool.begin(), pool.end());
  CHECK(brute_distance(chosen) >= pool[pool.size() / 2]);
  CHECK(brute_distance(chosen) == pool.back());
}

TEST_CASE("default code choice") {
  CHECK(default_code(2, 1) == one_vs_all(2));
  CHECK(default_code(6, 1) == exhaustive_ecoc(6));
  const CodingMatrix big = default_code(10, 3);
  CHECK(big.length() == static_cast<int>(std::ceil(10.0 * std::log2(10.0))));
  CHECK(default_code(6, 1, 12).length() == 12);
}

TEST_CASE("column stream") {
  ColumnStream two(2, 9);
  for (int k = 0; k < 100; ++k) {
    const auto col = two.next_column();
    CHECK(((col == std::vector<int>{1, -1}) || (col == std::vector<int>{-1, 1})));
  }

  ColumnStream a(5, 42), b(5, 42);
  for (int k = 0; k < 50; ++k) CHECK(a.next_column() == b.next_column());

  // C = 3 has 6 valid columns
  ColumnStream s(3, 2024);
  std::map<std::vector<int>, int> counts;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) ++counts[s.next_column()];
  REQUIRE(counts.size() == 6);
  const double p = 1.0 / 6.0;
  const double expect = draws * p;
  const double sigma = std::sqrt(draws * p * (1.0 - p));
  double chi2 = 0.0;
  for (const auto& [col, n] : counts) {
    CHECK(std::abs(n - expect) <= 3.0 * sigma);
    chi2 += (n - expect) * (n - expect) / expect;
  }
  CHECK(chi2 < 20.52);  // chi-square, 5 dof, 0.999 quantile
}

TEST_CASE("nearest-row decoding tolerates fewer than d/2 flips") {
  std::vector<CodingMatrix> codes{one_vs_all(3), one_vs_all(5), exhaustive_ecoc(3), exhaustive_ecoc(4),
                                  exhaustive_ecoc(5), random_dense_code(4, 9, 3)};
  for (const auto& m : codes) {
    const int d = min_row_distance(m);
    const int budget = (d - 1) / 2;
    const int len = m.length();
    for (int c = 0; c < m.classes(); ++c) {
      for (unsigned mask = 0; mask < (1U << len); ++mask) {
        if (std::popcount(mask) > budget) continue;
        std::vector<int> word(static_cast<std::size_t>(len));
        for (int l = 0; l < len; ++l) word[static_cast<std::size_t>(l)] = (mask >> l & 1U) ? -m(c, l) : m(c, l);
        CHECK(nearest_row(m, word) == c);
      }
    }
  }
}

TEST_CASE("code csv") {
  std::ostringstream s;
  write_code_csv(s, exhaustive_ecoc(3));
  CHECK(s.str() == "1,1,1\n-1,-1,1\n-1,1,-1\n");
}
