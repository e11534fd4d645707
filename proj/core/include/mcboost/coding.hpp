#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mcboost/rng.hpp"

namespace mcboost {

/// C x L matrix over {-1,+1}; row c is the codeword of class c+1.
class CodingMatrix {
 public:
  CodingMatrix() = default;
  /// Entries must all be +-1 and rows.size() >= 2 with equal lengths.
  explicit CodingMatrix(const std::vector<std::vector<int>>& rows);
  CodingMatrix(int classes, int length);  // all +1

  int classes() const { return classes_; }
  int length() const { return length_; }

  /// Zero-based class and column.
  int operator()(int c, int l) const { return entries_[static_cast<std::size_t>(c * length_ + l)]; }
  void set(int c, int l, int value);

  std::vector<int> column(int l) const;
  std::span<const signed char> row(int c) const;
  void append_column(std::span<const int> column);

  /// Rows pairwise distinct.
  bool rows_distinct() const;
  /// Columns that are constant, or equal to / the negation of an earlier column.
  int invalid_column_count() const;

  friend bool operator==(const CodingMatrix&, const CodingMatrix&) = default;

 private:
  int classes_ = 0;
  int length_ = 0;
  std::vector<signed char> entries_;  // row-major
};

CodingMatrix one_vs_all(int classes);

/// Exhaustive code for 3 <= C <= 7: L = 2^(C-1) - 1, row 1 all +1, row c
/// alternating runs of -1 and +1 of length 2^(C-c), starting with -1.
CodingMatrix exhaustive_ecoc(int classes);

/// Best of `kRandomCodeCandidates` seeded draws, ranked by minimum row
/// distance and then by fewest invalid columns; earliest candidate wins ties.
CodingMatrix random_dense_code(int classes, int length, std::uint64_t seed);

inline constexpr int kRandomCodeCandidates = 1000;

/// One candidate draw (row-major entries from successive generator bits).
/// Exposed so tests can rebuild the candidate pool.
CodingMatrix draw_code_candidate(int classes, int length, Rng& rng);

/// Minimum Hamming distance over unordered row pairs.
int min_row_distance(const CodingMatrix& m);

/// ECOC used by the fixed-code boosters when no length is requested:
/// exhaustive for 3..7 classes, one-vs-all for 2, random dense otherwise.
CodingMatrix default_code(int classes, std::uint64_t seed, int length_override = 0);

/// Nearest row by Hamming distance to a +-1 word (ties to the lower class).
int nearest_row(const CodingMatrix& m, std::span<const int> word);

void write_code_csv(std::ostream& out, const CodingMatrix& m);

/// Random code columns for the incremental-code booster. Every column holds
/// both signs and is uniform over such columns.
class ColumnStream {
 public:
  ColumnStream(int classes, std::uint64_t seed);

  std::vector<int> next_column();
  int classes() const { return classes_; }

 private:
  int classes_;
  Rng rng_;
};

}  // namespace mcboost
