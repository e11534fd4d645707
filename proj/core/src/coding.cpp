#include "mcboost/coding.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "mcboost/error.hpp"

namespace mcboost {

CodingMatrix::CodingMatrix(const std::vector<std::vector<int>>& rows) {
  if (rows.size() < 2) throw ConfigError("coding matrix needs at least 2 rows");
  classes_ = static_cast<int>(rows.size());
  length_ = static_cast<int>(rows.front().size());
  if (length_ < 1) throw ConfigError("coding matrix needs at least 1 column");
  entries_.reserve(static_cast<std::size_t>(classes_ * length_));
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != length_) throw ConfigError("ragged coding matrix");
    for (int v : r) {
      if (v != 1 && v != -1) throw ConfigError("coding matrix entries must be +1 or -1");
      entries_.push_back(static_cast<signed char>(v));
    }
  }
}

CodingMatrix::CodingMatrix(int classes, int length)
    : classes_(classes), length_(length),
      entries_(static_cast<std::size_t>(classes * length), static_cast<signed char>(1)) {}

void CodingMatrix::set(int c, int l, int value) {
  entries_[static_cast<std::size_t>(c * length_ + l)] = static_cast<signed char>(value);
}

std::vector<int> CodingMatrix::column(int l) const {
  std::vector<int> out(static_cast<std::size_t>(classes_));
  for (int c = 0; c < classes_; ++c) out[static_cast<std::size_t>(c)] = (*this)(c, l);
  return out;
}

std::span<const signed char> CodingMatrix::row(int c) const {
  return {entries_.data() + static_cast<std::size_t>(c * length_), static_cast<std::size_t>(length_)};
}

void CodingMatrix::append_column(std::span<const int> column) {
  if (classes_ == 0) classes_ = static_cast<int>(column.size());
  if (static_cast<int>(column.size()) != classes_) throw ConfigError("column length mismatch");
  std::vector<signed char> grown;
  grown.reserve(static_cast<std::size_t>(classes_ * (length_ + 1)));
  for (int c = 0; c < classes_; ++c) {
    for (int l = 0; l < length_; ++l) grown.push_back((*this)(c, l));
    grown.push_back(static_cast<signed char>(column[static_cast<std::size_t>(c)]));
  }
  entries_ = std::move(grown);
  ++length_;
}

bool CodingMatrix::rows_distinct() const { return min_row_distance(*this) > 0; }

int CodingMatrix::invalid_column_count() const {
  int invalid = 0;
  for (int l = 0; l < length_; ++l) {
    bool has_plus = false, has_minus = false;
    for (int c = 0; c < classes_; ++c) ((*this)(c, l) > 0 ? has_plus : has_minus) = true;
    bool bad = !(has_plus && has_minus);
    for (int k = 0; k < l && !bad; ++k) {
      bool same = true, negated = true;
      for (int c = 0; c < classes_; ++c) {
        same = same && (*this)(c, l) == (*this)(c, k);
        negated = negated && (*this)(c, l) == -(*this)(c, k);
      }
      bad = same || negated;
    }
    invalid += bad ? 1 : 0;
  }
  return invalid;
}

CodingMatrix one_vs_all(int classes) {
  if (classes < 2) throw ConfigError("one-vs-all needs at least 2 classes");
  CodingMatrix m(classes, classes);
  for (int c = 0; c < classes; ++c)
    for (int l = 0; l < classes; ++l) m.set(c, l, c == l ? 1 : -1);
  return m;
}

CodingMatrix exhaustive_ecoc(int classes) {
  if (classes < 3 || classes > 7)
    throw ConfigError("exhaustive code needs 3..7 classes, got " + std::to_string(classes));
  const int length = (1 << (classes - 1)) - 1;
  CodingMatrix m(classes, length);
  for (int c = 1; c < classes; ++c) {
    const int run = 1 << (classes - 1 - c);  // 2^(C - c) for the 1-based row c+1
    for (int l = 0; l < length; ++l) m.set(c, l, (l / run) % 2 == 0 ? -1 : 1);
  }
  return m;
}

CodingMatrix draw_code_candidate(int classes, int length, Rng& rng) {
  CodingMatrix m(classes, length);
  std::uint64_t bits = 0;
  int left = 0;
  for (int c = 0; c < classes; ++c) {
    for (int l = 0; l < length; ++l) {
      if (left == 0) {
        bits = rng.next();
        left = 64;
      }
      m.set(c, l, (bits & 1U) ? 1 : -1);
      bits >>= 1;
      --left;
    }
  }
  return m;
}

CodingMatrix random_dense_code(int classes, int length, std::uint64_t seed) {
  if (classes < 2) throw ConfigError("random code needs at least 2 classes");
  const int min_length = static_cast<int>(std::ceil(std::log2(static_cast<double>(classes)) - 1e-12));
  if (length < std::max(1, min_length))
    throw ConfigError("code length " + std::to_string(length) + " too short for " +
                      std::to_string(classes) + " classes");
  Rng rng(seed);
  CodingMatrix best;
  int best_distance = 0;
  int best_invalid = 0;
  bool found = false;
  for (int k = 0; k < kRandomCodeCandidates; ++k) {
    CodingMatrix cand = draw_code_candidate(classes, length, rng);
    const int distance = min_row_distance(cand);
    if (distance == 0) continue;
    const int invalid = cand.invalid_column_count();
    if (!found || distance > best_distance || (distance == best_distance && invalid < best_invalid)) {
      best = std::move(cand);
      best_distance = distance;
      best_invalid = invalid;
      found = true;
    }
  }
  if (!found) throw ConfigError("no random code candidate has distinct rows");
  return best;
}

int min_row_distance(const CodingMatrix& m) {
  int best = m.length();
  for (int a = 0; a < m.classes(); ++a) {
    for (int b = a + 1; b < m.classes(); ++b) {
      int d = 0;
      for (int l = 0; l < m.length(); ++l) d += m(a, l) != m(b, l) ? 1 : 0;
      best = std::min(best, d);
    }
  }
  return best;
}

CodingMatrix default_code(int classes, std::uint64_t seed, int length_override) {
  if (length_override > 0) return random_dense_code(classes, length_override, seed);
  if (classes == 2) return one_vs_all(2);
  if (classes <= 7) return exhaustive_ecoc(classes);
  const int length = static_cast<int>(std::ceil(10.0 * std::log2(static_cast<double>(classes))));
  return random_dense_code(classes, length, seed);
}

int nearest_row(const CodingMatrix& m, std::span<const int> word) {
  int best = 0;
  int best_distance = m.length() + 1;
  for (int c = 0; c < m.classes(); ++c) {
    int d = 0;
    for (int l = 0; l < m.length(); ++l) d += m(c, l) != word[static_cast<std::size_t>(l)] ? 1 : 0;
    if (d < best_distance) {
      best_distance = d;
      best = c;
    }
  }
  return best;
}

void write_code_csv(std::ostream& out, const CodingMatrix& m) {
  for (int c = 0; c < m.classes(); ++c) {
    for (int l = 0; l < m.length(); ++l) out << (l ? "," : "") << m(c, l);
    out << '\n';
  }
}

ColumnStream::ColumnStream(int classes, std::uint64_t seed) : classes_(classes), rng_(seed) {
  if (classes < 2) throw ConfigError("column stream needs at least 2 classes");
}

std::vector<int> ColumnStream::next_column() {
  std::vector<int> col(static_cast<std::size_t>(classes_));
  while (true) {
    std::uint64_t bits = 0;
    int left = 0;
    int plus = 0;
    for (int c = 0; c < classes_; ++c) {
      if (left == 0) {
        bits = rng_.next();
        left = 64;
      }
      col[static_cast<std::size_t>(c)] = (bits & 1U) ? 1 : -1;
      plus += (bits & 1U) ? 1 : 0;
      bits >>= 1;
      --left;
    }
    if (plus > 0 && plus < classes_) return col;
  }
}

}  // namespace mcboost
