#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mcboost/coding.hpp"
#include "mcboost/data.hpp"
#include "mcboost/ensemble.hpp"

namespace mcboost {

/// Constraint rows of the restricted master, one column per accepted round.
///
/// Row layout is example-major:
///  - MO: row i*L + l holds M(y_i,l) h_l(x_i).
///  - ECC: rows (i, c) for c != y_i, c ascending; entry (M(y_i,t) - M(c,t)) h(x_i).
///  - Hinge: rows (i, c) for c != y_i; entry sum_l (M(y_i,l) - M(c,l)) h_l(x_i).
class MarginMatrix {
 public:
  MarginMatrix() = default;
  explicit MarginMatrix(std::size_t rows) : rows_(rows) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return columns_.size(); }
  std::span<const double> column(std::size_t j) const { return columns_[j]; }
  double operator()(std::size_t row, std::size_t col) const { return columns_[col][row]; }

  void append(std::vector<double> column);

 private:
  std::size_t rows_ = 0;
  std::vector<std::vector<double>> columns_;
};

/// K' for a variant: N*L for MO, N*(C-1) otherwise.
std::size_t margin_rows(Variant v, std::size_t examples, int classes, int code_length);

/// Margin column of one round. `outputs` is the row-major N x k output of the
/// round's hypotheses on the training set; `round` selects the code column
/// for ECC. Throws ConfigError on a width mismatch.
std::vector<double> build_margin_column(Variant v, std::span<const int> outputs, std::size_t width,
                                        const CodingMatrix& code, std::size_t round,
                                        std::span<const int> labels);

/// Dual state recorded after a round: the row weights u^(t+1) in the
/// MarginMatrix layout and the slack r (NaN for stage-wise runs).
struct DualSnapshot {
  std::vector<double> u;
  double r = std::numeric_limits<double>::quiet_NaN();
};

/// Everything needed to reconstruct the correlation traces of a run.
struct DualHistory {
  MarginMatrix margins;
  std::vector<DualSnapshot> snapshots;  // snapshots[t-1] taken after round t
};

}  // namespace mcboost
