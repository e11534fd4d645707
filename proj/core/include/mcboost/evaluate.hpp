#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "mcboost/data.hpp"
#include "mcboost/ensemble.hpp"
#include "mcboost/margins.hpp"

namespace mcboost {

/// Predicted label in {1..C}: argmax_c of the class score, ties to the
/// smallest class. Throws ConfigError on an empty ensemble.
int decode(const Ensemble& e, std::span<const double> x);

/// Row-wise argmax with the same tie rule; returns labels in {1..C}.
std::vector<int> decode_scores(const Eigen::MatrixXd& scores);

/// Fraction of examples whose decoded label differs from the true one.
double multiclass_error(const Ensemble& e, const Dataset& d);
double multiclass_error(const Eigen::MatrixXd& scores, std::span<const int> labels);

struct MarginReport {
  std::vector<double> margins;  // one per example, normalised by weight_sum
  double minimum = 0.0;
  double weight_sum = 0.0;
};

/// MO: min_l M(y_i,l) F_l(x_i) / sum(w). ECC and Hinge: min over c != y_i of
/// (M(y_i,:) - M(c,:)) F(x_i) / sum(w). Throws ConfigError if sum(w) <= 0.
MarginReport min_margin(const Ensemble& e, const Dataset& d);
MarginReport min_margin(const Ensemble& e, const PredictionCache& cache,
                        std::span<const double> weights);

/// Entry [t-1][j-1] = u^(t+1) . rho[h^(j)] for j <= t.
struct CorrelationTrace {
  std::vector<std::vector<double>> entries;
  std::vector<double> r;  // r^(t+1) per row; NaN for stage-wise runs
};

CorrelationTrace correlation_trace(const DualHistory& history);

/// Two-sided Wilcoxon rank-sum p-value with midranks for ties. Exact
/// enumeration when |a| + |b| <= kRankSumExactLimit, otherwise the normal
/// approximation with tie and continuity corrections.
double ranksum_test(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kRankSumExactLimit = 12;

void write_correlation_csv(std::ostream& out, const CorrelationTrace& trace);

}  // namespace mcboost
