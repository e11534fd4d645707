#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mcboost/data.hpp"

namespace mcboost {

/// Weighted two-class problem handed to a weak learner. Views only.
struct BinaryProblem {
  const FeatureMatrix& features;
  std::span<const int> targets;     // +-1
  std::span<const double> weights;  // nonnegative, positive sum
};

/// predict(x) = polarity if x[feature] > threshold, else -polarity.
struct Stump {
  int feature = 0;
  double threshold = 0.0;
  int polarity = 1;

  int predict(std::span<const double> x) const {
    return x[static_cast<std::size_t>(feature)] > threshold ? polarity : -polarity;
  }
  friend bool operator==(const Stump&, const Stump&) = default;
};

/// predict(x) = polarity * sign(direction . x - threshold), sign(0) = +1.
struct LdaHypothesis {
  std::vector<double> direction;
  double threshold = 0.0;
  int polarity = 1;

  double project(std::span<const double> x) const;
  int predict(std::span<const double> x) const {
    return project(x) - threshold >= 0.0 ? polarity : -polarity;
  }
  friend bool operator==(const LdaHypothesis&, const LdaHypothesis&) = default;
};

using WeakHypothesis = std::variant<Stump, LdaHypothesis>;

enum class LearnerKind { Stump, Lda };

LearnerKind parse_learner(std::string_view name);
std::string_view learner_name(LearnerKind kind);

inline std::span<const double> row_span(const FeatureMatrix& x, std::size_t i) {
  return {x.data() + i * static_cast<std::size_t>(x.cols()), static_cast<std::size_t>(x.cols())};
}

int predict(const WeakHypothesis& h, std::span<const double> x);
std::vector<int> predict_all(const WeakHypothesis& h, const FeatureMatrix& x);

/// Exhaustive stump search over every feature, every midpoint between
/// consecutive distinct values plus one threshold below the minimum and one
/// above the maximum, and both polarities. Ties go to the smaller feature,
/// then the smaller threshold, then polarity +1.
Stump train_stump(const BinaryProblem& p);

/// Fisher discriminant on weighted class statistics with a small ridge, cut
/// placed by weighted-error minimisation along the projection.
/// Throws DataError when one side has no weight.
LdaHypothesis train_lda(const BinaryProblem& p);

/// Ridge added to the within-class scatter: 1e-6 * trace / D, or 1e-6.
double lda_ridge(double scatter_trace, std::size_t dimension);

/// Sum of normalised weights of misclassified examples.
double weighted_error(const WeakHypothesis& h, const BinaryProblem& p);

/// A weak learner bound to one feature matrix. Stump training reuses a
/// per-feature sort computed once at construction.
class Learner {
 public:
  Learner(LearnerKind kind, const FeatureMatrix& features);

  WeakHypothesis train(std::span<const int> targets, std::span<const double> weights) const;
  LearnerKind kind() const { return kind_; }
  const FeatureMatrix& features() const { return *features_; }

 private:
  LearnerKind kind_;
  const FeatureMatrix* features_;
  std::vector<std::vector<std::size_t>> order_;  // per feature, ascending
};

void write_hypothesis(std::ostream& out, const WeakHypothesis& h);
/// Parses one line produced by write_hypothesis.
WeakHypothesis parse_hypothesis(std::string_view line);

}  // namespace mcboost
