#pragma once

#include <limits>
#include <optional>
#include <string>

#include "mcboost/error.hpp"
#include "mcboost/evaluate.hpp"
#include "mcboost/stagewise.hpp"

namespace mcboost::detail {

// Appends one round of errors (and optionally margins) to a trace, scoring
// the ensemble through per-dataset prediction caches.
class TraceRecorder {
 public:
  TraceRecorder(const Dataset& train, const BoostOptions& options)
      : options_(options), train_(train) {
    if (options.test) test_.emplace(*options.test);
  }

  void record(const Ensemble& e, double epsilon, double omega, double loss, BoostTrace& trace) {
    train_.sync(e);
    trace.train_error.push_back(
        multiclass_error(class_scores(e, train_, e.weights), train_.data().labels()));
    if (test_) {
      test_->sync(e);
      trace.test_error.push_back(
          multiclass_error(class_scores(e, *test_, e.weights), test_->data().labels()));
    }
    trace.epsilon.push_back(epsilon);
    trace.omega.push_back(omega);
    trace.loss.push_back(loss);
    if (options_.record_margins) {
      trace.min_margin.push_back(e.weight_sum() > 0.0
                                     ? min_margin(e, train_, e.weights).minimum
                                     : std::numeric_limits<double>::quiet_NaN());
    }
  }

  const PredictionCache& train_cache() const { return train_; }

 private:
  const BoostOptions& options_;
  PredictionCache train_;
  std::optional<PredictionCache> test_;
};

// Re-throws a learner or solver failure tagged with the round it happened in.
[[noreturn]] inline void rethrow_with_round(const Error& e, std::size_t round) {
  throw Error(e.kind(), "round " + std::to_string(round) + ": " + e.what());
}

}  // namespace mcboost::detail
