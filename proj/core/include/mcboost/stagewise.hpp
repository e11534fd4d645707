#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mcboost/coding.hpp"
#include "mcboost/data.hpp"
#include "mcboost/ensemble.hpp"
#include "mcboost/margins.hpp"
#include "mcboost/weak.hpp"

namespace mcboost {

/// Per-round diagnostics shared by every booster. All vectors have one
/// entry per completed round.
struct BoostTrace {
  std::vector<double> train_error;
  std::vector<double> test_error;  // empty when no test set was given
  std::vector<double> epsilon;     // weighted error of the round's hypothesis
  std::vector<double> omega;       // coefficient of the newest round
  std::vector<double> loss;        // training loss of the ensemble so far
  std::vector<double> min_margin;  // filled when BoostOptions::record_margins
  std::optional<DualHistory> dual; // filled when BoostOptions::record_dual

  std::size_t rounds() const { return train_error.size(); }
};

struct BoostOptions {
  const Dataset* test = nullptr;
  bool record_margins = false;
  bool record_dual = false;
};

struct BoostResult {
  Ensemble ensemble;
  BoostTrace trace;
};

inline constexpr double kEpsilonFloor = 1e-10;

/// Weighted error clamped to [1e-10, 1 - 1e-10].
double clamp_epsilon(double epsilon);

/// scale * ln((1 - eps) / eps) on the clamped error; scale is 1/2 for the
/// fixed-code booster and 1/4 for the incremental-code booster.
double boost_coefficient(double epsilon, double scale);

/// Stage-wise boosting over a fixed coding matrix. Row weights u_{i,l}
/// start at 1/(NL); each round trains one hypothesis per code column on
/// targets M(y_i,l), pools the weighted error over all (i,l), and reweights
/// u_{i,l} by exp(-omega M(y_i,l) h_l(x_i)).
BoostResult adaboost_mo(const Dataset& train, const CodingMatrix& code, LearnerKind learner,
                        std::size_t rounds, const BoostOptions& options = {});

/// Stage-wise boosting with a code column drawn per round. Weights live on
/// mislabels (i, c != y_i), starting at 1/(N(C-1)); u_{i,y_i} is held at 0.
BoostResult adaboost_ecc(const Dataset& train, ColumnStream stream, LearnerKind learner,
                         std::size_t rounds, const BoostOptions& options = {});

/// CSV with header iteration,train_err,test_err,epsilon,omega.
void write_trace_csv(std::ostream& out, const BoostTrace& trace);

}  // namespace mcboost
