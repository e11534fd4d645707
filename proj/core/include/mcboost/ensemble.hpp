#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcboost/coding.hpp"
#include "mcboost/data.hpp"
#include "mcboost/weak.hpp"

namespace mcboost {

/// How rounds map onto code columns and which margin the ensemble is scored
/// with.
///  - MO: fixed code, L hypotheses per round, hypothesis l feeds column l.
///  - ECC: the code grows by one column per round, one hypothesis per round.
///  - Hinge: fixed code like MO, margins taken over wrong classes like ECC.
enum class Variant { MO, ECC, Hinge };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

inline bool fixed_code(Variant v) { return v != Variant::ECC; }

struct Ensemble {
  Variant variant = Variant::MO;
  CodingMatrix code;
  std::vector<std::vector<WeakHypothesis>> rounds;
  std::vector<double> weights;  // one nonnegative coefficient per round

  std::size_t size() const { return rounds.size(); }
  int classes() const { return code.classes(); }
  double weight_sum() const;

  /// Code column driven by hypothesis k of round j.
  int column_of(std::size_t round, std::size_t k) const {
    return variant == Variant::ECC ? static_cast<int>(round) : static_cast<int>(k);
  }
};

/// Line-based text form: header, code rows, then one `round <w> <k>` line
/// followed by k hypothesis lines per round. Doubles use 17 significant
/// digits so a dump reloads bit-identically.
void write_ensemble(std::ostream& out, const Ensemble& e);
Ensemble read_ensemble(std::istream& in);

/// Outputs of every round's hypotheses on one dataset, filled incrementally
/// as rounds are added. Lets traces re-score an ensemble under new
/// coefficients without re-running the weak hypotheses.
class PredictionCache {
 public:
  explicit PredictionCache(const Dataset& data) : data_(&data) {}

  /// Appends the outputs of rounds [rounds(), e.size()).
  void sync(const Ensemble& e);
  std::size_t rounds() const { return outputs_.size(); }
  /// Row-major N x k outputs of round j.
  std::span<const int> outputs(std::size_t round) const { return outputs_[round]; }
  std::size_t width(std::size_t round) const { return widths_[round]; }
  /// N x C matrix sum_m M(c, column_of(round, m)) h_m(x_i) of one round.
  const Eigen::MatrixXd& contribution(std::size_t round) const { return contributions_[round]; }
  const Dataset& data() const { return *data_; }

 private:
  const Dataset* data_;
  std::vector<std::vector<int>> outputs_;
  std::vector<std::size_t> widths_;
  std::vector<Eigen::MatrixXd> contributions_;
};

/// N x C class scores sum_j w_j M(c, .) h^(j)(x_i) using the first
/// `weights.size()` rounds.
Eigen::MatrixXd class_scores(const Ensemble& e, const PredictionCache& cache,
                             std::span<const double> weights);

}  // namespace mcboost
