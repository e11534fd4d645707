#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mcboost/corrective.hpp"
#include "mcboost/data.hpp"
#include "mcboost/ensemble.hpp"
#include "mcboost/stagewise.hpp"
#include "mcboost/weak.hpp"

namespace mcboost {

enum class Booster { AbMo, TcMo, AbEcc, TcEcc, TcHinge };

std::string_view booster_name(Booster b);  // AB.MO, TC.MO, AB.ECC, TC.ECC, TC.HINGE
Booster parse_booster(std::string_view name);
Variant booster_variant(Booster b);
bool totally_corrective(Booster b);
/// Stage-wise booster whose coefficient sum sets theta: AB.MO for TC.MO and
/// TC.HINGE, AB.ECC for TC.ECC, the booster itself otherwise.
Booster stagewise_counterpart(Booster b);

enum class ThetaPolicy { Sum, Cv, Fixed };

struct ThetaSpec {
  ThetaPolicy policy = ThetaPolicy::Sum;
  double value = 1.0;  // used by Fixed
};

/// "sum", "cv" or a positive number.
ThetaSpec parse_theta(std::string_view text);
std::string theta_label(const ThetaSpec& spec);

inline const std::vector<double>& default_theta_grid() {
  static const std::vector<double> grid{2, 5, 8, 10, 12, 15, 20, 30, 40, 45, 60, 80, 100, 120, 150, 200};
  return grid;
}

struct ExperimentConfig {
  std::filesystem::path dataset;
  DataFormat format = DataFormat::Csv;
  std::filesystem::path test_dataset;  // optional fixed test file
  bool keep_split = false;             // use dataset/test_dataset as given
  std::vector<Booster> boosters{Booster::AbMo, Booster::TcMo, Booster::AbEcc, Booster::TcEcc};
  LearnerKind learner = LearnerKind::Stump;
  std::vector<std::size_t> checkpoints{50, 100, 500};
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  ThetaSpec theta;
  double epsilon = 1e-5;
  bool force_rounds = true;
  int code_length = 0;  // 0: default code for the class count
  double train_fraction = 0.7;
  std::vector<double> theta_grid = default_theta_grid();
  std::size_t cv_folds = 5;
  /// Read totally-corrective checkpoints off one run at the largest T
  /// instead of one run per checkpoint.
  bool prefix_checkpoints = false;
  bool write_correlation = false;
  std::size_t threads = 0;  // 0: hardware concurrency
  std::filesystem::path out;

  std::size_t max_rounds() const;
};

/// Throws ConfigError on an unusable configuration.
void validate(const ExperimentConfig& cfg);

/// Seeds of one trial, all derived from (master seed, trial index).
struct TrialSeeds {
  std::uint64_t trial = 0;
  std::uint64_t split = 0;
  std::uint64_t code = 0;
  std::uint64_t stream = 0;
  std::uint64_t folds = 0;
};

TrialSeeds trial_seeds(std::uint64_t master, std::size_t trial);

/// Sum of the first `rounds` coefficients of a stage-wise ensemble, or 1
/// (with a warning on `log`) when that sum is not positive.
double select_theta_sum(const Ensemble& stagewise, std::size_t rounds, std::ostream* log = nullptr);

struct CvResult {
  double theta = 0.0;
  std::vector<double> mean_error;  // per grid entry
  /// Code columns used by each candidate on the first fold (ECC only).
  std::vector<CodingMatrix> column_logs;
};

/// k-fold cross-validated theta over `grid`, lowest mean validation error,
/// ties to the smaller theta. ECC candidates replay the same column stream.
CvResult select_theta_cv(const Dataset& train, Booster booster, const CodingMatrix& code,
                         std::uint64_t stream_seed, LearnerKind learner, std::size_t rounds,
                         std::span<const double> grid, std::size_t folds, std::uint64_t fold_seed,
                         double epsilon);

/// Errors of one booster at one checkpoint.
struct CellResult {
  Booster booster = Booster::AbMo;
  std::size_t rounds = 0;
  double train_error = 0.0;
  double test_error = 0.0;
  double min_margin = 0.0;
  double theta = 0.0;  // NaN for stage-wise boosters
  bool valid = false;
};

/// One training run kept for curve output.
struct RunRecord {
  Booster booster = Booster::AbMo;
  std::size_t rounds = 0;
  double theta = 0.0;
  Ensemble ensemble;
  BoostTrace trace;
  std::vector<DualTraceRow> dual_trace;
};

struct TrialReport {
  std::size_t trial = 0;
  TrialSeeds seeds;
  std::vector<CellResult> cells;  // booster-major, checkpoints ascending
  std::vector<RunRecord> runs;
  std::string error;              // non-empty when the trial was aborted
  double seconds = 0.0;
};

/// Runs every configured booster on one trial's split. `data` is the merged
/// dataset; `fixed_test` is used instead of resplitting when keep_split is
/// set. Failures abort the trial and leave the remaining cells invalid.
TrialReport run_trial(const ExperimentConfig& cfg, const Dataset& data, const Dataset* fixed_test,
                      std::size_t trial, std::ostream* log = nullptr);

struct SummaryRow {
  Booster booster = Booster::AbMo;
  // per checkpoint, in cfg.checkpoints order
  std::vector<double> train_mean, train_std, test_mean, test_std;
  std::vector<std::size_t> valid;
};

std::vector<SummaryRow> summarize(const ExperimentConfig& cfg, std::span<const TrialReport> reports);

/// Table-style summary: dataset, algorithm, then mean and std of the train
/// errors at each checkpoint followed by those of the test errors.
void write_summary_csv(std::ostream& out, std::string_view dataset, const ExperimentConfig& cfg,
                       std::span<const SummaryRow> rows);

/// One line per trial and cell.
void write_trials_csv(std::ostream& out, std::span<const TrialReport> reports);

/// key=value description of the configuration and every trial seed.
void write_manifest(std::ostream& out, const ExperimentConfig& cfg, std::span<const TrialReport> reports);

struct ExperimentResult {
  std::vector<TrialReport> reports;
  std::vector<SummaryRow> summary;
};

/// Loads the data, runs all trials on a thread pool, and writes summary.csv,
/// trials.csv, manifest.txt and per-trial curve files under cfg.out (when
/// set). Results do not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// Concatenates two datasets read from separate files, mapping classes
/// through their original labels.
Dataset merge_datasets(const Dataset& a, const Dataset& b);

/// Code used by fixed-code boosters in a trial.
CodingMatrix trial_code(const ExperimentConfig& cfg, int classes, const TrialSeeds& seeds);

}  // namespace mcboost
