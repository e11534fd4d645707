#include "mcboost/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "mcboost/error.hpp"
#include "mcboost/evaluate.hpp"
#include "mcboost/rng.hpp"

namespace mcboost {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct BoosterInfo {
  Booster booster;
  std::string_view name;
};

constexpr BoosterInfo kBoosters[] = {
    {Booster::AbMo, "AB.MO"},   {Booster::TcMo, "TC.MO"},       {Booster::AbEcc, "AB.ECC"},
    {Booster::TcEcc, "TC.ECC"}, {Booster::TcHinge, "TC.HINGE"},
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view booster_name(Booster b) {
  for (const auto& info : kBoosters)
    if (info.booster == b) return info.name;
  return "?";
}

Booster parse_booster(std::string_view name) {
  const std::string key = upper(name);
  for (const auto& info : kBoosters)
    if (info.name == key) return info.booster;
  throw ConfigError("unknown booster '" + std::string(name) +
                    "' (expected AB.MO, TC.MO, AB.ECC, TC.ECC or TC.HINGE)");
}

Variant booster_variant(Booster b) {
  switch (b) {
    case Booster::AbMo:
    case Booster::TcMo:
      return Variant::MO;
    case Booster::AbEcc:
    case Booster::TcEcc:
      return Variant::ECC;
    case Booster::TcHinge:
      return Variant::Hinge;
  }
  return Variant::MO;
}

bool totally_corrective(Booster b) { return b == Booster::TcMo || b == Booster::TcEcc || b == Booster::TcHinge; }

Booster stagewise_counterpart(Booster b) {
  switch (b) {
    case Booster::TcMo:
    case Booster::TcHinge:
      return Booster::AbMo;
    case Booster::TcEcc:
      return Booster::AbEcc;
    default:
      return b;
  }
}

ThetaSpec parse_theta(std::string_view text) {
  const std::string key(text);
  if (key == "sum") return {ThetaPolicy::Sum, 1.0};
  if (key == "cv") return {ThetaPolicy::Cv, 1.0};
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != key.size() || key.empty() || !std::isfinite(v) || !(v > 0.0))
    throw ConfigError("theta must be 'sum', 'cv' or a positive number, got '" + key + "'");
  return {ThetaPolicy::Fixed, v};
}

std::string theta_label(const ThetaSpec& spec) {
  switch (spec.policy) {
    case ThetaPolicy::Sum:
      return "sum";
    case ThetaPolicy::Cv:
      return "cv";
    case ThetaPolicy::Fixed: {
      std::ostringstream s;
      s.precision(17);
      s << spec.value;
      return s.str();
    }
  }
  return "?";
}

std::size_t ExperimentConfig::max_rounds() const {
  return checkpoints.empty() ? 0 : *std::max_element(checkpoints.begin(), checkpoints.end());
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.checkpoints.empty()) throw ConfigError("at least one round checkpoint is required");
  for (auto t : cfg.checkpoints)
    if (t < 1) throw ConfigError("round checkpoints must be at least 1");
  if (cfg.boosters.empty()) throw ConfigError("no boosters selected");
  if (cfg.theta.policy == ThetaPolicy::Fixed && !(cfg.theta.value > 0.0))
    throw ConfigError("fixed theta must be positive");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  if (cfg.theta.policy == ThetaPolicy::Cv) {
    if (cfg.theta_grid.empty()) throw ConfigError("theta grid is empty");
    if (cfg.cv_folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    for (double g : cfg.theta_grid)
      if (!(g > 0.0)) throw ConfigError("theta grid values must be positive");
  }
  if (cfg.keep_split && cfg.test_dataset.empty()) throw ConfigError("--keep-split needs a test dataset");
  if (cfg.code_length < 0) throw ConfigError("code length must be nonnegative");
}

TrialSeeds trial_seeds(std::uint64_t master, std::size_t trial) {
  TrialSeeds s;
  s.trial = derive_seed(master, trial);
  s.split = derive_seed(s.trial, 0);
  s.code = derive_seed(s.trial, 1);
  s.stream = derive_seed(s.trial, 2);
  s.folds = derive_seed(s.trial, 3);
  return s;
}

CodingMatrix trial_code(const ExperimentConfig& cfg, int classes, const TrialSeeds& seeds) {
  return default_code(classes, seeds.code, cfg.code_length);
}

double select_theta_sum(const Ensemble& stagewise, std::size_t rounds, std::ostream* log) {
  if (stagewise.size() < 1) throw ConfigError("theta selection needs a stage-wise run with at least one round");
  const std::size_t n = std::min(rounds, stagewise.weights.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += stagewise.weights[j];
  if (!(sum > 0.0)) {
    if (log) *log << "warning: stage-wise coefficients sum to " << sum << "; using theta = 1\n";
    return 1.0;
  }
  return sum;
}

namespace {

CodeSource make_source(Variant v, const CodingMatrix& code, int classes, std::uint64_t stream_seed) {
  if (v == Variant::ECC) return ColumnStream(classes, stream_seed);
  return code;
}

MultiBoostResult run_corrective(const Dataset& train, Booster b, const CodingMatrix& code, std::uint64_t stream_seed,
                                LearnerKind learner, std::size_t rounds, double theta, double epsilon,
                                bool force, const BoostOptions& boost) {
  MultiBoostOptions opts;
  opts.theta = theta;
  opts.epsilon = epsilon;
  opts.force_rounds = force;
  opts.boost = boost;
  const Variant v = booster_variant(b);
  return multiboost(train, v, make_source(v, code, train.num_classes(), stream_seed), learner, rounds, opts);
}

BoostResult run_stagewise(const Dataset& train, Booster b, const CodingMatrix& code, std::uint64_t stream_seed,
                          LearnerKind learner, std::size_t rounds, const BoostOptions& boost) {
  if (booster_variant(b) == Variant::ECC)
    return adaboost_ecc(train, ColumnStream(train.num_classes(), stream_seed), learner, rounds, boost);
  return adaboost_mo(train, code, learner, rounds, boost);
}

}  // namespace

CvResult select_theta_cv(const Dataset& train, Booster booster, const CodingMatrix& code, std::uint64_t stream_seed,
                         LearnerKind learner, std::size_t rounds, std::span<const double> grid, std::size_t folds,
                         std::uint64_t fold_seed, double epsilon) {
  if (grid.empty()) throw ConfigError("theta grid is empty");
  if (!totally_corrective(booster)) throw ConfigError("cross-validated theta applies to totally-corrective boosters");
  const auto parts = kfold_indices(train, folds, fold_seed);
  CvResult result;
  result.mean_error.assign(grid.size(), 0.0);
  result.column_logs.resize(grid.size());
  for (std::size_t f = 0; f < parts.size(); ++f) {
    std::vector<std::size_t> fit;
    for (std::size_t g = 0; g < parts.size(); ++g)
      if (g != f) fit.insert(fit.end(), parts[g].begin(), parts[g].end());
    std::sort(fit.begin(), fit.end());
    const Dataset fit_set = train.subset(fit);
    const Dataset val_set = train.subset(parts[f]);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto run = run_corrective(fit_set, booster, code, stream_seed, learner, rounds, grid[k], epsilon, true, {});
      result.mean_error[k] += multiclass_error(run.ensemble, val_set) / static_cast<double>(parts.size());
      if (f == 0) result.column_logs[k] = run.ensemble.code;
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (result.mean_error[k] < result.mean_error[best] ||
        (result.mean_error[k] == result.mean_error[best] && grid[k] < grid[best]))
      best = k;
  }
  result.theta = grid[best];
  return result;
}

TrialReport run_trial(const ExperimentConfig& cfg, const Dataset& data, const Dataset* fixed_test, std::size_t trial,
                      std::ostream* log) {
  const auto start = std::chrono::steady_clock::now();
  TrialReport report;
  report.trial = trial;
  report.seeds = trial_seeds(cfg.seed, trial);
  const auto& seeds = report.seeds;

  std::optional<Split> split;
  if (!fixed_test) split = stratified_split(data, SplitSpec{cfg.train_fraction, seeds.split});
  const Dataset& train = fixed_test ? data : split->train;
  const Dataset& test = fixed_test ? *fixed_test : split->test;
  const int classes = train.num_classes();
  const CodingMatrix code = trial_code(cfg, classes, seeds);

  auto checkpoints = cfg.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  const std::size_t t_max = checkpoints.back();

  BoostOptions boost;
  boost.test = &test;
  boost.record_margins = true;
  boost.record_dual = cfg.write_correlation;

  for (Booster b : cfg.boosters)
    for (auto t : checkpoints) report.cells.push_back(CellResult{b, t, kNaN, kNaN, kNaN, kNaN, false});

  std::map<Booster, std::size_t> stagewise_runs;  // booster -> index into report.runs
  auto stagewise = [&](Booster b) -> const RunRecord& {
    auto it = stagewise_runs.find(b);
    if (it != stagewise_runs.end()) return report.runs[it->second];
    auto res = run_stagewise(train, b, code, seeds.stream, cfg.learner, t_max, boost);
    report.runs.push_back(RunRecord{b, t_max, kNaN, std::move(res.ensemble), std::move(res.trace), {}});
    stagewise_runs[b] = report.runs.size() - 1;
    return report.runs.back();
  };
  auto theta_for = [&](Booster b, std::size_t t) {
    switch (cfg.theta.policy) {
      case ThetaPolicy::Sum:
        return select_theta_sum(stagewise(stagewise_counterpart(b)).ensemble, t, log);
      case ThetaPolicy::Cv:
        return select_theta_cv(train, b, code, seeds.stream, cfg.learner, t, cfg.theta_grid, cfg.cv_folds, seeds.folds,
                               cfg.epsilon)
            .theta;
      case ThetaPolicy::Fixed:
        break;
    }
    return cfg.theta.value;
  };
  auto fill = [&](Booster b, std::size_t t, const BoostTrace& trace, double theta) {
    if (trace.rounds() == 0) return;
    const std::size_t idx = std::min(t, trace.rounds()) - 1;
    for (auto& cell : report.cells) {
      if (cell.booster != b || cell.rounds != t) continue;
      cell.train_error = trace.train_error[idx];
      cell.test_error = trace.test_error[idx];
      cell.min_margin = trace.min_margin[idx];
      cell.theta = theta;
      cell.valid = true;
    }
  };

  std::vector<Booster> done;
  try {
    for (Booster b : cfg.boosters) {
      if (std::find(done.begin(), done.end(), b) != done.end()) continue;
      done.push_back(b);
      if (!totally_corrective(b)) {
        const auto& run = stagewise(b);
        for (auto t : checkpoints) fill(b, t, run.trace, kNaN);
        continue;
      }
      const std::vector<std::size_t> lengths =
          cfg.prefix_checkpoints ? std::vector<std::size_t>{t_max} : checkpoints;
      for (auto t : lengths) {
        const double theta = theta_for(b, t);
        auto res = run_corrective(train, b, code, seeds.stream, cfg.learner, t, theta, cfg.epsilon, cfg.force_rounds,
                                  boost);
        if (res.stop != StopReason::RoundLimit && log)
          *log << "trial " << trial << ' ' << booster_name(b) << " T=" << t << ": stopped after "
               << res.ensemble.size() << " rounds ("
               << (res.stop == StopReason::Converged ? "converged" : "degenerate oracle") << ")\n";
        if (cfg.prefix_checkpoints) {
          for (auto c : checkpoints) fill(b, c, res.trace, theta);
        } else {
          fill(b, t, res.trace, theta);
        }
        report.runs.push_back(
            RunRecord{b, t, theta, std::move(res.ensemble), std::move(res.trace), std::move(res.dual_trace)});
      }
    }
  } catch (const Error& e) {
    report.error = e.what();
    if (log) *log << "trial " << trial << " aborted: " << e.what() << '\n';
    for (auto& cell : report.cells)
      if (cell.booster == done.back()) cell.valid = false;
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<SummaryRow> summarize(const ExperimentConfig& cfg, std::span<const TrialReport> reports) {
  std::vector<SummaryRow> rows;
  std::vector<Booster> seen;
  for (Booster b : cfg.boosters) {
    if (std::find(seen.begin(), seen.end(), b) != seen.end()) continue;
    seen.push_back(b);
    SummaryRow row;
    row.booster = b;
    for (auto t : cfg.checkpoints) {
      std::vector<double> tr, te;
      for (const auto& rep : reports)
        for (const auto& cell : rep.cells)
          if (cell.booster == b && cell.rounds == t && cell.valid) {
            tr.push_back(cell.train_error);
            te.push_back(cell.test_error);
          }
      auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
        if (v.empty()) {
          mean = sd = kNaN;
          return;
        }
        mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      };
      double m = 0, s = 0;
      stats(tr, m, s);
      row.train_mean.push_back(m);
      row.train_std.push_back(s);
      stats(te, m, s);
      row.test_mean.push_back(m);
      row.test_std.push_back(s);
      row.valid.push_back(tr.size());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_summary_csv(std::ostream& out, std::string_view dataset, const ExperimentConfig& cfg,
                       std::span<const SummaryRow> rows) {
  std::ostringstream s;
  s.precision(17);
  s << "dataset,algorithm";
  for (const char* kind : {"train", "test"})
    for (auto t : cfg.checkpoints) s << ',' << kind << "_err_" << t << "_mean," << kind << "_err_" << t << "_std";
  s << '\n';
  for (const auto& row : rows) {
    s << dataset << ',' << booster_name(row.booster);
    for (std::size_t k = 0; k < row.train_mean.size(); ++k) s << ',' << row.train_mean[k] << ',' << row.train_std[k];
    for (std::size_t k = 0; k < row.test_mean.size(); ++k) s << ',' << row.test_mean[k] << ',' << row.test_std[k];
    s << '\n';
  }
  out << s.str();
}

void write_trials_csv(std::ostream& out, std::span<const TrialReport> reports) {
  std::ostringstream s;
  s.precision(17);
  s << "trial,algorithm,rounds,train_err,test_err,min_margin,theta,valid\n";
  for (const auto& rep : reports)
    for (const auto& c : rep.cells)
      s << rep.trial << ',' << booster_name(c.booster) << ',' << c.rounds << ',' << c.train_error << ','
        << c.test_error << ',' << c.min_margin << ',' << c.theta << ',' << (c.valid ? 1 : 0) << '\n';
  out << s.str();
}

void write_manifest(std::ostream& out, const ExperimentConfig& cfg, std::span<const TrialReport> reports) {
  std::ostringstream s;
  s.precision(17);
  auto join = [](const auto& items, auto&& fmt) {
    std::ostringstream j;
    j.precision(17);
    bool first = true;
    for (const auto& x : items) {
      if (!first) j << ',';
      first = false;
      fmt(j, x);
    }
    return j.str();
  };
  s << "dataset=" << cfg.dataset.string() << '\n';
  s << "format=" << (cfg.format == DataFormat::Csv ? "csv" : "libsvm") << '\n';
  s << "test_dataset=" << cfg.test_dataset.string() << '\n';
  s << "keep_split=" << (cfg.keep_split ? 1 : 0) << '\n';
  s << "boosters=" << join(cfg.boosters, [](auto& o, Booster b) { o << booster_name(b); }) << '\n';
  s << "learner=" << learner_name(cfg.learner) << '\n';
  s << "rounds=" << join(cfg.checkpoints, [](auto& o, std::size_t t) { o << t; }) << '\n';
  s << "trials=" << cfg.trials << '\n';
  s << "seed=" << cfg.seed << '\n';
  s << "theta=" << theta_label(cfg.theta) << '\n';
  if (cfg.theta.policy == ThetaPolicy::Cv) {
    s << "theta_grid=" << join(cfg.theta_grid, [](auto& o, double g) { o << g; }) << '\n';
    s << "cv_folds=" << cfg.cv_folds << '\n';
  }
  s << "epsilon=" << cfg.epsilon << '\n';
  s << "force_rounds=" << (cfg.force_rounds ? 1 : 0) << '\n';
  s << "code_length=" << cfg.code_length << '\n';
  s << "train_fraction=" << cfg.train_fraction << '\n';
  s << "prefix_checkpoints=" << (cfg.prefix_checkpoints ? 1 : 0) << '\n';
  for (const auto& rep : reports) {
    const std::string key = "trial." + std::to_string(rep.trial);
    s << key << ".seed=" << rep.seeds.trial << '\n';
    s << key << ".split_seed=" << rep.seeds.split << '\n';
    s << key << ".code_seed=" << rep.seeds.code << '\n';
    s << key << ".stream_seed=" << rep.seeds.stream << '\n';
    s << key << ".fold_seed=" << rep.seeds.folds << '\n';
    s << key << ".seconds=" << rep.seconds << '\n';
    if (!rep.error.empty()) s << key << ".error=" << rep.error << '\n';
  }
  out << s.str();
}

Dataset merge_datasets(const Dataset& a, const Dataset& b) {
  if (a.dimension() != b.dimension()) throw DataError("train and test files have different feature counts");
  auto originals = [](const Dataset& d) {
    std::vector<long long> o = d.original_labels();
    if (o.empty())
      for (int c = 1; c <= d.num_classes(); ++c) o.push_back(c);
    return o;
  };
  const auto oa = originals(a);
  const auto ob = originals(b);
  std::vector<long long> all = oa;
  all.insert(all.end(), ob.begin(), ob.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  auto compact = [&](long long v) {
    return static_cast<int>(std::lower_bound(all.begin(), all.end(), v) - all.begin()) + 1;
  };
  FeatureMatrix x(static_cast<Eigen::Index>(a.size() + b.size()), static_cast<Eigen::Index>(a.dimension()));
  x.topRows(static_cast<Eigen::Index>(a.size())) = a.features();
  x.bottomRows(static_cast<Eigen::Index>(b.size())) = b.features();
  std::vector<int> labels;
  labels.reserve(a.size() + b.size());
  for (auto y : a.labels()) labels.push_back(compact(oa[static_cast<std::size_t>(y - 1)]));
  for (auto y : b.labels()) labels.push_back(compact(ob[static_cast<std::size_t>(y - 1)]));
  return Dataset(std::move(x), std::move(labels), static_cast<int>(all.size()), all);
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

std::string slug(Booster b) {
  std::string s(booster_name(b));
  for (char& c : s) c = c == '.' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void write_trial_files(const std::filesystem::path& dir, const TrialReport& rep, bool correlation) {
  std::filesystem::create_directories(dir);
  for (const auto& run : rep.runs) {
    const std::string stem = slug(run.booster) + "_T" + std::to_string(run.rounds);
    std::ostringstream curve;
    write_trace_csv(curve, run.trace);
    write_file(dir / (stem + "_curve.csv"), curve.str());
    std::ostringstream margin;
    margin.precision(17);
    margin << "iteration,min_margin\n";
    for (std::size_t t = 0; t < run.trace.min_margin.size(); ++t)
      margin << t + 1 << ',' << run.trace.min_margin[t] << '\n';
    write_file(dir / (stem + "_margin.csv"), margin.str());
    if (!run.dual_trace.empty()) {
      std::ostringstream dual;
      write_dual_trace_csv(dual, run.dual_trace);
      write_file(dir / (stem + "_dual.csv"), dual.str());
    }
    if (correlation && run.trace.dual) {
      std::ostringstream corr;
      write_correlation_csv(corr, correlation_trace(*run.trace.dual));
      write_file(dir / (stem + "_correlation.csv"), corr.str());
    }
    std::ostringstream ens;
    write_ensemble(ens, run.ensemble);
    write_file(dir / (stem + "_ensemble.txt"), ens.str());
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  validate(cfg);
  Dataset data = load_dataset(cfg.dataset, cfg.format);
  std::optional<Dataset> fixed_test;
  if (!cfg.test_dataset.empty()) {
    const Dataset test = load_dataset(cfg.test_dataset, cfg.format);
    const Dataset merged = merge_datasets(data, test);
    std::vector<std::size_t> head(data.size()), tail(test.size());
    std::iota(head.begin(), head.end(), std::size_t{0});
    std::iota(tail.begin(), tail.end(), data.size());
    if (cfg.keep_split) {
      fixed_test = merged.subset(tail);
      data = merged.subset(head);
    } else {
      data = merged;
    }
  }

  ExperimentResult result;
  result.reports.resize(cfg.trials);
  std::vector<std::string> logs(cfg.trials);
  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.trials; i = next++) {
      std::ostringstream trial_log;
      result.reports[i] = run_trial(cfg, data, fixed_test ? &*fixed_test : nullptr, i, &trial_log);
      logs[i] = trial_log.str();
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (log)
    for (const auto& l : logs) *log << l;

  result.summary = summarize(cfg, result.reports);
  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    const std::string name = cfg.dataset.stem().string();
    std::ostringstream summary, trials, manifest;
    write_summary_csv(summary, name, cfg, result.summary);
    write_trials_csv(trials, result.reports);
    write_manifest(manifest, cfg, result.reports);
    write_file(cfg.out / "summary.csv", summary.str());
    write_file(cfg.out / "trials.csv", trials.str());
    write_file(cfg.out / "manifest.txt", manifest.str());
    for (const auto& rep : result.reports) {
      char dir[32];
      std::snprintf(dir, sizeof dir, "trial_%03zu", rep.trial);
      write_trial_files(cfg.out / dir, rep, cfg.write_correlation);
    }
  }
  return result;
}

}  // namespace mcboost
