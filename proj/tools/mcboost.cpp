// mcboost: train, evaluate and compare multiclass boosters from the command line.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcboost/coding.hpp"
#include "mcboost/corrective.hpp"
#include "mcboost/data.hpp"
#include "mcboost/error.hpp"
#include "mcboost/evaluate.hpp"
#include "mcboost/experiment.hpp"
#include "mcboost/stagewise.hpp"

namespace fs = std::filesystem;
using namespace mcboost;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return 1;
    case ErrorKind::Data:
      return 2;
    case ErrorKind::Solver:
      return 3;
  }
  return 1;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::vector<std::size_t> parse_rounds(const std::vector<std::string>& items) {
  std::vector<std::size_t> out;
  for (const auto& item : items) {
    std::stringstream s(item);
    std::string tok;
    while (std::getline(s, tok, ',')) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || tok.empty() || v < 1) throw ConfigError("bad round count '" + tok + "'");
      out.push_back(static_cast<std::size_t>(v));
    }
  }
  return out;
}

std::vector<Booster> parse_boosters(const std::vector<std::string>& items) {
  std::vector<Booster> out;
  for (const auto& item : items) {
    std::stringstream s(item);
    std::string tok;
    while (std::getline(s, tok, ',')) out.push_back(parse_booster(tok));
  }
  return out;
}

struct CommonArgs {
  std::string dataset;
  std::string test_dataset;
  std::string format = "csv";
  std::string learner = "stump";
  std::string theta = "sum";
  double epsilon = 1e-5;
  std::uint64_t seed = 1;
  int code_length = 0;
  double train_fraction = 0.7;
  std::string out;
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--dataset", a.dataset, "Training data file")->required();
  app->add_option("--test-dataset", a.test_dataset, "Separate test file (merged and resplit unless --keep-split)");
  app->add_option("--format", a.format, "csv or libsvm");
  app->add_option("--learner", a.learner, "stump or lda");
  app->add_option("--theta", a.theta, "sum, cv or a positive l1 budget");
  app->add_option("--epsilon", a.epsilon, "Column-generation stopping threshold");
  app->add_option("--seed", a.seed, "Master seed");
  app->add_option("--code-length", a.code_length, "Length of the random code used when C > 7");
  app->add_option("--train-fraction", a.train_fraction, "Share of each class used for training");
  app->add_option("--out", a.out, "Output directory");
}

ExperimentConfig base_config(const CommonArgs& a) {
  ExperimentConfig cfg;
  cfg.dataset = a.dataset;
  cfg.test_dataset = a.test_dataset;
  cfg.format = parse_data_format(a.format);
  cfg.learner = parse_learner(a.learner);
  cfg.theta = parse_theta(a.theta);
  cfg.epsilon = a.epsilon;
  cfg.seed = a.seed;
  cfg.code_length = a.code_length;
  cfg.train_fraction = a.train_fraction;
  cfg.out = a.out;
  return cfg;
}

int run_train(const CommonArgs& a, const std::string& booster_text, std::size_t rounds, bool keep_split,
              bool no_force) {
  ExperimentConfig cfg = base_config(a);
  cfg.boosters = {parse_booster(booster_text)};
  cfg.checkpoints = {rounds};
  cfg.trials = 1;
  cfg.keep_split = keep_split;
  cfg.force_rounds = !no_force;
  cfg.threads = 1;
  cfg.out.clear();
  validate(cfg);

  std::ostringstream log;
  const auto result = run_experiment(cfg, &log);
  std::cerr << log.str();
  const auto& rep = result.reports.front();
  if (!rep.error.empty()) throw SolverError(rep.error);
  const Booster b = cfg.boosters.front();
  const RunRecord* run = nullptr;
  for (const auto& r : rep.runs)
    if (r.booster == b) run = &r;
  const auto& cell = rep.cells.front();

  std::cout.precision(6);
  std::cout << booster_name(b) << " rounds=" << run->ensemble.size() << " train_err=" << cell.train_error
            << " test_err=" << cell.test_error << " min_margin=" << cell.min_margin;
  if (totally_corrective(b)) std::cout << " theta=" << cell.theta;
  std::cout << '\n';

  if (!a.out.empty()) {
    const fs::path dir = a.out;
    std::ostringstream ens, curve;
    write_ensemble(ens, run->ensemble);
    write_trace_csv(curve, run->trace);
    write_text(dir / "ensemble.txt", ens.str());
    write_text(dir / "curve.csv", curve.str());
    if (!run->dual_trace.empty()) {
      std::ostringstream dual;
      write_dual_trace_csv(dual, run->dual_trace);
      write_text(dir / "dual.csv", dual.str());
    }
    std::ostringstream manifest;
    write_manifest(manifest, cfg, result.reports);
    write_text(dir / "manifest.txt", manifest.str());
  }
  return 0;
}

int run_evaluate(const std::string& ensemble_path, const std::string& dataset, const std::string& format) {
  std::ifstream in(ensemble_path);
  if (!in) throw ConfigError("cannot open " + ensemble_path);
  const Ensemble e = read_ensemble(in);
  const Dataset d = load_dataset(dataset, parse_data_format(format));
  std::cout.precision(6);
  std::cout << "error=" << multiclass_error(e, d);
  if (e.weight_sum() > 0.0) std::cout << " min_margin=" << min_margin(e, d).minimum;
  std::cout << " examples=" << d.size() << '\n';
  return 0;
}

int run_codegen(int classes, const std::string& kind, std::uint64_t seed, int length, const std::string& out) {
  CodingMatrix m;
  if (kind == "default") m = default_code(classes, seed, length);
  else if (kind == "ova") m = one_vs_all(classes);
  else if (kind == "exhaustive") m = exhaustive_ecoc(classes);
  else if (kind == "random") {
    if (length < 1) throw ConfigError("random codes need --length");
    m = random_dense_code(classes, length, seed);
  } else {
    throw ConfigError("unknown code kind '" + kind + "' (expected default, ova, exhaustive or random)");
  }
  std::ostringstream s;
  write_code_csv(s, m);
  if (out.empty()) std::cout << s.str();
  else write_text(out, s.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiclass boosting: stage-wise and totally-corrective AdaBoost.MO / AdaBoost.ECC"};
  app.require_subcommand(1);

  CommonArgs train_args;
  std::string train_booster = "TC.MO";
  std::size_t train_rounds = 100;
  bool train_keep = false, train_no_force = false;
  auto* train = app.add_subcommand("train", "Train one booster on one stratified split");
  add_common(train, train_args);
  train->add_option("--booster", train_booster, "AB.MO, TC.MO, AB.ECC, TC.ECC or TC.HINGE");
  train->add_option("--rounds", train_rounds, "Boosting rounds")->check(CLI::PositiveNumber);
  train->add_flag("--keep-split", train_keep, "Use --dataset/--test-dataset as given");
  train->add_flag("--no-force", train_no_force, "Let column generation stop early");

  CommonArgs exp_args;
  std::vector<std::string> exp_boosters{"AB.MO,TC.MO,AB.ECC,TC.ECC"};
  std::vector<std::string> exp_rounds{"50,100,500"};
  std::size_t exp_trials = 20, exp_threads = 0;
  bool exp_keep = false, exp_prefix = false, exp_corr = false, exp_no_force = false;
  auto* experiment = app.add_subcommand("experiment", "Repeated resplits comparing boosters");
  add_common(experiment, exp_args);
  experiment->add_option("--booster", exp_boosters, "Boosters, comma separated or repeated");
  experiment->add_option("--rounds", exp_rounds, "Round checkpoints, comma separated");
  experiment->add_option("--trials", exp_trials, "Number of random resplits")->check(CLI::PositiveNumber);
  experiment->add_option("--threads", exp_threads, "Worker threads (0: all cores)");
  experiment->add_flag("--keep-split", exp_keep, "Use --dataset/--test-dataset as given in every trial");
  experiment->add_flag("--prefix-checkpoints", exp_prefix,
                       "Read corrective checkpoints off one run at the largest round count");
  experiment->add_flag("--correlation", exp_corr, "Write dual correlation traces");
  experiment->add_flag("--no-force", exp_no_force, "Let column generation stop early");

  std::string eval_ensemble, eval_dataset, eval_format = "csv";
  auto* evaluate = app.add_subcommand("evaluate", "Score a saved ensemble on a data file");
  evaluate->add_option("--ensemble", eval_ensemble, "Ensemble file written by train")->required();
  evaluate->add_option("--dataset", eval_dataset, "Data file")->required();
  evaluate->add_option("--format", eval_format, "csv or libsvm");

  int code_classes = 0, code_length = 0;
  std::string code_kind = "default", code_out;
  std::uint64_t code_seed = 1;
  auto* codegen = app.add_subcommand("codegen", "Print a coding matrix as CSV");
  codegen->add_option("--classes", code_classes, "Number of classes")->required();
  codegen->add_option("--kind", code_kind, "default, ova, exhaustive or random");
  codegen->add_option("--length", code_length, "Code length (random codes)");
  codegen->add_option("--seed", code_seed, "Seed for random codes");
  codegen->add_option("--out", code_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*train) return run_train(train_args, train_booster, train_rounds, train_keep, train_no_force);
    if (*experiment) {
      ExperimentConfig cfg = base_config(exp_args);
      cfg.boosters = parse_boosters(exp_boosters);
      cfg.checkpoints = parse_rounds(exp_rounds);
      cfg.trials = exp_trials;
      cfg.threads = exp_threads;
      cfg.keep_split = exp_keep;
      cfg.prefix_checkpoints = exp_prefix;
      cfg.write_correlation = exp_corr;
      cfg.force_rounds = !exp_no_force;
      const auto result = run_experiment(cfg, &std::cerr);
      std::ostringstream s;
      write_summary_csv(s, fs::path(cfg.dataset).stem().string(), cfg, result.summary);
      std::cout << s.str();
      return 0;
    }
    if (*evaluate) return run_evaluate(eval_ensemble, eval_dataset, eval_format);
    if (*codegen) return run_codegen(code_classes, code_kind, code_seed, code_length, code_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
