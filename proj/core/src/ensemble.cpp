#include "mcboost/ensemble.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mcboost/error.hpp"

namespace mcboost {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::MO: return "MO";
    case Variant::ECC: return "ECC";
    case Variant::Hinge: return "HINGE";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  if (name == "MO") return Variant::MO;
  if (name == "ECC") return Variant::ECC;
  if (name == "HINGE") return Variant::Hinge;
  throw DataError("unknown ensemble variant '" + std::string(name) + "'");
}

double Ensemble::weight_sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

void write_ensemble(std::ostream& out, const Ensemble& e) {
  std::ostringstream s;
  s.precision(17);
  s << "mcboost-ensemble 1\n";
  s << "variant " << variant_name(e.variant) << '\n';
  s << "code " << e.code.classes() << ' ' << e.code.length() << '\n';
  for (int c = 0; c < e.code.classes(); ++c) {
    for (int l = 0; l < e.code.length(); ++l) s << (l ? " " : "") << e.code(c, l);
    s << '\n';
  }
  s << "rounds " << e.rounds.size() << '\n';
  for (std::size_t j = 0; j < e.rounds.size(); ++j) {
    s << "round " << e.weights[j] << ' ' << e.rounds[j].size() << '\n';
    for (const auto& h : e.rounds[j]) write_hypothesis(s, h);
  }
  out << s.str();
}

namespace {

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  throw DataError(std::string("ensemble file truncated before ") + what);
}

}  // namespace

Ensemble read_ensemble(std::istream& in) {
  Ensemble e;
  if (next_line(in, "header") != "mcboost-ensemble 1") throw DataError("not an ensemble file");
  {
    std::istringstream v(next_line(in, "variant"));
    std::string key, name;
    v >> key >> name;
    if (key != "variant") throw DataError("expected variant line");
    e.variant = parse_variant(name);
  }
  int classes = 0, length = 0;
  {
    std::istringstream c(next_line(in, "code"));
    std::string key;
    c >> key >> classes >> length;
    if (key != "code" || classes < 2 || length < 0) throw DataError("bad code line");
  }
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(classes));
  for (auto& r : rows) {
    std::istringstream rs(next_line(in, "code row"));
    int v;
    while (rs >> v) r.push_back(v);
    if (static_cast<int>(r.size()) != length) throw DataError("code row has wrong length");
  }
  if (length > 0) {
    e.code = CodingMatrix(rows);
  } else {
    e.code = CodingMatrix(classes, 0);
  }
  std::size_t count = 0;
  {
    std::istringstream r(next_line(in, "rounds"));
    std::string key;
    r >> key >> count;
    if (key != "rounds") throw DataError("expected rounds line");
  }
  for (std::size_t j = 0; j < count; ++j) {
    std::istringstream r(next_line(in, "round"));
    std::string key, weight;
    std::size_t k = 0;
    r >> key >> weight >> k;
    if (key != "round") throw DataError("expected round line");
    const double w = std::strtod(weight.c_str(), nullptr);
    if (!std::isfinite(w) || w < 0.0) throw DataError("round weight must be finite and nonnegative");
    e.weights.push_back(w);
    std::vector<WeakHypothesis> hyps;
    for (std::size_t m = 0; m < k; ++m) hyps.push_back(parse_hypothesis(next_line(in, "hypothesis")));
    e.rounds.push_back(std::move(hyps));
  }
  const std::size_t expected_width = e.variant == Variant::ECC ? 1 : static_cast<std::size_t>(length);
  for (const auto& r : e.rounds)
    if (r.size() != expected_width) throw DataError("round width does not match the code");
  if (e.variant == Variant::ECC && e.code.length() != static_cast<int>(e.rounds.size()))
    throw DataError("incremental code must have one column per round");
  return e;
}

void PredictionCache::sync(const Ensemble& e) {
  const FeatureMatrix& x = data_->features();
  for (std::size_t j = outputs_.size(); j < e.size(); ++j) {
    const auto& hyps = e.rounds[j];
    const std::size_t k = hyps.size();
    std::vector<int> out(data_->size() * k);
    for (std::size_t m = 0; m < k; ++m) {
      const auto col = predict_all(hyps[m], x);
      for (std::size_t i = 0; i < col.size(); ++i) out[i * k + m] = col[i];
    }
    Eigen::MatrixXd contrib = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data_->size()), e.classes());
    for (std::size_t i = 0; i < data_->size(); ++i) {
      for (std::size_t m = 0; m < k; ++m) {
        const int h = out[i * k + m];
        const int col = e.column_of(j, m);
        for (int c = 0; c < e.classes(); ++c) contrib(static_cast<Eigen::Index>(i), c) += h * e.code(c, col);
      }
    }
    outputs_.push_back(std::move(out));
    widths_.push_back(k);
    contributions_.push_back(std::move(contrib));
  }
}

Eigen::MatrixXd class_scores(const Ensemble& e, const PredictionCache& cache,
                             std::span<const double> weights) {
  Eigen::MatrixXd scores =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cache.data().size()), e.classes());
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (weights[j] != 0.0) scores.noalias() += weights[j] * cache.contribution(j);
  return scores;
}

}  // namespace mcboost
