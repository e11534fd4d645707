#include "mcboost/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mcboost/error.hpp"

namespace mcboost {

std::vector<int> decode_scores(const Eigen::MatrixXd& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c)
      if (scores(i, c) > scores(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best) + 1;
  }
  return out;
}

int decode(const Ensemble& e, std::span<const double> x) {
  if (e.size() == 0) throw ConfigError("cannot decode with an empty ensemble");
  std::vector<double> scores(static_cast<std::size_t>(e.classes()), 0.0);
  for (std::size_t j = 0; j < e.size(); ++j) {
    for (std::size_t m = 0; m < e.rounds[j].size(); ++m) {
      const double h = e.weights[j] * predict(e.rounds[j][m], x);
      const int col = e.column_of(j, m);
      for (int c = 0; c < e.classes(); ++c) scores[static_cast<std::size_t>(c)] += h * e.code(c, col);
    }
  }
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin()) + 1;
}

double multiclass_error(const Eigen::MatrixXd& scores, std::span<const int> labels) {
  const auto predicted = decode_scores(scores);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) wrong += predicted[i] != labels[i] ? 1 : 0;
  return labels.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(labels.size());
}

double multiclass_error(const Ensemble& e, const Dataset& d) {
  if (e.size() == 0) throw ConfigError("cannot evaluate an empty ensemble");
  if (e.classes() != d.num_classes())
    throw ConfigError("ensemble has " + std::to_string(e.classes()) + " classes, data has " +
                      std::to_string(d.num_classes()));
  PredictionCache cache(d);
  cache.sync(e);
  return multiclass_error(class_scores(e, cache, e.weights), d.labels());
}

MarginReport min_margin(const Ensemble& e, const PredictionCache& cache,
                        std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw ConfigError("margins need a positive coefficient sum");
  const Dataset& d = cache.data();
  const std::size_t n = d.size();
  MarginReport report;
  report.weight_sum = total;
  report.margins.resize(n);
  if (e.variant == Variant::MO) {
    const int length = e.code.length();
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), length);
    for (std::size_t j = 0; j < weights.size(); ++j) {
      const auto out = cache.outputs(j);
      for (std::size_t i = 0; i < n; ++i)
        for (int l = 0; l < length; ++l)
          f(static_cast<Eigen::Index>(i), l) += weights[j] * out[i * static_cast<std::size_t>(length) + static_cast<std::size_t>(l)];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int y = d.label(i) - 1;
      double m = std::numeric_limits<double>::infinity();
      for (int l = 0; l < length; ++l) m = std::min(m, e.code(y, l) * f(static_cast<Eigen::Index>(i), l));
      report.margins[i] = m / total;
    }
  } else {
    const auto scores = class_scores(e, cache, weights);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const int y = d.label(i) - 1;
      double m = std::numeric_limits<double>::infinity();
      for (int c = 0; c < e.classes(); ++c)
        if (c != y) m = std::min(m, scores(row, y) - scores(row, c));
      report.margins[i] = m / total;
    }
  }
  report.minimum = *std::min_element(report.margins.begin(), report.margins.end());
  return report;
}

MarginReport min_margin(const Ensemble& e, const Dataset& d) {
  if (e.classes() != d.num_classes()) throw ConfigError("class count mismatch");
  PredictionCache cache(d);
  cache.sync(e);
  return min_margin(e, cache, e.weights);
}

CorrelationTrace correlation_trace(const DualHistory& history) {
  CorrelationTrace trace;
  for (std::size_t t = 0; t < history.snapshots.size(); ++t) {
    const auto& snap = history.snapshots[t];
    if (snap.u.size() != history.margins.rows()) throw ConfigError("dual snapshot has the wrong size");
    std::vector<double> row;
    for (std::size_t j = 0; j <= t && j < history.margins.cols(); ++j) {
      const auto col = history.margins.column(j);
      double s = 0.0;
      for (std::size_t k = 0; k < col.size(); ++k) s += snap.u[k] * col[k];
      row.push_back(s);
    }
    trace.entries.push_back(std::move(row));
    trace.r.push_back(snap.r);
  }
  return trace;
}

namespace {

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t k = 0; k < order.size();) {
    std::size_t end = k;
    while (end + 1 < order.size() && values[order[end + 1]] == values[order[k]]) ++end;
    const double rank = 0.5 * static_cast<double>(k + end) + 1.0;
    for (std::size_t m = k; m <= end; ++m) ranks[order[m]] = rank;
    k = end + 1;
  }
  return ranks;
}

}  // namespace

double ranksum_test(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ConfigError("rank-sum test needs two non-empty samples");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  const std::size_t n1 = a.size();
  const std::size_t n = pooled.size();
  const double observed = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);
  const double expected = static_cast<double>(n1) * static_cast<double>(n + 1) / 2.0;
  const double deviation = std::abs(observed - expected);

  if (n <= kRankSumExactLimit) {
    // Enumerate every assignment of n1 of the pooled ranks to the first sample.
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n1), true);
    std::size_t total = 0, extreme = 0;
    do {
      double w = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        if (pick[k]) w += ranks[k];
      ++total;
      if (std::abs(w - expected) >= deviation - 1e-9) ++extreme;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return static_cast<double>(extreme) / static_cast<double>(total);
  }

  const double n1d = static_cast<double>(n1);
  const double n2d = static_cast<double>(n - n1);
  const double nd = static_cast<double>(n);
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t k = 0; k < n;) {
    std::size_t end = k;
    while (end + 1 < n && sorted[end + 1] == sorted[k]) ++end;
    const double t = static_cast<double>(end - k + 1);
    tie_term += t * t * t - t;
    k = end + 1;
  }
  const double variance = n1d * n2d / 12.0 * ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
  if (!(variance > 0.0)) return 1.0;
  const double z = std::max(0.0, deviation - 0.5) / std::sqrt(variance);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

void write_correlation_csv(std::ostream& out, const CorrelationTrace& trace) {
  std::ostringstream s;
  s.precision(17);
  s << "round,past_round,inner_product,r\n";
  for (std::size_t t = 0; t < trace.entries.size(); ++t)
    for (std::size_t j = 0; j < trace.entries[t].size(); ++j)
      s << t + 1 << ',' << j + 1 << ',' << trace.entries[t][j] << ',' << trace.r[t] << '\n';
  out << s.str();
}

}  // namespace mcboost
