#include "mcboost/weak.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mcboost/error.hpp"

namespace mcboost {

namespace {

// Errors closer than this (in normalised weight) count as ties.
constexpr double kTieEps = 1e-12;

struct Cut {
  double error = 2.0;
  double threshold = 0.0;
  int polarity = 1;
};

std::vector<double> normalised(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw DataError("weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw DataError("weights sum to zero");
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) w /= total;
  return out;
}

double lower_extreme(double v) { return v - (1.0 + std::abs(v)); }
double upper_extreme(double v) { return v + (1.0 + std::abs(v)); }

// Scans thresholds along one sorted coordinate. `value(k)` is the value of
// the k-th example in `order`. Only strictly better cuts replace `best`, so
// earlier (smaller) thresholds and polarity +1 win ties.
template <typename ValueFn>
bool scan_cuts(std::span<const std::size_t> order, ValueFn value, std::span<const int> targets,
               std::span<const double> w, double total_pos, double total_neg, Cut& best) {
  bool improved = false;
  auto offer = [&](double error, double threshold, int polarity) {
    if (error < best.error - kTieEps) {
      best = Cut{error, threshold, polarity};
      improved = true;
    }
  };
  const std::size_t n = order.size();
  // Below the minimum everything is predicted as `polarity`.
  const double lo = lower_extreme(value(0));
  offer(total_neg, lo, 1);
  offer(total_pos, lo, -1);
  double left_pos = 0.0, left_neg = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    (targets[i] > 0 ? left_pos : left_neg) += w[i];
    const double a = value(k);
    if (k + 1 < n) {
      const double b = value(k + 1);
      if (!(b > a)) continue;
      double mid = a + (b - a) * 0.5;
      if (mid >= b) mid = a;
      offer(left_pos + (total_neg - left_neg), mid, 1);
      offer(left_neg + (total_pos - left_pos), mid, -1);
    } else {
      const double hi = upper_extreme(a);
      offer(left_pos + (total_neg - left_neg), hi, 1);
      offer(left_neg + (total_pos - left_pos), hi, -1);
    }
  }
  return improved;
}

void check_problem(const BinaryProblem& p) {
  const auto n = static_cast<std::size_t>(p.features.rows());
  if (p.targets.size() != n || p.weights.size() != n)
    throw DataError("binary problem sizes disagree");
  for (int t : p.targets)
    if (t != 1 && t != -1) throw DataError("binary targets must be +1 or -1");
}

std::pair<double, double> class_mass(std::span<const int> targets, std::span<const double> w) {
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) (targets[i] > 0 ? pos : neg) += w[i];
  return {pos, neg};
}

Stump stump_from_orders(const FeatureMatrix& x, const std::vector<std::vector<std::size_t>>& orders,
                        std::span<const int> targets, std::span<const double> raw_weights) {
  const auto w = normalised(raw_weights);
  const auto [pos, neg] = class_mass(targets, w);
  Cut best;
  Stump stump;
  for (std::size_t f = 0; f < orders.size(); ++f) {
    const auto& order = orders[f];
    const auto col = static_cast<Eigen::Index>(f);
    auto value = [&](std::size_t k) { return x(static_cast<Eigen::Index>(order[k]), col); };
    if (scan_cuts(order, value, targets, w, pos, neg, best)) {
      stump.feature = static_cast<int>(f);
      stump.threshold = best.threshold;
      stump.polarity = best.polarity;
    }
  }
  return stump;
}

std::vector<std::size_t> sorted_order(const FeatureMatrix& x, Eigen::Index col) {
  std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x(static_cast<Eigen::Index>(a), col) < x(static_cast<Eigen::Index>(b), col);
  });
  return order;
}

}  // namespace

LearnerKind parse_learner(std::string_view name) {
  if (name == "stump") return LearnerKind::Stump;
  if (name == "lda") return LearnerKind::Lda;
  throw ConfigError("unknown learner '" + std::string(name) + "' (expected stump or lda)");
}

std::string_view learner_name(LearnerKind kind) {
  return kind == LearnerKind::Stump ? "stump" : "lda";
}

double LdaHypothesis::project(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t j = 0; j < direction.size(); ++j) s += direction[j] * x[j];
  return s;
}

int predict(const WeakHypothesis& h, std::span<const double> x) {
  return std::visit([&](const auto& hyp) { return hyp.predict(x); }, h);
}

std::vector<int> predict_all(const WeakHypothesis& h, const FeatureMatrix& x) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = predict(h, row_span(x, i));
  return out;
}

Stump train_stump(const BinaryProblem& p) {
  check_problem(p);
  std::vector<std::vector<std::size_t>> orders;
  for (Eigen::Index f = 0; f < p.features.cols(); ++f) orders.push_back(sorted_order(p.features, f));
  return stump_from_orders(p.features, orders, p.targets, p.weights);
}

double lda_ridge(double scatter_trace, std::size_t dimension) {
  return scatter_trace > 0.0 ? 1e-6 * scatter_trace / static_cast<double>(dimension) : 1e-6;
}

LdaHypothesis train_lda(const BinaryProblem& p) {
  check_problem(p);
  const auto w = normalised(p.weights);
  const auto [pos, neg] = class_mass(p.targets, w);
  if (!(pos > 0.0) || !(neg > 0.0)) throw DataError("LDA needs positive weight on both classes");
  const Eigen::Index n = p.features.rows();
  const Eigen::Index d = p.features.cols();
  Eigen::VectorXd mean_pos = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd mean_neg = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto wi = w[static_cast<std::size_t>(i)];
    if (p.targets[static_cast<std::size_t>(i)] > 0)
      mean_pos += wi * p.features.row(i).transpose();
    else
      mean_neg += wi * p.features.row(i).transpose();
  }
  mean_pos /= pos;
  mean_neg /= neg;
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto wi = w[static_cast<std::size_t>(i)];
    if (wi == 0.0) continue;
    const Eigen::VectorXd centred = p.features.row(i).transpose() -
                                    (p.targets[static_cast<std::size_t>(i)] > 0 ? mean_pos : mean_neg);
    scatter.noalias() += wi * centred * centred.transpose();
  }
  scatter.diagonal().array() += lda_ridge(scatter.trace(), static_cast<std::size_t>(d));
  const Eigen::VectorXd direction = scatter.ldlt().solve(mean_pos - mean_neg);

  LdaHypothesis h;
  h.direction.assign(direction.data(), direction.data() + d);
  std::vector<double> projection(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < projection.size(); ++i) projection[i] = h.project(row_span(p.features, i));
  std::vector<std::size_t> order(projection.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return projection[a] < projection[b]; });
  Cut best;
  scan_cuts(order, [&](std::size_t k) { return projection[order[k]]; }, p.targets, w, pos, neg, best);
  h.threshold = best.threshold;
  h.polarity = best.polarity;
  return h;
}

double weighted_error(const WeakHypothesis& h, const BinaryProblem& p) {
  check_problem(p);
  const auto w = normalised(p.weights);
  double err = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (predict(h, row_span(p.features, i)) != p.targets[i]) err += w[i];
  return err;
}

Learner::Learner(LearnerKind kind, const FeatureMatrix& features) : kind_(kind), features_(&features) {
  if (kind_ == LearnerKind::Stump) {
    order_.reserve(static_cast<std::size_t>(features.cols()));
    for (Eigen::Index f = 0; f < features.cols(); ++f) order_.push_back(sorted_order(features, f));
  }
}

WeakHypothesis Learner::train(std::span<const int> targets, std::span<const double> weights) const {
  const BinaryProblem p{*features_, targets, weights};
  if (kind_ == LearnerKind::Lda) return train_lda(p);
  check_problem(p);
  return stump_from_orders(*features_, order_, targets, weights);
}

void write_hypothesis(std::ostream& out, const WeakHypothesis& h) {
  std::ostringstream line;
  line.precision(17);
  if (const auto* s = std::get_if<Stump>(&h)) {
    line << "stump " << s->feature << ' ' << s->threshold << ' ' << s->polarity;
  } else {
    const auto& l = std::get<LdaHypothesis>(h);
    line << "lda " << l.polarity << ' ' << l.threshold << ' ' << l.direction.size();
    for (double v : l.direction) line << ' ' << v;
  }
  out << line.str() << '\n';
}

WeakHypothesis parse_hypothesis(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string kind;
  in >> kind;
  auto read_double = [&]() {
    std::string tok;
    if (!(in >> tok)) throw DataError("truncated hypothesis line");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v))
      throw DataError("bad number '" + tok + "' in hypothesis line");
    return v;
  };
  auto read_sign = [&]() {
    const double v = read_double();
    if (v != 1.0 && v != -1.0) throw DataError("polarity must be +1 or -1");
    return static_cast<int>(v);
  };
  if (kind == "stump") {
    Stump s;
    const double f = read_double();
    if (f < 0 || f != std::floor(f)) throw DataError("bad stump feature index");
    s.feature = static_cast<int>(f);
    s.threshold = read_double();
    s.polarity = read_sign();
    return s;
  }
  if (kind == "lda") {
    LdaHypothesis l;
    l.polarity = read_sign();
    l.threshold = read_double();
    const double dim = read_double();
    if (dim < 1 || dim != std::floor(dim)) throw DataError("bad LDA dimension");
    for (int j = 0; j < static_cast<int>(dim); ++j) l.direction.push_back(read_double());
    return l;
  }
  throw DataError("unknown hypothesis kind '" + kind + "'");
}

}  // namespace mcboost
