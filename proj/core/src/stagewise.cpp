#include "mcboost/stagewise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <ostream>
#include <sstream>

#include "mcboost/error.hpp"
#include "trace_recorder.hpp"

namespace mcboost {

double clamp_epsilon(double epsilon) {
  return std::clamp(epsilon, kEpsilonFloor, 1.0 - kEpsilonFloor);
}

double boost_coefficient(double epsilon, double scale) {
  const double e = clamp_epsilon(epsilon);
  return scale * std::log((1.0 - e) / e);
}

namespace {

double total(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double normalize(std::vector<double>& v) {
  const double sum = total(v);
  for (double& x : v) x /= sum;
  return sum;
}

// exp(logs - max(logs)): weights recovered from their logarithms when the
// plain copies have underflowed to zero.
void from_logs(std::span<const double> logs, std::span<double> out) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : logs) top = std::max(top, v);
  for (std::size_t k = 0; k < logs.size(); ++k) out[k] = std::exp(logs[k] - top);
}

void check_rounds(std::size_t rounds) {
  if (rounds < 1) throw ConfigError("need at least one boosting round");
}

}  // namespace

BoostResult adaboost_mo(const Dataset& train, const CodingMatrix& code, LearnerKind learner_kind,
                        std::size_t rounds, const BoostOptions& options) {
  check_rounds(rounds);
  if (code.classes() != train.num_classes())
    throw ConfigError("coding matrix rows do not match the number of classes");
  const std::size_t n = train.size();
  const auto length = static_cast<std::size_t>(code.length());
  const auto labels = train.labels();
  const Learner learner(learner_kind, train.features());

  BoostResult result;
  result.ensemble.variant = Variant::MO;
  result.ensemble.code = code;
  if (options.record_dual) result.trace.dual = DualHistory{MarginMatrix(n * length), {}};
  detail::TraceRecorder recorder(train, options);

  std::vector<double> u(n * length, 1.0 / static_cast<double>(n * length));
  std::vector<double> log_u(n * length, 0.0);
  std::vector<std::vector<int>> targets(length, std::vector<int>(n));
  for (std::size_t l = 0; l < length; ++l)
    for (std::size_t i = 0; i < n; ++i) targets[l][i] = code(labels[i] - 1, static_cast<int>(l));

  double loss = static_cast<double>(n * length);
  std::vector<double> column_weights(n);
  std::vector<double> column_logs(n);
  std::vector<int> outputs(n * length);
  for (std::size_t t = 0; t < rounds; ++t) {
    normalize(u);
    std::vector<WeakHypothesis> hyps;
    hyps.reserve(length);
    try {
      for (std::size_t l = 0; l < length; ++l) {
        double column_mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) column_mass += column_weights[i] = u[i * length + l];
        if (!(column_mass > 0.0)) {
          for (std::size_t i = 0; i < n; ++i) column_logs[i] = log_u[i * length + l];
          from_logs(column_logs, column_weights);
        }
        hyps.push_back(learner.train(targets[l], column_weights));
        for (std::size_t i = 0; i < n; ++i)
          outputs[i * length + l] = predict(hyps.back(), row_span(train.features(), i));
      }
    } catch (const Error& e) {
      detail::rethrow_with_round(e, t + 1);
    }
    double epsilon = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < length; ++l)
        if (targets[l][i] != outputs[i * length + l]) epsilon += u[i * length + l];
    const double omega = boost_coefficient(epsilon, 0.5);
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = 0; l < length; ++l) {
        const std::size_t k = i * length + l;
        u[k] = u[k] * std::exp(-omega * targets[l][i] * outputs[k]);
        log_u[k] += -omega * targets[l][i] * outputs[k];
        mass += u[k];
      }
    }
    loss *= mass;

    result.ensemble.rounds.push_back(std::move(hyps));
    result.ensemble.weights.push_back(omega);
    if (result.trace.dual) {
      result.trace.dual->margins.append(
          build_margin_column(Variant::MO, outputs, length, code, t, labels));
      result.trace.dual->snapshots.push_back(DualSnapshot{u, std::nan("")});
    }
    recorder.record(result.ensemble, epsilon, omega, loss, result.trace);
  }
  return result;
}

BoostResult adaboost_ecc(const Dataset& train, ColumnStream stream, LearnerKind learner_kind,
                         std::size_t rounds, const BoostOptions& options) {
  check_rounds(rounds);
  if (stream.classes() != train.num_classes())
    throw ConfigError("column stream class count does not match the data");
  const std::size_t n = train.size();
  const int classes = train.num_classes();
  const auto width = static_cast<std::size_t>(classes);
  const auto labels = train.labels();
  const Learner learner(learner_kind, train.features());

  BoostResult result;
  result.ensemble.variant = Variant::ECC;
  result.ensemble.code = CodingMatrix(classes, 0);
  if (options.record_dual) result.trace.dual = DualHistory{MarginMatrix(n * (width - 1)), {}};
  detail::TraceRecorder recorder(train, options);

  // u[i * C + c]; the entry of the true class stays 0.
  std::vector<double> u(n * width, 1.0 / static_cast<double>(n * (width - 1)));
  for (std::size_t i = 0; i < n; ++i) u[i * width + static_cast<std::size_t>(labels[i] - 1)] = 0.0;
  std::vector<double> log_u(n * width, 0.0);

  double loss = static_cast<double>(n * (width - 1));
  std::vector<double> d(n);
  std::vector<double> log_d(n);
  std::vector<int> targets(n);
  std::vector<int> outputs(n);
  for (std::size_t t = 0; t < rounds; ++t) {
    const auto column = stream.next_column();
    result.ensemble.code.append_column(column);
    normalize(u);
    for (std::size_t i = 0; i < n; ++i) {
      const int own = column[static_cast<std::size_t>(labels[i] - 1)];
      double di = 0.0;
      for (std::size_t c = 0; c < width; ++c)
        if (column[c] != own) di += u[i * width + c];
      d[i] = di;
      targets[i] = own;
    }
    if (!(total(d) > 0.0)) {
      // log of sum over differing classes, per example
      for (std::size_t i = 0; i < n; ++i) {
        const int own = targets[i];
        const auto y = static_cast<std::size_t>(labels[i] - 1);
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < width; ++c)
          if (c != y && column[c] != own) top = std::max(top, log_u[i * width + c]);
        double acc = 0.0;
        for (std::size_t c = 0; c < width; ++c)
          if (c != y && column[c] != own) acc += std::exp(log_u[i * width + c] - top);
        log_d[i] = top + std::log(acc);
      }
      from_logs(log_d, d);
    }
    normalize(d);
    WeakHypothesis h;
    try {
      h = learner.train(targets, d);
    } catch (const Error& e) {
      detail::rethrow_with_round(e, t + 1);
    }
    for (std::size_t i = 0; i < n; ++i) outputs[i] = predict(h, row_span(train.features(), i));
    double epsilon = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (targets[i] != outputs[i]) epsilon += d[i];
    const double omega = boost_coefficient(epsilon, 0.25);
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < width; ++c) {
        const std::size_t k = i * width + c;
        u[k] = u[k] * std::exp(-omega * (targets[i] - column[c]) * outputs[i]);
        log_u[k] += -omega * (targets[i] - column[c]) * outputs[i];
        mass += u[k];
      }
    }
    loss *= mass;

    result.ensemble.rounds.push_back({std::move(h)});
    result.ensemble.weights.push_back(omega);
    if (result.trace.dual) {
      result.trace.dual->margins.append(
          build_margin_column(Variant::ECC, outputs, 1, result.ensemble.code, t, labels));
      std::vector<double> mislabel_u;
      mislabel_u.reserve(n * (width - 1));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < width; ++c)
          if (static_cast<int>(c) != labels[i] - 1) mislabel_u.push_back(u[i * width + c]);
      result.trace.dual->snapshots.push_back(DualSnapshot{std::move(mislabel_u), std::nan("")});
    }
    recorder.record(result.ensemble, epsilon, omega, loss, result.trace);
  }
  return result;
}

void write_trace_csv(std::ostream& out, const BoostTrace& trace) {
  std::ostringstream s;
  s.precision(17);
  s << "iteration,train_err,test_err,epsilon,omega\n";
  for (std::size_t t = 0; t < trace.rounds(); ++t) {
    s << t + 1 << ',' << trace.train_error[t] << ',';
    if (t < trace.test_error.size()) s << trace.test_error[t];
    s << ',' << trace.epsilon[t] << ',' << trace.omega[t] << '\n';
  }
  out << s.str();
}

}  // namespace mcboost
