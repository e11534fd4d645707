#include "mcboost/corrective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "mcboost/error.hpp"
#include "mcboost/simplex.hpp"
#include "trace_recorder.hpp"

namespace mcboost {

namespace {

// Minimises phi(a) = sum_k exp(logs_k - a q_k) over [0, amax], assuming
// phi'(0) < 0. Safeguarded Newton on phi', evaluated with a shift so that
// nothing overflows.
double line_search(const Eigen::VectorXd& logs, const Eigen::VectorXd& q, double amax) {
  auto derivatives = [&](double a, double& d1, double& d2) {
    const Eigen::VectorXd e = logs - a * q;
    const double shift = e.maxCoeff();
    const Eigen::VectorXd s = (e.array() - shift).exp();
    d1 = -(s.array() * q.array()).sum();
    d2 = (s.array() * q.array().square()).sum();
  };
  double d1 = 0.0, d2 = 0.0;
  if (std::isfinite(amax)) {
    derivatives(amax, d1, d2);
    if (d1 <= 0.0) return amax;
  }
  double lo = 0.0;
  double hi = amax;
  double a = 0.0;
  for (int it = 0; it < 200; ++it) {
    derivatives(a, d1, d2);
    if (d1 < 0.0) lo = a;
    else if (d1 > 0.0) hi = a;
    else return a;
    double next = d2 > 0.0 ? a - d1 / d2 : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * lo + 1.0;
    if (std::abs(next - a) <= 1e-15 * (1.0 + std::abs(a))) return next;
    a = next;
    if (hi - lo <= 1e-15 * (1.0 + lo)) break;
  }
  return a;
}

Eigen::MatrixXd to_dense(const MarginMatrix& p) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(p.rows()), static_cast<Eigen::Index>(p.cols()));
  for (std::size_t j = 0; j < p.cols(); ++j) {
    const auto col = p.column(j);
    for (std::size_t k = 0; k < p.rows(); ++k) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = col[k];
  }
  return m;
}

// Fills u, r, primal and gap from w with plain loops in column order.
void finish(const MarginMatrix& p, double theta, MasterSolution& sol) {
  const std::size_t rows = p.rows();
  std::vector<double> z(rows, 0.0);
  for (std::size_t j = 0; j < p.cols(); ++j) {
    const auto col = p.column(j);
    for (std::size_t k = 0; k < rows; ++k) z[k] += col[k] * sol.w[j];
  }
  sol.u.resize(rows);
  sol.primal_value = 0.0;
  double zmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rows; ++k) {
    sol.u[k] = std::exp(-z[k]);
    sol.primal_value += sol.u[k];
    zmin = std::min(zmin, z[k]);
  }
  sol.u_normalized.resize(rows);
  double total = 0.0;
  for (std::size_t k = 0; k < rows; ++k) total += sol.u_normalized[k] = std::exp(zmin - z[k]);
  for (double& v : sol.u_normalized) v /= total;
  sol.r = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.cols(); ++j) {
    const auto col = p.column(j);
    double g = 0.0;
    for (std::size_t k = 0; k < rows; ++k) g += sol.u[k] * col[k];
    sol.r = std::max(sol.r, g);
  }
  sol.gap = sol.primal_value - dual_objective(sol.u, sol.r, theta);
}

}  // namespace

double dual_objective(std::span<const double> u, double r, double theta) {
  double v = -r * theta;
  for (double x : u) {
    if (x > 0.0) v += x - x * std::log(x);
  }
  return v;
}

MasterSolution solve_master_exp(const MarginMatrix& p, double theta, const MasterOptions& options,
                                std::span<const double> warm_start) {
  if (p.cols() < 1) throw ConfigError("master problem needs at least one column");
  if (!(theta > 0.0)) throw ConfigError("theta must be positive");
  if (warm_start.size() > p.cols()) throw ConfigError("warm start longer than the column count");
  const Eigen::MatrixXd pm = to_dense(p);
  const Eigen::Index t = pm.cols();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(t);
  double warm_total = 0.0;
  for (std::size_t j = 0; j < warm_start.size(); ++j) {
    w(static_cast<Eigen::Index>(j)) = std::max(0.0, warm_start[j]);
    warm_total += w(static_cast<Eigen::Index>(j));
  }
  if (warm_total > 0.0) w *= theta / warm_total;
  else w.setConstant(theta / static_cast<double>(t));

  MasterSolution sol;
  bool converged = false;
  double best_log_f = std::numeric_limits<double>::infinity();
  int stalled = 0;
  bool newton_stuck = false;
  double gap_ratio = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < options.max_iterations; ++it) {
    const Eigen::VectorXd a = -(pm * w);
    const double shift = a.maxCoeff();
    const Eigen::VectorXd logs = a.array() - shift;
    const Eigen::VectorXd s = logs.array().exp();
    const double mass = s.sum();
    const Eigen::VectorXd g = pm.transpose() * s;

    Eigen::Index best = 0;
    const double g_max = g.maxCoeff(&best);
    const double gap_scaled = theta * g_max - w.dot(g);
    // gap <= tol (1 + f) with both sides divided by exp(shift)
    const double scale = std::exp(-shift) + mass;
    gap_ratio = gap_scaled / scale;
    if (gap_scaled <= options.tolerance * scale) {
      converged = true;
      break;
    }
    const double log_f = shift + std::log(mass);
    if (log_f < best_log_f - 1e-15 * std::abs(log_f)) {
      best_log_f = log_f;
      stalled = 0;
    } else if (++stalled > 50) {
      break;
    }

    std::vector<Eigen::Index> face;
    for (Eigen::Index j = 0; j < t; ++j)
      if (w(j) > 0.0) face.push_back(j);
    Eigen::Index worst = face.front();
    Eigen::Index lead = face.front();
    for (auto j : face) {
      if (g(j) < g(worst)) worst = j;
      if (g(j) > g(lead)) lead = j;
    }
    const double enter_part = theta * (g_max - g(lead));
    const double face_part = theta * g(lead) - w.dot(g);

    auto pairwise = [&](Eigen::Index to, Eigen::Index from) {
      const Eigen::VectorXd q = pm.col(to) - pm.col(from);
      const double step = line_search(logs, q, w(from));
      if (step >= w(from)) {
        w(to) += w(from);
        w(from) = 0.0;
      } else {
        w(to) += step;
        w(from) -= step;
      }
    };

    if (enter_part > face_part || face.size() == 1 || newton_stuck) {
      newton_stuck = false;
      if (best == lead || enter_part <= 0.0) {
        if (lead == worst) break;
        pairwise(lead, worst);
      } else {
        pairwise(best, worst);
      }
      continue;
    }

    // Newton on the face, with d_ref = -sum of the other components so that
    // sum(d) = 0 holds exactly.
    const auto f = static_cast<Eigen::Index>(face.size());
    Eigen::Index ref = 0;
    for (Eigen::Index k = 1; k < f; ++k)
      if (w(face[static_cast<std::size_t>(k)]) > w(face[static_cast<std::size_t>(ref)])) ref = k;
    const Eigen::Index ref_col = face[static_cast<std::size_t>(ref)];
    Eigen::MatrixXd pz(pm.rows(), f - 1);
    Eigen::VectorXd gz(f - 1);
    for (Eigen::Index k = 0, c = 0; k < f; ++k) {
      if (k == ref) continue;
      const Eigen::Index col = face[static_cast<std::size_t>(k)];
      pz.col(c) = pm.col(col) - pm.col(ref_col);
      gz(c) = g(col) - g(ref_col);
      ++c;
    }
    const Eigen::MatrixXd h = pz.transpose() * s.asDiagonal() * pz;
    const Eigen::VectorXd y = h.ldlt().solve(gz);
    Eigen::VectorXd d(f);
    for (Eigen::Index k = 0, c = 0; k < f; ++k) d(k) = k == ref ? -y.sum() : y(c++);
    if (!(gz.dot(y) > 0.0) || !d.allFinite()) {
      pairwise(lead, worst);
      continue;
    }
    double amax = std::numeric_limits<double>::infinity();
    Eigen::Index block = -1;
    for (Eigen::Index k = 0; k < f; ++k) {
      if (d(k) < 0.0) {
        const double ratio = w(face[static_cast<std::size_t>(k)]) / -d(k);
        if (ratio < amax) {
          amax = ratio;
          block = k;
        }
      }
    }
    const double step = line_search(logs, pz * y, amax);
    newton_stuck = !(step > 0.0);
    for (Eigen::Index k = 0; k < f; ++k) {
      double& wj = w(face[static_cast<std::size_t>(k)]);
      wj = k == block && step >= amax ? 0.0 : std::max(0.0, wj + step * d(k));
    }
    w *= theta / w.sum();
  }
  sol.iterations = it;
  sol.w.assign(w.data(), w.data() + t);
  finish(p, theta, sol);
  // A stalled solve is accepted when it sits at the round-off floor.
  if (!converged && !(gap_ratio <= 100.0 * options.tolerance)) {
    std::ostringstream msg;
    msg << "master solver did not converge after " << it << " iterations (gap " << sol.gap << ")";
    throw SolverError(msg.str());
  }
  return sol;
}

double hinge_dual_objective(std::span<const double> u, double r, double theta) {
  double v = -r * theta;
  for (double x : u) v += x;
  return v;
}

HingeSolution solve_master_hinge(const MarginMatrix& p, std::size_t rows_per_example, double theta) {
  if (p.cols() < 1) throw ConfigError("master problem needs at least one column");
  if (!(theta > 0.0)) throw ConfigError("theta must be positive");
  if (rows_per_example < 1 || p.rows() % rows_per_example != 0)
    throw ConfigError("hinge rows do not split evenly into examples");
  const auto rows = static_cast<Eigen::Index>(p.rows());
  const auto t = static_cast<Eigen::Index>(p.cols());
  const auto n = static_cast<Eigen::Index>(p.rows() / rows_per_example);
  const auto per = static_cast<Eigen::Index>(rows_per_example);

  LinearProgram lp;
  lp.rows = Eigen::MatrixXd::Zero(rows + 1, t + n);
  lp.rows.topLeftCorner(rows, t) = to_dense(p);
  for (Eigen::Index k = 0; k < rows; ++k) lp.rows(k, t + k / per) = 1.0;
  lp.rows.row(rows).head(t).setOnes();
  lp.sense.assign(static_cast<std::size_t>(rows), RowSense::GreaterEqual);
  lp.sense.push_back(RowSense::Equal);
  lp.rhs = Eigen::VectorXd::Ones(rows + 1);
  lp.rhs(rows) = theta;
  lp.objective = Eigen::VectorXd::Zero(t + n);
  lp.objective.tail(n).setOnes();

  const LpSolution lps = solve_lp(lp);
  if (lps.status != LpStatus::Optimal) throw SolverError("hinge master LP was not solved to optimality");

  HingeSolution sol;
  sol.pivots = lps.pivots;
  sol.w.assign(lps.x.data(), lps.x.data() + t);
  sol.slacks.assign(lps.x.data() + t, lps.x.data() + t + n);
  sol.primal_value = lps.objective;
  sol.u.resize(static_cast<std::size_t>(rows));
  for (Eigen::Index k = 0; k < rows; ++k) sol.u[static_cast<std::size_t>(k)] = std::max(0.0, lps.duals(k));
  sol.u_true.assign(static_cast<std::size_t>(n), 1.0);
  for (Eigen::Index k = 0; k < rows; ++k) sol.u_true[static_cast<std::size_t>(k / per)] -= sol.u[static_cast<std::size_t>(k)];
  sol.r = -lps.duals(rows);
  sol.dual_value = hinge_dual_objective(sol.u, sol.r, theta);
  return sol;
}

namespace {

// Hypothesis returned when a subproblem carries no weight; it predicts +1
// everywhere and adds nothing to the score.
WeakHypothesis constant_hypothesis(const FeatureMatrix& x) {
  const double top = x.rows() > 0 ? x.col(0).maxCoeff() : 0.0;
  return Stump{0, top + 1.0 + std::abs(top), -1};
}

double total(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Trains on `weights` unless they vanish; writes outputs into column k of a
// row-major N x width buffer and returns the normalised weighted error.
double train_into(const Learner& learner, const Dataset& train, std::span<const int> targets,
                  std::span<const double> weights, OracleResult& out, std::size_t k, std::size_t width) {
  const double mass = total(weights);
  WeakHypothesis h = mass > 0.0 ? learner.train(targets, weights) : constant_hypothesis(train.features());
  double err = 0.0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const int o = predict(h, row_span(train.features(), i));
    out.outputs[i * width + k] = o;
    if (o != targets[i]) err += weights[i];
  }
  out.hypotheses.push_back(std::move(h));
  return err;
}

}  // namespace

OracleResult cg_oracle(Variant v, std::span<const double> u, CodeSource& source, const Learner& learner,
                       const Dataset& train) {
  const std::size_t n = train.size();
  const int classes = train.num_classes();
  const auto labels = train.labels();
  OracleResult out;
  std::vector<int> targets(n);
  std::vector<double> weights(n);
  const double mass = total(u);

  if (v == Variant::ECC) {
    auto* stream = std::get_if<ColumnStream>(&source);
    if (!stream) throw ConfigError("ECC needs a column stream");
    if (u.size() != n * static_cast<std::size_t>(classes - 1)) throw ConfigError("dual weights have the wrong size");
    out.code_column = stream->next_column();
    const auto& col = out.code_column;
    for (std::size_t i = 0; i < n; ++i) {
      const int y = labels[i] - 1;
      targets[i] = col[static_cast<std::size_t>(y)];
      double d = 0.0;
      std::size_t row = i * static_cast<std::size_t>(classes - 1);
      for (int c = 0; c < classes; ++c) {
        if (c == y) continue;
        if (col[static_cast<std::size_t>(c)] != targets[i]) d += u[row];
        ++row;
      }
      weights[i] = d;
    }
    out.outputs.resize(n);
    const double wsum = total(weights);
    const double err = train_into(learner, train, targets, weights, out, 0, 1);
    out.epsilon = wsum > 0.0 ? err / wsum : 0.0;
    CodingMatrix one(classes, 0);
    one.append_column(col);
    out.margins = build_margin_column(v, out.outputs, 1, one, 0, labels);
  } else {
    const auto* code = std::get_if<CodingMatrix>(&source);
    if (!code) throw ConfigError("fixed-code variants need a coding matrix");
    const auto length = static_cast<std::size_t>(code->length());
    const std::size_t expected = v == Variant::MO ? n * length : n * static_cast<std::size_t>(classes - 1);
    if (u.size() != expected) throw ConfigError("dual weights have the wrong size");
    out.outputs.resize(n * length);
    double err = 0.0;
    double pooled = 0.0;
    for (std::size_t l = 0; l < length; ++l) {
      const int li = static_cast<int>(l);
      for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i] - 1;
        targets[i] = (*code)(y, li);
        if (v == Variant::MO) {
          weights[i] = u[i * length + l];
        } else {
          double d = 0.0;
          std::size_t row = i * static_cast<std::size_t>(classes - 1);
          for (int c = 0; c < classes; ++c) {
            if (c == y) continue;
            if ((*code)(c, li) != targets[i]) d += u[row];
            ++row;
          }
          weights[i] = d;
        }
      }
      pooled += total(weights);
      err += train_into(learner, train, targets, weights, out, l, length);
    }
    out.epsilon = v == Variant::MO ? (mass > 0.0 ? err / mass : 0.0) : (pooled > 0.0 ? err / pooled : 0.0);
    out.margins = build_margin_column(v, out.outputs, length, *code, 0, labels);
  }
  out.score = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) out.score += u[k] * out.margins[k];
  return out;
}

MultiBoostResult multiboost(const Dataset& train, Variant variant, CodeSource source, LearnerKind learner_kind,
                            std::size_t rounds, const MultiBoostOptions& options) {
  if (rounds < 1) throw ConfigError("need at least one boosting round");
  if (!(options.theta > 0.0)) throw ConfigError("theta must be positive");
  if (!(options.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const int classes = train.num_classes();
  const std::size_t n = train.size();
  const auto labels = train.labels();

  MultiBoostResult result;
  result.ensemble.variant = variant;
  if (variant == Variant::ECC) {
    const auto* stream = std::get_if<ColumnStream>(&source);
    if (!stream) throw ConfigError("ECC needs a column stream");
    if (stream->classes() != classes) throw ConfigError("column stream class count does not match the data");
    result.ensemble.code = CodingMatrix(classes, 0);
  } else {
    const auto* code = std::get_if<CodingMatrix>(&source);
    if (!code) throw ConfigError("fixed-code variants need a coding matrix");
    if (code->classes() != classes) throw ConfigError("coding matrix rows do not match the number of classes");
    result.ensemble.code = *code;
  }
  const std::size_t k_rows = margin_rows(variant, n, classes, result.ensemble.code.length());
  const Learner learner(learner_kind, train.features());
  detail::TraceRecorder recorder(train, options.boost);
  if (options.boost.record_dual) result.trace.dual = DualHistory{MarginMatrix(k_rows), {}};

  MarginMatrix p(k_rows);
  std::vector<double> u(k_rows, 1.0 / static_cast<double>(k_rows));
  std::vector<double> u_search = u;  // scale-free copy handed to the oracle
  double r = 0.0;
  double r_search = 0.0;
  std::vector<double> w;

  for (std::size_t t = 0; t < rounds; ++t) {
    OracleResult oracle;
    try {
      oracle = cg_oracle(variant, u_search, source, learner, train);
    } catch (const Error& e) {
      detail::rethrow_with_round(e, t + 1);
    }
    if (!(oracle.score > 0.0)) {
      result.stop = StopReason::DegenerateOracle;
      break;
    }
    if (!options.force_rounds && oracle.score < r_search + options.epsilon) {
      result.stop = StopReason::Converged;
      break;
    }
    double score = 0.0;
    for (std::size_t k = 0; k < k_rows; ++k) score += u[k] * oracle.margins[k];

    if (variant == Variant::ECC) result.ensemble.code.append_column(oracle.code_column);
    result.ensemble.rounds.push_back(std::move(oracle.hypotheses));
    if (result.trace.dual) result.trace.dual->margins.append(oracle.margins);
    p.append(std::move(oracle.margins));

    DualTraceRow row;
    row.round = t + 1;
    row.score = score;
    try {
      if (variant == Variant::Hinge) {
        const auto sol = solve_master_hinge(p, static_cast<std::size_t>(classes - 1), options.theta);
        w = sol.w;
        u = sol.u;
        r = sol.r;
        const double mass = total(u);
        u_search = u;
        r_search = r;
        if (mass > 0.0) {
          for (double& x : u_search) x /= mass;
          r_search = r / mass;
        }
        row.primal = sol.primal_value;
        row.dual = sol.dual_value;
      } else {
        const auto sol = solve_master_exp(p, options.theta, options.master, w);
        w = sol.w;
        u = sol.u;
        r = sol.r;
        u_search = sol.u_normalized;
        r_search = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < p.cols(); ++j) {
          const auto col = p.column(j);
          double g = 0.0;
          for (std::size_t k = 0; k < k_rows; ++k) g += u_search[k] * col[k];
          r_search = std::max(r_search, g);
        }
        row.primal = sol.primal_value;
        row.dual = dual_objective(sol.u, sol.r, options.theta);
      }
    } catch (const Error& e) {
      detail::rethrow_with_round(e, t + 1);
    }
    row.r = r;
    row.gap = row.primal - row.dual;
    result.dual_trace.push_back(row);

    result.ensemble.weights = w;
    if (result.trace.dual) result.trace.dual->snapshots.push_back(DualSnapshot{u, r});
    recorder.record(result.ensemble, oracle.epsilon, w.back(), row.primal, result.trace);
  }
  return result;
}

void write_dual_trace_csv(std::ostream& out, std::span<const DualTraceRow> rows) {
  std::ostringstream s;
  s.precision(17);
  s << "round,score,r,primal,dual,gap\n";
  for (const auto& row : rows)
    s << row.round << ',' << row.score << ',' << row.r << ',' << row.primal << ',' << row.dual << ',' << row.gap << '\n';
  out << s.str();
}

}  // namespace mcboost
