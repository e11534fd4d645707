#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "mcboost/ensemble.hpp"
#include "mcboost/stagewise.hpp"

#ifndef MCBOOST_DATA_DIR
#define MCBOOST_DATA_DIR "data"
#endif

namespace mcboost::testing {

std::filesystem::path data_file(const std::string& name) { return std::filesystem::path(MCBOOST_DATA_DIR) / name; }

Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels, int classes) {
  FeatureMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return Dataset(std::move(x), labels, classes);
}

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t dim, int classes, double spread) {
  std::vector<std::vector<double>> centres(static_cast<std::size_t>(classes), std::vector<double>(dim));
  for (auto& c : centres)
    for (double& v : c) v = 4.0 * rng.uniform() - 2.0;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % static_cast<std::size_t>(classes));
    std::vector<double> row(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      // sum of uniforms, roughly normal
      double z = 0.0;
      for (int k = 0; k < 4; ++k) z += rng.uniform() - 0.5;
      row[j] = centres[static_cast<std::size_t>(y)][j] + spread * z;
    }
    rows.push_back(row);
    labels.push_back(y + 1);
  }
  return make_dataset(rows, labels, classes);
}

std::vector<Dataset> toy_instances() {
  std::vector<Dataset> out;
  out.push_back(make_dataset({{0.0, 0.0}, {0.2, 0.1}, {0.1, 0.3}, {2.0, 0.1}, {2.2, 0.4},
                              {1.9, 0.2}, {1.0, 2.0}, {1.2, 2.3}},
                             {1, 1, 1, 2, 2, 2, 3, 3}, 3));
  out.push_back(make_dataset({{0.1, 1.0}, {0.9, 0.2}, {0.5, 0.5}, {1.4, 0.3}, {1.1, 1.6}, {0.3, 1.3},
                              {1.8, 1.1}, {0.7, 1.9}, {1.5, 0.7}, {0.2, 0.4}, {1.2, 1.2}, {0.8, 0.9}},
                             {1, 2, 1, 2, 3, 3, 2, 3, 1, 1, 3, 2}, 3));
  Rng rng(20240917);
  out.push_back(random_dataset(rng, 15, 3, 4, 2.5));
  return out;
}

double brute_force_stump_error(const FeatureMatrix& x, std::span<const int> targets,
                               std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::vector<double> cuts{-std::numeric_limits<double>::infinity()};
    for (Eigen::Index i = 0; i < x.rows(); ++i) cuts.push_back(x(i, f));
    for (double cut : cuts) {
      for (int pol : {1, -1}) {
        double err = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          const int h = x(i, f) > cut ? pol : -pol;
          if (h != targets[static_cast<std::size_t>(i)]) err += weights[static_cast<std::size_t>(i)];
        }
        best = std::min(best, err / total);
      }
    }
  }
  return best;
}

namespace {

double golden(const std::function<double(double)>& f, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-13 * (1.0 + hi - lo); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return std::min({f(lo), f(hi), f(0.5 * (a + b))});
}

}  // namespace

double grid_master_minimum(const MarginMatrix& p, double theta) {
  const std::size_t t = p.cols();
  auto loss = [&](const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.rows(); ++k) {
      double z = 0.0;
      for (std::size_t j = 0; j < t; ++j) z += p(k, j) * w[j];
      s += std::exp(-z);
    }
    return s;
  };
  if (t == 1) return loss({theta});
  if (t == 2) return golden([&](double a) { return loss({a, theta - a}); }, 0.0, theta);
  return golden(
      [&](double a) {
        return golden([&](double b) { return loss({a, b, theta - a - b}); }, 0.0, theta - a);
      },
      0.0, theta);
}

double vertex_enumeration(const std::vector<std::vector<double>>& a, const std::vector<int>& sense,
                          const std::vector<double>& b, const std::vector<double>& c) {
  const std::size_t n = c.size();
  // constraint list: the LP rows, then x_j >= 0
  std::vector<std::vector<double>> rows = a;
  std::vector<double> rhs = b;
  std::vector<int> kinds = sense;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    rows.push_back(e);
    rhs.push_back(0.0);
    kinds.push_back(1);
  }
  // every vertex is cut out by n linearly independent active constraints
  const std::size_t total = rows.size();
  if (total < n) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> mask(total, 0);
  std::fill(mask.end() - static_cast<std::ptrdiff_t>(n), mask.end(), 1);
  do {
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < total; ++k)
      if (mask[k]) active.push_back(k);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    for (std::size_t q = 0; q < n; ++q) {
      for (std::size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(j)) = rows[active[q]][j];
      r(static_cast<Eigen::Index>(q)) = rhs[active[q]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (lu.rank() < static_cast<Eigen::Index>(n)) continue;
    const Eigen::VectorXd x = lu.solve(r);
    bool feasible = true;
    for (std::size_t k = 0; k < rows.size() && feasible; ++k) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < n; ++j) lhs += rows[k][j] * x(static_cast<Eigen::Index>(j));
      const double slack = 1e-9 * (1.0 + std::abs(rhs[k]));
      if (kinds[k] > 0) feasible = lhs >= rhs[k] - slack;
      else if (kinds[k] < 0) feasible = lhs <= rhs[k] + slack;
      else feasible = std::abs(lhs - rhs[k]) <= slack;
    }
    if (!feasible) continue;
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += c[j] * x(static_cast<Eigen::Index>(j));
    best = std::min(best, obj);
  } while (std::next_permutation(mask.begin(), mask.end()));
  return best;
}

double hinge_master_minimum(const MarginMatrix& p, std::size_t rows_per_example, double theta) {
  const std::size_t t = p.cols();
  const std::size_t n = p.rows() / rows_per_example;
  std::vector<std::vector<double>> a;
  std::vector<int> sense;
  std::vector<double> b;
  for (std::size_t k = 0; k < p.rows(); ++k) {
    std::vector<double> row(t + n, 0.0);
    for (std::size_t j = 0; j < t; ++j) row[j] = p(k, j);
    row[t + k / rows_per_example] = 1.0;
    a.push_back(row);
    sense.push_back(1);
    b.push_back(1.0);
  }
  std::vector<double> sum(t + n, 0.0);
  std::fill(sum.begin(), sum.begin() + static_cast<std::ptrdiff_t>(t), 1.0);
  a.push_back(sum);
  sense.push_back(0);
  b.push_back(theta);
  std::vector<double> c(t + n, 0.0);
  std::fill(c.begin() + static_cast<std::ptrdiff_t>(t), c.end(), 1.0);
  return vertex_enumeration(a, sense, b, c);
}

ReferenceRun reference_mo(const Dataset& d, const CodingMatrix& m, std::size_t rounds) {
  const std::size_t n = d.size();
  const auto len = static_cast<std::size_t>(m.length());
  const FeatureMatrix& x = d.features();
  std::vector<std::vector<double>> u(n, std::vector<double>(len, 1.0 / static_cast<double>(n * len)));
  ReferenceRun run;
  for (std::size_t t = 0; t < rounds; ++t) {
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < len; ++l) z += u[i][l];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < len; ++l) u[i][l] /= z;

    std::vector<std::vector<int>> h(n, std::vector<int>(len));
    for (std::size_t l = 0; l < len; ++l) {
      std::vector<int> target(n);
      std::vector<double> weight(n);
      for (std::size_t i = 0; i < n; ++i) {
        target[i] = m(d.label(i) - 1, static_cast<int>(l));
        weight[i] = u[i][l];
      }
      const Stump s = train_stump(BinaryProblem{x, target, weight});
      for (std::size_t i = 0; i < n; ++i) h[i][l] = s.predict(row_span(x, i));
    }

    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < len; ++l)
        if (m(d.label(i) - 1, static_cast<int>(l)) != h[i][l]) eps += u[i][l];
    const double e = std::min(std::max(eps, 1e-10), 1.0 - 1e-10);
    const double omega = 0.5 * std::log((1.0 - e) / e);

    std::vector<double> flat;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = 0; l < len; ++l) {
        u[i][l] = u[i][l] * std::exp(-omega * m(d.label(i) - 1, static_cast<int>(l)) * h[i][l]);
        flat.push_back(u[i][l]);
      }
    }
    run.epsilon.push_back(eps);
    run.omega.push_back(omega);
    run.u.push_back(flat);
  }
  return run;
}

ReferenceRun reference_ecc(const Dataset& d, std::uint64_t stream_seed, std::size_t rounds) {
  const std::size_t n = d.size();
  const int classes = d.num_classes();
  const FeatureMatrix& x = d.features();
  ColumnStream stream(classes, stream_seed);
  std::vector<std::vector<double>> u(n, std::vector<double>(static_cast<std::size_t>(classes)));
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < classes; ++c)
      u[i][static_cast<std::size_t>(c)] =
          c == d.label(i) - 1 ? 0.0 : 1.0 / static_cast<double>(n * static_cast<std::size_t>(classes - 1));
  ReferenceRun run;
  for (std::size_t t = 0; t < rounds; ++t) {
    const std::vector<int> col = stream.next_column();
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < classes; ++c) z += u[i][static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < classes; ++c) u[i][static_cast<std::size_t>(c)] /= z;

    std::vector<int> target(n);
    std::vector<double> dw(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      target[i] = col[static_cast<std::size_t>(d.label(i) - 1)];
      for (int c = 0; c < classes; ++c)
        if (col[static_cast<std::size_t>(c)] != target[i]) dw[i] += u[i][static_cast<std::size_t>(c)];
    }
    double dz = 0.0;
    for (double v : dw) dz += v;
    for (double& v : dw) v /= dz;

    const Stump s = train_stump(BinaryProblem{x, target, dw});
    std::vector<int> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = s.predict(row_span(x, i));

    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (h[i] != target[i]) eps += dw[i];
    const double e = std::min(std::max(eps, 1e-10), 1.0 - 1e-10);
    const double omega = 0.25 * std::log((1.0 - e) / e);

    std::vector<double> flat;
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < classes; ++c) {
        auto& v = u[i][static_cast<std::size_t>(c)];
        v = v * std::exp(-omega * (target[i] - col[static_cast<std::size_t>(c)]) * h[i]);
        if (c != d.label(i) - 1) flat.push_back(v);
      }
    }
    run.epsilon.push_back(eps);
    run.omega.push_back(omega);
    run.u.push_back(flat);
  }
  return run;
}

MarginMatrix random_margin_matrix(Rng& rng, bool ecc, std::size_t n, int classes, std::size_t columns,
                                  std::vector<int>* labels_out) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = i < static_cast<std::size_t>(classes) ? static_cast<int>(i) + 1
                                                      : static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))) + 1;
  if (labels_out) *labels_out = labels;
  if (ecc) {
    ColumnStream stream(classes, rng.next());
    CodingMatrix code(classes, 0);
    MarginMatrix p(margin_rows(Variant::ECC, n, classes, 0));
    for (std::size_t t = 0; t < columns; ++t) {
      code.append_column(stream.next_column());
      std::vector<int> out(n);
      for (int& v : out) v = (rng.next() & 1U) ? 1 : -1;
      p.append(build_margin_column(Variant::ECC, out, 1, code, t, labels));
    }
    return p;
  }
  const CodingMatrix code = default_code(classes, rng.next());
  const auto len = static_cast<std::size_t>(code.length());
  MarginMatrix p(margin_rows(Variant::MO, n, classes, code.length()));
  for (std::size_t t = 0; t < columns; ++t) {
    std::vector<int> out(n * len);
    for (int& v : out) v = (rng.next() & 1U) ? 1 : -1;
    p.append(build_margin_column(Variant::MO, out, len, code, t, labels));
  }
  return p;
}

}  // namespace mcboost::testing
