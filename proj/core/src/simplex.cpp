#include "mcboost/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "mcboost/error.hpp"

namespace mcboost {

namespace {

class Tableau {
 public:
  Tableau(const LinearProgram& lp, double tol) : tol_(tol) {
    m_ = lp.rows.rows();
    n_ = lp.rows.cols();
    Eigen::Index slacks = 0;
    for (auto s : lp.sense) slacks += s == RowSense::Equal ? 0 : 1;
    slack_begin_ = n_;
    art_begin_ = n_ + slacks;
    cols_ = art_begin_ + m_;
    t_ = Eigen::MatrixXd::Zero(m_, cols_);
    beta_.resize(m_);
    sign_.resize(m_);
    basis_.resize(static_cast<std::size_t>(m_));
    Eigen::Index slack = slack_begin_;
    for (Eigen::Index k = 0; k < m_; ++k) {
      const double flip = lp.rhs(k) < 0.0 ? -1.0 : 1.0;
      sign_(k) = flip;
      t_.row(k).head(n_) = flip * lp.rows.row(k);
      const auto s = lp.sense[static_cast<std::size_t>(k)];
      if (s == RowSense::LessEqual) t_(k, slack++) = flip;
      if (s == RowSense::GreaterEqual) t_(k, slack++) = -flip;
      t_(k, art_begin_ + k) = 1.0;
      beta_(k) = flip * lp.rhs(k);
      basis_[static_cast<std::size_t>(k)] = art_begin_ + k;
    }
    a0_ = t_;
    b0_ = beta_;
  }

  // Runs Bland's rule for `cost`; returns false when unbounded.
  bool optimise(const Eigen::VectorXd& cost, bool allow_artificial, std::size_t& pivots,
                std::size_t max_pivots) {
    const std::size_t refresh = static_cast<std::size_t>(std::max<Eigen::Index>(25, m_));
    std::size_t since = 0;
    while (true) {
      if (pivots >= max_pivots) throw SolverError("simplex pivot limit reached");
      if (since >= refresh || beta_.minCoeff() < -1e-9) {
        refactor();
        since = 0;
      }
      const Eigen::VectorXd reduced = reduced_costs(cost);
      Eigen::Index enter = -1;
      const Eigen::Index limit = allow_artificial ? cols_ : art_begin_;
      for (Eigen::Index j = 0; j < limit; ++j) {
        if (reduced(j) < -tol_ * (1.0 + std::abs(cost(j)))) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < m_; ++r) {
        const double a = t_(r, enter);
        if (a <= tol_) continue;
        const double ratio = std::max(0.0, beta_(r)) / a;
        if (ratio < best_ratio - tol_ ||
            (std::abs(ratio - best_ratio) <= tol_ && basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
          best_ratio = ratio;
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      ++pivots;
      ++since;
    }
  }

  // Rebuilds the tableau from the original rows and the current basis, which
  // discards the rounding error accumulated by successive pivots.
  void refactor() {
    Eigen::MatrixXd b(m_, m_);
    for (Eigen::Index r = 0; r < m_; ++r) b.col(r) = a0_.col(basis_[static_cast<std::size_t>(r)]);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    t_ = lu.solve(a0_);
    beta_ = lu.solve(b0_);
    t_ = t_.unaryExpr([](double v) { return std::abs(v) < 1e-12 ? 0.0 : v; });
    beta_ = beta_.unaryExpr([](double v) { return std::abs(v) < 1e-12 ? 0.0 : v; });
  }

  // After phase 1, swaps zero-level artificial basics for structural columns
  // where possible. Rows that cannot be swapped are redundant.
  void expel_artificials(std::size_t& pivots) {
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < art_begin_) continue;
      for (Eigen::Index j = 0; j < art_begin_; ++j) {
        if (std::abs(t_(r, j)) > 1e-7) {
          pivot(r, j);
          ++pivots;
          break;
        }
      }
    }
  }

  Eigen::VectorXd reduced_costs(const Eigen::VectorXd& cost) const {
    Eigen::VectorXd cb(m_);
    for (Eigen::Index r = 0; r < m_; ++r) cb(r) = cost(basis_[static_cast<std::size_t>(r)]);
    return cost - t_.transpose() * cb;
  }

  double value(const Eigen::VectorXd& cost) const {
    double v = 0.0;
    for (Eigen::Index r = 0; r < m_; ++r) v += cost(basis_[static_cast<std::size_t>(r)]) * beta_(r);
    return v;
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index r = 0; r < m_; ++r) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(r)];
      if (b < n_) x(b) = std::max(0.0, beta_(r));
    }
    return x;
  }

  // y_k = c_B B^{-1} e_k, undoing the row sign flips.
  Eigen::VectorXd duals(const Eigen::VectorXd& cost) const {
    Eigen::VectorXd cb(m_);
    for (Eigen::Index r = 0; r < m_; ++r) cb(r) = cost(basis_[static_cast<std::size_t>(r)]);
    Eigen::VectorXd y = t_.middleCols(art_begin_, m_).transpose() * cb;
    return y.cwiseProduct(sign_);
  }

  Eigen::Index columns() const { return cols_; }
  Eigen::Index artificial_begin() const { return art_begin_; }

 private:
  void pivot(Eigen::Index r, Eigen::Index j) {
    const double p = t_(r, j);
    t_.row(r) /= p;
    beta_(r) /= p;
    for (Eigen::Index k = 0; k < m_; ++k) {
      if (k == r) continue;
      const double f = t_(k, j);
      if (f == 0.0) continue;
      t_.row(k) -= f * t_.row(r);
      beta_(k) -= f * beta_(r);
      if (std::abs(beta_(k)) < 1e-13) beta_(k) = 0.0;
    }
    basis_[static_cast<std::size_t>(r)] = j;
  }

  double tol_;
  Eigen::Index m_ = 0, n_ = 0, cols_ = 0, slack_begin_ = 0, art_begin_ = 0;
  Eigen::MatrixXd t_, a0_;
  Eigen::VectorXd beta_, b0_;
  Eigen::VectorXd sign_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  const Eigen::Index m = lp.rows.rows();
  const Eigen::Index n = lp.rows.cols();
  if (static_cast<Eigen::Index>(lp.sense.size()) != m || lp.rhs.size() != m || lp.objective.size() != n)
    throw ConfigError("linear program dimensions disagree");
  Tableau tab(lp, options.tolerance);
  LpSolution sol;

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(tab.columns());
  phase1.tail(m).setOnes();
  tab.optimise(phase1, true, sol.pivots, options.max_pivots);
  if (tab.value(phase1) > 1e-8 * (1.0 + lp.rhs.cwiseAbs().sum())) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }
  tab.expel_artificials(sol.pivots);

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(tab.columns());
  phase2.head(n) = lp.objective;
  if (!tab.optimise(phase2, false, sol.pivots, options.max_pivots)) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }
  tab.refactor();
  if (!tab.optimise(phase2, false, sol.pivots, options.max_pivots)) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }
  sol.status = LpStatus::Optimal;
  sol.x = tab.primal();
  sol.objective = lp.objective.dot(sol.x);
  sol.duals = tab.duals(phase2);
  return sol;
}

}  // namespace mcboost
