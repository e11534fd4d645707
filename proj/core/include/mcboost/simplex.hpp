#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace mcboost {

enum class RowSense { LessEqual, GreaterEqual, Equal };

/// minimize objective . x  subject to  row_k . x (sense_k) rhs_k,  x >= 0.
struct LinearProgram {
  Eigen::MatrixXd rows;  // m x n
  std::vector<RowSense> sense;
  Eigen::VectorXd rhs;
  Eigen::VectorXd objective;  // n
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  Eigen::VectorXd x;
  /// Shadow prices d(objective)/d(rhs_k): >= 0 on GreaterEqual rows,
  /// <= 0 on LessEqual rows.
  Eigen::VectorXd duals;
  double objective = 0.0;
  std::size_t pivots = 0;
};

struct SimplexOptions {
  double tolerance = 1e-10;
  std::size_t max_pivots = 1000000;
};

/// Dense two-phase tableau simplex with Bland's rule. Every row carries an
/// artificial column so the basis inverse, and with it the duals, can be
/// read off the final tableau.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace mcboost
