#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mcboost/coding.hpp"
#include "mcboost/data.hpp"
#include "mcboost/ensemble.hpp"
#include "mcboost/margins.hpp"
#include "mcboost/stagewise.hpp"
#include "mcboost/weak.hpp"

namespace mcboost {

struct MasterOptions {
  double tolerance = 1e-8;           // on gap / (1 + primal)
  std::size_t max_iterations = 100000;
};

/// Restricted-master optimum of the exponential loss on the scaled simplex.
struct MasterSolution {
  std::vector<double> w;      // w >= 0, sum(w) = theta
  double primal_value = 0.0;  // sum_row exp(-P_row . w)
  std::vector<double> u;      // u_row = exp(-P_row . w)
  double r = 0.0;             // max_j u . rho_j
  double gap = 0.0;           // primal_value - dual_objective(u, r, theta)
  std::vector<double> u_normalized;  // u / sum(u), computed without underflow
  std::size_t iterations = 0;
};

/// Minimises sum_row exp(-P_row . w) over {w >= 0, sum(w) = theta}.
///
/// Active-set Newton method: Newton steps on the face spanned by the
/// positive coordinates, pairwise mass transfers to let the most violated
/// column enter, and exact line searches along both. The dual pair (u, r) is
/// recovered from w through u = exp(-P w), r = max_j u . rho_j, so the gap
/// equals sum_j w_j (r - u . rho_j).
///
/// `warm_start` (length <= cols, missing entries 0) is rescaled to sum to
/// theta; empty means uniform. Throws SolverError when the gap does not
/// reach tolerance within the iteration cap.
MasterSolution solve_master_exp(const MarginMatrix& p, double theta, const MasterOptions& options = {},
                                std::span<const double> warm_start = {});

/// -r theta - sum u ln u + sum u, with 0 ln 0 = 0.
double dual_objective(std::span<const double> u, double r, double theta);

/// Restricted master of the hinge-loss variant:
///   min sum_i xi_i  s.t.  xi_i + P_(i,c) . w >= 1 for c != y_i,  xi >= 0,
///                         w >= 0, sum(w) = theta.
/// The rows of `p` are the (i, c != y_i) pairs, `rows_per_example` = C - 1.
struct HingeSolution {
  std::vector<double> w;
  std::vector<double> slacks;      // xi_i
  double primal_value = 0.0;       // sum xi
  std::vector<double> u;           // duals of the (i, c != y_i) rows
  std::vector<double> u_true;      // u_{i,y_i} = 1 - sum_{c != y_i} u_{i,c}
  double r = 0.0;                  // dual of sum(w) = theta, bounds u . rho_j
  double dual_value = 0.0;         // sum u - r theta
  std::size_t pivots = 0;
};

HingeSolution solve_master_hinge(const MarginMatrix& p, std::size_t rows_per_example, double theta);

/// sum_{i,c != y_i} u_{i,c} - r theta. Equals N minus r theta + sum_i u_{i,y_i},
/// the minimisation form of the same dual.
double hinge_dual_objective(std::span<const double> u, double r, double theta);

/// Where the next code column comes from: a fixed matrix (MO, Hinge) or a
/// random column stream (ECC).
using CodeSource = std::variant<CodingMatrix, ColumnStream>;

struct OracleResult {
  std::vector<WeakHypothesis> hypotheses;  // L for MO/Hinge, 1 for ECC
  std::vector<int> outputs;                // row-major N x hypotheses.size()
  std::vector<int> code_column;            // ECC: the drawn column
  std::vector<double> margins;             // new MarginMatrix column
  double score = 0.0;                      // u . margins
  double epsilon = 0.0;                    // pooled weighted error
};

/// Column-generation subproblem: the round hypothesis maximising u . rho[h]
/// over what the weak learner can return. MO trains one hypothesis per code
/// column on weights u_{i,l}; ECC draws the next column and trains on
/// mislabel weights d_i = sum_c u_{i,c} [M(y_i,t) != M(c,t)]; Hinge does the
/// ECC construction for every column of the fixed code.
OracleResult cg_oracle(Variant v, std::span<const double> u, CodeSource& source,
                       const Learner& learner, const Dataset& train);

struct MultiBoostOptions {
  double theta = 1.0;
  double epsilon = 1e-5;
  bool force_rounds = false;  // keep adding columns after the stop test fires
  MasterOptions master;
  BoostOptions boost;
};

struct DualTraceRow {
  std::size_t round = 0;
  double score = 0.0;
  double r = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

enum class StopReason { RoundLimit, Converged, DegenerateOracle };

struct MultiBoostResult {
  Ensemble ensemble;
  BoostTrace trace;
  std::vector<DualTraceRow> dual_trace;
  StopReason stop = StopReason::RoundLimit;
};

/// Totally-corrective boosting by column generation. Each round: oracle on
/// the current dual weights, stop if the normalised score does not exceed
/// r + epsilon (unless forced), append the column, re-solve the restricted
/// master warm-started from the previous w, and take (u, r) from it.
/// The ensemble coefficients are the final master w.
MultiBoostResult multiboost(const Dataset& train, Variant variant, CodeSource source,
                            LearnerKind learner, std::size_t rounds, const MultiBoostOptions& options);

/// CSV with header round,score,r,primal,dual,gap.
void write_dual_trace_csv(std::ostream& out, std::span<const DualTraceRow> rows);

}  // namespace mcboost
