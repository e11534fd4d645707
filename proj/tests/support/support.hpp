#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mcboost/coding.hpp"
#include "mcboost/data.hpp"
#include "mcboost/margins.hpp"
#include "mcboost/rng.hpp"
#include "mcboost/weak.hpp"

namespace mcboost::testing {

std::filesystem::path data_file(const std::string& name);

Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels, int classes);

/// Gaussian-ish blobs, one per class, drawn from `rng`.
Dataset random_dataset(Rng& rng, std::size_t n, std::size_t dim, int classes, double spread);

/// Three fixed small problems used by the transcription checks.
std::vector<Dataset> toy_instances();

// Brute force: weighted error of every (feature, threshold, polarity) where
// thresholds are every observed value and -inf, scored example by example.
double brute_force_stump_error(const FeatureMatrix& x, std::span<const int> targets,
                               std::span<const double> weights);

/// Minimum of sum_k exp(-P_k . w) over the theta-simplex by nested
/// golden-section search. Only for up to three columns.
double grid_master_minimum(const MarginMatrix& p, double theta);

/// Exact LP optimum of min c.x, A x (sense) b, x >= 0 by enumerating every
/// basic solution. senses: -1 for <=, 0 for =, +1 for >=. Returns +inf when
/// infeasible.
double vertex_enumeration(const std::vector<std::vector<double>>& a, const std::vector<int>& sense,
                          const std::vector<double>& b, const std::vector<double>& c);

/// Hinge master optimum via vertex enumeration.
double hinge_master_minimum(const MarginMatrix& p, std::size_t rows_per_example, double theta);

/// Per-round record of a straight-line stage-wise run.
struct ReferenceRun {
  std::vector<double> epsilon;
  std::vector<double> omega;
  std::vector<std::vector<double>> u;  // after the round's update, margin-row layout
};

ReferenceRun reference_mo(const Dataset& d, const CodingMatrix& m, std::size_t rounds);
ReferenceRun reference_ecc(const Dataset& d, std::uint64_t stream_seed, std::size_t rounds);

/// Random margin matrix built from random +-1 hypothesis outputs under the
/// variant's row layout.
MarginMatrix random_margin_matrix(Rng& rng, bool ecc, std::size_t n, int classes, std::size_t columns,
                                  std::vector<int>* labels_out = nullptr);

}  // namespace mcboost::testing
