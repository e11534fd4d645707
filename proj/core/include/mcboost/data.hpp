#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mcboost {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Feature matrix plus labels in {1..C}. Immutable once built.
class Dataset {
 public:
  /// Validates the invariants: N >= 1, D >= 1, C >= 2, labels in {1..C},
  /// finite features. `original_labels[c-1]` is the code class c had in the
  /// source file; left empty it defaults to 1..C.
  Dataset(FeatureMatrix features, std::vector<int> labels, int num_classes,
          std::vector<long long> original_labels = {});

  const FeatureMatrix& features() const { return features_; }
  std::span<const int> labels() const { return labels_; }
  int label(std::size_t i) const { return labels_[i]; }
  int num_classes() const { return num_classes_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t dimension() const { return static_cast<std::size_t>(features_.cols()); }
  const std::vector<long long>& original_labels() const { return original_labels_; }

  auto row(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)); }

  /// Example count per class, indexed 0..C-1.
  std::vector<std::size_t> class_counts() const;

  /// Rows selected by `indices` (in that order); keeps C and the label map.
  Dataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  FeatureMatrix features_;
  std::vector<int> labels_;
  int num_classes_;
  std::vector<long long> original_labels_;
};

enum class DataFormat { Csv, LibSvm };

DataFormat parse_data_format(std::string_view name);

/// CSV: comma separated, label in the last column, optional non-numeric
/// header row. LibSVM: `label index:value ...` with 1-based indices, missing
/// entries filled with 0. Labels are compacted to {1..C} by sorted order.
Dataset load_dataset(const std::filesystem::path& path, DataFormat format);
Dataset parse_csv(std::istream& in);
Dataset parse_libsvm(std::istream& in);

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// Per-class training counts: floor(fraction * n_c), the global remainder
/// (round(fraction * N) minus the floors) handed to the classes with the
/// largest fractional parts, ties to the smaller class index, then clamped
/// so both sides keep at least one example.
std::vector<std::size_t> stratified_train_counts(std::span<const std::size_t> class_counts,
                                                 double train_fraction);

/// Throws DataError when some class has fewer than 2 members.
Split stratified_split(const Dataset& d, const SplitSpec& spec);

/// k stratified folds: each class is shuffled and dealt round-robin, the
/// dealing position carried over from one class to the next.
std::vector<std::vector<std::size_t>> kfold_indices(const Dataset& d, std::size_t k,
                                                    std::uint64_t seed);

}  // namespace mcboost
