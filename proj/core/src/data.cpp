#include "mcboost/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "mcboost/error.hpp"
#include "mcboost/rng.hpp"

namespace mcboost {

Dataset::Dataset(FeatureMatrix features, std::vector<int> labels, int num_classes,
                 std::vector<long long> original_labels)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      original_labels_(std::move(original_labels)) {
  if (labels_.empty()) throw DataError("dataset has no examples");
  if (features_.cols() < 1) throw DataError("dataset has no features");
  if (static_cast<std::size_t>(features_.rows()) != labels_.size())
    throw DataError("feature rows and labels differ in length");
  if (num_classes_ < 2) throw DataError("dataset needs at least 2 classes");
  for (int y : labels_) {
    if (y < 1 || y > num_classes_)
      throw DataError("label " + std::to_string(y) + " outside 1.." + std::to_string(num_classes_));
  }
  if (!features_.allFinite()) throw DataError("non-finite feature value");
  if (original_labels_.empty()) {
    original_labels_.resize(static_cast<std::size_t>(num_classes_));
    std::iota(original_labels_.begin(), original_labels_.end(), 1LL);
  } else if (original_labels_.size() != static_cast<std::size_t>(num_classes_)) {
    throw DataError("label map size does not match class count");
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
  for (int y : labels_) ++counts[static_cast<std::size_t>(y - 1)];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  FeatureMatrix x(static_cast<Eigen::Index>(indices.size()), features_.cols());
  std::vector<int> y;
  y.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    x.row(static_cast<Eigen::Index>(k)) = features_.row(static_cast<Eigen::Index>(indices[k]));
    y.push_back(labels_[indices[k]]);
  }
  return Dataset(std::move(x), std::move(y), num_classes_, original_labels_);
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.num_classes_ == b.num_classes_ && a.labels_ == b.labels_ &&
         a.original_labels_ == b.original_labels_ &&
         a.features_.rows() == b.features_.rows() && a.features_.cols() == b.features_.cols() &&
         a.features_ == b.features_;
}

DataFormat parse_data_format(std::string_view name) {
  if (name == "csv") return DataFormat::Csv;
  if (name == "libsvm") return DataFormat::LibSvm;
  throw ConfigError("unknown data format '" + std::string(name) + "' (expected csv or libsvm)");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view token, double& out) {
  const std::string buf(trim(token));
  if (buf.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size();
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw DataError("line " + std::to_string(line) + ": " + msg);
}

double parse_feature(std::string_view token, std::size_t line) {
  double v = 0.0;
  if (!parse_double(token, v)) fail(line, "cannot parse '" + std::string(trim(token)) + "'");
  if (!std::isfinite(v)) fail(line, "non-finite value '" + std::string(trim(token)) + "'");
  return v;
}

long long parse_label(std::string_view token, std::size_t line) {
  double v = 0.0;
  if (!parse_double(token, v) || !std::isfinite(v) || v != std::floor(v) || v < 1.0)
    fail(line, "label '" + std::string(trim(token)) + "' is not a positive integer");
  return static_cast<long long>(v);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Dataset assemble(const std::vector<std::vector<double>>& rows, std::size_t dim,
                 const std::vector<long long>& raw_labels) {
  if (rows.empty()) throw DataError("no data rows");
  std::map<long long, int> remap;
  for (long long y : raw_labels) remap.emplace(y, 0);
  if (remap.size() < 2) throw DataError("fewer than 2 classes in data");
  std::vector<long long> original;
  int next = 1;
  for (auto& [code, compact] : remap) {
    compact = next++;
    original.push_back(code);
  }
  FeatureMatrix x = FeatureMatrix::Zero(static_cast<Eigen::Index>(rows.size()),
                                        static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  std::vector<int> labels;
  labels.reserve(raw_labels.size());
  for (long long y : raw_labels) labels.push_back(remap.at(y));
  return Dataset(std::move(x), std::move(labels), static_cast<int>(remap.size()),
                 std::move(original));
}

}  // namespace

Dataset parse_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<long long> labels;
  std::size_t arity = 0;
  bool first_row = true;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto content = trim(line);
    if (content.empty()) continue;
    const auto fields = split_commas(content);
    if (first_row) {
      first_row = false;
      const bool numeric = std::all_of(fields.begin(), fields.end(), [](std::string_view f) {
        double v;
        return parse_double(f, v);
      });
      if (!numeric) continue;  // header
    }
    if (fields.size() < 2) fail(lineno, "need at least one feature and a label");
    if (arity == 0) arity = fields.size();
    if (fields.size() != arity)
      fail(lineno, "expected " + std::to_string(arity) + " columns, got " +
                       std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(arity - 1);
    for (std::size_t j = 0; j + 1 < fields.size(); ++j) row.push_back(parse_feature(fields[j], lineno));
    labels.push_back(parse_label(fields.back(), lineno));
    rows.push_back(std::move(row));
  }
  return assemble(rows, arity - (arity > 0 ? 1 : 0), labels);
}

Dataset parse_libsvm(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<long long> labels;
  std::size_t dim = 0;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    auto content = trim(line);
    if (const auto hash = content.find('#'); hash != std::string_view::npos)
      content = trim(content.substr(0, hash));
    if (content.empty()) continue;
    std::istringstream tokens{std::string(content)};
    std::string token;
    tokens >> token;
    labels.push_back(parse_label(token, lineno));
    std::vector<double> row;
    long long last_index = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) fail(lineno, "expected index:value, got '" + token + "'");
      double idx_value = 0.0;
      if (!parse_double(std::string_view(token).substr(0, colon), idx_value) ||
          idx_value != std::floor(idx_value) || idx_value < 1.0)
        fail(lineno, "bad feature index in '" + token + "'");
      const auto idx = static_cast<long long>(idx_value);
      if (idx <= last_index) fail(lineno, "feature indices must increase");
      last_index = idx;
      const double v = parse_feature(std::string_view(token).substr(colon + 1), lineno);
      if (row.size() < static_cast<std::size_t>(idx)) row.resize(static_cast<std::size_t>(idx), 0.0);
      row[static_cast<std::size_t>(idx - 1)] = v;
    }
    dim = std::max(dim, row.size());
    rows.push_back(std::move(row));
  }
  if (dim == 0 && !rows.empty()) throw DataError("libsvm data has no features");
  return assemble(rows, dim, labels);
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return format == DataFormat::Csv ? parse_csv(in) : parse_libsvm(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::size_t> stratified_train_counts(std::span<const std::size_t> class_counts,
                                                 double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie in (0, 1)");
  const std::size_t total = std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0});
  std::vector<std::size_t> counts(class_counts.size());
  std::vector<double> frac(class_counts.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    const double exact = train_fraction * static_cast<double>(class_counts[c]);
    // Nudge so that values like 3.4999999999999996 floor the same as 3.5.
    const double fl = std::floor(exact + 1e-9);
    counts[c] = static_cast<std::size_t>(fl);
    frac[c] = std::max(0.0, exact - fl);
    assigned += counts[c];
  }
  const auto target =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(total)));
  std::vector<std::size_t> order(class_counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(frac[a] - frac[b]) > 1e-9) return frac[a] > frac[b];
    return a < b;
  });
  for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
    const std::size_t c = order[k];
    if (counts[c] < class_counts[c]) {
      ++counts[c];
      ++assigned;
    }
  }
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    if (class_counts[c] >= 2) counts[c] = std::clamp<std::size_t>(counts[c], 1, class_counts[c] - 1);
  }
  return counts;
}

namespace {

std::vector<std::vector<std::size_t>> members_by_class(const Dataset& d) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(d.num_classes()));
  for (std::size_t i = 0; i < d.size(); ++i) members[static_cast<std::size_t>(d.label(i) - 1)].push_back(i);
  return members;
}

}  // namespace

Split stratified_split(const Dataset& d, const SplitSpec& spec) {
  const auto counts = d.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < 2)
      throw DataError("class " + std::to_string(c + 1) + " has fewer than 2 members");
  }
  const auto train_counts = stratified_train_counts(counts, spec.train_fraction);
  auto members = members_by_class(d);
  Rng rng(spec.seed);
  std::vector<std::size_t> train, test;
  for (std::size_t c = 0; c < members.size(); ++c) {
    rng.shuffle(std::span<std::size_t>(members[c]));
    train.insert(train.end(), members[c].begin(), members[c].begin() + static_cast<std::ptrdiff_t>(train_counts[c]));
    test.insert(test.end(), members[c].begin() + static_cast<std::ptrdiff_t>(train_counts[c]), members[c].end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  Dataset train_set = d.subset(train);
  Dataset test_set = d.subset(test);
  return Split{std::move(train_set), std::move(test_set), std::move(train), std::move(test)};
}

std::vector<std::vector<std::size_t>> kfold_indices(const Dataset& d, std::size_t k,
                                                    std::uint64_t seed) {
  if (k < 2) throw ConfigError("fold count must be at least 2");
  if (k > d.size()) throw DataError("fold count exceeds number of examples");
  auto members = members_by_class(d);
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t position = 0;
  for (auto& cls : members) {
    rng.shuffle(std::span<std::size_t>(cls));
    for (std::size_t idx : cls) folds[position++ % k].push_back(idx);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace mcboost
