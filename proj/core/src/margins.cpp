#include "mcboost/margins.hpp"

#include "mcboost/error.hpp"

namespace mcboost {

void MarginMatrix::append(std::vector<double> column) {
  if (column.size() != rows_) throw ConfigError("margin column has the wrong number of rows");
  columns_.push_back(std::move(column));
}

std::size_t margin_rows(Variant v, std::size_t examples, int classes, int code_length) {
  return v == Variant::MO ? examples * static_cast<std::size_t>(code_length)
                          : examples * static_cast<std::size_t>(classes - 1);
}

std::vector<double> build_margin_column(Variant v, std::span<const int> outputs, std::size_t width,
                                        const CodingMatrix& code, std::size_t round,
                                        std::span<const int> labels) {
  const std::size_t n = labels.size();
  const int classes = code.classes();
  const std::size_t expected = v == Variant::ECC ? 1 : static_cast<std::size_t>(code.length());
  if (width != expected || outputs.size() != n * width)
    throw ConfigError("hypothesis output width does not match the variant");
  std::vector<double> col;
  col.reserve(margin_rows(v, n, classes, code.length()));
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i] - 1;
    const int* h = outputs.data() + i * width;
    switch (v) {
      case Variant::MO:
        for (int l = 0; l < code.length(); ++l) col.push_back(code(y, l) * h[l]);
        break;
      case Variant::ECC: {
        const int t = static_cast<int>(round);
        for (int c = 0; c < classes; ++c)
          if (c != y) col.push_back((code(y, t) - code(c, t)) * h[0]);
        break;
      }
      case Variant::Hinge:
        for (int c = 0; c < classes; ++c) {
          if (c == y) continue;
          int s = 0;
          for (int l = 0; l < code.length(); ++l) s += (code(y, l) - code(c, l)) * h[l];
          col.push_back(s);
        }
        break;
    }
  }
  return col;
}

}  // namespace mcboost
