#include "rarescreen/matrix.hpp"

#include <algorithm>

namespace rarescreen {

bool SparseVector::contains(std::uint32_t column) const {
  return std::binary_search(active.begin(), active.end(), column);
}

void check_sparse_vector(const SparseVector& v) {
  for (std::size_t i = 0; i < v.active.size(); ++i) {
    if (v.active[i] >= v.dimension) {
      throw Error("sparse vector column " + std::to_string(v.active[i]) +
                  " out of range for dimension " + std::to_string(v.dimension));
    }
    if (i > 0 && v.active[i] <= v.active[i - 1]) {
      throw Error("sparse vector active list not strictly increasing");
    }
  }
}

std::uint32_t intersection_size(const SparseVector& a, const SparseVector& b) {
  if (a.dimension != b.dimension) throw DimensionMismatch(a.dimension, b.dimension);
  std::uint32_t count = 0;
  auto ia = a.active.begin();
  auto ib = b.active.begin();
  while (ia != a.active.end() && ib != b.active.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

std::uint32_t symmetric_difference_size(const SparseVector& a, const SparseVector& b) {
  const std::uint32_t both = intersection_size(a, b);
  return static_cast<std::uint32_t>(a.active.size() + b.active.size()) - 2 * both;
}

std::size_t DesignMatrix::count_label(Label label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

bool DesignMatrix::has_both_classes() const {
  return count_label(Label::Positive) > 0 && count_label(Label::Negative) > 0;
}

void check_design_matrix(const DesignMatrix& m) {
  if (m.rows.size() != m.labels.size()) {
    throw Error("design matrix rows/labels length mismatch");
  }
  for (const auto& row : m.rows) {
    if (row.dimension != m.n_columns) throw DimensionMismatch(m.n_columns, row.dimension);
    check_sparse_vector(row);
  }
}

std::vector<std::size_t> column_one_counts(const DesignMatrix& m) {
  std::vector<std::size_t> counts(m.n_columns, 0);
  for (const auto& row : m.rows) {
    for (std::uint32_t c : row.active) ++counts[c];
  }
  return counts;
}

DesignMatrix take_rows(const DesignMatrix& m, const std::vector<std::uint32_t>& row_ids) {
  DesignMatrix out;
  out.n_columns = m.n_columns;
  out.feature_space = m.feature_space;
  out.rows.reserve(row_ids.size());
  out.labels.reserve(row_ids.size());
  for (std::uint32_t r : row_ids) {
    out.rows.push_back(m.rows.at(r));
    out.labels.push_back(m.labels.at(r));
  }
  return out;
}

SparseVector project_vector(const SparseVector& v, const std::vector<std::uint32_t>& columns) {
  SparseVector out;
  out.dimension = static_cast<std::uint32_t>(columns.size());
  auto it = v.active.begin();
  for (std::uint32_t j = 0; j < columns.size(); ++j) {
    it = std::lower_bound(it, v.active.end(), columns[j]);
    if (it == v.active.end()) break;
    if (*it == columns[j]) out.active.push_back(j);
  }
  return out;
}

DesignMatrix take_columns(const DesignMatrix& m, const std::vector<std::uint32_t>& columns) {
  DesignMatrix out;
  out.n_columns = static_cast<std::uint32_t>(columns.size());
  out.labels = m.labels;
  out.rows.reserve(m.rows.size());
  for (const auto& row : m.rows) out.rows.push_back(project_vector(row, columns));
  return out;
}

}  // namespace rarescreen
