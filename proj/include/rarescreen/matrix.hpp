#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rarescreen/common.hpp"

namespace rarescreen {

class FeatureSpace;

// A binary feature vector: the sorted set of active column ids. Values are
// implicitly 1; everything else is 0.
struct SparseVector {
  std::uint32_t dimension = 0;
  std::vector<std::uint32_t> active;  // strictly increasing, all < dimension

  bool contains(std::uint32_t column) const;
};

// Throws Error if `active` is not strictly increasing within bounds.
void check_sparse_vector(const SparseVector& v);

std::uint32_t intersection_size(const SparseVector& a, const SparseVector& b);

// |a Δ b|; equals the squared Euclidean distance between binary vectors.
std::uint32_t symmetric_difference_size(const SparseVector& a, const SparseVector& b);

struct DesignMatrix {
  std::uint32_t n_columns = 0;
  std::vector<SparseVector> rows;
  std::vector<Label> labels;  // aligned with rows
  std::shared_ptr<const FeatureSpace> feature_space;  // may be null for desk matrices

  std::size_t n_rows() const { return rows.size(); }
  std::size_t count_label(Label label) const;
  bool has_both_classes() const;
};

struct EmptyMatrix : Error {
  EmptyMatrix() : Error("design matrix has no rows") {}
};
struct SingleClass : Error {
  SingleClass() : Error("training data contains a single class") {}
};

void check_design_matrix(const DesignMatrix& m);

// Per-column count of ones.
std::vector<std::size_t> column_one_counts(const DesignMatrix& m);

// New matrix holding the selected rows, in the given order.
DesignMatrix take_rows(const DesignMatrix& m, const std::vector<std::uint32_t>& row_ids);

// New matrix over the given columns only, reindexed to 0..k-1. `columns`
// must be strictly increasing.
DesignMatrix take_columns(const DesignMatrix& m, const std::vector<std::uint32_t>& columns);
SparseVector project_vector(const SparseVector& v, const std::vector<std::uint32_t>& columns);

}  // namespace rarescreen
