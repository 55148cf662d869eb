#pragma once

#include <cstdint>

#include "rarescreen/matrix.hpp"

namespace rarescreen::knn {

enum class Weighting : std::uint8_t { Uniform, Distance };

const char* to_string(Weighting w);
Weighting parse_weighting(const std::string& text);

struct KTooLarge : Error {
  KTooLarge(std::size_t k, std::size_t rows)
      : Error("k = " + std::to_string(k) + " exceeds stored rows " +
              std::to_string(rows)) {}
};

// Lazy learner: stores the training matrix verbatim.
struct KnnModel {
  DesignMatrix stored;
  std::size_t k = 1;
  Weighting weighting = Weighting::Uniform;
};

KnnModel fit(const DesignMatrix& m, std::size_t k, Weighting weighting);

// Euclidean distance over binary vectors (sqrt of the symmetric difference).
// Neighbor selection breaks distance ties by lowest row index. Uniform:
// majority vote over the k nearest, ties to Negative. Distance: vote weight
// 1/d; any exact match (d = 0) among the neighbors restricts the vote to
// the exact matches.
Label predict(const KnnModel& model, const SparseVector& x);

}  // namespace rarescreen::knn
