#include "rarescreen/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rarescreen::knn {

const char* to_string(Weighting w) {
  return w == Weighting::Uniform ? "uniform" : "distance";
}

Weighting parse_weighting(const std::string& text) {
  if (text == "uniform") return Weighting::Uniform;
  if (text == "distance") return Weighting::Distance;
  throw Error("unknown knn weighting '" + text + "'");
}

KnnModel fit(const DesignMatrix& m, std::size_t k, Weighting weighting) {
  if (m.rows.empty()) throw EmptyMatrix();
  check_design_matrix(m);
  if (k < 1 || k > m.n_rows()) throw KTooLarge(k, m.n_rows());
  return KnnModel{m, k, weighting};
}

Label predict(const KnnModel& model, const SparseVector& x) {
  if (x.dimension != model.stored.n_columns) {
    throw DimensionMismatch(model.stored.n_columns, x.dimension);
  }
  const std::size_t n = model.stored.n_rows();

  std::vector<std::uint32_t> sq_dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    sq_dist[i] = symmetric_difference_size(model.stored.rows[i], x);
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::partial_sort(order.begin(), order.begin() + model.k, order.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      if (sq_dist[a] != sq_dist[b]) return sq_dist[a] < sq_dist[b];
                      return a < b;
                    });

  std::size_t pos_votes = 0, neg_votes = 0;
  std::size_t pos_exact = 0, neg_exact = 0;
  double pos_weight = 0.0, neg_weight = 0.0;
  bool exact_match = false;
  for (std::size_t r = 0; r < model.k; ++r) {
    const std::uint32_t i = order[r];
    const Label label = model.stored.labels[i];
    (label == Label::Positive ? pos_votes : neg_votes) += 1;
    if (sq_dist[i] == 0) {
      exact_match = true;
      (label == Label::Positive ? pos_exact : neg_exact) += 1;
      continue;
    }
    const double w = 1.0 / std::sqrt(static_cast<double>(sq_dist[i]));
    (label == Label::Positive ? pos_weight : neg_weight) += w;
  }

  if (model.weighting == Weighting::Uniform) {
    return pos_votes > neg_votes ? Label::Positive : Label::Negative;
  }
  if (exact_match) {
    // An exact match's 1/d weight would be infinite, dominating every
    // finite weight, so only exact matches vote.
    return pos_exact > neg_exact ? Label::Positive : Label::Negative;
  }
  return pos_weight > neg_weight ? Label::Positive : Label::Negative;
}

}  // namespace rarescreen::knn
