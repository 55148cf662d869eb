#pragma once

#include <cstdint>
#include <vector>

#include "rarescreen/matrix.hpp"

namespace rarescreen::selection {

struct SelectionConfig {
  // Remove a column when its majority value covers at least this share of rows.
  double majority_threshold = 0.85;
  double lambda = 0.01;                // L1 penalty weight, >= 0
  std::size_t max_iterations = 10000;  // coordinate-descent sweeps
  double tolerance = 1e-6;             // max subgradient violation at exit

  void check() const;
};

struct SelectionResult {
  std::vector<std::uint32_t> kept_columns;  // exactly the nonzero-weight columns
  std::vector<double> weights;              // aligned with kept_columns
  double intercept = 0.0;
  std::vector<double> objective_trace;      // initial value, then one per sweep
  bool converged = true;
  std::size_t iterations = 0;
  std::vector<double> all_weights;          // full per-column weight vector
};

// Columns kept iff max(freq of 0, freq of 1) < majority_threshold.
std::vector<std::uint32_t> near_constant_filter(const DesignMatrix& m,
                                                double majority_threshold);

// Minimizes mean logistic loss + lambda * sum |w_j| (intercept unpenalized)
// by cyclic coordinate descent with soft-thresholding. Each coordinate step
// uses the curvature upper bound 0.25 * column mean, so every step decreases
// the objective; convergence is declared on the subgradient residual.
// On SingleClass input throws; when max_iterations runs out the best-so-far
// result is returned with converged = false.
SelectionResult l1_logistic_select(const DesignMatrix& m, const SelectionConfig& config);

// Max violation of the stationarity conditions at (weights, intercept):
// |g_j| - lambda for zero weights, |g_j + lambda*sign(w_j)| otherwise,
// |g_b| for the intercept. Exposed for verification.
double subgradient_residual(const DesignMatrix& m, const std::vector<double>& weights,
                            double intercept, double lambda);

double l1_objective(const DesignMatrix& m, const std::vector<double>& weights,
                    double intercept, double lambda);

// Two-stage selection: near-constant filter, then L1 on the survivors.
// Kept columns are reported in the original column ids.
struct SelectionSummary {
  std::vector<std::uint32_t> filter_kept;
  std::vector<std::uint32_t> kept_columns;
  std::vector<double> weights;  // aligned with kept_columns
  double intercept = 0.0;
  bool converged = true;
  std::size_t iterations = 0;
};

SelectionSummary select_features(const DesignMatrix& m, const SelectionConfig& config);

// Decision margin of the fitted sparse logistic model; > 0 reads Positive.
double selection_margin(const SelectionSummary& s, const SparseVector& x);

// Positions into kept_columns ordered by |weight| descending, ties by
// column id. Feeds the top-feature reports.
std::vector<std::size_t> rank_by_weight(const SelectionSummary& s);

}  // namespace rarescreen::selection
