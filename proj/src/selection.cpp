#include "rarescreen/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rarescreen::selection {

namespace {

double sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
double log1pexp(double z) {
  if (z > 35.0) return z;
  if (z < -35.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

struct Columns {
  std::vector<std::vector<std::uint32_t>> rows_of;  // rows where column is 1

  explicit Columns(const DesignMatrix& m) : rows_of(m.n_columns) {
    for (std::uint32_t r = 0; r < m.rows.size(); ++r) {
      for (std::uint32_t c : m.rows[r].active) rows_of[c].push_back(r);
    }
  }
};

}  // namespace

void SelectionConfig::check() const {
  if (!(majority_threshold > 0.5 && majority_threshold <= 1.0)) {
    throw Error("majority_threshold must be in (0.5, 1]");
  }
  if (lambda < 0.0) throw Error("lambda must be >= 0");
  if (max_iterations < 1) throw Error("max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw Error("tolerance must be > 0");
}

std::vector<std::uint32_t> near_constant_filter(const DesignMatrix& m,
                                                double majority_threshold) {
  if (m.rows.empty()) throw EmptyMatrix();
  const auto ones = column_one_counts(m);
  const double n = static_cast<double>(m.n_rows());
  std::vector<std::uint32_t> kept;
  for (std::uint32_t c = 0; c < m.n_columns; ++c) {
    const double one_frac = static_cast<double>(ones[c]) / n;
    const double majority = std::max(one_frac, 1.0 - one_frac);
    if (majority < majority_threshold) kept.push_back(c);
  }
  return kept;
}

double l1_objective(const DesignMatrix& m, const std::vector<double>& weights,
                    double intercept, double lambda) {
  const double n = static_cast<double>(m.n_rows());
  double loss = 0.0;
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    double margin = intercept;
    for (std::uint32_t c : m.rows[i].active) margin += weights[c];
    const double y = m.labels[i] == Label::Positive ? 1.0 : 0.0;
    loss += log1pexp(margin) - y * margin;
  }
  double penalty = 0.0;
  for (double w : weights) penalty += std::abs(w);
  return loss / n + lambda * penalty;
}

double subgradient_residual(const DesignMatrix& m, const std::vector<double>& weights,
                            double intercept, double lambda) {
  const double n = static_cast<double>(m.n_rows());
  std::vector<double> grad(m.n_columns, 0.0);
  double grad_b = 0.0;
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    double margin = intercept;
    for (std::uint32_t c : m.rows[i].active) margin += weights[c];
    const double y = m.labels[i] == Label::Positive ? 1.0 : 0.0;
    const double resid = sigmoid(margin) - y;
    grad_b += resid;
    for (std::uint32_t c : m.rows[i].active) grad[c] += resid;
  }
  double violation = std::abs(grad_b / n);
  for (std::uint32_t c = 0; c < m.n_columns; ++c) {
    const double g = grad[c] / n;
    double v;
    if (weights[c] == 0.0) {
      v = std::max(0.0, std::abs(g) - lambda);
    } else {
      v = std::abs(g + (weights[c] > 0 ? lambda : -lambda));
    }
    violation = std::max(violation, v);
  }
  return violation;
}

SelectionResult l1_logistic_select(const DesignMatrix& m, const SelectionConfig& config) {
  config.check();
  check_design_matrix(m);
  if (m.rows.empty()) throw EmptyMatrix();
  if (!m.has_both_classes()) throw SingleClass();

  const std::size_t n = m.n_rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Columns cols(m);

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = m.labels[i] == Label::Positive ? 1.0 : 0.0;

  std::vector<double> weights(m.n_columns, 0.0);
  std::vector<double> margins(n, 0.0);
  double intercept = 0.0;

  // Fixed per-coordinate curvature majorizers: 0.25 * column mean.
  std::vector<double> curvature(m.n_columns, 0.0);
  for (std::uint32_t c = 0; c < m.n_columns; ++c) {
    curvature[c] = 0.25 * static_cast<double>(cols.rows_of[c].size()) * inv_n;
  }

  SelectionResult result;
  result.objective_trace.push_back(l1_objective(m, weights, intercept, config.lambda));

  std::size_t sweep = 0;
  bool converged = false;
  for (; sweep < config.max_iterations; ++sweep) {
    // intercept step (unpenalized, curvature bound 0.25)
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) grad_b += sigmoid(margins[i]) - y[i];
    grad_b *= inv_n;
    const double db = -grad_b / 0.25;
    if (db != 0.0) {
      intercept += db;
      for (double& mi : margins) mi += db;
    }

    for (std::uint32_t c = 0; c < m.n_columns; ++c) {
      if (cols.rows_of[c].empty()) continue;
      double grad = 0.0;
      for (std::uint32_t r : cols.rows_of[c]) grad += sigmoid(margins[r]) - y[r];
      grad *= inv_n;
      const double h = curvature[c];
      const double updated =
          soft_threshold(weights[c] - grad / h, config.lambda / h);
      const double delta = updated - weights[c];
      if (delta != 0.0) {
        weights[c] = updated;
        for (std::uint32_t r : cols.rows_of[c]) margins[r] += delta;
      }
    }

    result.objective_trace.push_back(l1_objective(m, weights, intercept, config.lambda));
    if (subgradient_residual(m, weights, intercept, config.lambda) <= config.tolerance) {
      converged = true;
      ++sweep;
      break;
    }
  }

  result.converged = converged;
  result.iterations = sweep;
  result.intercept = intercept;
  result.all_weights = weights;
  for (std::uint32_t c = 0; c < m.n_columns; ++c) {
    if (weights[c] != 0.0) {
      result.kept_columns.push_back(c);
      result.weights.push_back(weights[c]);
    }
  }
  return result;
}

SelectionSummary select_features(const DesignMatrix& m, const SelectionConfig& config) {
  SelectionSummary summary;
  summary.filter_kept = near_constant_filter(m, config.majority_threshold);
  const DesignMatrix filtered = take_columns(m, summary.filter_kept);
  const SelectionResult l1 = l1_logistic_select(filtered, config);
  summary.intercept = l1.intercept;
  summary.converged = l1.converged;
  summary.iterations = l1.iterations;
  summary.weights = l1.weights;
  summary.kept_columns.reserve(l1.kept_columns.size());
  for (std::uint32_t local : l1.kept_columns) {
    summary.kept_columns.push_back(summary.filter_kept[local]);
  }
  return summary;
}

double selection_margin(const SelectionSummary& s, const SparseVector& x) {
  double margin = s.intercept;
  for (std::size_t i = 0; i < s.kept_columns.size(); ++i) {
    if (x.contains(s.kept_columns[i])) margin += s.weights[i];
  }
  return margin;
}

std::vector<std::size_t> rank_by_weight(const SelectionSummary& s) {
  std::vector<std::size_t> order(s.kept_columns.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double wa = std::abs(s.weights[a]);
    const double wb = std::abs(s.weights[b]);
    if (wa != wb) return wa > wb;
    return s.kept_columns[a] < s.kept_columns[b];
  });
  return order;
}

}  // namespace rarescreen::selection
