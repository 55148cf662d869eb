#include "rarescreen/naive_bayes.hpp"

#include <cmath>

namespace rarescreen::naive_bayes {

NbModel fit(const DesignMatrix& m, double smoothing_alpha) {
  check_design_matrix(m);
  if (m.rows.empty()) throw EmptyMatrix();
  if (!m.has_both_classes()) throw SingleClass();
  if (!(smoothing_alpha > 0.0)) throw Error("smoothing_alpha must be > 0");

  const std::size_t d = m.n_columns;
  std::array<std::size_t, 2> class_count{};
  std::array<std::vector<std::size_t>, 2> present_count;
  present_count[0].assign(d, 0);
  present_count[1].assign(d, 0);
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    const std::size_t c = m.labels[i] == Label::Positive ? 1 : 0;
    ++class_count[c];
    for (std::uint32_t col : m.rows[i].active) ++present_count[c][col];
  }

  NbModel model;
  model.smoothing_alpha = smoothing_alpha;
  const double n = static_cast<double>(m.n_rows());
  for (std::size_t c = 0; c < 2; ++c) {
    model.log_prior[c] = std::log(static_cast<double>(class_count[c]) / n);
    model.log_likelihood_present[c].resize(d);
    model.log_likelihood_absent[c].resize(d);
    const double denom = static_cast<double>(class_count[c]) + 2.0 * smoothing_alpha;
    for (std::size_t j = 0; j < d; ++j) {
      const double p_present =
          (static_cast<double>(present_count[c][j]) + smoothing_alpha) / denom;
      model.log_likelihood_present[c][j] = std::log(p_present);
      model.log_likelihood_absent[c][j] = std::log1p(-p_present);
    }
  }
  return model;
}

std::pair<Label, double> predict(const NbModel& model, const SparseVector& x) {
  if (x.dimension != model.dimension()) {
    throw DimensionMismatch(model.dimension(), x.dimension);
  }

  std::array<double, 2> log_post = model.log_prior;
  for (std::size_t c = 0; c < 2; ++c) {
    // Start from the all-absent sum, then swap in the present terms.
    for (std::size_t j = 0; j < model.dimension(); ++j) {
      log_post[c] += model.log_likelihood_absent[c][j];
    }
    for (std::uint32_t col : x.active) {
      log_post[c] += model.log_likelihood_present[c][col] -
                     model.log_likelihood_absent[c][col];
    }
  }

  const double max_lp = std::max(log_post[0], log_post[1]);
  const double e0 = std::exp(log_post[0] - max_lp);
  const double e1 = std::exp(log_post[1] - max_lp);
  const double posterior_positive = e1 / (e0 + e1);

  if (log_post[1] > log_post[0]) return {Label::Positive, posterior_positive};
  return {Label::Negative, 1.0 - posterior_positive};
}

}  // namespace rarescreen::naive_bayes
