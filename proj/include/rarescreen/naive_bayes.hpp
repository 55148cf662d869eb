#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "rarescreen/matrix.hpp"

namespace rarescreen::naive_bayes {

// Bernoulli Naive Bayes with Laplace-style smoothing; per-class, per-feature
// presence and absence likelihoods stored as logs.
struct NbModel {
  // index 0 = Negative, 1 = Positive
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> log_likelihood_present;
  std::array<std::vector<double>, 2> log_likelihood_absent;
  double smoothing_alpha = 1.0;

  std::uint32_t dimension() const {
    return static_cast<std::uint32_t>(log_likelihood_present[0].size());
  }
};

// prior_c = count_c / n; P(present | c) = (present_c + alpha) / (count_c + 2 alpha).
NbModel fit(const DesignMatrix& m, double smoothing_alpha = 1.0);

// Returns (label, posterior of that label). Posteriors are normalized over
// the two classes; an exact posterior tie reads Negative.
std::pair<Label, double> predict(const NbModel& model, const SparseVector& x);

}  // namespace rarescreen::naive_bayes
