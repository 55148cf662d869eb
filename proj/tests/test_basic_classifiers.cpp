#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rarescreen/knn.hpp"
#include "rarescreen/matrix.hpp"
#include "rarescreen/naive_bayes.hpp"

using namespace rarescreen;

namespace {

SparseVector row(std::uint32_t dimension, std::vector<std::uint32_t> active) {
  SparseVector v;
  v.dimension = dimension;
  v.active = std::move(active);
  return v;
}

DesignMatrix random_matrix(std::uint32_t dimension, std::size_t n, double density,
                           std::mt19937_64& gen) {
  std::bernoulli_distribution feature(density);
  std::bernoulli_distribution coin(0.5);
  DesignMatrix m;
  m.n_columns = dimension;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint32_t> active;
    for (std::uint32_t j = 0; j < dimension; ++j) {
      if (feature(gen)) active.push_back(j);
    }
    m.rows.push_back(row(dimension, std::move(active)));
    m.labels.push_back(coin(gen) ? Label::Positive : Label::Negative);
  }
  if (!m.has_both_classes()) m.labels[0] = Label::Positive, m.labels[1] = Label::Negative;
  return m;
}

// Deliberately naive reference: dense vectors, full sort, literal
// restatement of the voting rules.
Label oracle_knn(const DesignMatrix& m, const SparseVector& x, std::size_t k,
                 knn::Weighting weighting) {
  std::vector<std::vector<bool>> dense(m.n_rows(),
                                       std::vector<bool>(m.n_columns, false));
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    for (auto j : m.rows[i].active) dense[i][j] = true;
  }
  std::vector<bool> q(m.n_columns, false);
  for (auto j : x.active) q[j] = true;

  std::vector<std::pair<double, std::size_t>> by_distance;
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    std::size_t diff = 0;
    for (std::uint32_t j = 0; j < m.n_columns; ++j) {
      if (dense[i][j] != q[j]) ++diff;
    }
    by_distance.emplace_back(std::sqrt(static_cast<double>(diff)), i);
  }
  std::stable_sort(by_distance.begin(), by_distance.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  by_distance.resize(k);

  const bool any_exact =
      std::any_of(by_distance.begin(), by_distance.end(),
                  [](const auto& p) { return p.first == 0.0; });
  double positive = 0.0;
  double negative = 0.0;
  for (const auto& [d, i] : by_distance) {
    double weight = 1.0;
    if (weighting == knn::Weighting::Distance) {
      if (any_exact) {
        weight = d == 0.0 ? 1.0 : 0.0;
      } else {
        weight = 1.0 / d;
      }
    }
    (m.labels[i] == Label::Positive ? positive : negative) += weight;
  }
  return positive > negative ? Label::Positive : Label::Negative;
}

}  // namespace

TEST_CASE("knn matches the exhaustive-scan oracle") {
  std::mt19937_64 gen(1234);
  const DesignMatrix m = random_matrix(30, 50, 0.3, gen);

  std::bernoulli_distribution feature(0.3);
  for (const std::size_t k : {1u, 2u, 3u, 5u}) {
    for (const auto weighting : {knn::Weighting::Uniform, knn::Weighting::Distance}) {
      const knn::KnnModel model = knn::fit(m, k, weighting);
      for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint32_t> active;
        for (std::uint32_t j = 0; j < 30; ++j) {
          if (feature(gen)) active.push_back(j);
        }
        const SparseVector x = row(30, active);
        CHECK(knn::predict(model, x) == oracle_knn(m, x, k, weighting));
      }
      // Training rows themselves exercise the exact-match path.
      for (std::size_t i = 0; i < m.n_rows(); ++i) {
        CHECK(knn::predict(model, m.rows[i]) == oracle_knn(m, m.rows[i], k, weighting));
      }
    }
  }
}

TEST_CASE("knn hand fixtures") {
  // Rows: two positives at {0}, {0,1}; two negatives at {2}, {2,3}.
  DesignMatrix m;
  m.n_columns = 4;
  m.rows = {row(4, {0}), row(4, {0, 1}), row(4, {2}), row(4, {2, 3})};
  m.labels = {Label::Positive, Label::Positive, Label::Negative, Label::Negative};

  SUBCASE("nearest neighbor wins") {
    const auto model = knn::fit(m, 1, knn::Weighting::Uniform);
    CHECK(knn::predict(model, row(4, {0, 1})) == Label::Positive);
    CHECK(knn::predict(model, row(4, {2, 3})) == Label::Negative);
  }
  SUBCASE("uniform vote ties read Negative") {
    const auto model = knn::fit(m, 2, knn::Weighting::Uniform);
    // Query {0, 2}: distance 1 to rows 0 and 2 (one of each class),
    // the tie resolves to Negative.
    CHECK(knn::predict(model, row(4, {0, 2})) == Label::Negative);
  }
  SUBCASE("exact match outvotes everything under distance weighting") {
    const auto model = knn::fit(m, 4, knn::Weighting::Distance);
    CHECK(knn::predict(model, row(4, {0})) == Label::Positive);
    CHECK(knn::predict(model, row(4, {2})) == Label::Negative);
  }
  SUBCASE("k larger than the training set is rejected") {
    CHECK_THROWS_AS(knn::fit(m, 5, knn::Weighting::Uniform), knn::KTooLarge);
    CHECK_THROWS_AS(knn::fit(m, 0, knn::Weighting::Uniform), Error);
  }
  SUBCASE("dimension mismatch is rejected") {
    const auto model = knn::fit(m, 1, knn::Weighting::Uniform);
    CHECK_THROWS_AS(knn::predict(model, row(7, {0})), DimensionMismatch);
  }
}

TEST_CASE("nb reproduces the hand-computed posterior") {
  // Three positive rows with the feature present in two; three negative
  // rows with it present in one. Laplace alpha = 1 gives smoothed
  // likelihoods 3/5 and 2/5, equal priors cancel, posterior = 0.6.
  DesignMatrix m;
  m.n_columns = 1;
  m.rows = {row(1, {0}), row(1, {0}), row(1, {}),
            row(1, {}),  row(1, {}),  row(1, {0})};
  m.labels = {Label::Positive, Label::Positive, Label::Positive,
              Label::Negative, Label::Negative, Label::Negative};

  const auto model = naive_bayes::fit(m, 1.0);
  const auto [label, posterior] = naive_bayes::predict(model, row(1, {0}));
  CHECK(label == Label::Positive);
  CHECK(posterior == doctest::Approx(0.6).epsilon(1e-9));

  // Absent query flips the evidence: P(absent|Pos) = 0.4 vs 0.6.
  const auto [label2, posterior2] = naive_bayes::predict(model, row(1, {}));
  CHECK(label2 == Label::Negative);
  CHECK(posterior2 == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("nb stored likelihoods follow the smoothing formula") {
  std::mt19937_64 gen(77);
  const DesignMatrix m = random_matrix(6, 40, 0.4, gen);
  const double alpha = 0.5;
  const auto model = naive_bayes::fit(m, alpha);

  const std::size_t n_neg = m.count_label(Label::Negative);
  const std::size_t n_pos = m.count_label(Label::Positive);
  CHECK(model.log_prior[0] ==
        doctest::Approx(std::log(static_cast<double>(n_neg) / 40.0)));
  CHECK(model.log_prior[1] ==
        doctest::Approx(std::log(static_cast<double>(n_pos) / 40.0)));

  for (std::uint32_t j = 0; j < m.n_columns; ++j) {
    std::size_t present_neg = 0;
    std::size_t present_pos = 0;
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
      if (!m.rows[i].contains(j)) continue;
      (m.labels[i] == Label::Positive ? present_pos : present_neg) += 1;
    }
    const double p_neg = (static_cast<double>(present_neg) + alpha) /
                         (static_cast<double>(n_neg) + 2.0 * alpha);
    const double p_pos = (static_cast<double>(present_pos) + alpha) /
                         (static_cast<double>(n_pos) + 2.0 * alpha);
    CHECK(model.log_likelihood_present[0][j] == doctest::Approx(std::log(p_neg)));
    CHECK(model.log_likelihood_present[1][j] == doctest::Approx(std::log(p_pos)));
    CHECK(model.log_likelihood_absent[0][j] ==
          doctest::Approx(std::log(1.0 - p_neg)));
    CHECK(model.log_likelihood_absent[1][j] ==
          doctest::Approx(std::log(1.0 - p_pos)));
  }
}

TEST_CASE("nb posteriors normalize and ties read Negative") {
  std::mt19937_64 gen(99);
  const DesignMatrix m = random_matrix(8, 30, 0.4, gen);
  const auto model = naive_bayes::fit(m, 1.0);

  std::bernoulli_distribution feature(0.4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint32_t> active;
    for (std::uint32_t j = 0; j < 8; ++j) {
      if (feature(gen)) active.push_back(j);
    }
    const auto [label, posterior] = naive_bayes::predict(model, row(8, active));
    CHECK(posterior >= 0.5 - 1e-12);
    CHECK(posterior <= 1.0 + 1e-12);
  }

  // Equal class counts and identical likelihoods force a perfect tie.
  DesignMatrix balanced;
  balanced.n_columns = 1;
  balanced.rows = {row(1, {0}), row(1, {}), row(1, {0}), row(1, {})};
  balanced.labels = {Label::Positive, Label::Positive, Label::Negative,
                     Label::Negative};
  const auto tied = naive_bayes::fit(balanced, 1.0);
  const auto [label, posterior] = naive_bayes::predict(tied, row(1, {0}));
  CHECK(label == Label::Negative);
  CHECK(posterior == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("nb rejects degenerate inputs") {
  CHECK_THROWS_AS(naive_bayes::fit(DesignMatrix{}, 1.0), EmptyMatrix);

  DesignMatrix single;
  single.n_columns = 2;
  single.rows = {row(2, {0}), row(2, {1})};
  single.labels = {Label::Positive, Label::Positive};
  CHECK_THROWS_AS(naive_bayes::fit(single, 1.0), SingleClass);

  DesignMatrix ok;
  ok.n_columns = 2;
  ok.rows = {row(2, {0}), row(2, {1})};
  ok.labels = {Label::Positive, Label::Negative};
  CHECK_THROWS_AS(naive_bayes::fit(ok, 0.0), Error);  // alpha must be > 0
  const auto model = naive_bayes::fit(ok, 1.0);
  CHECK_THROWS_AS(naive_bayes::predict(model, row(9, {0})), DimensionMismatch);
}
