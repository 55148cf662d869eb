#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "rarescreen/matrix.hpp"
#include "rarescreen/svm.hpp"

using namespace rarescreen;
using svm::KernelKind;
using svm::KernelSpec;

namespace {

SparseVector row(std::uint32_t dimension, std::vector<std::uint32_t> active) {
  SparseVector v;
  v.dimension = dimension;
  v.active = std::move(active);
  return v;
}

DesignMatrix make_matrix(std::uint32_t dimension,
                         std::vector<std::vector<std::uint32_t>> actives,
                         std::vector<Label> labels) {
  DesignMatrix m;
  m.n_columns = dimension;
  for (auto& a : actives) m.rows.push_back(row(dimension, std::move(a)));
  m.labels = std::move(labels);
  return m;
}

std::vector<std::uint32_t> random_active(std::uint32_t dimension,
                                         std::mt19937_64& gen,
                                         double density = 0.4) {
  std::bernoulli_distribution feature(density);
  std::vector<std::uint32_t> active;
  for (std::uint32_t j = 0; j < dimension; ++j) {
    if (feature(gen)) active.push_back(j);
  }
  return active;
}

// Random matrix with pairwise-distinct rows and both classes. Distinct rows
// keep every kernel pair at positive curvature, so SMO cannot stall.
DesignMatrix random_distinct_matrix(std::uint32_t dimension, std::size_t n,
                                    std::mt19937_64& gen) {
  std::bernoulli_distribution coin(0.5);
  while (true) {
    std::set<std::vector<std::uint32_t>> seen;
    DesignMatrix m;
    m.n_columns = dimension;
    while (m.rows.size() < n) {
      auto active = random_active(dimension, gen);
      if (!seen.insert(active).second) continue;
      m.rows.push_back(row(dimension, std::move(active)));
      m.labels.push_back(coin(gen) ? Label::Positive : Label::Negative);
    }
    if (m.has_both_classes()) return m;
  }
}

std::vector<std::vector<double>> gram_of(const DesignMatrix& m,
                                         const KernelSpec& spec) {
  const std::size_t n = m.n_rows();
  std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      gram[i][j] = svm::kernel_eval(m.rows[i], m.rows[j], spec);
    }
  }
  return gram;
}

std::vector<double> labels_pm1(const DesignMatrix& m) {
  std::vector<double> y;
  for (Label l : m.labels) y.push_back(l == Label::Positive ? 1.0 : -1.0);
  return y;
}

// Draws a point of the dual feasible region: uniform in the box, then both
// class sums scaled down to their common minimum so sum alpha_i y_i = 0.
std::vector<double> random_feasible(const std::vector<double>& y, double c,
                                    std::mt19937_64& gen) {
  std::uniform_real_distribution<double> box(0.0, c);
  std::vector<double> alpha(y.size());
  double sum_pos = 0.0;
  double sum_neg = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    alpha[i] = box(gen);
    (y[i] > 0 ? sum_pos : sum_neg) += alpha[i];
  }
  if (sum_pos <= 0.0 || sum_neg <= 0.0) {
    return std::vector<double>(y.size(), 0.0);
  }
  const double target = std::min(sum_pos, sum_neg);
  for (std::size_t i = 0; i < y.size(); ++i) {
    alpha[i] *= target / (y[i] > 0 ? sum_pos : sum_neg);
  }
  return alpha;
}

}  // namespace

TEST_CASE("kernel_eval matches hand fixtures") {
  const SparseVector a = row(6, {0, 2, 4});
  const SparseVector b = row(6, {2, 3, 4});
  KernelSpec linear;
  CHECK(svm::kernel_eval(a, b, linear) == doctest::Approx(2.0));
  CHECK(svm::kernel_eval(a, a, linear) == doctest::Approx(3.0));
  // Disjoint active sets are orthogonal.
  CHECK(svm::kernel_eval(row(6, {0, 1}), row(6, {2, 3}), linear) == 0.0);

  KernelSpec rbf;
  rbf.kind = KernelKind::Rbf;
  rbf.gamma = 0.001;
  // Symmetric difference of size 4.
  CHECK(svm::kernel_eval(row(6, {0, 1}), row(6, {2, 3}), rbf) ==
        doctest::Approx(0.9960080).epsilon(1e-6));
  CHECK(svm::kernel_eval(a, a, rbf) == 1.0);

  CHECK_THROWS_AS(svm::kernel_eval(row(6, {0}), row(7, {0}), linear),
                  DimensionMismatch);
}

TEST_CASE("kernel_eval is symmetric") {
  std::mt19937_64 gen(72001);
  KernelSpec rbf;
  rbf.kind = KernelKind::Rbf;
  rbf.gamma = 0.0001;
  for (int rep = 0; rep < 50; ++rep) {
    const SparseVector x = row(12, random_active(12, gen));
    const SparseVector z = row(12, random_active(12, gen));
    for (const KernelSpec& spec : {KernelSpec{}, rbf}) {
      CHECK(svm::kernel_eval(x, z, spec) == svm::kernel_eval(z, x, spec));
    }
  }
}

TEST_CASE("kernel names round-trip and specs validate gamma") {
  CHECK(std::string(svm::to_string(KernelKind::Linear)) == "linear");
  CHECK(std::string(svm::to_string(KernelKind::Rbf)) == "rbf");
  CHECK(svm::parse_kernel_kind("linear") == KernelKind::Linear);
  CHECK(svm::parse_kernel_kind("rbf") == KernelKind::Rbf);
  CHECK_THROWS_AS(svm::parse_kernel_kind("poly"), Error);

  KernelSpec bad;
  bad.kind = KernelKind::Rbf;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(bad.check(), Error);
  bad.gamma = -0.5;
  CHECK_THROWS_AS(bad.check(), Error);
  bad.kind = KernelKind::Linear;  // gamma is ignored for linear
  CHECK_NOTHROW(bad.check());
}

TEST_CASE("smo_solve recovers the symmetric two-point solution") {
  // Points +1 and -1 on a line, labels +1/-1: Gram [[1,-1],[-1,1]]. The
  // margin constraints are active and symmetric, so alpha = (0.5, 0.5)
  // and the bias vanishes.
  const std::vector<std::vector<double>> gram = {{1.0, -1.0}, {-1.0, 1.0}};
  const std::vector<double> y = {1.0, -1.0};
  const svm::SmoResult result = svm::smo_solve(gram, y, 100.0, 1e-8, 10000);
  CHECK(result.converged);
  REQUIRE(result.alphas.size() == 2);
  CHECK(result.alphas[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(result.alphas[1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(result.bias == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(svm::dual_objective(gram, y, result.alphas) ==
        doctest::Approx(0.5).epsilon(1e-6));

  // f(x) = x dot (1, 0): the query at coordinate 2 has kernel row (2, -2).
  const double margin_at_2 = result.alphas[0] * y[0] * 2.0 +
                             result.alphas[1] * y[1] * -2.0 + result.bias;
  CHECK(margin_at_2 == doctest::Approx(2.0).epsilon(1e-6));
  // A support vector sits exactly on its margin.
  const double margin_at_x1 = result.alphas[0] * y[0] * gram[0][0] +
                              result.alphas[1] * y[1] * gram[1][0] +
                              result.bias;
  CHECK(margin_at_x1 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("smo_fit solves the one-feature two-point instance exactly") {
  // x1 = {0} positive, x2 = {} negative. The dual reduces to
  // 2a - a^2/2 with alpha1 = alpha2 = a, so a = 2 and the active margin
  // constraints give f(x) = 2*[feature 0] - 1.
  const DesignMatrix m =
      make_matrix(1, {{0}, {}}, {Label::Positive, Label::Negative});
  svm::FitReport report;
  const svm::SvmModel model =
      svm::smo_fit(m, 10.0, KernelSpec{}, 1e-6, 1000, &report);
  CHECK(model.converged);
  REQUIRE(model.support_rows.size() == 2);
  CHECK(model.alphas[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(model.alphas[1] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(model.bias == doctest::Approx(-1.0).epsilon(1e-6));
  REQUIRE(report.alphas.size() == 2);
  CHECK(report.y[0] == 1.0);
  CHECK(report.y[1] == -1.0);

  const svm::Decision on_pos = svm::svm_decision(model, m.rows[0]);
  CHECK(on_pos.label == Label::Positive);
  CHECK(on_pos.margin == doctest::Approx(1.0).epsilon(1e-6));
  const svm::Decision on_neg = svm::svm_decision(model, m.rows[1]);
  CHECK(on_neg.label == Label::Negative);
  CHECK(on_neg.margin == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("svm_decision with no support vectors is bias only") {
  svm::SvmModel model;
  model.dimension = 4;
  model.bias = -0.3;
  const svm::Decision d = svm::svm_decision(model, row(4, {1}));
  CHECK(d.margin == doctest::Approx(-0.3));
  CHECK(d.label == Label::Negative);
  CHECK_THROWS_AS(svm::svm_decision(model, row(9, {1})), DimensionMismatch);

  // margin = 0 resolves to Negative.
  model.bias = 0.0;
  CHECK(svm::svm_decision(model, row(4, {})).label == Label::Negative);
}

TEST_CASE("dual variables stay feasible whether or not the fit converges") {
  std::mt19937_64 gen(72002);
  for (int rep = 0; rep < 20; ++rep) {
    const DesignMatrix m = random_distinct_matrix(8, 12, gen);
    const double c = 1.0;
    for (std::size_t budget : {std::size_t{1}, std::size_t{100}}) {
      svm::FitReport report;
      const svm::SvmModel model =
          svm::smo_fit(m, c, KernelSpec{}, 1e-3, budget, &report);
      double balance = 0.0;
      for (std::size_t i = 0; i < report.alphas.size(); ++i) {
        CHECK(report.alphas[i] >= 0.0);
        CHECK(report.alphas[i] <= c + 1e-12);
        balance += report.alphas[i] * report.y[i];
      }
      CHECK(std::abs(balance) <= 1e-8);
      for (double a : model.alphas) CHECK(a > 0.0);
      CHECK(model.support_rows.size() == model.alphas.size());
      CHECK(model.support_rows.size() == model.support_y.size());
    }
  }
}

TEST_CASE("converged fits satisfy the KKT conditions within tolerance") {
  std::mt19937_64 gen(72003);
  KernelSpec rbf;
  rbf.kind = KernelKind::Rbf;
  rbf.gamma = 0.1;
  const double tolerance = 1e-3;
  int converged_count = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const DesignMatrix m = random_distinct_matrix(8, 14, gen);
    for (const KernelSpec& spec : {KernelSpec{}, rbf}) {
      svm::FitReport report;
      const svm::SvmModel model =
          svm::smo_fit(m, 1.0, spec, tolerance, 200, &report);
      if (!model.converged) continue;
      ++converged_count;
      CHECK(svm::kkt_residual(m, report.alphas, report.y, report.bias, spec,
                              1.0) <= tolerance + 1e-12);
    }
  }
  CHECK(converged_count >= 15);
}

TEST_CASE("separable instances train to perfect accuracy") {
  // Feature 0 marks the positives, so a linear separator exists.
  std::mt19937_64 gen(72004);
  std::bernoulli_distribution coin(0.5);
  for (int rep = 0; rep < 10; ++rep) {
    DesignMatrix m;
    m.n_columns = 6;
    for (int i = 0; i < 16; ++i) {
      const bool positive = i % 2 == 0;
      std::vector<std::uint32_t> active;
      if (positive) active.push_back(0);
      for (std::uint32_t j = 1; j < 6; ++j) {
        if (coin(gen)) active.push_back(j);
      }
      m.rows.push_back(row(6, std::move(active)));
      m.labels.push_back(positive ? Label::Positive : Label::Negative);
    }
    const svm::SvmModel model = svm::smo_fit(m, 100.0, KernelSpec{});
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
      CHECK(svm::svm_decision(model, m.rows[i]).label == m.labels[i]);
    }
  }
}

TEST_CASE("solved duals beat ten thousand random feasible points") {
  std::mt19937_64 gen(72005);
  std::uniform_int_distribution<std::size_t> size(2, 6);
  KernelSpec rbf;
  rbf.kind = KernelKind::Rbf;
  rbf.gamma = 0.05;
  for (int rep = 0; rep < 20; ++rep) {
    const DesignMatrix m = random_distinct_matrix(8, size(gen), gen);
    const KernelSpec& spec = rep % 2 == 0 ? KernelSpec{} : rbf;
    const auto gram = gram_of(m, spec);
    const auto y = labels_pm1(m);
    const double c = 1.0;
    const svm::SmoResult result = svm::smo_solve(gram, y, c, 1e-6, 100000);
    REQUIRE(result.converged);
    const double achieved = svm::dual_objective(gram, y, result.alphas);
    for (int s = 0; s < 10000; ++s) {
      const auto sample = random_feasible(y, c, gen);
      CHECK(svm::dual_objective(gram, y, sample) <= achieved + 1e-9);
    }
  }
}

TEST_CASE("smo_fit rejects single-class cohorts") {
  const DesignMatrix m =
      make_matrix(2, {{0}, {1}}, {Label::Positive, Label::Positive});
  CHECK_THROWS_AS(svm::smo_fit(m, 1.0, KernelSpec{}), SingleClass);
  const DesignMatrix empty;
  CHECK_THROWS_AS(svm::smo_fit(empty, 1.0, KernelSpec{}), EmptyMatrix);
}

TEST_CASE("exhausted budgets flag the model instead of throwing") {
  std::mt19937_64 gen(72006);
  const DesignMatrix m = random_distinct_matrix(8, 12, gen);
  // A tolerance this tight is unreachable in floating point, so the pair
  // budget (max_passes * n rows) runs out.
  svm::FitReport report;
  const svm::SvmModel model =
      svm::smo_fit(m, 1.0, KernelSpec{}, 1e-300, 2, &report);
  CHECK_FALSE(model.converged);
  CHECK_FALSE(report.converged);
  CHECK(model.iterations <= 2 * m.n_rows());
  CHECK(model.iterations >= 1);
}
