#include "rarescreen/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "rarescreen/parallel.hpp"
#include "rarescreen/rng.hpp"

namespace rarescreen::eval {

void tally(ConfusionCounts& counts, Label truth, Label predicted) {
  if (truth == Label::Positive) {
    predicted == Label::Positive ? ++counts.tp : ++counts.fn;
  } else {
    predicted == Label::Positive ? ++counts.fp : ++counts.tn;
  }
}

double precision(const ConfusionCounts& counts) {
  const std::uint64_t denom = counts.tp + counts.fp;
  return denom == 0 ? 0.0 : static_cast<double>(counts.tp) / static_cast<double>(denom);
}

double recall(const ConfusionCounts& counts) {
  const std::uint64_t denom = counts.tp + counts.fn;
  return denom == 0 ? 0.0 : static_cast<double>(counts.tp) / static_cast<double>(denom);
}

double f1_score(const ConfusionCounts& counts) {
  const double p = precision(counts);
  const double r = recall(counts);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

FoldAssignment stratified_kfold(const std::vector<Label>& labels, std::uint32_t k,
                                std::uint64_t seed) {
  if (k < 2) throw Error("fold count must be at least 2");
  for (Label label : {Label::Negative, Label::Positive}) {
    std::size_t count = 0;
    for (Label l : labels) count += l == label;
    if (count < k) throw TooFewPerClass(label, count, k);
  }

  FoldAssignment assignment;
  assignment.fold_of.resize(labels.size());
  assignment.k = k;
  assignment.seed = seed;
  for (Label label : {Label::Negative, Label::Positive}) {
    std::vector<std::uint32_t> ids;
    for (std::uint32_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) ids.push_back(i);
    }
    std::mt19937_64 gen = rng::engine(seed, static_cast<std::uint64_t>(label) + 1);
    rng::shuffle(ids, gen);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      assignment.fold_of[ids[i]] = static_cast<std::uint32_t>(i % k);
    }
  }
  return assignment;
}

CvResult cross_validate(const DesignMatrix& m, const ClassifierConfig& config,
                        const FoldAssignment& folds, std::uint64_t fit_seed,
                        const FoldPreparer& preparer) {
  if (folds.fold_of.size() != m.n_rows()) {
    throw Error("fold assignment length disagrees with matrix rows");
  }
  CvResult result;
  result.fold_f1.resize(folds.k, 0.0);
  for (std::uint32_t fold = 0; fold < folds.k; ++fold) {
    std::vector<std::uint32_t> train_ids;
    std::vector<std::uint32_t> test_ids;
    for (std::uint32_t row = 0; row < m.n_rows(); ++row) {
      (folds.fold_of[row] == fold ? test_ids : train_ids).push_back(row);
    }
    DesignMatrix train = take_rows(m, train_ids);
    DesignMatrix test = take_rows(m, test_ids);
    if (preparer) {
      FoldData prepared = preparer(train, test, fold);
      train = std::move(prepared.train);
      test = std::move(prepared.test);
    }
    try {
      const std::unique_ptr<Classifier> model =
          fit_classifier(train, config, rng::derive_seed(fit_seed, fold));
      result.all_converged = result.all_converged && model->converged();
      ConfusionCounts fold_counts;
      for (std::size_t i = 0; i < test.n_rows(); ++i) {
        tally(fold_counts, test.labels[i], model->predict(test.rows[i]));
      }
      result.fold_f1[fold] = f1_score(fold_counts);
      result.totals.tp += fold_counts.tp;
      result.totals.fp += fold_counts.fp;
      result.totals.fn += fold_counts.fn;
      result.totals.tn += fold_counts.tn;
    } catch (const Error& e) {
      throw Error("fold " + std::to_string(fold) + ": " + e.what());
    }
  }
  result.mean_f1 =
      std::accumulate(result.fold_f1.begin(), result.fold_f1.end(), 0.0) /
      static_cast<double>(folds.k);
  return result;
}

CvResult cross_validate(const DesignMatrix& m, const ClassifierConfig& config,
                        std::uint32_t k, std::uint64_t seed,
                        const FoldPreparer& preparer) {
  return cross_validate(m, config, stratified_kfold(m.labels, k, seed), seed,
                        preparer);
}

std::size_t grid_size(const ParamGrid& grid) {
  std::size_t size = 1;
  for (const auto& [name, values] : grid.axes) {
    if (values.empty()) throw Error("grid axis " + name + " has no values");
    size *= values.size();
  }
  return size;
}

namespace {

ClassifierConfig default_config(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::Knn:
      return KnnConfig{};
    case AlgorithmId::NaiveBayes:
      return NbConfig{};
    case AlgorithmId::Svm:
      return SvmConfig{};
    case AlgorithmId::DecisionTree:
      return TreeConfig{};
    case AlgorithmId::RandomForest:
      return ForestConfig{};
    case AlgorithmId::AdaBoost:
      return AdaBoostConfig{};
  }
  throw Error("unreachable algorithm id");
}

std::size_t parse_count(const std::string& name, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long parsed = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return static_cast<std::size_t>(parsed);
  } catch (const std::exception&) {
    throw Error("grid axis " + name + ": bad count '" + value + "'");
  }
}

double parse_real(const std::string& name, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double parsed = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw Error("grid axis " + name + ": bad real '" + value + "'");
  }
}

void apply_axis(ClassifierConfig& config, const std::string& name,
                const std::string& value) {
  struct Visitor {
    const std::string& name;
    const std::string& value;

    void operator()(KnnConfig& c) const {
      if (name == "k") {
        c.k = parse_count(name, value);
      } else if (name == "weights") {
        c.weighting = knn::parse_weighting(value);
      } else {
        throw Error("knn grid has no axis " + name);
      }
    }
    void operator()(NbConfig& c) const {
      if (name == "alpha") {
        c.smoothing_alpha = parse_real(name, value);
      } else {
        throw Error("naive_bayes grid has no axis " + name);
      }
    }
    void operator()(SvmConfig& c) const {
      if (name == "c") {
        c.c = parse_real(name, value);
      } else if (name == "kernel") {
        c.kernel.kind = svm::parse_kernel_kind(value);
      } else if (name == "gamma") {
        c.kernel.gamma = parse_real(name, value);
      } else {
        throw Error("svm grid has no axis " + name);
      }
    }
    void operator()(TreeConfig& c) const {
      if (name == "criterion") {
        c.criterion = trees::parse_criterion(value);
      } else {
        throw Error("decision_tree grid has no axis " + name);
      }
    }
    void operator()(ForestConfig& c) const {
      if (name == "n") {
        c.n_estimators = parse_count(name, value);
      } else if (name == "criterion") {
        c.criterion = trees::parse_criterion(value);
      } else {
        throw Error("random_forest grid has no axis " + name);
      }
    }
    void operator()(AdaBoostConfig& c) const {
      if (name == "n") {
        c.n_estimators = parse_count(name, value);
      } else {
        throw Error("adaboost grid has no axis " + name);
      }
    }
  };
  std::visit(Visitor{name, value}, config);
}

}  // namespace

std::vector<ClassifierConfig> enumerate_grid(const ParamGrid& grid) {
  const std::size_t total = grid_size(grid);
  std::vector<ClassifierConfig> configs;
  configs.reserve(total);
  // Odometer over axis positions, first axis slowest.
  std::vector<std::size_t> at(grid.axes.size(), 0);
  for (std::size_t cell = 0; cell < total; ++cell) {
    ClassifierConfig config = default_config(grid.algorithm);
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
      apply_axis(config, grid.axes[a].first, grid.axes[a].second[at[a]]);
    }
    configs.push_back(std::move(config));
    for (std::size_t a = grid.axes.size(); a-- > 0;) {
      if (++at[a] < grid.axes[a].second.size()) break;
      at[a] = 0;
    }
  }
  return configs;
}

ParamGrid default_grid(AlgorithmId id) {
  ParamGrid grid;
  grid.algorithm = id;
  switch (id) {
    case AlgorithmId::Knn:
      grid.axes = {{"k", {"1", "2", "3"}}, {"weights", {"uniform", "distance"}}};
      break;
    case AlgorithmId::NaiveBayes:
      break;
    case AlgorithmId::Svm:
      grid.axes = {{"c", {"0.01", "0.1", "1", "10", "100"}},
                   {"kernel", {"linear", "rbf"}},
                   {"gamma", {"0.001", "0.0001"}}};
      break;
    case AlgorithmId::DecisionTree:
      grid.axes = {{"criterion", {"gini", "entropy"}}};
      break;
    case AlgorithmId::RandomForest:
      grid.axes = {{"n", {"10", "15", "100"}}, {"criterion", {"gini", "entropy"}}};
      break;
    case AlgorithmId::AdaBoost:
      grid.axes = {{"n", {"10", "15", "100"}}};
      break;
  }
  return grid;
}

std::vector<ParamGrid> default_grids() {
  std::vector<ParamGrid> grids;
  for (std::size_t i = 0; i < kAlgorithmCount; ++i) {
    grids.push_back(default_grid(static_cast<AlgorithmId>(i)));
  }
  return grids;
}

EvalReport grid_search(const DesignMatrix& m, const ParamGrid& grid,
                       std::uint32_t k, std::uint64_t seed, unsigned n_threads,
                       const FoldPreparer& preparer) {
  const std::vector<ClassifierConfig> configs = enumerate_grid(grid);
  EvalReport report;
  report.algorithm = grid.algorithm;
  report.expected_configurations = grid_size(grid);
  if (configs.size() != report.expected_configurations) {
    throw Error("grid enumeration produced " + std::to_string(configs.size()) +
                " of " + std::to_string(report.expected_configurations) +
                " configurations");
  }

  const FoldAssignment folds = stratified_kfold(m.labels, k, seed);
  report.per_config.resize(configs.size());
  parallel_for(configs.size(), n_threads, [&](std::size_t cell) {
    const std::uint64_t cell_seed = rng::derive_seed(
        seed, (static_cast<std::uint64_t>(grid.algorithm) << 32) | cell);
    const CvResult cv = cross_validate(m, configs[cell], folds, cell_seed, preparer);
    ConfigResult& out = report.per_config[cell];
    out.config = configs[cell];
    out.params_text = describe(configs[cell]);
    out.fold_f1 = cv.fold_f1;
    out.mean_f1 = cv.mean_f1;
    out.totals = cv.totals;
    out.converged = cv.all_converged;
  });

  report.best_index = 0;
  for (std::size_t i = 1; i < report.per_config.size(); ++i) {
    if (report.per_config[i].mean_f1 > report.per_config[report.best_index].mean_f1) {
      report.best_index = i;
    }
  }
  report.best_mean_f1 = report.per_config[report.best_index].mean_f1;
  return report;
}

}  // namespace rarescreen::eval
