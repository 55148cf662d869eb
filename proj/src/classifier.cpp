#include "rarescreen/classifier.hpp"

#include <utility>

namespace rarescreen {

namespace {

using nlohmann::ordered_json;

const char* const kAlgorithmNames[kAlgorithmCount] = {
    "knn", "naive_bayes", "svm", "decision_tree", "random_forest", "adaboost"};

}  // namespace

const char* to_string(AlgorithmId id) {
  return kAlgorithmNames[static_cast<std::size_t>(id)];
}

AlgorithmId parse_algorithm(const std::string& text) {
  for (std::size_t i = 0; i < kAlgorithmCount; ++i) {
    if (text == kAlgorithmNames[i]) return static_cast<AlgorithmId>(i);
  }
  throw Error("unknown algorithm: " + text);
}

AlgorithmId algorithm_of(const ClassifierConfig& config) {
  return static_cast<AlgorithmId>(config.index());
}

std::string describe(const ClassifierConfig& config) {
  struct Visitor {
    std::string operator()(const KnnConfig& c) const {
      return "k=" + std::to_string(c.k) +
             " weights=" + knn::to_string(c.weighting);
    }
    std::string operator()(const NbConfig&) const { return "-"; }
    std::string operator()(const SvmConfig& c) const {
      return "c=" + format_shortest(c.c) +
             " kernel=" + svm::to_string(c.kernel.kind) +
             " gamma=" + format_shortest(c.kernel.gamma);
    }
    std::string operator()(const TreeConfig& c) const {
      return std::string("criterion=") + trees::to_string(c.criterion);
    }
    std::string operator()(const ForestConfig& c) const {
      return "n=" + std::to_string(c.n_estimators) +
             " criterion=" + trees::to_string(c.criterion);
    }
    std::string operator()(const AdaBoostConfig& c) const {
      return "n=" + std::to_string(c.n_estimators);
    }
  };
  return std::visit(Visitor{}, config);
}

namespace {

ordered_json sparse_to_json(const SparseVector& v) {
  return ordered_json(v.active);
}

SparseVector sparse_from_json(const ordered_json& j, std::uint32_t dimension) {
  SparseVector v;
  v.dimension = dimension;
  v.active = j.get<std::vector<std::uint32_t>>();
  check_sparse_vector(v);
  return v;
}

class KnnClassifier final : public Classifier {
 public:
  KnnClassifier(knn::KnnModel model, KnnConfig config)
      : model_(std::move(model)), config_(config) {}

  Label predict(const SparseVector& x) const override {
    return knn::predict(model_, x);
  }
  AlgorithmId algorithm() const override { return AlgorithmId::Knn; }
  std::uint32_t dimension() const override { return model_.stored.n_columns; }

  ordered_json to_json() const override {
    ordered_json j;
    j["algorithm"] = to_string(algorithm());
    j["k"] = config_.k;
    j["weighting"] = knn::to_string(config_.weighting);
    j["dimension"] = model_.stored.n_columns;
    ordered_json rows = ordered_json::array();
    ordered_json labels = ordered_json::array();
    for (const auto& row : model_.stored.rows) rows.push_back(sparse_to_json(row));
    for (Label label : model_.stored.labels) {
      labels.push_back(static_cast<int>(label));
    }
    j["rows"] = std::move(rows);
    j["labels"] = std::move(labels);
    return j;
  }

 private:
  knn::KnnModel model_;
  KnnConfig config_;
};

class NbClassifier final : public Classifier {
 public:
  explicit NbClassifier(naive_bayes::NbModel model) : model_(std::move(model)) {}

  Label predict(const SparseVector& x) const override {
    return naive_bayes::predict(model_, x).first;
  }
  AlgorithmId algorithm() const override { return AlgorithmId::NaiveBayes; }
  std::uint32_t dimension() const override { return model_.dimension(); }

  ordered_json to_json() const override {
    ordered_json j;
    j["algorithm"] = to_string(algorithm());
    j["smoothing_alpha"] = model_.smoothing_alpha;
    j["dimension"] = model_.dimension();
    j["log_prior"] = std::vector<double>(model_.log_prior.begin(),
                                         model_.log_prior.end());
    j["log_likelihood_present"] =
        ordered_json::array({model_.log_likelihood_present[0],
                             model_.log_likelihood_present[1]});
    j["log_likelihood_absent"] =
        ordered_json::array({model_.log_likelihood_absent[0],
                             model_.log_likelihood_absent[1]});
    return j;
  }

 private:
  naive_bayes::NbModel model_;
};

class SvmClassifier final : public Classifier {
 public:
  explicit SvmClassifier(svm::SvmModel model) : model_(std::move(model)) {}

  Label predict(const SparseVector& x) const override {
    return svm::svm_decision(model_, x).label;
  }
  AlgorithmId algorithm() const override { return AlgorithmId::Svm; }
  std::uint32_t dimension() const override { return model_.dimension; }
  bool converged() const override { return model_.converged; }

  ordered_json to_json() const override {
    ordered_json j;
    j["algorithm"] = to_string(algorithm());
    j["dimension"] = model_.dimension;
    j["c"] = model_.c;
    j["kernel"] = ordered_json{{"kind", svm::to_string(model_.kernel.kind)},
                               {"gamma", model_.kernel.gamma}};
    j["bias"] = model_.bias;
    j["converged"] = model_.converged;
    ordered_json support = ordered_json::array();
    for (const auto& row : model_.support_rows) support.push_back(sparse_to_json(row));
    j["support_rows"] = std::move(support);
    j["support_y"] = model_.support_y;
    j["alphas"] = model_.alphas;
    return j;
  }

 private:
  svm::SvmModel model_;
};

class TreeClassifier final : public Classifier {
 public:
  explicit TreeClassifier(trees::DecisionTree tree) : tree_(std::move(tree)) {}

  Label predict(const SparseVector& x) const override {
    return trees::predict(tree_, x);
  }
  AlgorithmId algorithm() const override { return AlgorithmId::DecisionTree; }
  std::uint32_t dimension() const override { return tree_.dimension; }

  ordered_json to_json() const override {
    ordered_json j;
    j["algorithm"] = to_string(algorithm());
    j["criterion"] = trees::to_string(tree_.criterion);
    j["dimension"] = tree_.dimension;
    j["tree"] = trees::serialize_tree(tree_);
    return j;
  }

 private:
  trees::DecisionTree tree_;
};

class ForestClassifier final : public Classifier {
 public:
  explicit ForestClassifier(trees::ForestModel model) : model_(std::move(model)) {}

  Label predict(const SparseVector& x) const override {
    return trees::predict(model_, x);
  }
  AlgorithmId algorithm() const override { return AlgorithmId::RandomForest; }
  std::uint32_t dimension() const override { return model_.dimension; }

  ordered_json to_json() const override {
    ordered_json j;
    j["algorithm"] = to_string(algorithm());
    j["criterion"] = trees::to_string(model_.criterion);
    j["n_estimators"] = model_.n_estimators;
    j["seed"] = model_.seed;
    j["feature_subsample_size"] = model_.feature_subsample_size;
    j["dimension"] = model_.dimension;
    ordered_json serialized = ordered_json::array();
    for (const auto& tree : model_.tree_list) {
      serialized.push_back(trees::serialize_tree(tree));
    }
    j["trees"] = std::move(serialized);
    return j;
  }

 private:
  trees::ForestModel model_;
};

class AdaBoostClassifier final : public Classifier {
 public:
  explicit AdaBoostClassifier(trees::AdaBoostModel model)
      : model_(std::move(model)) {}

  Label predict(const SparseVector& x) const override {
    return trees::predict(model_, x);
  }
  AlgorithmId algorithm() const override { return AlgorithmId::AdaBoost; }
  std::uint32_t dimension() const override { return model_.dimension; }

  ordered_json to_json() const override {
    ordered_json j;
    j["algorithm"] = to_string(algorithm());
    j["dimension"] = model_.dimension;
    ordered_json stumps = ordered_json::array();
    for (const auto& stump : model_.stumps) {
      stumps.push_back(ordered_json::array({stump.feature, stump.polarity}));
    }
    j["stumps"] = std::move(stumps);
    j["alphas"] = model_.alphas;
    j["training_errors"] = model_.training_errors;
    j["final_sample_weights"] = model_.final_sample_weights;
    return j;
  }

 private:
  trees::AdaBoostModel model_;
};

template <class T>
T require(const ordered_json& j, const char* key) {
  if (!j.contains(key)) throw Error(std::string("model json misses key: ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const ordered_json::exception& e) {
    throw Error(std::string("model json key ") + key + ": " + e.what());
  }
}

}  // namespace

std::unique_ptr<Classifier> fit_classifier(const DesignMatrix& m,
                                           const ClassifierConfig& config,
                                           std::uint64_t seed) {
  struct Visitor {
    const DesignMatrix& m;
    std::uint64_t seed;

    std::unique_ptr<Classifier> operator()(const KnnConfig& c) const {
      return std::make_unique<KnnClassifier>(knn::fit(m, c.k, c.weighting), c);
    }
    std::unique_ptr<Classifier> operator()(const NbConfig& c) const {
      return std::make_unique<NbClassifier>(naive_bayes::fit(m, c.smoothing_alpha));
    }
    std::unique_ptr<Classifier> operator()(const SvmConfig& c) const {
      return std::make_unique<SvmClassifier>(
          svm::smo_fit(m, c.c, c.kernel, c.tolerance, c.max_passes));
    }
    std::unique_ptr<Classifier> operator()(const TreeConfig& c) const {
      return std::make_unique<TreeClassifier>(trees::fit_tree(m, c.criterion));
    }
    std::unique_ptr<Classifier> operator()(const ForestConfig& c) const {
      return std::make_unique<ForestClassifier>(
          trees::fit_forest(m, c.n_estimators, c.criterion, seed));
    }
    std::unique_ptr<Classifier> operator()(const AdaBoostConfig& c) const {
      return std::make_unique<AdaBoostClassifier>(
          trees::fit_adaboost(m, c.n_estimators));
    }
  };
  return std::visit(Visitor{m, seed}, config);
}

std::unique_ptr<Classifier> classifier_from_json(const ordered_json& j) {
  const AlgorithmId id = parse_algorithm(require<std::string>(j, "algorithm"));
  const auto dimension = require<std::uint32_t>(j, "dimension");

  switch (id) {
    case AlgorithmId::Knn: {
      knn::KnnModel model;
      model.k = require<std::size_t>(j, "k");
      model.weighting = knn::parse_weighting(require<std::string>(j, "weighting"));
      model.stored.n_columns = dimension;
      const ordered_json& rows = j.at("rows");
      for (const auto& row : rows) {
        model.stored.rows.push_back(sparse_from_json(row, dimension));
      }
      for (int v : require<std::vector<int>>(j, "labels")) {
        if (v != 0 && v != 1) throw Error("model json label must be 0 or 1");
        model.stored.labels.push_back(v == 1 ? Label::Positive : Label::Negative);
      }
      if (model.stored.rows.empty() || model.k == 0 ||
          model.k > model.stored.rows.size() ||
          model.stored.rows.size() != model.stored.labels.size()) {
        throw Error("model json: inconsistent knn payload");
      }
      KnnConfig config{model.k, model.weighting};
      return std::make_unique<KnnClassifier>(std::move(model), config);
    }
    case AlgorithmId::NaiveBayes: {
      naive_bayes::NbModel model;
      model.smoothing_alpha = require<double>(j, "smoothing_alpha");
      const auto prior = require<std::vector<double>>(j, "log_prior");
      if (prior.size() != 2) throw Error("model json: log_prior needs 2 entries");
      model.log_prior = {prior[0], prior[1]};
      const ordered_json& present = j.at("log_likelihood_present");
      const ordered_json& absent = j.at("log_likelihood_absent");
      if (present.size() != 2 || absent.size() != 2) {
        throw Error("model json: likelihood tables need 2 classes");
      }
      for (int c = 0; c < 2; ++c) {
        model.log_likelihood_present[c] = present.at(c).get<std::vector<double>>();
        model.log_likelihood_absent[c] = absent.at(c).get<std::vector<double>>();
        if (model.log_likelihood_present[c].size() != dimension ||
            model.log_likelihood_absent[c].size() != dimension) {
          throw Error("model json: likelihood table size disagrees with dimension");
        }
      }
      return std::make_unique<NbClassifier>(std::move(model));
    }
    case AlgorithmId::Svm: {
      svm::SvmModel model;
      model.dimension = dimension;
      model.c = require<double>(j, "c");
      const ordered_json& kernel = j.at("kernel");
      model.kernel.kind = svm::parse_kernel_kind(require<std::string>(kernel, "kind"));
      model.kernel.gamma = require<double>(kernel, "gamma");
      model.bias = require<double>(j, "bias");
      model.converged = require<bool>(j, "converged");
      for (const auto& row : j.at("support_rows")) {
        model.support_rows.push_back(sparse_from_json(row, dimension));
      }
      model.support_y = require<std::vector<double>>(j, "support_y");
      model.alphas = require<std::vector<double>>(j, "alphas");
      if (model.support_y.size() != model.support_rows.size() ||
          model.alphas.size() != model.support_rows.size()) {
        throw Error("model json: inconsistent svm payload");
      }
      return std::make_unique<SvmClassifier>(std::move(model));
    }
    case AlgorithmId::DecisionTree: {
      const auto criterion =
          trees::parse_criterion(require<std::string>(j, "criterion"));
      return std::make_unique<TreeClassifier>(
          trees::parse_tree(require<std::string>(j, "tree"), dimension, criterion));
    }
    case AlgorithmId::RandomForest: {
      trees::ForestModel model;
      model.dimension = dimension;
      model.criterion = trees::parse_criterion(require<std::string>(j, "criterion"));
      model.n_estimators = require<std::size_t>(j, "n_estimators");
      model.seed = require<std::uint64_t>(j, "seed");
      model.feature_subsample_size =
          require<std::uint32_t>(j, "feature_subsample_size");
      for (const auto& text : require<std::vector<std::string>>(j, "trees")) {
        model.tree_list.push_back(trees::parse_tree(text, dimension, model.criterion));
      }
      if (model.tree_list.empty() || model.tree_list.size() != model.n_estimators) {
        throw Error("model json: inconsistent forest payload");
      }
      return std::make_unique<ForestClassifier>(std::move(model));
    }
    case AlgorithmId::AdaBoost: {
      trees::AdaBoostModel model;
      model.dimension = dimension;
      for (const auto& stump : j.at("stumps")) {
        if (!stump.is_array() || stump.size() != 2) {
          throw Error("model json: stump must be [feature, polarity]");
        }
        const int polarity = stump.at(1).get<int>();
        if (polarity != 1 && polarity != -1) {
          throw Error("model json: stump polarity must be +1 or -1");
        }
        const auto feature = stump.at(0).get<std::uint32_t>();
        if (feature >= dimension) throw Error("model json: stump feature out of range");
        model.stumps.push_back(trees::Stump{feature, polarity});
      }
      model.alphas = require<std::vector<double>>(j, "alphas");
      model.training_errors = require<std::vector<double>>(j, "training_errors");
      model.final_sample_weights =
          require<std::vector<double>>(j, "final_sample_weights");
      if (model.alphas.size() != model.stumps.size() ||
          model.training_errors.size() != model.stumps.size()) {
        throw Error("model json: inconsistent boosting payload");
      }
      return std::make_unique<AdaBoostClassifier>(std::move(model));
    }
  }
  throw Error("unreachable algorithm id");
}

nlohmann::ordered_json config_to_json(const ClassifierConfig& config) {
  struct Visitor {
    ordered_json operator()(const KnnConfig& c) const {
      return ordered_json{{"algorithm", "knn"},
                          {"k", c.k},
                          {"weighting", knn::to_string(c.weighting)}};
    }
    ordered_json operator()(const NbConfig& c) const {
      return ordered_json{{"algorithm", "naive_bayes"},
                          {"smoothing_alpha", c.smoothing_alpha}};
    }
    ordered_json operator()(const SvmConfig& c) const {
      return ordered_json{{"algorithm", "svm"},
                          {"c", c.c},
                          {"kernel", svm::to_string(c.kernel.kind)},
                          {"gamma", c.kernel.gamma},
                          {"tolerance", c.tolerance},
                          {"max_passes", c.max_passes}};
    }
    ordered_json operator()(const TreeConfig& c) const {
      return ordered_json{{"algorithm", "decision_tree"},
                          {"criterion", trees::to_string(c.criterion)}};
    }
    ordered_json operator()(const ForestConfig& c) const {
      return ordered_json{{"algorithm", "random_forest"},
                          {"n_estimators", c.n_estimators},
                          {"criterion", trees::to_string(c.criterion)}};
    }
    ordered_json operator()(const AdaBoostConfig& c) const {
      return ordered_json{{"algorithm", "adaboost"},
                          {"n_estimators", c.n_estimators}};
    }
  };
  return std::visit(Visitor{}, config);
}

ClassifierConfig config_from_json(const nlohmann::ordered_json& j) {
  switch (parse_algorithm(require<std::string>(j, "algorithm"))) {
    case AlgorithmId::Knn: {
      KnnConfig c;
      c.k = require<std::size_t>(j, "k");
      c.weighting = knn::parse_weighting(require<std::string>(j, "weighting"));
      return c;
    }
    case AlgorithmId::NaiveBayes: {
      NbConfig c;
      c.smoothing_alpha = require<double>(j, "smoothing_alpha");
      return c;
    }
    case AlgorithmId::Svm: {
      SvmConfig c;
      c.c = require<double>(j, "c");
      c.kernel.kind = svm::parse_kernel_kind(require<std::string>(j, "kernel"));
      c.kernel.gamma = require<double>(j, "gamma");
      c.tolerance = require<double>(j, "tolerance");
      c.max_passes = require<std::size_t>(j, "max_passes");
      return c;
    }
    case AlgorithmId::DecisionTree: {
      TreeConfig c;
      c.criterion = trees::parse_criterion(require<std::string>(j, "criterion"));
      return c;
    }
    case AlgorithmId::RandomForest: {
      ForestConfig c;
      c.n_estimators = require<std::size_t>(j, "n_estimators");
      c.criterion = trees::parse_criterion(require<std::string>(j, "criterion"));
      return c;
    }
    case AlgorithmId::AdaBoost: {
      AdaBoostConfig c;
      c.n_estimators = require<std::size_t>(j, "n_estimators");
      return c;
    }
  }
  throw Error("unreachable algorithm id");
}

}  // namespace rarescreen
