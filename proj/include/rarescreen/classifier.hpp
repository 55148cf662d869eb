#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>

#include <json.hpp>

#include "rarescreen/knn.hpp"
#include "rarescreen/matrix.hpp"
#include "rarescreen/naive_bayes.hpp"
#include "rarescreen/svm.hpp"
#include "rarescreen/trees.hpp"

namespace rarescreen {

// Order is the row order of the comparison tables and the tie-break order
// when several algorithms share the best score.
enum class AlgorithmId : std::uint8_t {
  Knn = 0,
  NaiveBayes,
  Svm,
  DecisionTree,
  RandomForest,
  AdaBoost,
};
inline constexpr std::size_t kAlgorithmCount = 6;

const char* to_string(AlgorithmId id);
AlgorithmId parse_algorithm(const std::string& text);

struct KnnConfig {
  std::size_t k = 3;
  knn::Weighting weighting = knn::Weighting::Uniform;
};
struct NbConfig {
  double smoothing_alpha = 1.0;
};
struct SvmConfig {
  double c = 1.0;
  svm::KernelSpec kernel;
  double tolerance = 1e-3;
  std::size_t max_passes = 100;
};
struct TreeConfig {
  trees::Criterion criterion = trees::Criterion::Gini;
};
struct ForestConfig {
  std::size_t n_estimators = 100;
  trees::Criterion criterion = trees::Criterion::Gini;
};
struct AdaBoostConfig {
  std::size_t n_estimators = 100;
};

using ClassifierConfig = std::variant<KnnConfig, NbConfig, SvmConfig, TreeConfig,
                                      ForestConfig, AdaBoostConfig>;

AlgorithmId algorithm_of(const ClassifierConfig& config);

// Canonical short parameter text, e.g. "k=3 weights=uniform"; "-" when the
// algorithm has no parameters.
std::string describe(const ClassifierConfig& config);

// Trained model behind a uniform prediction interface.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual Label predict(const SparseVector& x) const = 0;
  virtual AlgorithmId algorithm() const = 0;
  virtual std::uint32_t dimension() const = 0;
  // False when an iterative fit hit its budget before meeting tolerance.
  virtual bool converged() const { return true; }
  virtual nlohmann::ordered_json to_json() const = 0;
};

// `seed` feeds algorithms with internal randomness (random forest); the
// others ignore it.
std::unique_ptr<Classifier> fit_classifier(const DesignMatrix& m,
                                           const ClassifierConfig& config,
                                           std::uint64_t seed);

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::ordered_json& j);

ClassifierConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json config_to_json(const ClassifierConfig& config);

}  // namespace rarescreen
