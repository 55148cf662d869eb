#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rarescreen/classifier.hpp"
#include "rarescreen/matrix.hpp"

namespace rarescreen::eval {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
};

void tally(ConfusionCounts& counts, Label truth, Label predicted);

// Positive is the target class; any zero denominator yields 0.
double precision(const ConfusionCounts& counts);
double recall(const ConfusionCounts& counts);
double f1_score(const ConfusionCounts& counts);

struct TooFewPerClass : Error {
  TooFewPerClass(Label label, std::size_t count, std::uint32_t k)
      : Error(std::string("class ") + to_string(label) + " has " +
              std::to_string(count) + " rows, fewer than k = " + std::to_string(k)) {}
};

struct FoldAssignment {
  std::vector<std::uint32_t> fold_of;  // per row, in 0..k-1
  std::uint32_t k = 0;
  std::uint64_t seed = 0;
};

// Shuffles within each class by seed, then deals round-robin, so per-fold
// class counts differ by at most one.
FoldAssignment stratified_kfold(const std::vector<Label>& labels, std::uint32_t k,
                                std::uint64_t seed);

// Hook for per-fold data transformation (the pipeline uses it for
// leakage-free feature selection). Receives the training and held-out
// matrices for one fold and returns the pair actually used. Must be a pure
// function of its inputs and thread-safe.
struct FoldData {
  DesignMatrix train;
  DesignMatrix test;
};
using FoldPreparer =
    std::function<FoldData(const DesignMatrix& train, const DesignMatrix& test,
                           std::uint32_t fold)>;

struct CvResult {
  std::vector<double> fold_f1;
  double mean_f1 = 0.0;
  ConfusionCounts totals;     // pooled over held-out folds
  bool all_converged = true;  // every per-fold fit met its tolerance
};

CvResult cross_validate(const DesignMatrix& m, const ClassifierConfig& config,
                        const FoldAssignment& folds, std::uint64_t fit_seed,
                        const FoldPreparer& preparer = nullptr);
CvResult cross_validate(const DesignMatrix& m, const ClassifierConfig& config,
                        std::uint32_t k, std::uint64_t seed,
                        const FoldPreparer& preparer = nullptr);

// Named axes of canonical value strings; the cartesian product enumerates
// with the first axis slowest. An empty axis list means one default
// configuration.
struct ParamGrid {
  AlgorithmId algorithm = AlgorithmId::Knn;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
};

std::size_t grid_size(const ParamGrid& grid);
std::vector<ClassifierConfig> enumerate_grid(const ParamGrid& grid);

// The stock comparison grids, in fixed algorithm order:
//   knn: k {1,2,3} x weights {uniform,distance}
//   naive_bayes: (none)
//   svm: c {0.01,0.1,1,10,100} x kernel {linear,rbf} x gamma {0.001,0.0001}
//   decision_tree: criterion {gini,entropy}
//   random_forest: n {10,15,100} x criterion {gini,entropy}
//   adaboost: n {10,15,100}
ParamGrid default_grid(AlgorithmId id);
std::vector<ParamGrid> default_grids();

struct ConfigResult {
  ClassifierConfig config;
  std::string params_text;
  std::vector<double> fold_f1;
  double mean_f1 = 0.0;
  ConfusionCounts totals;
  bool converged = true;
};

struct EvalReport {
  AlgorithmId algorithm = AlgorithmId::Knn;
  std::vector<ConfigResult> per_config;  // enumeration order
  std::size_t best_index = 0;            // argmax mean F1, ties to first
  double best_mean_f1 = 0.0;
  std::size_t expected_configurations = 0;  // product of axis lengths
};

// Evaluates every configuration of the grid with a shared fold assignment
// derived from (labels, k, seed). Cells may run on n_threads; results are
// identical for any thread count. Throws if the number of evaluated
// configurations differs from the axis-length product.
EvalReport grid_search(const DesignMatrix& m, const ParamGrid& grid,
                       std::uint32_t k, std::uint64_t seed,
                       unsigned n_threads = 1,
                       const FoldPreparer& preparer = nullptr);

}  // namespace rarescreen::eval
