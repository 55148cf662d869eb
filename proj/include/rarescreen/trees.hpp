#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rarescreen/matrix.hpp"

namespace rarescreen::trees {

enum class Criterion : std::uint8_t { Gini, Entropy };

const char* to_string(Criterion c);
Criterion parse_criterion(const std::string& text);

struct EmptyCounts : Error {
  EmptyCounts() : Error("impurity of an empty node") {}
};
struct NoUsefulStump : Error {
  NoUsefulStump() : Error("no stump beats weighted error 0.5 on round 1") {}
};

// Gini = 1 - sum p^2; Entropy = -sum p log2 p (0 log 0 = 0).
double impurity(std::size_t negative, std::size_t positive, Criterion criterion);

// Flat node store, root at index 0. Decision nodes route on feature
// presence; leaves carry the majority label and the training counts
// routed into them.
struct TreeNode {
  bool is_leaf = true;
  std::uint32_t feature = 0;
  std::int32_t absent_child = -1;
  std::int32_t present_child = -1;
  Label label = Label::Negative;
  std::uint64_t n_negative = 0;
  std::uint64_t n_positive = 0;
};

struct DecisionTree {
  std::uint32_t dimension = 0;
  Criterion criterion = Criterion::Gini;
  std::vector<TreeNode> nodes;
};

struct SplitChoice {
  std::uint32_t feature = 0;
  double impurity_decrease = 0.0;
};

// Evaluates the present/absent partition of every candidate feature over
// the given rows; returns the feature with the largest weighted impurity
// decrease, ties to the lowest column id, or nullopt when no candidate
// decreases impurity.
std::optional<SplitChoice> best_split(const DesignMatrix& m,
                                      const std::vector<std::uint32_t>& row_ids,
                                      const std::vector<std::uint32_t>& candidates,
                                      Criterion criterion);

// Grows to purity (no depth limit). When feature_subsample_size is given,
// each split draws that many candidate columns from rng without
// replacement.
DecisionTree fit_tree(const DesignMatrix& m, Criterion criterion);
DecisionTree fit_tree_subsampled(const DesignMatrix& m, Criterion criterion,
                                 std::uint32_t feature_subsample_size,
                                 std::mt19937_64& rng);

Label predict(const DecisionTree& tree, const SparseVector& x);

// Preorder text, absent subtree before present subtree:
//   decision "d:<feature>", leaf "l:<0|1>:<neg>:<pos>".
std::string serialize_tree(const DecisionTree& tree);
DecisionTree parse_tree(const std::string& text, std::uint32_t dimension,
                        Criterion criterion);

struct ForestOptions {
  bool bootstrap = true;
  // default: ceil(sqrt(n_columns))
  std::optional<std::uint32_t> feature_subsample_size;
};

struct ForestModel {
  std::uint32_t dimension = 0;
  std::vector<DecisionTree> tree_list;
  std::size_t n_estimators = 0;
  Criterion criterion = Criterion::Gini;
  std::uint64_t seed = 0;
  std::uint32_t feature_subsample_size = 0;
};

// Bagged trees: each tree sees an n-row bootstrap and per-split feature
// subsampling, with randomness from an independent substream of `seed`.
ForestModel fit_forest(const DesignMatrix& m, std::size_t n_estimators,
                       Criterion criterion, std::uint64_t seed,
                       const ForestOptions& options = {});

// Mode of the tree votes, ties to Negative.
Label predict(const ForestModel& model, const SparseVector& x);

// h(x) = polarity when the feature is present, -polarity otherwise.
struct Stump {
  std::uint32_t feature = 0;
  int polarity = 1;  // +1 or -1
};

struct AdaBoostModel {
  std::uint32_t dimension = 0;
  std::vector<Stump> stumps;
  std::vector<double> alphas;
  std::vector<double> training_errors;        // weighted error per retained round
  std::vector<double> final_sample_weights;   // after the last retained update
};

// Discrete AdaBoost over decision stumps, labels encoded Positive -> +1.
// A round with weighted error 0 keeps its stump with alpha capped at
// eps_min = 1e-10 and stops; a round at error >= 0.5 stops without the
// stump (NoUsefulStump when that is round 1).
AdaBoostModel fit_adaboost(const DesignMatrix& m, std::size_t n_estimators);

double adaboost_score(const AdaBoostModel& model, const SparseVector& x);
Label predict(const AdaBoostModel& model, const SparseVector& x);

}  // namespace rarescreen::trees
