#include "rarescreen/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rarescreen/rng.hpp"

namespace rarescreen::trees {

const char* to_string(Criterion c) {
  return c == Criterion::Gini ? "gini" : "entropy";
}

Criterion parse_criterion(const std::string& text) {
  if (text == "gini") return Criterion::Gini;
  if (text == "entropy") return Criterion::Entropy;
  throw Error("unknown split criterion: " + text);
}

double impurity(std::size_t negative, std::size_t positive, Criterion criterion) {
  const std::size_t n = negative + positive;
  if (n == 0) throw EmptyCounts();
  const double p0 = static_cast<double>(negative) / static_cast<double>(n);
  const double p1 = static_cast<double>(positive) / static_cast<double>(n);
  if (criterion == Criterion::Gini) {
    return 1.0 - (p0 * p0 + p1 * p1);
  }
  double h = 0.0;
  if (p0 > 0.0) h -= p0 * std::log2(p0);
  if (p1 > 0.0) h -= p1 * std::log2(p1);
  return h;
}

namespace {

struct Counts {
  std::size_t negative = 0;
  std::size_t positive = 0;
  std::size_t total() const { return negative + positive; }
};

Counts count_labels(const DesignMatrix& m, const std::vector<std::uint32_t>& row_ids) {
  Counts c;
  for (std::uint32_t r : row_ids) {
    if (m.labels[r] == Label::Positive) {
      ++c.positive;
    } else {
      ++c.negative;
    }
  }
  return c;
}

// Weighted child impurity; empty sides contribute zero weight.
double split_impurity(const Counts& absent, const Counts& present, Criterion criterion) {
  const double n = static_cast<double>(absent.total() + present.total());
  double value = 0.0;
  if (absent.total() > 0) {
    value += (static_cast<double>(absent.total()) / n) *
             impurity(absent.negative, absent.positive, criterion);
  }
  if (present.total() > 0) {
    value += (static_cast<double>(present.total()) / n) *
             impurity(present.negative, present.positive, criterion);
  }
  return value;
}

}  // namespace

std::optional<SplitChoice> best_split(const DesignMatrix& m,
                                      const std::vector<std::uint32_t>& row_ids,
                                      const std::vector<std::uint32_t>& candidates,
                                      Criterion criterion) {
  if (row_ids.empty()) throw EmptyCounts();
  const Counts parent = count_labels(m, row_ids);
  const double parent_impurity = impurity(parent.negative, parent.positive, criterion);

  bool found = false;
  SplitChoice best{0, 0.0};
  for (std::uint32_t feature : candidates) {
    Counts present;
    for (std::uint32_t r : row_ids) {
      if (!m.rows[r].contains(feature)) continue;
      if (m.labels[r] == Label::Positive) {
        ++present.positive;
      } else {
        ++present.negative;
      }
    }
    const Counts absent{parent.negative - present.negative,
                        parent.positive - present.positive};
    const double decrease = parent_impurity - split_impurity(absent, present, criterion);
    if (decrease <= 0.0) continue;
    if (!found || decrease > best.impurity_decrease ||
        (decrease == best.impurity_decrease && feature < best.feature)) {
      best = SplitChoice{feature, decrease};
      found = true;
    }
  }
  if (!found) return std::nullopt;
  return best;
}

namespace {

Label majority_label(const Counts& c) {
  // Ties break toward Negative.
  return c.positive > c.negative ? Label::Positive : Label::Negative;
}

class TreeBuilder {
 public:
  TreeBuilder(const DesignMatrix& m, Criterion criterion,
              std::uint32_t feature_subsample_size, std::mt19937_64* rng)
      : m_(m),
        criterion_(criterion),
        subsample_(feature_subsample_size),
        rng_(rng) {
    if (subsample_ == 0 || subsample_ > m.n_columns) {
      all_columns_.resize(m.n_columns);
      std::iota(all_columns_.begin(), all_columns_.end(), 0u);
    }
  }

  DecisionTree build() {
    DecisionTree tree;
    tree.dimension = m_.n_columns;
    tree.criterion = criterion_;
    std::vector<std::uint32_t> rows(m_.n_rows());
    std::iota(rows.begin(), rows.end(), 0u);
    grow(tree, rows);
    return tree;
  }

  DecisionTree build_from(std::vector<std::uint32_t> rows) {
    DecisionTree tree;
    tree.dimension = m_.n_columns;
    tree.criterion = criterion_;
    grow(tree, std::move(rows));
    return tree;
  }

 private:
  std::int32_t grow(DecisionTree& tree, std::vector<std::uint32_t> rows) {
    const Counts counts = count_labels(m_, rows);
    const std::int32_t node_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();

    std::optional<SplitChoice> choice;
    if (counts.negative > 0 && counts.positive > 0) {
      if (!all_columns_.empty()) {
        choice = best_split(m_, rows, all_columns_, criterion_);
      } else {
        const std::vector<std::uint32_t> candidates =
            rng::sample_without_replacement(m_.n_columns, subsample_, *rng_);
        choice = best_split(m_, rows, candidates, criterion_);
      }
    }

    if (!choice) {
      TreeNode& leaf = tree.nodes[node_id];
      leaf.is_leaf = true;
      leaf.label = majority_label(counts);
      leaf.n_negative = counts.negative;
      leaf.n_positive = counts.positive;
      return node_id;
    }

    std::vector<std::uint32_t> absent_rows;
    std::vector<std::uint32_t> present_rows;
    for (std::uint32_t r : rows) {
      (m_.rows[r].contains(choice->feature) ? present_rows : absent_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[node_id].is_leaf = false;
    tree.nodes[node_id].feature = choice->feature;
    const std::int32_t absent_child = grow(tree, std::move(absent_rows));
    tree.nodes[node_id].absent_child = absent_child;
    const std::int32_t present_child = grow(tree, std::move(present_rows));
    tree.nodes[node_id].present_child = present_child;
    return node_id;
  }

  const DesignMatrix& m_;
  Criterion criterion_;
  std::uint32_t subsample_;
  std::mt19937_64* rng_;
  std::vector<std::uint32_t> all_columns_;
};

}  // namespace

DecisionTree fit_tree(const DesignMatrix& m, Criterion criterion) {
  if (m.n_rows() == 0) throw EmptyMatrix();
  check_design_matrix(m);
  TreeBuilder builder(m, criterion, 0, nullptr);
  return builder.build();
}

DecisionTree fit_tree_subsampled(const DesignMatrix& m, Criterion criterion,
                                 std::uint32_t feature_subsample_size,
                                 std::mt19937_64& rng) {
  if (m.n_rows() == 0) throw EmptyMatrix();
  check_design_matrix(m);
  TreeBuilder builder(m, criterion, feature_subsample_size, &rng);
  return builder.build();
}

Label predict(const DecisionTree& tree, const SparseVector& x) {
  if (x.dimension != tree.dimension) {
    throw DimensionMismatch(tree.dimension, x.dimension);
  }
  if (tree.nodes.empty()) throw Error("empty decision tree");
  std::int32_t node = 0;
  while (!tree.nodes[node].is_leaf) {
    const TreeNode& d = tree.nodes[node];
    node = x.contains(d.feature) ? d.present_child : d.absent_child;
  }
  return tree.nodes[node].label;
}

namespace {

void serialize_node(const DecisionTree& tree, std::int32_t node_id, std::string& out) {
  const TreeNode& node = tree.nodes[node_id];
  if (!out.empty()) out.push_back(' ');
  if (node.is_leaf) {
    out += "l:";
    out += node.label == Label::Positive ? '1' : '0';
    out += ':';
    out += std::to_string(node.n_negative);
    out += ':';
    out += std::to_string(node.n_positive);
    return;
  }
  out += "d:";
  out += std::to_string(node.feature);
  serialize_node(tree, node.absent_child, out);
  serialize_node(tree, node.present_child, out);
}

std::int32_t parse_node(DecisionTree& tree, std::istringstream& in) {
  std::string token;
  if (!(in >> token)) throw Error("truncated tree text");
  const std::int32_t node_id = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (token.rfind("d:", 0) == 0) {
    std::uint32_t feature = 0;
    try {
      feature = static_cast<std::uint32_t>(std::stoul(token.substr(2)));
    } catch (const std::exception&) {
      throw Error("bad tree token: " + token);
    }
    if (feature >= tree.dimension) {
      throw Error("tree feature " + std::to_string(feature) + " out of range");
    }
    tree.nodes[node_id].is_leaf = false;
    tree.nodes[node_id].feature = feature;
    const std::int32_t absent_child = parse_node(tree, in);
    tree.nodes[node_id].absent_child = absent_child;
    const std::int32_t present_child = parse_node(tree, in);
    tree.nodes[node_id].present_child = present_child;
    return node_id;
  }
  if (token.rfind("l:", 0) == 0) {
    unsigned label_digit = 0;
    unsigned long long neg = 0;
    unsigned long long pos = 0;
    char c1 = 0;
    char c2 = 0;
    std::istringstream fields(token.substr(2));
    if (!(fields >> label_digit >> c1 >> neg >> c2 >> pos) || c1 != ':' ||
        c2 != ':' || label_digit > 1 || !fields.eof()) {
      throw Error("bad tree token: " + token);
    }
    TreeNode& leaf = tree.nodes[node_id];
    leaf.is_leaf = true;
    leaf.label = label_digit == 1 ? Label::Positive : Label::Negative;
    leaf.n_negative = neg;
    leaf.n_positive = pos;
    return node_id;
  }
  throw Error("bad tree token: " + token);
}

}  // namespace

std::string serialize_tree(const DecisionTree& tree) {
  if (tree.nodes.empty()) throw Error("empty decision tree");
  std::string out;
  serialize_node(tree, 0, out);
  return out;
}

DecisionTree parse_tree(const std::string& text, std::uint32_t dimension,
                        Criterion criterion) {
  DecisionTree tree;
  tree.dimension = dimension;
  tree.criterion = criterion;
  std::istringstream in(text);
  parse_node(tree, in);
  std::string trailing;
  if (in >> trailing) throw Error("trailing tree token: " + trailing);
  return tree;
}

ForestModel fit_forest(const DesignMatrix& m, std::size_t n_estimators,
                       Criterion criterion, std::uint64_t seed,
                       const ForestOptions& options) {
  if (m.n_rows() == 0) throw EmptyMatrix();
  check_design_matrix(m);
  if (n_estimators == 0) throw Error("forest needs at least one tree");

  std::uint32_t subsample = 0;
  if (options.feature_subsample_size) {
    subsample = *options.feature_subsample_size;
    if (subsample == 0 || subsample > m.n_columns) {
      throw Error("feature subsample size out of range");
    }
  } else {
    subsample = static_cast<std::uint32_t>(
        std::ceil(std::sqrt(static_cast<double>(m.n_columns))));
    subsample = std::max<std::uint32_t>(1, std::min(subsample, m.n_columns));
  }

  ForestModel model;
  model.dimension = m.n_columns;
  model.n_estimators = n_estimators;
  model.criterion = criterion;
  model.seed = seed;
  model.feature_subsample_size = subsample;
  model.tree_list.reserve(n_estimators);

  const std::size_t n = m.n_rows();
  for (std::size_t t = 0; t < n_estimators; ++t) {
    std::mt19937_64 gen = rng::engine(seed, t);
    std::vector<std::uint32_t> rows(n);
    if (options.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) {
        rows[i] = static_cast<std::uint32_t>(rng::below(gen, n));
      }
    } else {
      std::iota(rows.begin(), rows.end(), 0u);
    }
    TreeBuilder builder(m, criterion, subsample, &gen);
    model.tree_list.push_back(builder.build_from(std::move(rows)));
  }
  return model;
}

Label predict(const ForestModel& model, const SparseVector& x) {
  if (x.dimension != model.dimension) {
    throw DimensionMismatch(model.dimension, x.dimension);
  }
  std::size_t positive_votes = 0;
  for (const DecisionTree& tree : model.tree_list) {
    if (predict(tree, x) == Label::Positive) ++positive_votes;
  }
  // Mode of the votes; an exact tie falls to Negative.
  return 2 * positive_votes > model.tree_list.size() ? Label::Positive
                                                     : Label::Negative;
}

namespace {

constexpr double kEpsMin = 1e-10;

int stump_output(const Stump& stump, const SparseVector& x) {
  return x.contains(stump.feature) ? stump.polarity : -stump.polarity;
}

}  // namespace

AdaBoostModel fit_adaboost(const DesignMatrix& m, std::size_t n_estimators) {
  if (m.n_rows() == 0) throw EmptyMatrix();
  check_design_matrix(m);
  if (!m.has_both_classes()) throw SingleClass();
  if (n_estimators == 0) throw Error("boosting needs at least one round");

  const std::size_t n = m.n_rows();
  const std::uint32_t d = m.n_columns;
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = m.labels[i] == Label::Positive ? 1 : -1;
  }

  AdaBoostModel model;
  model.dimension = d;
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));

  for (std::size_t round = 0; round < n_estimators; ++round) {
    // Weighted error of stump (j, +1) is the weight of negatives with the
    // feature present plus positives with it absent; polarity -1 is the
    // complement. One pass over the active entries covers every column.
    std::vector<double> present_positive(d, 0.0);
    std::vector<double> present_negative(d, 0.0);
    double total_positive = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] > 0) total_positive += weights[i];
      auto& bucket = y[i] > 0 ? present_positive : present_negative;
      for (std::uint32_t j : m.rows[i].active) bucket[j] += weights[i];
    }

    Stump stump{0, 1};
    double error = 2.0;
    for (std::uint32_t j = 0; j < d; ++j) {
      const double plus = present_negative[j] + (total_positive - present_positive[j]);
      const double minus = 1.0 - plus;
      if (plus < error) {
        stump = Stump{j, 1};
        error = plus;
      }
      if (minus < error) {
        stump = Stump{j, -1};
        error = minus;
      }
    }
    error = std::max(error, 0.0);

    if (error >= 0.5 - 1e-12) {
      if (round == 0) throw NoUsefulStump();
      break;
    }

    const double clamped = std::max(error, kEpsMin);
    const double alpha = 0.5 * std::log((1.0 - clamped) / clamped);
    model.stumps.push_back(stump);
    model.alphas.push_back(alpha);
    model.training_errors.push_back(error);

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int h = stump_output(stump, m.rows[i]);
      weights[i] *= std::exp(-alpha * y[i] * h);
      sum += weights[i];
    }
    for (double& w : weights) w /= sum;

    if (error <= kEpsMin) break;  // perfect stump: nothing left to reweight
  }

  model.final_sample_weights = std::move(weights);
  return model;
}

double adaboost_score(const AdaBoostModel& model, const SparseVector& x) {
  if (x.dimension != model.dimension) {
    throw DimensionMismatch(model.dimension, x.dimension);
  }
  double score = 0.0;
  for (std::size_t t = 0; t < model.stumps.size(); ++t) {
    score += model.alphas[t] * stump_output(model.stumps[t], x);
  }
  return score;
}

Label predict(const AdaBoostModel& model, const SparseVector& x) {
  return adaboost_score(model, x) > 0.0 ? Label::Positive : Label::Negative;
}

}  // namespace rarescreen::trees
