#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "rarescreen/artifact.hpp"
#include "rarescreen/cohort.hpp"
#include "rarescreen/evaluation.hpp"
#include "rarescreen/prescreen.hpp"
#include "rarescreen/selection.hpp"
#include "rarescreen/vectorizer.hpp"

namespace rarescreen::pipeline {

// Where feature selection sits relative to cross-validation. PerFold
// refits the mask inside every training fold (no test-fold leakage);
// Global selects once on all data and then re-runs CV on the reduced
// matrix (the classic report-table procedure).
enum class SelectionPlacement : std::uint8_t { PerFold, Global };

const char* to_string(SelectionPlacement p);
SelectionPlacement parse_placement(const std::string& text);

struct PipelineConfig {
  VectorizerConfig vectorizer;
  selection::SelectionConfig selection;
  bool selection_enabled = false;
  SelectionPlacement selection_placement = SelectionPlacement::PerFold;
  // Pick lambda by internal CV over kLambdaGrid instead of selection.lambda.
  bool selection_auto_lambda = true;
  std::array<bool, kAlgorithmCount> algorithm_enabled{};
  std::array<eval::ParamGrid, kAlgorithmCount> grids;
  std::uint32_t cv_k = 10;
  std::uint64_t seed = 20241201;
  std::vector<FeatureKind> enabled_kinds;  // note-derived kinds off by default
  std::size_t top_limit = 20;
  double prescreen_target_recall = 1.0;

  PipelineConfig();  // stock grids, all algorithms, structured kinds only
  void check() const;

  FeatureKindSet kind_set() const;
};

inline constexpr std::array<double, 4> kLambdaGrid{0.0001, 0.001, 0.01, 0.1};

// Mean-F1 CV choice of the L1 penalty: for each grid value, select on the
// training folds and score the sparse logistic model's own predictions on
// the held-out fold. Ties take the first (smallest) value. Falls back to
// base.lambda when a class is too small to fold.
double choose_lambda(const DesignMatrix& m, const selection::SelectionConfig& base,
                     std::uint32_t cv_k, std::uint64_t seed);

// The all-data filter + L1 pass behind the reports, the prescreen rules,
// and the artifact mask; applies the auto-lambda policy when enabled.
// When lambda_out is given, receives the lambda actually used.
selection::SelectionSummary run_selection(const DesignMatrix& m,
                                          const PipelineConfig& config,
                                          double* lambda_out = nullptr);

// Shared record of the per-fold selection work, exposed so tests can audit
// that fold masks never see held-out rows.
struct FoldSelectionCache {
  std::mutex mutex;
  std::map<std::uint32_t, std::vector<std::uint32_t>> kept_by_fold;
  std::map<std::uint32_t, double> lambda_by_fold;
  bool all_converged = true;
};

// FoldPreparer that runs filter + L1 selection on each fold's training
// matrix only, then projects both sides onto the learned mask.
eval::FoldPreparer make_selection_preparer(const PipelineConfig& config,
                                           std::shared_ptr<FoldSelectionCache> cache);

struct PipelineResult {
  PipelineConfig config_used;             // as validated at entry
  std::vector<eval::EvalReport> reports;  // enabled algorithms, fixed order
  std::size_t best_report = 0;            // ties resolve to the earliest
  std::size_t n_rows = 0;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  std::uint32_t n_columns = 0;
  double global_lambda = 0.0;  // lambda behind the reported selection
  selection::SelectionSummary global_selection;  // always computed on all data
  std::vector<prescreen::TopFeature> top;
  prescreen::PrescreenRuleSet rules;
  ModelArtifact artifact;  // overall best configuration fit on all data
  std::shared_ptr<const FeatureSpace> space;
  bool all_converged = true;
  bool prescreen_reached = true;
};

// vectorize -> (optional) select -> grid-search per enabled algorithm ->
// fit the overall best on all data -> top features -> prescreen rules.
// Deterministic per (cohort, config, seed) for any n_threads.
PipelineResult run_pipeline(const Cohort& cohort, const PipelineConfig& config,
                            unsigned n_threads = 1);

// Tab-separated table, one row per evaluated configuration.
std::string render_machine_report(const PipelineResult& result);
// Aligned text: best-per-algorithm table, full listings, top features,
// prescreen rules.
std::string render_human_report(const PipelineResult& result);
// Tab-separated top-feature table (rank, kind, name, column, weight).
std::string render_top_features(const std::vector<prescreen::TopFeature>& top);

}  // namespace rarescreen::pipeline
