#include "rarescreen/pipeline.hpp"

#include <algorithm>
#include <set>

#include "rarescreen/config_file.hpp"
#include "rarescreen/rng.hpp"

namespace rarescreen::pipeline {

namespace {

// Substream tags; grid cells use (algorithm << 32) | cell, so these stay
// clear of that range.
constexpr std::uint64_t kStreamGlobalLambda = 0x4c6d6430ULL;
constexpr std::uint64_t kStreamFoldLambdaBase = 0x4c6d6440ULL;
constexpr std::uint64_t kStreamFinalFitBase = 0xf1aa0000ULL;

}  // namespace

const char* to_string(SelectionPlacement p) {
  return p == SelectionPlacement::PerFold ? "per_fold" : "global";
}

SelectionPlacement parse_placement(const std::string& text) {
  if (text == "per_fold") return SelectionPlacement::PerFold;
  if (text == "global") return SelectionPlacement::Global;
  throw Error("unknown selection placement: " + text);
}

PipelineConfig::PipelineConfig() {
  algorithm_enabled.fill(true);
  for (std::size_t i = 0; i < kAlgorithmCount; ++i) {
    grids[i] = eval::default_grid(static_cast<AlgorithmId>(i));
  }
  enabled_kinds = {FeatureKind::Demographic, FeatureKind::Diagnosis,
                   FeatureKind::Medication, FeatureKind::Problem,
                   FeatureKind::Surgical};
}

void PipelineConfig::check() const {
  vectorizer.check();
  selection.check();
  if (cv_k < 2) throw Error("cv_k must be at least 2");
  if (enabled_kinds.empty()) throw Error("at least one feature kind must be enabled");
  if (!(prescreen_target_recall > 0.0) || prescreen_target_recall > 1.0) {
    throw Error("prescreen target recall must be in (0, 1]");
  }
  bool any_algorithm = false;
  for (std::size_t i = 0; i < kAlgorithmCount; ++i) {
    any_algorithm = any_algorithm || algorithm_enabled[i];
    if (grids[i].algorithm != static_cast<AlgorithmId>(i)) {
      throw Error("grid slot " + std::to_string(i) + " holds the wrong algorithm");
    }
  }
  if (!any_algorithm) throw Error("at least one algorithm must be enabled");
}

FeatureKindSet PipelineConfig::kind_set() const {
  return FeatureKindSet(enabled_kinds.begin(), enabled_kinds.end());
}

double choose_lambda(const DesignMatrix& m, const selection::SelectionConfig& base,
                     std::uint32_t cv_k, std::uint64_t seed) {
  const std::size_t smallest_class =
      std::min(m.count_label(Label::Positive), m.count_label(Label::Negative));
  const std::uint32_t k =
      std::min<std::uint32_t>(cv_k, static_cast<std::uint32_t>(smallest_class));
  if (k < 2) return base.lambda;

  const eval::FoldAssignment folds = eval::stratified_kfold(m.labels, k, seed);
  double best_lambda = kLambdaGrid[0];
  double best_score = -1.0;
  for (const double lambda : kLambdaGrid) {
    selection::SelectionConfig cfg = base;
    cfg.lambda = lambda;
    double score_sum = 0.0;
    for (std::uint32_t fold = 0; fold < k; ++fold) {
      std::vector<std::uint32_t> train_ids;
      std::vector<std::uint32_t> test_ids;
      for (std::uint32_t row = 0; row < m.n_rows(); ++row) {
        (folds.fold_of[row] == fold ? test_ids : train_ids).push_back(row);
      }
      const DesignMatrix train = take_rows(m, train_ids);
      const selection::SelectionSummary summary = selection::select_features(train, cfg);
      eval::ConfusionCounts counts;
      for (std::uint32_t row : test_ids) {
        const double margin = selection::selection_margin(summary, m.rows[row]);
        tally(counts, m.labels[row],
              margin > 0.0 ? Label::Positive : Label::Negative);
      }
      score_sum += eval::f1_score(counts);
    }
    const double mean = score_sum / static_cast<double>(k);
    if (mean > best_score) {
      best_score = mean;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

selection::SelectionSummary run_selection(const DesignMatrix& m,
                                          const PipelineConfig& config,
                                          double* lambda_out) {
  selection::SelectionConfig cfg = config.selection;
  if (config.selection_auto_lambda) {
    cfg.lambda = choose_lambda(m, config.selection, config.cv_k,
                               rng::derive_seed(config.seed, kStreamGlobalLambda));
  }
  if (lambda_out != nullptr) *lambda_out = cfg.lambda;
  return selection::select_features(m, cfg);
}

eval::FoldPreparer make_selection_preparer(const PipelineConfig& config,
                                           std::shared_ptr<FoldSelectionCache> cache) {
  return [config, cache](const DesignMatrix& train, const DesignMatrix& test,
                         std::uint32_t fold) -> eval::FoldData {
    std::vector<std::uint32_t> kept;
    {
      const std::lock_guard<std::mutex> lock(cache->mutex);
      const auto it = cache->kept_by_fold.find(fold);
      if (it != cache->kept_by_fold.end()) {
        kept = it->second;
      } else {
        selection::SelectionConfig cfg = config.selection;
        if (config.selection_auto_lambda) {
          cfg.lambda = choose_lambda(
              train, config.selection, config.cv_k,
              rng::derive_seed(config.seed, kStreamFoldLambdaBase + fold));
        }
        const selection::SelectionSummary summary =
            selection::select_features(train, cfg);
        kept = summary.kept_columns;
        cache->kept_by_fold[fold] = kept;
        cache->lambda_by_fold[fold] = cfg.lambda;
        cache->all_converged = cache->all_converged && summary.converged;
      }
    }
    eval::FoldData out;
    out.train = take_columns(train, kept);
    out.test = take_columns(test, kept);
    return out;
  };
}

PipelineResult run_pipeline(const Cohort& cohort, const PipelineConfig& config,
                            unsigned n_threads) {
  config.check();

  PipelineResult result;
  result.config_used = config;

  DesignMatrix matrix;
  try {
    const FeatureSpace space =
        build_feature_space(cohort, config.vectorizer, config.kind_set());
    matrix = vectorize_cohort(cohort, space);
  } catch (const Error& e) {
    throw Error(std::string("vectorize: ") + e.what());
  }
  result.space = matrix.feature_space;
  result.n_rows = matrix.n_rows();
  result.n_positive = matrix.count_label(Label::Positive);
  result.n_negative = matrix.count_label(Label::Negative);
  result.n_columns = matrix.n_columns;
  if (!matrix.has_both_classes()) {
    throw Error("pipeline: cohort must contain both classes");
  }

  // The reporting selection is always computed on the full matrix: it feeds
  // the top-feature table, the prescreen rules, and the artifact mask.
  try {
    result.global_selection = run_selection(matrix, config, &result.global_lambda);
  } catch (const Error& e) {
    throw Error(std::string("select: ") + e.what());
  }
  result.all_converged = result.global_selection.converged;

  DesignMatrix eval_matrix;
  const DesignMatrix* eval_view = &matrix;
  eval::FoldPreparer preparer;
  auto cache = std::make_shared<FoldSelectionCache>();
  if (config.selection_enabled) {
    if (config.selection_placement == SelectionPlacement::Global) {
      eval_matrix = take_columns(matrix, result.global_selection.kept_columns);
      eval_view = &eval_matrix;
    } else {
      preparer = make_selection_preparer(config, cache);
    }
  }

  for (std::size_t a = 0; a < kAlgorithmCount; ++a) {
    if (!config.algorithm_enabled[a]) continue;
    try {
      result.reports.push_back(eval::grid_search(*eval_view, config.grids[a],
                                                 config.cv_k, config.seed,
                                                 n_threads, preparer));
    } catch (const Error& e) {
      throw Error(std::string("grid-search ") +
                  to_string(static_cast<AlgorithmId>(a)) + ": " + e.what());
    }
  }
  result.all_converged = result.all_converged && cache->all_converged;
  for (const eval::EvalReport& report : result.reports) {
    for (const eval::ConfigResult& entry : report.per_config) {
      result.all_converged = result.all_converged && entry.converged;
    }
  }

  result.best_report = 0;
  for (std::size_t i = 1; i < result.reports.size(); ++i) {
    if (result.reports[i].best_mean_f1 >
        result.reports[result.best_report].best_mean_f1) {
      result.best_report = i;
    }
  }

  const eval::EvalReport& best_report = result.reports[result.best_report];
  const eval::ConfigResult& best_entry = best_report.per_config[best_report.best_index];
  try {
    // The deployed model always trains behind the all-data mask; per-fold
    // masks exist only inside cross-validation.
    DesignMatrix train_all;
    const DesignMatrix* train_view = &matrix;
    if (config.selection_enabled) {
      if (config.selection_placement == SelectionPlacement::Global) {
        train_view = &eval_matrix;
      } else {
        train_all = take_columns(matrix, result.global_selection.kept_columns);
        train_view = &train_all;
      }
    }
    const std::uint64_t fit_seed = rng::derive_seed(
        config.seed,
        kStreamFinalFitBase + static_cast<std::uint64_t>(best_report.algorithm));
    std::unique_ptr<Classifier> model =
        fit_classifier(*train_view, best_entry.config, fit_seed);
    result.all_converged = result.all_converged && model->converged();
    result.artifact.space = *result.space;
    result.artifact.selection_applied = config.selection_enabled;
    result.artifact.selected_columns =
        config.selection_enabled ? result.global_selection.kept_columns
                                 : std::vector<std::uint32_t>{};
    result.artifact.model = std::move(model);
    result.artifact.config_snapshot = config_snapshot_json(config);
    result.artifact.best_mean_f1 = best_entry.mean_f1;
  } catch (const Error& e) {
    throw Error(std::string("train: ") + e.what());
  }

  try {
    result.top =
        prescreen::top_features(result.global_selection, *result.space, config.top_limit);
    result.rules = prescreen::derive_prescreen_rules(
        cohort, result.top, config.prescreen_target_recall, config.vectorizer);
    result.prescreen_reached = result.rules.target_reached;
  } catch (const Error& e) {
    throw Error(std::string("prescreen: ") + e.what());
  }
  return result;
}

namespace {

std::string display_name(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::Knn:
      return "KNN";
    case AlgorithmId::NaiveBayes:
      return "Naive Bayes";
    case AlgorithmId::Svm:
      return "SVM";
    case AlgorithmId::DecisionTree:
      return "Decision Tree";
    case AlgorithmId::RandomForest:
      return "Random Forest";
    case AlgorithmId::AdaBoost:
      return "AdaBoost";
  }
  return "?";
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string join_folds(const std::vector<double>& fold_f1) {
  std::string out;
  for (std::size_t i = 0; i < fold_f1.size(); ++i) {
    if (i > 0) out += ',';
    out += format_fixed(fold_f1[i], 6);
  }
  return out;
}

std::string selection_mode_text(const PipelineConfig& config) {
  if (!config.selection_enabled) return "off";
  return to_string(config.selection_placement);
}

// Human tables collapse grid rows that differ only in parameters the
// kernel ignores; the machine report always keeps every row.
std::string effective_params(const eval::ConfigResult& entry) {
  if (const auto* svm_cfg = std::get_if<SvmConfig>(&entry.config)) {
    if (svm_cfg->kernel.kind == svm::KernelKind::Linear) {
      return "c=" + format_shortest(svm_cfg->c) + " kernel=linear";
    }
  }
  return entry.params_text;
}

}  // namespace

std::string render_machine_report(const PipelineResult& result) {
  const PipelineConfig& config = result.config_used;
  std::string out;
  out += "# rarescreen eval report v1\n";
  out += "# rows=" + std::to_string(result.n_rows) +
         " positive=" + std::to_string(result.n_positive) +
         " negative=" + std::to_string(result.n_negative) +
         " columns=" + std::to_string(result.n_columns) + "\n";
  out += "# cv_k=" + std::to_string(config.cv_k) +
         " seed=" + std::to_string(config.seed) +
         " selection=" + selection_mode_text(config) +
         " lambda=" + format_shortest(result.global_lambda) + "\n";
  out += "algorithm\tparams\tmean_f1\tconverged\tfold_f1\ttp\tfp\tfn\ttn\n";
  for (const eval::EvalReport& report : result.reports) {
    for (const eval::ConfigResult& entry : report.per_config) {
      out += std::string(to_string(report.algorithm)) + "\t" + entry.params_text +
             "\t" + format_fixed(entry.mean_f1, 6) + "\t" +
             (entry.converged ? "1" : "0") + "\t" + join_folds(entry.fold_f1) +
             "\t" + std::to_string(entry.totals.tp) + "\t" +
             std::to_string(entry.totals.fp) + "\t" +
             std::to_string(entry.totals.fn) + "\t" +
             std::to_string(entry.totals.tn) + "\n";
    }
  }
  const eval::EvalReport& best = result.reports[result.best_report];
  const eval::ConfigResult& best_entry = best.per_config[best.best_index];
  out += "# best\t" + std::string(to_string(best.algorithm)) + "\t" +
         best_entry.params_text + "\t" + format_fixed(best_entry.mean_f1, 6) + "\n";
  return out;
}

std::string render_top_features(const std::vector<prescreen::TopFeature>& top) {
  std::string out;
  out += "# rarescreen top features v1\n";
  out += "rank\tkind\tname\tcolumn\tweight\n";
  for (std::size_t i = 0; i < top.size(); ++i) {
    out += std::to_string(i + 1) + "\t" + to_string(top[i].descriptor.kind) + "\t" +
           top[i].descriptor.name + "\t" + std::to_string(top[i].column) + "\t" +
           format_fixed(top[i].weight, 6) + "\n";
  }
  return out;
}

std::string render_human_report(const PipelineResult& result) {
  const PipelineConfig& config = result.config_used;
  std::string out;
  out += "rarescreen pipeline report\n";
  out += "==========================\n\n";
  out += "cohort: " + std::to_string(result.n_rows) + " records (" +
         std::to_string(result.n_positive) + " positive / " +
         std::to_string(result.n_negative) + " negative)\n";
  out += "features: " + std::to_string(result.n_columns) + " columns\n";
  out += "cross-validation: " + std::to_string(config.cv_k) + " folds, seed " +
         std::to_string(config.seed) + "\n";
  out += "selection: " + selection_mode_text(config) + " (lambda " +
         format_shortest(result.global_lambda) +
         (config.selection_auto_lambda ? " auto" : "") + ", " +
         std::to_string(result.global_selection.kept_columns.size()) + " of " +
         std::to_string(result.n_columns) + " columns kept on all data)\n";
  if (!result.all_converged) {
    out += "warning: at least one fit stopped at its iteration budget\n";
  }
  out += "\n";

  out += "Best configuration per algorithm\n";
  out += "--------------------------------\n";
  out += pad("Algorithm", 15) + pad("Parameters", 34) + "Mean F1\n";
  for (const eval::EvalReport& report : result.reports) {
    const eval::ConfigResult& entry = report.per_config[report.best_index];
    out += pad(display_name(report.algorithm), 15) +
           pad(effective_params(entry), 34) + format_fixed(entry.mean_f1, 4) + "\n";
  }
  const eval::EvalReport& best = result.reports[result.best_report];
  const eval::ConfigResult& best_entry = best.per_config[best.best_index];
  out += "overall best: " + display_name(best.algorithm) + " (" +
         effective_params(best_entry) + "), mean F1 " +
         format_fixed(best_entry.mean_f1, 4) + "\n\n";

  out += "All configurations\n";
  out += "------------------\n";
  for (const eval::EvalReport& report : result.reports) {
    out += std::string(to_string(report.algorithm)) + ":\n";
    std::set<std::string> seen;
    for (const eval::ConfigResult& entry : report.per_config) {
      const std::string text = effective_params(entry);
      if (!seen.insert(text).second) continue;
      out += "  " + pad(text, 40) + format_fixed(entry.mean_f1, 4) +
             (entry.converged ? "" : "  [not converged]") + "\n";
    }
  }
  out += "\n";

  out += "Top features (limit " + std::to_string(config.top_limit) + ")\n";
  out += "-----------------------\n";
  if (result.top.empty()) {
    out += "  (selection kept no features)\n";
  }
  for (std::size_t i = 0; i < result.top.size(); ++i) {
    const prescreen::TopFeature& feature = result.top[i];
    const std::string weight_text =
        (feature.weight >= 0.0 ? "+" : "") + format_fixed(feature.weight, 4);
    out += "  " + pad(std::to_string(i + 1) + ".", 4) +
           pad(to_string(feature.descriptor.kind), 13) +
           pad(feature.descriptor.name, 36) + weight_text + "\n";
  }
  out += "\n";

  out += "Prescreen\n";
  out += "---------\n";
  out += prescreen::render_ruleset(result.rules);
  return out;
}

}  // namespace rarescreen::pipeline
