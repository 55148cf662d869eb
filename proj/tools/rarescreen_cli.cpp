// Command-line front end: each pipeline stage is independently runnable so
// intermediate products (cohorts, manifests, reports, models) can be
// inspected and scripted.
//
// Exit codes: 0 success, 1 usage error, 2 data/config error, 3 flagged
// (an iteration budget was hit or the prescreen recall target was not
// reachable; outputs are still written).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rarescreen/artifact.hpp"
#include "rarescreen/cohort.hpp"
#include "rarescreen/config_file.hpp"
#include "rarescreen/pipeline.hpp"
#include "rarescreen/prescreen.hpp"
#include "rarescreen/vectorizer.hpp"

namespace {

using rarescreen::pipeline::PipelineConfig;

constexpr int kExitFlagged = 3;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rarescreen::IoFailure("cannot open for writing: " + path);
  out << text;
  out.flush();
  if (!out) throw rarescreen::IoFailure("write failed: " + path);
}

// Empty path means stdout.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

PipelineConfig make_config(const std::string& config_path,
                           const std::vector<std::string>& overrides) {
  PipelineConfig config;
  if (!config_path.empty()) {
    config = rarescreen::pipeline::load_pipeline_config(config_path);
  }
  for (const std::string& line : overrides) {
    rarescreen::pipeline::apply_config_line(config, line);
  }
  config.check();
  return config;
}

rarescreen::pipeline::PipelineResult run(const std::string& in_path,
                                         const PipelineConfig& config,
                                         unsigned threads) {
  const rarescreen::Cohort cohort = rarescreen::load_cohort(in_path);
  return rarescreen::pipeline::run_pipeline(cohort, config, threads);
}

int run_generate(const std::string& out_path, std::size_t n_positive,
                 std::size_t n_negative, std::uint64_t seed, double noise_rate) {
  rarescreen::SynthSpec spec = rarescreen::default_synth_spec();
  spec.n_positive = n_positive;
  spec.n_negative = n_negative;
  spec.seed = seed;
  spec.noise_presence_rate = noise_rate;
  const rarescreen::Cohort cohort = rarescreen::generate_synthetic_cohort(spec);
  rarescreen::save_cohort(cohort, out_path);
  std::cerr << "wrote " << cohort.records.size() << " records ("
            << cohort.count_label(rarescreen::Label::Positive) << " positive / "
            << cohort.count_label(rarescreen::Label::Negative) << " negative) to "
            << out_path << "\n";
  return 0;
}

int run_validate(const std::string& in_path) {
  const rarescreen::Cohort cohort = rarescreen::load_cohort(in_path);
  const std::vector<rarescreen::Violation> violations =
      rarescreen::validate_cohort(cohort);
  for (const rarescreen::Violation& v : violations) {
    std::cerr << v.patient_id << ": " << v.message << "\n";
  }
  if (!violations.empty()) {
    std::cerr << violations.size() << " violation(s)\n";
    return 2;
  }
  std::cout << "ok: " << cohort.records.size() << " records ("
            << cohort.count_label(rarescreen::Label::Positive) << " positive / "
            << cohort.count_label(rarescreen::Label::Negative) << " negative)\n";
  return 0;
}

int run_vectorize(const std::string& in_path, const std::string& out_path,
                  const PipelineConfig& config) {
  const rarescreen::Cohort cohort = rarescreen::load_cohort(in_path);
  const rarescreen::FeatureSpace space = rarescreen::build_feature_space(
      cohort, config.vectorizer, config.kind_set());
  emit(out_path, space.serialize_manifest());
  std::cerr << space.size() << " features from " << cohort.records.size()
            << " records\n";
  return 0;
}

int run_select(const std::string& in_path, const std::string& out_path,
               const PipelineConfig& config) {
  const rarescreen::Cohort cohort = rarescreen::load_cohort(in_path);
  const rarescreen::FeatureSpace space = rarescreen::build_feature_space(
      cohort, config.vectorizer, config.kind_set());
  const rarescreen::DesignMatrix matrix = rarescreen::vectorize_cohort(cohort, space);
  double lambda = 0.0;
  const rarescreen::selection::SelectionSummary summary =
      rarescreen::pipeline::run_selection(matrix, config, &lambda);
  const std::vector<rarescreen::prescreen::TopFeature> top =
      rarescreen::prescreen::top_features(summary, space, config.top_limit);
  emit(out_path, rarescreen::pipeline::render_top_features(top));
  std::cerr << "kept " << summary.kept_columns.size() << " of " << matrix.n_columns
            << " columns (lambda " << rarescreen::format_shortest(lambda) << ", "
            << (summary.converged ? "converged" : "iteration budget hit") << ")\n";
  return summary.converged ? 0 : kExitFlagged;
}

int run_grid_search(const std::string& in_path, const std::string& out_path,
                    const PipelineConfig& config, unsigned threads) {
  const rarescreen::pipeline::PipelineResult result = run(in_path, config, threads);
  emit(out_path, rarescreen::pipeline::render_machine_report(result));
  return result.all_converged ? 0 : kExitFlagged;
}

int run_report(const std::string& in_path, const std::string& out_path,
               const PipelineConfig& config, unsigned threads) {
  const rarescreen::pipeline::PipelineResult result = run(in_path, config, threads);
  emit(out_path, rarescreen::pipeline::render_human_report(result));
  return result.all_converged && result.prescreen_reached ? 0 : kExitFlagged;
}

int run_prescreen(const std::string& in_path, const std::string& out_path,
                  const PipelineConfig& config) {
  const rarescreen::Cohort cohort = rarescreen::load_cohort(in_path);
  const rarescreen::FeatureSpace space = rarescreen::build_feature_space(
      cohort, config.vectorizer, config.kind_set());
  const rarescreen::DesignMatrix matrix = rarescreen::vectorize_cohort(cohort, space);
  const rarescreen::selection::SelectionSummary summary =
      rarescreen::pipeline::run_selection(matrix, config);
  const std::vector<rarescreen::prescreen::TopFeature> top =
      rarescreen::prescreen::top_features(summary, space, config.top_limit);
  const rarescreen::prescreen::PrescreenRuleSet rules =
      rarescreen::prescreen::derive_prescreen_rules(
          cohort, top, config.prescreen_target_recall, config.vectorizer);
  emit(out_path, rarescreen::prescreen::render_ruleset(rules));
  return rules.target_reached ? 0 : kExitFlagged;
}

int run_train(const std::string& in_path, const std::string& out_dir,
              const PipelineConfig& config, unsigned threads) {
  const rarescreen::pipeline::PipelineResult result = run(in_path, config, threads);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_text((dir / "eval_report.tsv").string(),
             rarescreen::pipeline::render_machine_report(result));
  write_text((dir / "eval_report.txt").string(),
             rarescreen::pipeline::render_human_report(result));
  write_text((dir / "top_features.tsv").string(),
             rarescreen::pipeline::render_top_features(result.top));
  write_text((dir / "prescreen.txt").string(),
             rarescreen::prescreen::render_ruleset(result.rules));
  rarescreen::save_artifact(result.artifact, (dir / "model.json").string());

  const rarescreen::eval::EvalReport& best = result.reports[result.best_report];
  std::cerr << "best: " << rarescreen::to_string(best.algorithm) << " ("
            << best.per_config[best.best_index].params_text << "), mean F1 "
            << rarescreen::format_fixed(best.best_mean_f1, 4) << "\n"
            << "outputs in " << out_dir << "\n";
  return result.all_converged && result.prescreen_reached ? 0 : kExitFlagged;
}

int run_predict(const std::string& artifact_path, const std::string& in_path,
                const std::string& out_path) {
  const rarescreen::ModelArtifact artifact = rarescreen::load_artifact(artifact_path);
  const rarescreen::Cohort cohort = rarescreen::load_cohort(in_path);
  std::string out = "patient_id\tprediction\n";
  for (const rarescreen::PatientRecord& record : cohort.records) {
    out += record.patient_id;
    out += '\t';
    out += rarescreen::to_string(artifact.predict_record(record));
    out += '\n';
  }
  emit(out_path, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rare-disease patient screening pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  unsigned threads = 1;
  app.add_option("--config", config_path, "pipeline configuration file");
  app.add_option("--set", overrides, "override a config key (key=value), repeatable");
  app.add_option("--threads", threads, "worker threads for cross-validation")
      ->check(CLI::PositiveNumber);

  std::string in_path;
  std::string out_path;
  std::string out_dir;
  std::string artifact_path;
  std::size_t n_positive = 73;
  std::size_t n_negative = 197;
  std::uint64_t gen_seed = 20240042;
  double noise_rate = 0.03;

  CLI::App* generate = app.add_subcommand("generate", "write a synthetic labeled cohort");
  generate->add_option("--out", out_path, "cohort file to write")->required();
  generate->add_option("--positive", n_positive, "positive records");
  generate->add_option("--negative", n_negative, "negative records");
  generate->add_option("--seed", gen_seed, "generator seed");
  generate->add_option("--noise-rate", noise_rate, "noise feature presence rate");

  CLI::App* validate = app.add_subcommand("validate", "check a cohort file");
  validate->add_option("--in", in_path, "cohort file")->required();

  CLI::App* vectorize = app.add_subcommand("vectorize", "emit the feature manifest");
  vectorize->add_option("--in", in_path, "cohort file")->required();
  vectorize->add_option("--out", out_path, "manifest file (default stdout)");

  CLI::App* select = app.add_subcommand("select", "filter + L1 feature selection");
  select->add_option("--in", in_path, "cohort file")->required();
  select->add_option("--out", out_path, "top-feature table (default stdout)");

  CLI::App* grid = app.add_subcommand("grid-search", "cross-validated grid search");
  grid->add_option("--in", in_path, "cohort file")->required();
  grid->add_option("--out", out_path, "machine-readable report (default stdout)");

  CLI::App* train = app.add_subcommand("train", "full pipeline; write reports + model");
  train->add_option("--in", in_path, "cohort file")->required();
  train->add_option("--out-dir", out_dir, "output directory")->required();

  CLI::App* report = app.add_subcommand("report", "full pipeline; human-readable report");
  report->add_option("--in", in_path, "cohort file")->required();
  report->add_option("--out", out_path, "report file (default stdout)");

  CLI::App* prescreen = app.add_subcommand("prescreen", "derive prescreen rules");
  prescreen->add_option("--in", in_path, "cohort file")->required();
  prescreen->add_option("--out", out_path, "rule listing (default stdout)");

  CLI::App* predict = app.add_subcommand("predict", "label records with a saved model");
  predict->add_option("--artifact", artifact_path, "model artifact file")->required();
  predict->add_option("--in", in_path, "cohort file")->required();
  predict->add_option("--out", out_path, "prediction table (default stdout)");

  int exit_code = 0;
  const auto dispatch = [&](CLI::App* sub, auto body) {
    sub->callback([&, body]() { exit_code = body(); });
  };
  dispatch(generate, [&] {
    return run_generate(out_path, n_positive, n_negative, gen_seed, noise_rate);
  });
  dispatch(validate, [&] { return run_validate(in_path); });
  dispatch(vectorize, [&] {
    return run_vectorize(in_path, out_path, make_config(config_path, overrides));
  });
  dispatch(select, [&] {
    return run_select(in_path, out_path, make_config(config_path, overrides));
  });
  dispatch(grid, [&] {
    return run_grid_search(in_path, out_path, make_config(config_path, overrides),
                           threads);
  });
  dispatch(train, [&] {
    return run_train(in_path, out_dir, make_config(config_path, overrides), threads);
  });
  dispatch(report, [&] {
    return run_report(in_path, out_path, make_config(config_path, overrides), threads);
  });
  dispatch(prescreen, [&] {
    return run_prescreen(in_path, out_path, make_config(config_path, overrides));
  });
  dispatch(predict, [&] { return run_predict(artifact_path, in_path, out_path); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const rarescreen::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
