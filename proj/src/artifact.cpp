#include "rarescreen/artifact.hpp"

#include <fstream>
#include <sstream>

namespace rarescreen {

namespace {

using nlohmann::ordered_json;

template <class T>
T require(const ordered_json& j, const char* key) {
  if (!j.contains(key)) throw CorruptArtifact(std::string("missing key: ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const ordered_json::exception& e) {
    throw CorruptArtifact(std::string("key ") + key + ": " + e.what());
  }
}

}  // namespace

Label ModelArtifact::predict_vector(const SparseVector& full) const {
  if (!model) throw Error("artifact has no model");
  if (full.dimension != space.size()) {
    throw DimensionMismatch(static_cast<std::uint32_t>(space.size()), full.dimension);
  }
  if (!selection_applied) return model->predict(full);
  return model->predict(project_vector(full, selected_columns));
}

Label ModelArtifact::predict_record(const PatientRecord& record) const {
  return predict_vector(vectorize_record(record, space));
}

ordered_json vectorizer_config_to_json(const VectorizerConfig& config) {
  ordered_json j;
  j["age_bin_width"] = config.age_bin_width;
  j["numeric_placeholder"] = config.numeric_placeholder;
  j["max_doc_frequency"] = config.max_doc_frequency;
  j["min_doc_count"] = config.min_doc_count;
  j["stopwords"] = std::vector<std::string>(config.stopwords.begin(),
                                            config.stopwords.end());
  return j;
}

VectorizerConfig vectorizer_config_from_json(const ordered_json& j) {
  VectorizerConfig config;
  config.age_bin_width = require<int>(j, "age_bin_width");
  config.numeric_placeholder = require<std::string>(j, "numeric_placeholder");
  config.max_doc_frequency = require<double>(j, "max_doc_frequency");
  config.min_doc_count = require<std::size_t>(j, "min_doc_count");
  const auto words = require<std::vector<std::string>>(j, "stopwords");
  config.stopwords = std::set<std::string>(words.begin(), words.end());
  config.check();
  return config;
}

ordered_json artifact_to_json(const ModelArtifact& artifact) {
  if (!artifact.model) throw Error("artifact has no model");
  ordered_json j;
  j["format_version"] = artifact.format_version;
  j["vectorizer_config"] = vectorizer_config_to_json(artifact.space.config());
  j["feature_manifest"] = artifact.space.serialize_manifest();
  j["selection_applied"] = artifact.selection_applied;
  j["selected_columns"] = artifact.selected_columns;
  j["best_mean_f1"] = artifact.best_mean_f1;
  j["config"] = artifact.config_snapshot;
  j["model"] = artifact.model->to_json();
  return j;
}

ModelArtifact artifact_from_json(const ordered_json& j) {
  const int version = require<int>(j, "format_version");
  if (version != kArtifactFormatVersion) {
    throw VersionMismatch(version, kArtifactFormatVersion);
  }

  ModelArtifact artifact;
  artifact.format_version = version;
  if (!j.contains("vectorizer_config")) {
    throw CorruptArtifact("missing key: vectorizer_config");
  }
  const VectorizerConfig config = vectorizer_config_from_json(j.at("vectorizer_config"));
  try {
    artifact.space =
        FeatureSpace::parse_manifest(require<std::string>(j, "feature_manifest"), config);
  } catch (const Error& e) {
    throw CorruptArtifact(e.what());
  }
  artifact.selection_applied = require<bool>(j, "selection_applied");
  artifact.selected_columns = require<std::vector<std::uint32_t>>(j, "selected_columns");
  for (std::size_t i = 0; i < artifact.selected_columns.size(); ++i) {
    if (artifact.selected_columns[i] >= artifact.space.size() ||
        (i > 0 && artifact.selected_columns[i] <= artifact.selected_columns[i - 1])) {
      throw CorruptArtifact("selected_columns not strictly increasing in range");
    }
  }
  artifact.best_mean_f1 = require<double>(j, "best_mean_f1");
  if (!j.contains("config")) throw CorruptArtifact("missing key: config");
  artifact.config_snapshot = j.at("config");
  if (!j.contains("model")) throw CorruptArtifact("missing key: model");
  try {
    artifact.model = classifier_from_json(j.at("model"));
  } catch (const Error& e) {
    throw CorruptArtifact(e.what());
  }

  const std::uint32_t expected_dim =
      artifact.selection_applied
          ? static_cast<std::uint32_t>(artifact.selected_columns.size())
          : static_cast<std::uint32_t>(artifact.space.size());
  if (artifact.model->dimension() != expected_dim) {
    throw CorruptArtifact("model dimension " + std::to_string(artifact.model->dimension()) +
                          " disagrees with feature space/mask " +
                          std::to_string(expected_dim));
  }
  return artifact;
}

void save_artifact(const ModelArtifact& artifact, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path + " for writing");
  out << artifact_to_json(artifact).dump(2) << '\n';
  if (!out) throw IoFailure("write failed: " + path);
}

ModelArtifact load_artifact(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ordered_json j;
  try {
    j = ordered_json::parse(buffer.str());
  } catch (const ordered_json::exception& e) {
    throw CorruptArtifact(e.what());
  }
  return artifact_from_json(j);
}

}  // namespace rarescreen
