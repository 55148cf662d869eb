#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rarescreen/classifier.hpp"
#include "rarescreen/vectorizer.hpp"

namespace rarescreen {

inline constexpr int kArtifactFormatVersion = 1;

struct VersionMismatch : Error {
  VersionMismatch(int found, int expected)
      : Error("artifact format version " + std::to_string(found) +
              ", this build reads version " + std::to_string(expected)) {}
};
struct CorruptArtifact : Error {
  explicit CorruptArtifact(const std::string& reason)
      : Error("corrupt artifact: " + reason) {}
};

// Everything needed to score a new record: the feature space, the optional
// selection mask the model was trained behind, and the model itself.
struct ModelArtifact {
  int format_version = kArtifactFormatVersion;
  FeatureSpace space;
  bool selection_applied = false;
  std::vector<std::uint32_t> selected_columns;  // full-space ids; used when applied
  std::shared_ptr<const Classifier> model;
  nlohmann::ordered_json config_snapshot;  // pipeline config the model came from
  double best_mean_f1 = 0.0;

  // `full` lives in the artifact's feature space; the mask is applied here.
  Label predict_vector(const SparseVector& full) const;
  Label predict_record(const PatientRecord& record) const;
};

nlohmann::ordered_json vectorizer_config_to_json(const VectorizerConfig& config);
VectorizerConfig vectorizer_config_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json artifact_to_json(const ModelArtifact& artifact);
ModelArtifact artifact_from_json(const nlohmann::ordered_json& j);

void save_artifact(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_artifact(const std::string& path);

}  // namespace rarescreen
