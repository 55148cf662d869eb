#pragma once

#include <string>

#include <json.hpp>

#include "rarescreen/pipeline.hpp"

namespace rarescreen::pipeline {

// "key = value" configuration text. '#' starts a comment, blank lines are
// skipped, unknown keys are errors. parse(render(config)) == config.
PipelineConfig parse_pipeline_config(const std::string& text);
PipelineConfig load_pipeline_config(const std::string& path);
std::string render_pipeline_config(const PipelineConfig& config);

// A single "key=value" override (the --set form); accepts the same keys as
// the file and leaves final validation to the caller.
void apply_config_line(PipelineConfig& config, const std::string& line);

// Canonical JSON snapshot of a config, stored inside model artifacts.
nlohmann::ordered_json config_snapshot_json(const PipelineConfig& config);

}  // namespace rarescreen::pipeline
