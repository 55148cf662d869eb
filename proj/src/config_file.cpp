#include "rarescreen/config_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace rarescreen::pipeline {

namespace {

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::string current;
  std::stringstream stream(value);
  while (std::getline(stream, current, ',')) {
    const std::string piece = trim(current);
    if (!piece.empty()) parts.push_back(piece);
  }
  return parts;
}

std::string join_list(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ',';
    out += parts[i];
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t parsed = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), parsed);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(key + ": expected a non-negative integer, got '" + value + "'");
  }
  return parsed;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const double parsed = std::stod(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw Error(key + ": expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(key + ": expected true or false, got '" + value + "'");
}

const char* bool_text(bool value) { return value ? "true" : "false"; }

// Axis names each algorithm's grid understands, in canonical (slowest-first)
// enumeration order.
const std::vector<std::string>& axis_order(AlgorithmId id) {
  static const std::vector<std::string> knn{"k", "weights"};
  static const std::vector<std::string> naive_bayes{"alpha"};
  static const std::vector<std::string> svm{"c", "kernel", "gamma"};
  static const std::vector<std::string> decision_tree{"criterion"};
  static const std::vector<std::string> random_forest{"n", "criterion"};
  static const std::vector<std::string> adaboost{"n"};
  switch (id) {
    case AlgorithmId::Knn:
      return knn;
    case AlgorithmId::NaiveBayes:
      return naive_bayes;
    case AlgorithmId::Svm:
      return svm;
    case AlgorithmId::DecisionTree:
      return decision_tree;
    case AlgorithmId::RandomForest:
      return random_forest;
    case AlgorithmId::AdaBoost:
      return adaboost;
  }
  throw Error("unknown algorithm id");
}

void set_grid_axis(eval::ParamGrid& grid, const std::string& key,
                   const std::string& axis, std::vector<std::string> values) {
  const std::vector<std::string>& order = axis_order(grid.algorithm);
  if (std::find(order.begin(), order.end(), axis) == order.end()) {
    throw Error(key + ": unknown grid axis '" + axis + "'");
  }
  if (values.empty()) throw Error(key + ": axis needs at least one value");

  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const std::string& name : order) {
    if (name == axis) {
      axes.emplace_back(name, values);
      continue;
    }
    const auto it = std::find_if(grid.axes.begin(), grid.axes.end(),
                                 [&](const auto& a) { return a.first == name; });
    if (it != grid.axes.end()) axes.push_back(*it);
  }
  grid.axes = std::move(axes);
  try {
    eval::enumerate_grid(grid);  // reject bad values at read time
  } catch (const Error& e) {
    throw Error(key + ": " + e.what());
  }
}

void apply_key_value(PipelineConfig& config, const std::string& key,
                     const std::string& value) {
  if (key == "seed") {
    config.seed = parse_u64(key, value);
  } else if (key == "cv_k") {
    config.cv_k = static_cast<std::uint32_t>(parse_u64(key, value));
  } else if (key == "top_limit") {
    config.top_limit = static_cast<std::size_t>(parse_u64(key, value));
  } else if (key == "enabled_feature_kinds") {
    config.enabled_kinds.clear();
    for (const std::string& name : split_list(value)) {
      config.enabled_kinds.push_back(parse_feature_kind(name));
    }
  } else if (key == "prescreen.target_recall") {
    config.prescreen_target_recall = parse_real(key, value);
  } else if (key == "vectorizer.age_bin_width") {
    config.vectorizer.age_bin_width = static_cast<int>(parse_u64(key, value));
  } else if (key == "vectorizer.numeric_placeholder") {
    config.vectorizer.numeric_placeholder = value;
  } else if (key == "vectorizer.max_doc_frequency") {
    config.vectorizer.max_doc_frequency = parse_real(key, value);
  } else if (key == "vectorizer.min_doc_count") {
    config.vectorizer.min_doc_count = static_cast<std::size_t>(parse_u64(key, value));
  } else if (key == "vectorizer.stopwords") {
    const std::vector<std::string> words = split_list(value);
    config.vectorizer.stopwords = {words.begin(), words.end()};
  } else if (key == "selection.enabled") {
    config.selection_enabled = parse_bool(key, value);
  } else if (key == "selection.placement") {
    config.selection_placement = parse_placement(value);
  } else if (key == "selection.auto_lambda") {
    config.selection_auto_lambda = parse_bool(key, value);
  } else if (key == "selection.majority_threshold") {
    config.selection.majority_threshold = parse_real(key, value);
  } else if (key == "selection.lambda") {
    config.selection.lambda = parse_real(key, value);
  } else if (key == "selection.max_iterations") {
    config.selection.max_iterations = static_cast<std::size_t>(parse_u64(key, value));
  } else if (key == "selection.tolerance") {
    config.selection.tolerance = parse_real(key, value);
  } else if (key.rfind("grids.", 0) == 0) {
    const std::string rest = key.substr(6);
    const std::size_t dot = rest.find('.');
    if (dot == std::string::npos) {
      throw Error("unknown configuration key: " + key);
    }
    const AlgorithmId id = parse_algorithm(rest.substr(0, dot));
    const std::string field = rest.substr(dot + 1);
    const auto slot = static_cast<std::size_t>(id);
    if (field == "enabled") {
      config.algorithm_enabled[slot] = parse_bool(key, value);
    } else {
      set_grid_axis(config.grids[slot], key, field, split_list(value));
    }
  } else {
    throw Error("unknown configuration key: " + key);
  }
}

}  // namespace

void apply_config_line(PipelineConfig& config, const std::string& line) {
  const std::size_t eq = line.find('=');
  if (eq == std::string::npos) {
    throw Error("expected key=value, got '" + line + "'");
  }
  const std::string key = trim(line.substr(0, eq));
  const std::string value = trim(line.substr(eq + 1));
  if (key.empty()) throw Error("expected key=value, got '" + line + "'");
  apply_key_value(config, key, value);
}

PipelineConfig parse_pipeline_config(const std::string& text) {
  PipelineConfig config;
  std::stringstream stream(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    try {
      apply_config_line(config, body);
    } catch (const Error& e) {
      throw Error("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.check();
  return config;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoFailure("read failed: " + path);
  try {
    return parse_pipeline_config(buffer.str());
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string render_pipeline_config(const PipelineConfig& config) {
  std::string out;
  out += "# rarescreen pipeline configuration\n";
  out += "seed = " + std::to_string(config.seed) + "\n";
  out += "cv_k = " + std::to_string(config.cv_k) + "\n";
  std::vector<std::string> kinds;
  for (const FeatureKind kind : config.enabled_kinds) {
    kinds.emplace_back(to_string(kind));
  }
  out += "enabled_feature_kinds = " + join_list(kinds) + "\n";
  out += "top_limit = " + std::to_string(config.top_limit) + "\n";
  out += "prescreen.target_recall = " +
         format_shortest(config.prescreen_target_recall) + "\n";
  out += "\n";
  out += "vectorizer.age_bin_width = " +
         std::to_string(config.vectorizer.age_bin_width) + "\n";
  out += "vectorizer.numeric_placeholder = " + config.vectorizer.numeric_placeholder +
         "\n";
  out += "vectorizer.max_doc_frequency = " +
         format_shortest(config.vectorizer.max_doc_frequency) + "\n";
  out += "vectorizer.min_doc_count = " +
         std::to_string(config.vectorizer.min_doc_count) + "\n";
  const std::vector<std::string> words(config.vectorizer.stopwords.begin(),
                                       config.vectorizer.stopwords.end());
  out += "vectorizer.stopwords = " + join_list(words) + "\n";
  out += "\n";
  out += std::string("selection.enabled = ") + bool_text(config.selection_enabled) +
         "\n";
  out += std::string("selection.placement = ") +
         to_string(config.selection_placement) + "\n";
  out += std::string("selection.auto_lambda = ") +
         bool_text(config.selection_auto_lambda) + "\n";
  out += "selection.majority_threshold = " +
         format_shortest(config.selection.majority_threshold) + "\n";
  out += "selection.lambda = " + format_shortest(config.selection.lambda) + "\n";
  out += "selection.max_iterations = " +
         std::to_string(config.selection.max_iterations) + "\n";
  out += "selection.tolerance = " + format_shortest(config.selection.tolerance) +
         "\n";
  out += "\n";
  for (std::size_t i = 0; i < kAlgorithmCount; ++i) {
    const std::string prefix = "grids." + std::string(to_string(static_cast<AlgorithmId>(i)));
    out += prefix + ".enabled = " + bool_text(config.algorithm_enabled[i]) + "\n";
    for (const auto& [axis, values] : config.grids[i].axes) {
      out += prefix + "." + axis + " = " + join_list(values) + "\n";
    }
  }
  return out;
}

nlohmann::ordered_json config_snapshot_json(const PipelineConfig& config) {
  nlohmann::ordered_json j;
  j["seed"] = config.seed;
  j["cv_k"] = config.cv_k;
  nlohmann::ordered_json kinds = nlohmann::ordered_json::array();
  for (const FeatureKind kind : config.enabled_kinds) kinds.push_back(to_string(kind));
  j["enabled_feature_kinds"] = kinds;
  j["top_limit"] = config.top_limit;
  j["prescreen_target_recall"] = config.prescreen_target_recall;
  j["vectorizer"] = vectorizer_config_to_json(config.vectorizer);
  nlohmann::ordered_json sel;
  sel["enabled"] = config.selection_enabled;
  sel["placement"] = to_string(config.selection_placement);
  sel["auto_lambda"] = config.selection_auto_lambda;
  sel["majority_threshold"] = config.selection.majority_threshold;
  sel["lambda"] = config.selection.lambda;
  sel["max_iterations"] = config.selection.max_iterations;
  sel["tolerance"] = config.selection.tolerance;
  j["selection"] = sel;
  nlohmann::ordered_json grids;
  for (std::size_t i = 0; i < kAlgorithmCount; ++i) {
    nlohmann::ordered_json grid;
    grid["enabled"] = config.algorithm_enabled[i];
    for (const auto& [axis, values] : config.grids[i].axes) {
      grid[axis] = values;
    }
    grids[to_string(static_cast<AlgorithmId>(i))] = grid;
  }
  j["grids"] = grids;
  return j;
}

}  // namespace rarescreen::pipeline
