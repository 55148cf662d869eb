#include "rarescreen/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rarescreen/rng.hpp"

namespace rarescreen {

namespace {

using ordered_json = nlohmann::ordered_json;

const std::vector<std::string> kRecordFields = {
    "patient_id", "gender",   "race",     "ethnicity", "age",  "diagnoses",
    "medications", "problems", "surgical", "notes",     "label"};

// Canonicalize, sort and reject duplicates/empties in a set-valued field.
std::vector<std::string> canonical_set(const std::vector<std::string>& raw,
                                       const std::string& field,
                                       std::size_t line) {
  std::vector<std::string> out;
  out.reserve(raw.size());
  for (const auto& entry : raw) {
    std::string canon = canonicalize(entry);
    if (canon.empty()) {
      throw MalformedRecord(line, "empty entry in field '" + field + "'");
    }
    out.push_back(std::move(canon));
  }
  std::sort(out.begin(), out.end());
  auto dup = std::adjacent_find(out.begin(), out.end());
  if (dup != out.end()) {
    throw MalformedRecord(line, "duplicate entry \"" + *dup + "\" in field '" +
                                    field + "' after canonicalization");
  }
  return out;
}

std::vector<std::string> string_array(const ordered_json& obj, const std::string& field,
                                      std::size_t line) {
  const auto& value = obj.at(field);
  if (!value.is_array()) {
    throw MalformedRecord(line, "field '" + field + "' must be an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw MalformedRecord(line, "field '" + field + "' must contain only strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string string_field(const ordered_json& obj, const std::string& field,
                         std::size_t line) {
  const auto& value = obj.at(field);
  if (!value.is_string()) {
    throw MalformedRecord(line, "field '" + field + "' must be a string");
  }
  return value.get<std::string>();
}

PatientRecord parse_record_line(const std::string& text, std::size_t line) {
  ordered_json obj;
  try {
    obj = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedRecord(line, std::string("invalid record: ") + e.what());
  }
  if (!obj.is_object()) throw MalformedRecord(line, "record is not an object");

  for (const auto& item : obj.items()) {
    if (std::find(kRecordFields.begin(), kRecordFields.end(), item.key()) ==
        kRecordFields.end()) {
      throw MalformedRecord(line, "unknown field '" + item.key() + "'");
    }
  }
  for (const auto& field : kRecordFields) {
    if (field != "label" && !obj.contains(field)) {
      throw MalformedRecord(line, "missing field '" + field + "'");
    }
  }

  PatientRecord rec;
  rec.patient_id = string_field(obj, "patient_id", line);
  if (trim(rec.patient_id).empty()) throw MalformedRecord(line, "empty patient_id");
  rec.gender = canonicalize(string_field(obj, "gender", line));
  rec.race = canonicalize(string_field(obj, "race", line));
  rec.ethnicity = canonicalize(string_field(obj, "ethnicity", line));

  const auto& age = obj.at("age");
  if (!age.is_number_integer()) throw MalformedRecord(line, "field 'age' must be an integer");
  rec.age = age.get<int>();
  if (rec.age < kMinAge || rec.age > kMaxAge) {
    throw MalformedRecord(line, "age " + std::to_string(rec.age) + " outside [" +
                                    std::to_string(kMinAge) + ", " +
                                    std::to_string(kMaxAge) + "]");
  }

  rec.diagnoses = canonical_set(string_array(obj, "diagnoses", line), "diagnoses", line);
  rec.medications =
      canonical_set(string_array(obj, "medications", line), "medications", line);
  rec.problems = canonical_set(string_array(obj, "problems", line), "problems", line);
  rec.surgical = canonical_set(string_array(obj, "surgical", line), "surgical", line);
  rec.notes = string_array(obj, "notes", line);

  if (obj.contains("label")) {
    const std::string raw = string_field(obj, "label", line);
    try {
      rec.label = parse_label(canonicalize(raw));
    } catch (const Error&) {
      throw MalformedRecord(line, "bad label \"" + raw + "\"");
    }
  }
  return rec;
}

}  // namespace

std::size_t Cohort::count_label(Label label) const {
  std::size_t n = 0;
  for (const auto& rec : records) {
    if (rec.label && *rec.label == label) ++n;
  }
  return n;
}

Cohort parse_cohort(const std::string& text) {
  Cohort cohort;
  cohort.provenance = "loaded";
  std::set<std::string> seen_ids;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    PatientRecord rec = parse_record_line(line, line_no);
    if (!seen_ids.insert(rec.patient_id).second) {
      throw DuplicatePatientId(rec.patient_id);
    }
    cohort.records.push_back(std::move(rec));
  }
  return cohort;
}

Cohort load_cohort(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoFailure("read failure on '" + path + "'");
  return parse_cohort(buffer.str());
}

std::string serialize_record(const PatientRecord& record) {
  ordered_json obj;
  obj["patient_id"] = record.patient_id;
  obj["gender"] = record.gender;
  obj["race"] = record.race;
  obj["ethnicity"] = record.ethnicity;
  obj["age"] = record.age;
  obj["diagnoses"] = record.diagnoses;
  obj["medications"] = record.medications;
  obj["problems"] = record.problems;
  obj["surgical"] = record.surgical;
  obj["notes"] = record.notes;
  if (record.label) obj["label"] = to_string(*record.label);
  return obj.dump();
}

std::string serialize_cohort(const Cohort& cohort) {
  std::string out;
  for (const auto& rec : cohort.records) {
    out += serialize_record(rec);
    out += '\n';
  }
  return out;
}

void save_cohort(const Cohort& cohort, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open '" + path + "' for writing");
  out << serialize_cohort(cohort);
  if (!out) throw IoFailure("write failure on '" + path + "'");
}

namespace {

void check_set_field(const PatientRecord& rec, const std::vector<std::string>& values,
                     const std::string& field, std::vector<Violation>& out) {
  std::set<std::string> seen;
  for (const auto& entry : values) {
    if (!seen.insert(canonicalize(entry)).second) {
      out.push_back({rec.patient_id, "duplicate entry \"" + canonicalize(entry) +
                                         "\" in field '" + field + "'"});
    }
  }
}

}  // namespace

std::vector<Violation> validate_cohort(const Cohort& cohort) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  for (const auto& rec : cohort.records) {
    if (trim(rec.patient_id).empty()) {
      out.push_back({rec.patient_id, "empty patient_id"});
    }
    if (!ids.insert(rec.patient_id).second) {
      out.push_back({rec.patient_id, "duplicate patient_id"});
    }
    if (rec.age < kMinAge || rec.age > kMaxAge) {
      out.push_back({rec.patient_id, "age " + std::to_string(rec.age) + " outside [" +
                                         std::to_string(kMinAge) + ", " +
                                         std::to_string(kMaxAge) + "]"});
    }
    check_set_field(rec, rec.diagnoses, "diagnoses", out);
    check_set_field(rec, rec.medications, "medications", out);
    check_set_field(rec, rec.problems, "problems", out);
    check_set_field(rec, rec.surgical, "surgical", out);
  }
  return out;
}

SynthSpec default_synth_spec() {
  SynthSpec spec;
  spec.signal_features = {
      {FeatureKind::Diagnosis, "cardiac arrest", 0.6, 0.05},
      {FeatureKind::Diagnosis, "chest pain", 0.6, 0.05},
      {FeatureKind::Diagnosis, "congestive heart failure", 0.6, 0.05},
      {FeatureKind::Diagnosis, "hypertension", 0.6, 0.05},
      {FeatureKind::Diagnosis, "open angle glaucoma", 0.6, 0.05},
      {FeatureKind::Diagnosis, "shoulder arthritis", 0.6, 0.05},
      {FeatureKind::Medication, "doxercalciferol", 0.6, 0.05},
      {FeatureKind::Medication, "loratadine 10mg", 0.6, 0.05},
      {FeatureKind::Medication, "levothyroxine sodium 25mcg", 0.6, 0.05},
      {FeatureKind::Medication, "sodium chloride 0.9%", 0.6, 0.05},
  };
  spec.n_noise_features_per_kind = {
      {FeatureKind::Diagnosis, 500},
      {FeatureKind::Medication, 500},
      {FeatureKind::Problem, 500},
      {FeatureKind::Surgical, 500},
  };
  spec.noise_presence_rate = 0.03;
  spec.age_weights_positive = {{60, 1.0}};
  spec.age_weights_negative = {{40, 0.32}, {50, 0.48}, {60, 0.08},
                               {70, 0.05}, {80, 0.04}, {90, 0.03}};
  return spec;
}

namespace {

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidSpec(what + " = " + format_shortest(p) + " outside [0, 1]");
  }
}

void check_age_weights(const std::map<int, double>& weights, const std::string& which) {
  if (weights.empty()) throw InvalidSpec("empty age distribution for " + which + " class");
  double total = 0.0;
  for (const auto& [decade, w] : weights) {
    if (decade < 0 || decade > 120 || decade % 10 != 0) {
      throw InvalidSpec("age decade " + std::to_string(decade) + " for " + which +
                        " class must be a multiple of 10 in [0, 120]");
    }
    if (w < 0.0) throw InvalidSpec("negative age weight for " + which + " class");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidSpec("age weights for " + which + " class sum to " +
                      format_shortest(total) + ", expected 1");
  }
}

int draw_decade(const std::map<int, double>& weights, std::mt19937_64& gen) {
  const double u = rng::unit(gen);
  double cum = 0.0;
  int last = weights.rbegin()->first;
  for (const auto& [decade, w] : weights) {
    cum += w;
    if (u < cum) return decade;
  }
  return last;
}

void add_feature(PatientRecord& rec, FeatureKind kind, const std::string& name) {
  switch (kind) {
    case FeatureKind::Diagnosis: rec.diagnoses.push_back(name); break;
    case FeatureKind::Medication: rec.medications.push_back(name); break;
    case FeatureKind::Problem: rec.problems.push_back(name); break;
    case FeatureKind::Surgical: rec.surgical.push_back(name); break;
    default:
      throw InvalidSpec(std::string("synthetic features must be structured, got kind '") +
                        to_string(kind) + "'");
  }
}

}  // namespace

Cohort generate_synthetic_cohort(const SynthSpec& spec) {
  for (const auto& sig : spec.signal_features) {
    check_probability(sig.p_given_positive, "p_given_positive of \"" + sig.name + "\"");
    check_probability(sig.p_given_negative, "p_given_negative of \"" + sig.name + "\"");
    if (canonicalize(sig.name).empty()) throw InvalidSpec("signal feature with empty name");
  }
  check_probability(spec.noise_presence_rate, "noise_presence_rate");
  check_age_weights(spec.age_weights_positive, "positive");
  check_age_weights(spec.age_weights_negative, "negative");
  for (const auto& [kind, _] : spec.n_noise_features_per_kind) {
    if (kind == FeatureKind::Unigram || kind == FeatureKind::Bigram ||
        kind == FeatureKind::Demographic) {
      throw InvalidSpec(std::string("noise features not supported for kind '") +
                        to_string(kind) + "'");
    }
  }

  const std::size_t total = spec.n_positive + spec.n_negative;
  std::size_t id_width = std::to_string(std::max<std::size_t>(total, 1)).size();
  if (id_width < 4) id_width = 4;

  auto gen = rng::engine(spec.seed);
  Cohort cohort;
  cohort.provenance = "synthetic";
  cohort.records.reserve(total);

  for (std::size_t i = 0; i < total; ++i) {
    PatientRecord rec;
    const bool positive = i < spec.n_positive;
    rec.label = positive ? Label::Positive : Label::Negative;

    std::string index = std::to_string(i + 1);
    rec.patient_id = "p" + std::string(id_width - index.size(), '0') + index;

    rec.gender = rng::unit(gen) < 0.5 ? "f" : "m";
    static const std::vector<std::string> kRaces = {"white", "black", "asian", "other"};
    rec.race = kRaces[rng::below(gen, kRaces.size())];
    rec.ethnicity = rng::unit(gen) < 0.5 ? "hispanic" : "nonhispanic";

    const auto& weights = positive ? spec.age_weights_positive : spec.age_weights_negative;
    const int decade = draw_decade(weights, gen);
    rec.age = std::min(decade + static_cast<int>(rng::below(gen, 10)), kMaxAge);

    for (const auto& sig : spec.signal_features) {
      const double p = positive ? sig.p_given_positive : sig.p_given_negative;
      if (rng::unit(gen) < p) add_feature(rec, sig.kind, canonicalize(sig.name));
    }
    for (const auto& [kind, count] : spec.n_noise_features_per_kind) {
      for (std::size_t j = 0; j < count; ++j) {
        if (rng::unit(gen) < spec.noise_presence_rate) {
          std::string js = std::to_string(j + 1);
          add_feature(rec, kind,
                      std::string("noise ") + to_string(kind) + " " +
                          std::string(js.size() < 4 ? 4 - js.size() : 0, '0') + js);
        }
      }
    }

    std::sort(rec.diagnoses.begin(), rec.diagnoses.end());
    std::sort(rec.medications.begin(), rec.medications.end());
    std::sort(rec.problems.begin(), rec.problems.end());
    std::sort(rec.surgical.begin(), rec.surgical.end());
    cohort.records.push_back(std::move(rec));
  }
  return cohort;
}

}  // namespace rarescreen
