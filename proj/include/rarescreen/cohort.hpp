#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rarescreen/common.hpp"

namespace rarescreen {

inline constexpr int kMinAge = 0;
inline constexpr int kMaxAge = 130;

// One patient's record. Set-valued fields are stored canonicalized
// (trimmed, lowercased) and sorted; notes keep their order and raw text.
struct PatientRecord {
  std::string patient_id;
  std::string gender;
  std::string race;
  std::string ethnicity;
  int age = 0;
  std::vector<std::string> diagnoses;
  std::vector<std::string> medications;
  std::vector<std::string> problems;
  std::vector<std::string> surgical;
  std::vector<std::string> notes;
  std::optional<Label> label;
};

struct Cohort {
  std::vector<PatientRecord> records;
  std::string provenance;  // "loaded" or "synthetic"

  std::size_t count_label(Label label) const;
};

struct MalformedRecord : Error {
  MalformedRecord(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line(line) {}
  std::size_t line;
};
struct DuplicatePatientId : Error {
  explicit DuplicatePatientId(const std::string& id)
      : Error("duplicate patient_id \"" + id + "\""), id(id) {}
  std::string id;
};
struct IoFailure : Error {
  explicit IoFailure(const std::string& reason) : Error(reason) {}
};
struct InvalidSpec : Error {
  explicit InvalidSpec(const std::string& reason) : Error(reason) {}
};

// Line-delimited records, one JSON object per line with the fixed field
// schema. Unknown fields are rejected; set fields come back canonicalized
// and sorted, so saving a loaded cohort reproduces a canonical file byte
// for byte.
Cohort load_cohort(const std::string& path);
Cohort parse_cohort(const std::string& text);  // same format, from memory
void save_cohort(const Cohort& cohort, const std::string& path);
std::string serialize_cohort(const Cohort& cohort);
std::string serialize_record(const PatientRecord& record);

struct Violation {
  std::string patient_id;
  std::string message;
};

// Invariant check for programmatically built cohorts. Violations are data,
// not errors: an empty report means the cohort is valid.
std::vector<Violation> validate_cohort(const Cohort& cohort);

// A feature planted with different presence probability per class.
struct SignalFeature {
  FeatureKind kind = FeatureKind::Diagnosis;
  std::string name;
  double p_given_positive = 0.0;
  double p_given_negative = 0.0;
};

struct SynthSpec {
  std::size_t n_positive = 73;
  std::size_t n_negative = 197;
  std::vector<SignalFeature> signal_features;
  std::map<FeatureKind, std::size_t> n_noise_features_per_kind;
  double noise_presence_rate = 0.03;
  // decade lower bound -> weight; weights must sum to 1 per class
  std::map<int, double> age_weights_positive;
  std::map<int, double> age_weights_negative;
  std::uint64_t seed = 20240042;
};

// Defaults: class sizes 73/197, ten planted diagnosis/medication signals at
// p(pos)=0.6 / p(neg)=0.05, 2000 noise features at presence rate 0.03, and
// an older-skewed age profile (positives concentrated in one onset decade,
// negatives mostly younger).
SynthSpec default_synth_spec();

// Pure function of the spec: identical spec (seed included) gives a byte
// identical cohort. Labels are assigned first so class counts are exact.
Cohort generate_synthetic_cohort(const SynthSpec& spec);

}  // namespace rarescreen
