#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rarescreen/cohort.hpp"
#include "rarescreen/matrix.hpp"

namespace rarescreen {

struct FeatureDescriptor {
  FeatureKind kind = FeatureKind::Demographic;
  std::string name;

  friend auto operator<=>(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

struct VectorizerConfig {
  int age_bin_width = 10;
  std::set<std::string> stopwords;  // default list applied when default-constructed
  std::string numeric_placeholder = "<num>";
  double max_doc_frequency = 0.9;  // n-grams above this document share are pruned
  std::size_t min_doc_count = 2;

  VectorizerConfig();
  void check() const;  // throws Error on invariant violation
};

const std::set<std::string>& default_stopwords();

struct OutOfRange : Error {
  explicit OutOfRange(int age)
      : Error("age " + std::to_string(age) + " outside [" + std::to_string(kMinAge) +
              ", " + std::to_string(kMaxAge) + "]") {}
};
struct UnsupportedN : Error {
  explicit UnsupportedN(int n)
      : Error("n-gram order " + std::to_string(n) + " unsupported (only 1 and 2)") {}
};
struct EmptyCohort : Error {
  EmptyCohort() : Error("cohort has no records") {}
};
struct MissingLabel : Error {
  explicit MissingLabel(const std::string& id)
      : Error("record \"" + id + "\" has no label") {}
};

// "L-U" with L = width*floor(age/width), U = L + width - 1.
std::string discretize_age(int age, int bin_width);

// lowercase -> strip punctuation -> whitespace split -> numeric literals to
// placeholder -> drop stopwords. A '.' flanked by digits survives stripping
// so decimal literals stay single tokens.
std::vector<std::string> preprocess_note(const std::string& text,
                                         const VectorizerConfig& config);

// n=1: the tokens; n=2: adjacent pairs joined by one space. Multiplicity
// is preserved.
std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, int n);

using FeatureKindSet = std::set<FeatureKind>;
FeatureKindSet all_feature_kinds();
FeatureKindSet structured_feature_kinds();  // everything except unigram/bigram

// Deterministic ordered feature registry: column ids are dense 0..n-1 in
// (kind, name) order.
class FeatureSpace {
 public:
  FeatureSpace() = default;
  FeatureSpace(std::vector<FeatureDescriptor> descriptors, VectorizerConfig config);

  std::size_t size() const { return descriptors_.size(); }
  const std::vector<FeatureDescriptor>& descriptors() const { return descriptors_; }
  const FeatureDescriptor& descriptor(std::uint32_t column) const;
  const VectorizerConfig& config() const { return config_; }

  // -1 when the descriptor is not in the space.
  std::int64_t column_of(const FeatureDescriptor& d) const;

  std::string serialize_manifest() const;
  static FeatureSpace parse_manifest(const std::string& text, VectorizerConfig config);

 private:
  std::vector<FeatureDescriptor> descriptors_;
  std::map<FeatureDescriptor, std::uint32_t> index_;
  VectorizerConfig config_;
};

// The set of features a record exhibits, restricted to enabled kinds.
// Demographics contribute gender/race/ethnicity values plus the age bin;
// note n-grams are presence features over the record's notes.
std::vector<FeatureDescriptor> record_features(const PatientRecord& record,
                                               const VectorizerConfig& config,
                                               const FeatureKindSet& kinds);

FeatureSpace build_feature_space(const Cohort& cohort, const VectorizerConfig& config,
                                 const FeatureKindSet& kinds = all_feature_kinds());

// Out-of-vocabulary features are silently dropped.
SparseVector vectorize_record(const PatientRecord& record, const FeatureSpace& space);

// All records must be labeled.
DesignMatrix vectorize_cohort(const Cohort& cohort, const FeatureSpace& space);

}  // namespace rarescreen
