#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "rarescreen/cohort.hpp"
#include "rarescreen/matrix.hpp"
#include "rarescreen/vectorizer.hpp"

using namespace rarescreen;

namespace {

PatientRecord make_record(const std::string& id, int age,
                          std::vector<std::string> diagnoses,
                          std::vector<std::string> notes = {}) {
  PatientRecord rec;
  rec.patient_id = id;
  rec.gender = "f";
  rec.race = "white";
  rec.ethnicity = "nonhispanic";
  rec.age = age;
  rec.diagnoses = std::move(diagnoses);
  rec.notes = std::move(notes);
  rec.label = Label::Negative;
  return rec;
}

bool has_feature(const std::vector<FeatureDescriptor>& feats, FeatureKind kind,
                 const std::string& name) {
  return std::find(feats.begin(), feats.end(), FeatureDescriptor{kind, name}) !=
         feats.end();
}

}  // namespace

TEST_CASE("discretize_age maps onto closed bins") {
  CHECK(discretize_age(43, 10) == "40-49");
  CHECK(discretize_age(40, 10) == "40-49");
  CHECK(discretize_age(49, 10) == "40-49");
  CHECK(discretize_age(0, 10) == "0-9");
  CHECK(discretize_age(130, 10) == "130-139");
  CHECK(discretize_age(43, 5) == "40-44");
  CHECK(discretize_age(43, 25) == "25-49");

  CHECK_THROWS_AS(discretize_age(-1, 10), OutOfRange);
  CHECK_THROWS_AS(discretize_age(131, 10), OutOfRange);
  CHECK_THROWS_AS(discretize_age(43, 0), Error);
}

TEST_CASE("preprocess_note lowercases, strips punctuation, masks numbers") {
  const VectorizerConfig config;

  CHECK(preprocess_note("Patient DENIES chest pain.", config) ==
        std::vector<std::string>{"patient", "denies", "chest", "pain"});
  // Stopwords drop after lowercasing.
  CHECK(preprocess_note("The pain IS severe", config) ==
        std::vector<std::string>{"pain", "severe"});
  // Whole numbers and decimals collapse to the placeholder; a decimal point
  // flanked by digits survives punctuation stripping.
  CHECK(preprocess_note("took 3.5 mg, then 10 more", config) ==
        std::vector<std::string>{"took", "<num>", "mg", "<num>"});
  // Other punctuation is deleted in place, so hyphenated words fuse.
  CHECK(preprocess_note("chest-pain (left side)", config) ==
        std::vector<std::string>{"chestpain", "left", "side"});
  // A trailing period is not a decimal point.
  CHECK(preprocess_note("dose 12.", config) ==
        std::vector<std::string>{"dose", "<num>"});
  // Mixed alphanumerics are not numeric literals.
  CHECK(preprocess_note("b12 deficiency", config) ==
        std::vector<std::string>{"b12", "deficiency"});
  CHECK(preprocess_note("", config).empty());
}

TEST_CASE("extract_ngrams produces unigrams and adjacent bigrams") {
  const std::vector<std::string> tokens{"severe", "chest", "pain"};
  CHECK(extract_ngrams(tokens, 1) == tokens);
  CHECK(extract_ngrams(tokens, 2) ==
        std::vector<std::string>{"severe chest", "chest pain"});
  CHECK(extract_ngrams({"solo"}, 2).empty());
  CHECK(extract_ngrams({}, 1).empty());
  CHECK_THROWS_AS(extract_ngrams(tokens, 3), UnsupportedN);
  CHECK_THROWS_AS(extract_ngrams(tokens, 0), UnsupportedN);
}

TEST_CASE("record_features prefixes demographics and canonicalizes entries") {
  const VectorizerConfig config;
  PatientRecord rec = make_record("r1", 61, {"  Congestive Heart Failure "});
  rec.medications = {"Lisinopril 10MG"};

  const auto feats = record_features(rec, config, all_feature_kinds());
  CHECK(has_feature(feats, FeatureKind::Demographic, "gender:f"));
  CHECK(has_feature(feats, FeatureKind::Demographic, "race:white"));
  CHECK(has_feature(feats, FeatureKind::Demographic, "ethnicity:nonhispanic"));
  CHECK(has_feature(feats, FeatureKind::Demographic, "age:60-69"));
  CHECK(has_feature(feats, FeatureKind::Diagnosis, "congestive heart failure"));
  CHECK(has_feature(feats, FeatureKind::Medication, "lisinopril 10mg"));

  // Kind filtering drops everything else.
  const auto only_dx = record_features(rec, config, {FeatureKind::Diagnosis});
  REQUIRE(only_dx.size() == 1);
  CHECK(only_dx[0].name == "congestive heart failure");
}

TEST_CASE("note n-grams flow into unigram/bigram kinds") {
  const VectorizerConfig config;
  const PatientRecord rec =
      make_record("n1", 50, {}, {"Severe chest pain at night"});

  const auto feats =
      record_features(rec, config, {FeatureKind::Unigram, FeatureKind::Bigram});
  CHECK(has_feature(feats, FeatureKind::Unigram, "severe"));
  CHECK(has_feature(feats, FeatureKind::Unigram, "night"));
  // "at" is a stopword, so the bigram bridges over it.
  CHECK(has_feature(feats, FeatureKind::Bigram, "pain night"));
  CHECK_FALSE(has_feature(feats, FeatureKind::Unigram, "at"));
}

TEST_CASE("build_feature_space sorts by kind then name and prunes n-grams") {
  VectorizerConfig config;
  config.min_doc_count = 2;
  config.max_doc_frequency = 0.7;

  Cohort cohort;
  // "common" appears in all 4 notes (doc frequency 1.0 > 0.7 -> pruned),
  // "shared" in 2 (kept), "rare" in 1 (below min_doc_count -> pruned).
  cohort.records.push_back(make_record("p1", 41, {"flu"}, {"common shared"}));
  cohort.records.push_back(make_record("p2", 52, {"flu"}, {"common shared"}));
  cohort.records.push_back(make_record("p3", 63, {"asthma"}, {"common rare"}));
  cohort.records.push_back(make_record("p4", 74, {}, {"common"}));

  const FeatureSpace space =
      build_feature_space(cohort, config, all_feature_kinds());

  const auto& d = space.descriptors();
  CHECK(std::is_sorted(d.begin(), d.end()));
  CHECK(space.column_of({FeatureKind::Unigram, "shared"}) >= 0);
  CHECK(space.column_of({FeatureKind::Unigram, "common"}) == -1);
  CHECK(space.column_of({FeatureKind::Unigram, "rare"}) == -1);
  // Structured features are never frequency-pruned: "flu" is in 2 docs,
  // "asthma" in 1, both kept.
  CHECK(space.column_of({FeatureKind::Diagnosis, "flu"}) >= 0);
  CHECK(space.column_of({FeatureKind::Diagnosis, "asthma"}) >= 0);
  // Every age bin observed becomes its own demographic feature.
  for (const char* bin : {"age:40-49", "age:50-59", "age:60-69", "age:70-79"}) {
    CHECK(space.column_of({FeatureKind::Demographic, bin}) >= 0);
  }

  CHECK_THROWS_AS(build_feature_space(Cohort{}, config, all_feature_kinds()),
                  EmptyCohort);
}

TEST_CASE("vectorize_record projects onto the space and drops unknowns") {
  const VectorizerConfig config;
  Cohort cohort;
  cohort.records.push_back(make_record("p1", 45, {"flu"}));
  cohort.records.push_back(make_record("p2", 45, {"asthma"}));
  const FeatureSpace space =
      build_feature_space(cohort, config, structured_feature_kinds());

  PatientRecord query = make_record("q", 45, {"flu", "never seen before"});
  const SparseVector v = vectorize_record(query, space);
  CHECK(v.dimension == space.size());
  CHECK(std::is_sorted(v.active.begin(), v.active.end()));
  CHECK(v.contains(static_cast<std::uint32_t>(
      space.column_of({FeatureKind::Diagnosis, "flu"}))));
  // 4 demographics + flu; the unknown diagnosis vanishes.
  CHECK(v.active.size() == 5);
}

TEST_CASE("vectorize_cohort carries labels and requires them") {
  const VectorizerConfig config;
  Cohort cohort;
  cohort.records.push_back(make_record("p1", 45, {"flu"}));
  cohort.records.push_back(make_record("p2", 58, {}));
  cohort.records[0].label = Label::Positive;

  const FeatureSpace space =
      build_feature_space(cohort, config, structured_feature_kinds());
  const DesignMatrix m = vectorize_cohort(cohort, space);
  CHECK(m.n_rows() == 2);
  CHECK(m.n_columns == space.size());
  CHECK(m.labels == std::vector<Label>{Label::Positive, Label::Negative});
  REQUIRE(m.feature_space != nullptr);
  CHECK(m.feature_space->size() == space.size());

  cohort.records[1].label.reset();
  CHECK_THROWS_AS(vectorize_cohort(cohort, space), MissingLabel);
}

TEST_CASE("manifest round-trips the feature space") {
  const VectorizerConfig config;
  Cohort cohort;
  cohort.records.push_back(make_record("p1", 45, {"flu"}, {"some note text"}));
  cohort.records.push_back(make_record("p2", 59, {"flu"}, {"some note text"}));
  const FeatureSpace space = build_feature_space(cohort, config, all_feature_kinds());

  const std::string manifest = space.serialize_manifest();
  const FeatureSpace back = FeatureSpace::parse_manifest(manifest, config);
  REQUIRE(back.size() == space.size());
  for (std::uint32_t i = 0; i < space.size(); ++i) {
    CHECK(back.descriptor(i) == space.descriptor(i));
  }

  CHECK_THROWS_AS(FeatureSpace::parse_manifest("wrong header\n", config), Error);
  CHECK_THROWS_AS(
      FeatureSpace::parse_manifest("# rarescreen feature-space v1\nno-tab-here\n",
                                   config),
      Error);
}

TEST_CASE("FeatureSpace rejects descriptors out of canonical order") {
  const VectorizerConfig config;
  std::vector<FeatureDescriptor> unsorted{{FeatureKind::Medication, "b"},
                                          {FeatureKind::Diagnosis, "a"}};
  CHECK_THROWS_AS(FeatureSpace(unsorted, config), Error);

  std::vector<FeatureDescriptor> duplicate{{FeatureKind::Diagnosis, "a"},
                                           {FeatureKind::Diagnosis, "a"}};
  CHECK_THROWS_AS(FeatureSpace(duplicate, config), Error);
}

TEST_CASE("config validation rejects bad settings") {
  VectorizerConfig config;
  config.age_bin_width = 0;
  CHECK_THROWS_AS(config.check(), Error);
  config = VectorizerConfig{};
  config.max_doc_frequency = 0.0;
  CHECK_THROWS_AS(config.check(), Error);
  config = VectorizerConfig{};
  config.min_doc_count = 0;
  CHECK_THROWS_AS(config.check(), Error);
  config = VectorizerConfig{};
  config.numeric_placeholder.clear();
  CHECK_THROWS_AS(config.check(), Error);
}
