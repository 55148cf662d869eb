#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "rarescreen/cohort.hpp"

using namespace rarescreen;

namespace {

PatientRecord basic_record(const std::string& id) {
  PatientRecord rec;
  rec.patient_id = id;
  rec.gender = "f";
  rec.race = "white";
  rec.ethnicity = "nonhispanic";
  rec.age = 55;
  rec.diagnoses = {"hypertension"};
  rec.medications = {"lisinopril"};
  rec.label = Label::Negative;
  return rec;
}

// Independent binomial check: observed successes must fall within
// mean +/- 4 sigma. With 4 sigma the false-alarm rate per check is ~6e-5.
bool within_binomial(std::size_t observed, std::size_t n, double p) {
  const double mean = static_cast<double>(n) * p;
  const double sigma = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  return std::abs(static_cast<double>(observed) - mean) <= 4.0 * sigma;
}

}  // namespace

TEST_CASE("serialize/parse round-trips every field") {
  Cohort cohort;
  PatientRecord rec = basic_record("a1");
  rec.problems = {"chronic cough"};
  rec.surgical = {"appendectomy"};
  rec.notes = {"Patient reports mild chest pain.", "Follow-up in 3 months"};
  rec.label = Label::Positive;
  cohort.records.push_back(rec);
  cohort.records.push_back(basic_record("a2"));

  const Cohort back = parse_cohort(serialize_cohort(cohort));
  REQUIRE(back.records.size() == 2);
  const PatientRecord& b = back.records[0];
  CHECK(b.patient_id == "a1");
  CHECK(b.gender == "f");
  CHECK(b.race == "white");
  CHECK(b.ethnicity == "nonhispanic");
  CHECK(b.age == 55);
  CHECK(b.diagnoses == rec.diagnoses);
  CHECK(b.medications == rec.medications);
  CHECK(b.problems == rec.problems);
  CHECK(b.surgical == rec.surgical);
  CHECK(b.notes == rec.notes);
  CHECK(b.label == Label::Positive);
  CHECK(back.records[1].label == Label::Negative);
}

TEST_CASE("parse rejects malformed records with the offending line") {
  const std::string good = serialize_record(basic_record("ok"));

  SUBCASE("broken json") {
    CHECK_THROWS_AS(parse_cohort(good + "\n{not json\n"), MalformedRecord);
    try {
      parse_cohort(good + "\n{not json\n");
    } catch (const MalformedRecord& e) {
      CHECK(e.line == 2);
    }
  }
  SUBCASE("missing field") {
    CHECK_THROWS_AS(parse_cohort("{\"patient_id\":\"x\"}\n"), MalformedRecord);
  }
  SUBCASE("unknown field") {
    std::string text = good;
    text.insert(text.find_last_of('}'), ",\"extra\":1");
    CHECK_THROWS_AS(parse_cohort(text), MalformedRecord);
  }
  SUBCASE("bad label") {
    Cohort c;
    c.records.push_back(basic_record("x"));
    std::string text = serialize_cohort(c);
    const auto pos = text.find("negative");
    text.replace(pos, 8, "maybe!!!");
    CHECK_THROWS_AS(parse_cohort(text), MalformedRecord);
  }
  SUBCASE("age out of range") {
    PatientRecord rec = basic_record("x");
    rec.age = 131;
    CHECK_THROWS_AS(parse_cohort(serialize_record(rec)), MalformedRecord);
  }
  SUBCASE("duplicate patient id") {
    CHECK_THROWS_AS(parse_cohort(good + "\n" + good), DuplicatePatientId);
  }
  SUBCASE("duplicate set entry") {
    PatientRecord rec = basic_record("x");
    rec.diagnoses = {"asthma", "asthma"};
    CHECK_THROWS_AS(parse_cohort(serialize_record(rec)), MalformedRecord);
  }
}

TEST_CASE("save/load round-trips through a file") {
  Cohort cohort;
  cohort.records.push_back(basic_record("f1"));
  const std::string path = "test_cohort_roundtrip.jsonl";
  save_cohort(cohort, path);
  const Cohort back = load_cohort(path);
  CHECK(serialize_cohort(back) == serialize_cohort(cohort));
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_cohort("does/not/exist.jsonl"), IoFailure);
}

TEST_CASE("validate_cohort reports violations without throwing") {
  Cohort cohort;
  cohort.records.push_back(basic_record("v1"));
  cohort.records.push_back(basic_record("v1"));  // duplicate id
  PatientRecord bad = basic_record("v2");
  bad.age = -3;
  cohort.records.push_back(bad);

  const auto violations = validate_cohort(cohort);
  REQUIRE(violations.size() == 2);
  CHECK(violations[0].patient_id == "v1");
  CHECK(violations[0].message == "duplicate patient_id");
  CHECK(violations[1].patient_id == "v2");
  CHECK(violations[1].message.find("age -3") == 0);
}

TEST_CASE("generator produces exact class counts and ordering") {
  SynthSpec spec = default_synth_spec();
  const Cohort cohort = generate_synthetic_cohort(spec);
  REQUIRE(cohort.records.size() == 270);
  CHECK(cohort.count_label(Label::Positive) == 73);
  CHECK(cohort.count_label(Label::Negative) == 197);
  CHECK(cohort.provenance == "synthetic");
  for (std::size_t i = 0; i < cohort.records.size(); ++i) {
    REQUIRE(cohort.records[i].label.has_value());
    CHECK(*cohort.records[i].label == (i < 73 ? Label::Positive : Label::Negative));
  }
  CHECK(validate_cohort(cohort).empty());
}

TEST_CASE("generator is a pure function of the spec") {
  const SynthSpec spec = default_synth_spec();
  const std::string a = serialize_cohort(generate_synthetic_cohort(spec));
  const std::string b = serialize_cohort(generate_synthetic_cohort(spec));
  CHECK(a == b);

  SynthSpec other = spec;
  other.seed += 1;
  CHECK(serialize_cohort(generate_synthetic_cohort(other)) != a);
}

TEST_CASE("generator hits the planted presence rates") {
  const SynthSpec spec = default_synth_spec();
  const Cohort cohort = generate_synthetic_cohort(spec);

  for (const SignalFeature& sig : spec.signal_features) {
    std::size_t in_positive = 0;
    std::size_t in_negative = 0;
    for (const auto& rec : cohort.records) {
      const auto& field =
          sig.kind == FeatureKind::Diagnosis ? rec.diagnoses : rec.medications;
      const bool present =
          std::find(field.begin(), field.end(), sig.name) != field.end();
      if (*rec.label == Label::Positive) {
        in_positive += present ? 1 : 0;
      } else {
        in_negative += present ? 1 : 0;
      }
    }
    CHECK(within_binomial(in_positive, 73, sig.p_given_positive));
    CHECK(within_binomial(in_negative, 197, sig.p_given_negative));
  }

  // Noise presence pooled over every (record, noise feature) pair.
  std::size_t noise_slots = 0;
  for (const auto& [kind, count] : spec.n_noise_features_per_kind) {
    (void)kind;
    noise_slots += count;
  }
  std::size_t noise_present = 0;
  for (const auto& rec : cohort.records) {
    for (const auto* field : {&rec.diagnoses, &rec.medications, &rec.problems,
                              &rec.surgical}) {
      for (const std::string& name : *field) {
        if (name.rfind("noise ", 0) == 0) ++noise_present;
      }
    }
  }
  CHECK(within_binomial(noise_present, 270 * noise_slots, spec.noise_presence_rate));
}

TEST_CASE("generator draws ages from the per-class decade weights") {
  const SynthSpec spec = default_synth_spec();
  const Cohort cohort = generate_synthetic_cohort(spec);

  std::size_t negatives_below_60 = 0;
  for (const auto& rec : cohort.records) {
    if (*rec.label == Label::Positive) {
      // Positive decade weights put all mass on one onset decade.
      CHECK(rec.age >= 60);
      CHECK(rec.age <= 69);
    } else if (rec.age < 60) {
      ++negatives_below_60;
    }
  }
  const double below_60_weight = spec.age_weights_negative.at(40) +
                                 spec.age_weights_negative.at(50);
  CHECK(within_binomial(negatives_below_60, 197, below_60_weight));
}

TEST_CASE("generator rejects invalid specs") {
  SynthSpec spec = default_synth_spec();
  spec.signal_features[0].p_given_positive = 1.5;
  CHECK_THROWS_AS(generate_synthetic_cohort(spec), InvalidSpec);

  spec = default_synth_spec();
  spec.age_weights_positive = {{60, 0.5}};  // does not sum to 1
  CHECK_THROWS_AS(generate_synthetic_cohort(spec), InvalidSpec);

  spec = default_synth_spec();
  spec.age_weights_positive = {{130, 1.0}};  // beyond the last full decade
  CHECK_THROWS_AS(generate_synthetic_cohort(spec), InvalidSpec);

  spec = default_synth_spec();
  spec.age_weights_positive = {{55, 1.0}};  // not a decade lower bound
  CHECK_THROWS_AS(generate_synthetic_cohort(spec), InvalidSpec);

  spec = default_synth_spec();
  spec.n_noise_features_per_kind[FeatureKind::Unigram] = 5;
  CHECK_THROWS_AS(generate_synthetic_cohort(spec), InvalidSpec);

  spec = default_synth_spec();
  spec.signal_features[0].name = "   ";
  CHECK_THROWS_AS(generate_synthetic_cohort(spec), InvalidSpec);
}

TEST_CASE("empty and unlabeled cohorts are representable") {
  const Cohort empty = parse_cohort("");
  CHECK(empty.records.empty());

  PatientRecord rec = basic_record("u1");
  rec.label.reset();
  const std::string text = serialize_record(rec);
  CHECK(text.find("label") == std::string::npos);  // omitted, not null
  const Cohort back = parse_cohort(text);
  CHECK_FALSE(back.records[0].label.has_value());
}
