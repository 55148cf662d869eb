#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rarescreen/cohort.hpp"
#include "rarescreen/selection.hpp"
#include "rarescreen/vectorizer.hpp"

namespace rarescreen::prescreen {

struct TopFeature {
  FeatureDescriptor descriptor;
  std::uint32_t column = 0;  // full-space column id
  double weight = 0.0;
};

// Kept features ranked by |weight| descending, ties by column id; at most
// `limit` entries.
std::vector<TopFeature> top_features(const selection::SelectionSummary& selection,
                                     const FeatureSpace& space, std::size_t limit);

// One keep-the-patient condition. Age-bin features turn into lower-bound
// thresholds so a single atom can cover every older patient; all other
// features are plain presence tests.
struct Atom {
  enum class Kind : std::uint8_t { FeaturePresent, AgeAtLeast };
  Kind kind = Kind::FeaturePresent;
  FeatureDescriptor descriptor;  // FeaturePresent
  int age_threshold = 0;         // AgeAtLeast
};

std::string describe(const Atom& atom);

// Disjunction of atoms. A rule set derived from an empty candidate list is
// the vacuous filter that keeps everyone.
struct PrescreenRuleSet {
  bool match_all = false;
  std::vector<Atom> atoms;
  double target_recall = 1.0;
  double measured_recall = 0.0;
  double filter_fraction = 0.0;  // share of the cohort excluded
  bool target_reached = true;    // false flags unreachable recall, not fatal
};

bool atom_matches(const Atom& atom, const PatientRecord& record,
                  const VectorizerConfig& config);
bool rule_matches(const PrescreenRuleSet& rules, const PatientRecord& record,
                  const VectorizerConfig& config);

// Walks the ranked list most-predictive-first, keeping only atoms with
// positive weight that cover at least one new positive, until measured
// recall reaches the target or candidates run out (flagged).
PrescreenRuleSet derive_prescreen_rules(const Cohort& cohort,
                                        const std::vector<TopFeature>& top,
                                        double target_recall,
                                        const VectorizerConfig& config);

std::string render_ruleset(const PrescreenRuleSet& rules);

}  // namespace rarescreen::prescreen
