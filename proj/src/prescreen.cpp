#include "rarescreen/prescreen.hpp"

#include <algorithm>

namespace rarescreen::prescreen {

std::vector<TopFeature> top_features(const selection::SelectionSummary& selection,
                                     const FeatureSpace& space, std::size_t limit) {
  const std::vector<std::size_t> order = selection::rank_by_weight(selection);
  std::vector<TopFeature> top;
  top.reserve(std::min(limit, order.size()));
  for (std::size_t i = 0; i < order.size() && top.size() < limit; ++i) {
    const std::uint32_t column = selection.kept_columns[order[i]];
    top.push_back(TopFeature{space.descriptor(column), column,
                             selection.weights[order[i]]});
  }
  return top;
}

std::string describe(const Atom& atom) {
  if (atom.kind == Atom::Kind::AgeAtLeast) {
    return "age >= " + std::to_string(atom.age_threshold);
  }
  return std::string(to_string(atom.descriptor.kind)) + " \"" +
         atom.descriptor.name + "\" present";
}

namespace {

// Age-bin descriptors ("age:60-69") become age >= 60 atoms; everything else
// is a presence test.
Atom make_atom(const FeatureDescriptor& descriptor) {
  Atom atom;
  if (descriptor.kind == FeatureKind::Demographic &&
      descriptor.name.rfind("age:", 0) == 0) {
    const std::string bin = descriptor.name.substr(4);
    const std::size_t dash = bin.find('-');
    if (dash != std::string::npos) {
      try {
        atom.kind = Atom::Kind::AgeAtLeast;
        atom.age_threshold = std::stoi(bin.substr(0, dash));
        return atom;
      } catch (const std::exception&) {
        // fall through to a plain presence test
      }
    }
  }
  atom.kind = Atom::Kind::FeaturePresent;
  atom.descriptor = descriptor;
  return atom;
}

}  // namespace

bool atom_matches(const Atom& atom, const PatientRecord& record,
                  const VectorizerConfig& config) {
  if (atom.kind == Atom::Kind::AgeAtLeast) {
    return record.age >= atom.age_threshold;
  }
  const std::vector<FeatureDescriptor> features =
      record_features(record, config, FeatureKindSet{atom.descriptor.kind});
  return std::find(features.begin(), features.end(), atom.descriptor) !=
         features.end();
}

bool rule_matches(const PrescreenRuleSet& rules, const PatientRecord& record,
                  const VectorizerConfig& config) {
  if (rules.match_all) return true;
  for (const Atom& atom : rules.atoms) {
    if (atom_matches(atom, record, config)) return true;
  }
  return false;
}

PrescreenRuleSet derive_prescreen_rules(const Cohort& cohort,
                                        const std::vector<TopFeature>& top,
                                        double target_recall,
                                        const VectorizerConfig& config) {
  if (!(target_recall > 0.0) || target_recall > 1.0) {
    throw InvalidSpec("target recall must be in (0, 1]");
  }
  if (cohort.records.empty()) throw EmptyCohort();
  std::vector<std::size_t> positive_rows;
  for (std::size_t i = 0; i < cohort.records.size(); ++i) {
    const PatientRecord& record = cohort.records[i];
    if (!record.label) throw MissingLabel(record.patient_id);
    if (*record.label == Label::Positive) positive_rows.push_back(i);
  }
  if (positive_rows.empty()) {
    throw InvalidSpec("prescreen derivation needs at least one positive record");
  }

  PrescreenRuleSet rules;
  rules.target_recall = target_recall;

  // Candidate atoms: positive-weight features only, in rank order. A
  // negative weight marks a healthy-side indicator; adding it to a
  // keep-if-match rule could never sharpen the filter.
  std::vector<Atom> candidates;
  for (const TopFeature& feature : top) {
    if (feature.weight > 0.0) candidates.push_back(make_atom(feature.descriptor));
  }

  if (candidates.empty()) {
    // Vacuous disjunction: keep everyone.
    rules.match_all = true;
    rules.measured_recall = 1.0;
    rules.filter_fraction = 0.0;
    rules.target_reached = true;
    return rules;
  }

  std::vector<bool> covered(positive_rows.size(), false);
  std::size_t n_covered = 0;
  for (const Atom& atom : candidates) {
    std::size_t gain = 0;
    for (std::size_t p = 0; p < positive_rows.size(); ++p) {
      if (!covered[p] && atom_matches(atom, cohort.records[positive_rows[p]], config)) {
        ++gain;
      }
    }
    if (gain == 0) continue;
    rules.atoms.push_back(atom);
    for (std::size_t p = 0; p < positive_rows.size(); ++p) {
      if (!covered[p] && atom_matches(atom, cohort.records[positive_rows[p]], config)) {
        covered[p] = true;
      }
    }
    n_covered += gain;
    if (static_cast<double>(n_covered) /
            static_cast<double>(positive_rows.size()) >=
        target_recall) {
      break;
    }
  }

  rules.measured_recall = static_cast<double>(n_covered) /
                          static_cast<double>(positive_rows.size());
  rules.target_reached = rules.measured_recall >= target_recall;

  std::size_t matched = 0;
  for (const PatientRecord& record : cohort.records) {
    if (rule_matches(rules, record, config)) ++matched;
  }
  rules.filter_fraction =
      1.0 - static_cast<double>(matched) / static_cast<double>(cohort.records.size());
  return rules;
}

std::string render_ruleset(const PrescreenRuleSet& rules) {
  std::string out;
  out += "prescreen rule set (target recall " +
         format_shortest(rules.target_recall) + ")\n";
  if (rules.match_all) {
    out += "  (no conditions: keep every patient)\n";
  } else if (rules.atoms.empty()) {
    out += "  (no usable conditions: keep no patient)\n";
  } else {
    for (std::size_t i = 0; i < rules.atoms.size(); ++i) {
      out += "  " + std::to_string(i + 1) + ". " + describe(rules.atoms[i]) + "\n";
    }
  }
  out += "measured recall: " + format_fixed(rules.measured_recall, 6) + "\n";
  out += "filter fraction: " + format_fixed(rules.filter_fraction, 6) + "\n";
  if (!rules.target_reached) {
    out += "warning: target recall not reached; best achieved is reported\n";
  }
  return out;
}

}  // namespace rarescreen::prescreen
