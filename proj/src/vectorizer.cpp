#include "rarescreen/vectorizer.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace rarescreen {

namespace {

constexpr const char* kManifestHeader = "# rarescreen feature-space v1";

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_numeric_literal(const std::string& token) {
  if (token.empty()) return false;
  std::size_t i = 0;
  while (i < token.size() && is_digit(token[i])) ++i;
  if (i == 0) return false;
  if (i == token.size()) return true;  // whole number
  if (token[i] != '.') return false;
  ++i;
  if (i == token.size()) return false;
  while (i < token.size() && is_digit(token[i])) ++i;
  return i == token.size();  // decimal
}

}  // namespace

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> kStopwords = {
      "a",      "about",  "above",   "after",  "again",   "against", "all",
      "am",     "an",     "and",     "any",    "are",     "as",      "at",
      "be",     "because", "been",   "before", "being",   "below",   "between",
      "both",   "but",    "by",      "can",    "could",   "did",     "do",
      "does",   "doing",  "down",    "during", "each",    "few",     "for",
      "from",   "further", "had",    "has",    "have",    "having",  "he",
      "her",    "here",   "hers",    "him",    "his",     "how",     "i",
      "if",     "in",     "into",    "is",     "it",      "its",     "itself",
      "just",   "me",     "more",    "most",   "my",      "no",      "nor",
      "not",    "now",    "of",      "off",    "on",      "once",    "only",
      "or",     "other",  "our",     "ours",   "out",     "over",    "own",
      "same",   "she",    "should",  "so",     "some",    "such",    "than",
      "that",   "the",    "their",   "theirs", "them",    "then",    "there",
      "these",  "they",   "this",    "those",  "through", "to",      "too",
      "under",  "until",  "up",      "very",   "was",     "we",      "were",
      "what",   "when",   "where",   "which",  "while",   "who",     "whom",
      "why",    "will",   "with",    "would",  "you",     "your",    "yours",
  };
  return kStopwords;
}

VectorizerConfig::VectorizerConfig() : stopwords(default_stopwords()) {}

void VectorizerConfig::check() const {
  if (age_bin_width < 1) throw Error("age_bin_width must be >= 1");
  if (!(max_doc_frequency > 0.0 && max_doc_frequency <= 1.0)) {
    throw Error("max_doc_frequency must be in (0, 1]");
  }
  if (min_doc_count < 1) throw Error("min_doc_count must be >= 1");
  if (numeric_placeholder.empty()) throw Error("numeric_placeholder must be non-empty");
}

std::string discretize_age(int age, int bin_width) {
  if (bin_width < 1) throw Error("age_bin_width must be >= 1");
  if (age < kMinAge || age > kMaxAge) throw OutOfRange(age);
  const int lower = bin_width * (age / bin_width);
  return std::to_string(lower) + "-" + std::to_string(lower + bin_width - 1);
}

std::vector<std::string> preprocess_note(const std::string& text,
                                         const VectorizerConfig& config) {
  std::string stripped;
  stripped.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::ispunct(c)) {
      // Keep a decimal point so "3.5" stays one token.
      const bool decimal_point = text[i] == '.' && i > 0 && i + 1 < text.size() &&
                                 is_digit(text[i - 1]) && is_digit(text[i + 1]);
      if (!decimal_point) continue;
    }
    stripped.push_back(static_cast<char>(std::tolower(c)));
  }

  std::vector<std::string> tokens;
  std::istringstream in(stripped);
  std::string token;
  while (in >> token) {
    if (is_numeric_literal(token)) token = config.numeric_placeholder;
    if (config.stopwords.count(token)) continue;
    tokens.push_back(token);
  }
  return tokens;
}

std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, int n) {
  if (n != 1 && n != 2) throw UnsupportedN(n);
  if (n == 1) return tokens;
  std::vector<std::string> out;
  if (tokens.size() < 2) return out;
  out.reserve(tokens.size() - 1);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    out.push_back(tokens[i] + " " + tokens[i + 1]);
  }
  return out;
}

FeatureKindSet all_feature_kinds() {
  return {FeatureKind::Demographic, FeatureKind::Diagnosis, FeatureKind::Medication,
          FeatureKind::Problem,     FeatureKind::Surgical,  FeatureKind::Unigram,
          FeatureKind::Bigram};
}

FeatureKindSet structured_feature_kinds() {
  return {FeatureKind::Demographic, FeatureKind::Diagnosis, FeatureKind::Medication,
          FeatureKind::Problem, FeatureKind::Surgical};
}

FeatureSpace::FeatureSpace(std::vector<FeatureDescriptor> descriptors,
                           VectorizerConfig config)
    : descriptors_(std::move(descriptors)), config_(std::move(config)) {
  config_.check();
  for (std::size_t i = 0; i < descriptors_.size(); ++i) {
    if (i > 0 && !(descriptors_[i - 1] < descriptors_[i])) {
      throw Error("feature descriptors out of canonical (kind, name) order");
    }
    index_.emplace(descriptors_[i], static_cast<std::uint32_t>(i));
  }
}

const FeatureDescriptor& FeatureSpace::descriptor(std::uint32_t column) const {
  if (column >= descriptors_.size()) {
    throw Error("feature column " + std::to_string(column) + " out of range");
  }
  return descriptors_[column];
}

std::int64_t FeatureSpace::column_of(const FeatureDescriptor& d) const {
  auto it = index_.find(d);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::string FeatureSpace::serialize_manifest() const {
  std::string out = kManifestHeader;
  out += '\n';
  for (const auto& d : descriptors_) {
    out += to_string(d.kind);
    out += '\t';
    out += d.name;
    out += '\n';
  }
  return out;
}

FeatureSpace FeatureSpace::parse_manifest(const std::string& text,
                                          VectorizerConfig config) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kManifestHeader) {
    throw Error("bad feature-space manifest header (expected \"" +
                std::string(kManifestHeader) + "\")");
  }
  std::vector<FeatureDescriptor> descriptors;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("manifest line without tab separator: \"" + line + "\"");
    }
    descriptors.push_back(
        {parse_feature_kind(line.substr(0, tab)), line.substr(tab + 1)});
  }
  return FeatureSpace(std::move(descriptors), std::move(config));
}

namespace {

void add_demographics(const PatientRecord& record, const VectorizerConfig& config,
                      std::set<FeatureDescriptor>& out) {
  if (!record.gender.empty()) out.insert({FeatureKind::Demographic, "gender:" + record.gender});
  if (!record.race.empty()) out.insert({FeatureKind::Demographic, "race:" + record.race});
  if (!record.ethnicity.empty()) {
    out.insert({FeatureKind::Demographic, "ethnicity:" + record.ethnicity});
  }
  out.insert({FeatureKind::Demographic,
              "age:" + discretize_age(record.age, config.age_bin_width)});
}

void add_entries(FeatureKind kind, const std::vector<std::string>& entries,
                 std::set<FeatureDescriptor>& out) {
  for (const auto& entry : entries) out.insert({kind, canonicalize(entry)});
}

void add_note_ngrams(const PatientRecord& record, const VectorizerConfig& config,
                     bool unigrams, bool bigrams, std::set<FeatureDescriptor>& out) {
  for (const auto& note : record.notes) {
    const auto tokens = preprocess_note(note, config);
    if (unigrams) {
      for (const auto& g : extract_ngrams(tokens, 1)) out.insert({FeatureKind::Unigram, g});
    }
    if (bigrams) {
      for (const auto& g : extract_ngrams(tokens, 2)) out.insert({FeatureKind::Bigram, g});
    }
  }
}

}  // namespace

std::vector<FeatureDescriptor> record_features(const PatientRecord& record,
                                               const VectorizerConfig& config,
                                               const FeatureKindSet& kinds) {
  std::set<FeatureDescriptor> feats;
  if (kinds.count(FeatureKind::Demographic)) add_demographics(record, config, feats);
  if (kinds.count(FeatureKind::Diagnosis)) add_entries(FeatureKind::Diagnosis, record.diagnoses, feats);
  if (kinds.count(FeatureKind::Medication)) add_entries(FeatureKind::Medication, record.medications, feats);
  if (kinds.count(FeatureKind::Problem)) add_entries(FeatureKind::Problem, record.problems, feats);
  if (kinds.count(FeatureKind::Surgical)) add_entries(FeatureKind::Surgical, record.surgical, feats);
  const bool unigrams = kinds.count(FeatureKind::Unigram) > 0;
  const bool bigrams = kinds.count(FeatureKind::Bigram) > 0;
  if (unigrams || bigrams) add_note_ngrams(record, config, unigrams, bigrams, feats);
  return {feats.begin(), feats.end()};
}

FeatureSpace build_feature_space(const Cohort& cohort, const VectorizerConfig& config,
                                 const FeatureKindSet& kinds) {
  config.check();
  if (cohort.records.empty()) throw EmptyCohort();

  std::set<FeatureDescriptor> structured;
  std::map<FeatureDescriptor, std::size_t> ngram_doc_counts;
  for (const auto& record : cohort.records) {
    for (auto& d : record_features(record, config, kinds)) {
      if (d.kind == FeatureKind::Unigram || d.kind == FeatureKind::Bigram) {
        ++ngram_doc_counts[d];
      } else {
        structured.insert(std::move(d));
      }
    }
  }

  const double max_docs = config.max_doc_frequency * static_cast<double>(cohort.records.size());
  std::vector<FeatureDescriptor> descriptors(structured.begin(), structured.end());
  for (const auto& [d, count] : ngram_doc_counts) {
    if (count >= config.min_doc_count && static_cast<double>(count) <= max_docs) {
      descriptors.push_back(d);
    }
  }
  std::sort(descriptors.begin(), descriptors.end());
  return FeatureSpace(std::move(descriptors), config);
}

SparseVector vectorize_record(const PatientRecord& record, const FeatureSpace& space) {
  FeatureKindSet kinds;
  for (const auto& d : space.descriptors()) kinds.insert(d.kind);

  SparseVector out;
  out.dimension = static_cast<std::uint32_t>(space.size());
  for (const auto& d : record_features(record, space.config(), kinds)) {
    const std::int64_t col = space.column_of(d);
    if (col >= 0) out.active.push_back(static_cast<std::uint32_t>(col));
  }
  std::sort(out.active.begin(), out.active.end());
  return out;
}

DesignMatrix vectorize_cohort(const Cohort& cohort, const FeatureSpace& space) {
  DesignMatrix m;
  m.n_columns = static_cast<std::uint32_t>(space.size());
  m.feature_space = std::make_shared<FeatureSpace>(space);
  m.rows.reserve(cohort.records.size());
  m.labels.reserve(cohort.records.size());
  for (const auto& record : cohort.records) {
    if (!record.label) throw MissingLabel(record.patient_id);
    m.rows.push_back(vectorize_record(record, space));
    m.labels.push_back(*record.label);
  }
  return m;
}

}  // namespace rarescreen
