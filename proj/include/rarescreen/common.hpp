#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rarescreen {

// Class label for the screening target. Negative is the tie-break label
// everywhere a classifier vote or posterior comes out even.
enum class Label : std::uint8_t { Negative = 0, Positive = 1 };

const char* to_string(Label label);
Label parse_label(const std::string& text);

// Feature taxonomy. The enum order is load-bearing: feature spaces are
// ordered by kind first, so changing this order changes column ids.
enum class FeatureKind : std::uint8_t {
  Demographic = 0,
  Diagnosis = 1,
  Medication = 2,
  Problem = 3,
  Surgical = 4,
  Unigram = 5,
  Bigram = 6,
};
inline constexpr std::size_t kFeatureKindCount = 7;

const char* to_string(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& text);

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  DimensionMismatch(std::size_t expected, std::size_t got);
};

std::string trim(const std::string& s);
std::string lowercase(const std::string& s);

// trim + lowercase; the canonical form used for set-valued record fields
// and categorical demographics.
std::string canonicalize(const std::string& s);

// Fixed-width and shortest-round-trip double formatting. All report and
// artifact writers go through these so identical runs emit identical bytes.
std::string format_fixed(double value, int digits);
std::string format_shortest(double value);

}  // namespace rarescreen
