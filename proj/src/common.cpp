#include "rarescreen/common.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace rarescreen {

const char* to_string(Label label) {
  return label == Label::Positive ? "positive" : "negative";
}

Label parse_label(const std::string& text) {
  if (text == "positive") return Label::Positive;
  if (text == "negative") return Label::Negative;
  throw Error("unknown label '" + text + "' (expected 'positive' or 'negative')");
}

namespace {
constexpr std::array<const char*, kFeatureKindCount> kKindNames = {
    "demographic", "diagnosis", "medication", "problem",
    "surgical",    "unigram",   "bigram"};
}  // namespace

const char* to_string(FeatureKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

FeatureKind parse_feature_kind(const std::string& text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (text == kKindNames[i]) return static_cast<FeatureKind>(i);
  }
  throw Error("unknown feature kind '" + text + "'");
}

DimensionMismatch::DimensionMismatch(std::size_t expected, std::size_t got)
    : Error("dimension mismatch: expected " + std::to_string(expected) +
            ", got " + std::to_string(got)) {}

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string canonicalize(const std::string& s) { return lowercase(trim(s)); }

std::string format_fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

std::string format_shortest(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("double formatting failed");
  return std::string(buf, ptr);
}

}  // namespace rarescreen
