#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "thea/scenario_pack.hpp"

namespace thea {

/// Two phrases whose token sets reach this Jaccard similarity are reported as
/// overlapping ("what is your name" / "hi what is your name" is 4/5).
inline constexpr double kOverlapThreshold = 0.8;

enum class Severity { kWarning, kError };

enum class DefectKind {
  kUnreachableNode,
  kPhraseOverlap,
  kMissingFallback,
  kPhaseOrder,
  kNameGate,
  kDirectiveWithoutRationale,
};

std::string_view to_string(Severity s);
std::string_view to_string(DefectKind k);

struct Defect {
  DefectKind kind;
  Severity severity;
  std::string message;
  /// Names involved: node ids, or the two intent names of an overlap pair.
  std::vector<std::string> subjects;
};

struct ValidationReport {
  std::vector<Defect> defects;

  bool clean() const { return defects.empty(); }
  std::size_t count(DefectKind kind) const;
  /// True when the unordered pair {a, b} was flagged as overlapping.
  bool overlap_flagged(std::string_view a, std::string_view b) const;
};

/// Jaccard similarity of the normalized token sets of two training phrases.
double phrase_jaccard(std::string_view a, std::string_view b);

struct PhraseOverlap {
  std::string intent_a;
  std::string phrase_a;
  std::string intent_b;
  std::string phrase_b;
  double similarity = 0.0;
};

/// All intent pairs (i < j) with at least one phrase pair at or above the
/// threshold; reports the most similar phrase pair for each.
std::vector<PhraseOverlap> find_phrase_overlaps(const std::vector<const Intent*>& intents);

/// Lints a parsed pack. Never throws; an empty report means the pack is clean.
ValidationReport validate_pack(const ScenarioPack& pack);

}  // namespace thea
