#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thea/scenario_pack.hpp"
#include "thea/text.hpp"

namespace thea::nlu {

struct NormalizedUtterance {
  /// Input bytes, unmodified.
  std::string raw;
  std::vector<std::string> tokens;
  /// Byte spans of `tokens` in `raw`, index-aligned.
  std::vector<text::Token> spans;
  bool had_greeting_prefix = false;
  std::optional<std::string> greeting_token;
};

NormalizedUtterance normalize(std::string_view text);

/// Greeting token ("hi", "good morning", ...) when the utterance opens with a
/// greeting AND carries more content. A bare greeting returns nothing.
std::optional<std::string> detect_greeting_prefix(const NormalizedUtterance& u);

/// True when none of the intent's phrases contains a greeting.
bool is_greeting_agnostic(const Intent& intent);

/// Entity name -> canonical value (or captured text for free-form entities).
using Bindings = std::map<std::string, std::string>;

struct EntityMatch {
  std::string value;
  std::size_t begin = 0;  // token index
  std::size_t end = 0;    // one past the last token
};

/// Longest synonym match per entity, with token positions. Free-form entities
/// are skipped; they are only captured through a phrase template.
std::map<std::string, EntityMatch> locate_entities(const NormalizedUtterance& u,
                                                   const std::vector<EntityDef>& defs);

Bindings extract_entities(const NormalizedUtterance& u, const std::vector<EntityDef>& defs);

/// Captures the tokens that fill free-form slot `slot_index` of `phrase`
/// (1-2 tokens between the literal anchors around the slot).
std::optional<EntityMatch> capture_freeform(const NormalizedUtterance& u,
                                            const std::vector<text::Token>& phrase,
                                            std::size_t slot_index);

struct MatchResult {
  std::string pack_id;
  std::string intent_name;
  double score = 0.0;
  Bindings bindings;
  bool context_boosted = false;
  /// |utterance tokens ∩ best phrase tokens|; second tiebreak.
  std::size_t matched_tokens = 0;
};

struct MatchOptions {
  double context_boost = 0.1;
};

/// Strict ranking order: score, then context-boosted, then matched tokens,
/// then intent name, then pack id.
bool ranks_before(const MatchResult& a, const MatchResult& b);

/// Token-set F1 of the utterance against each intent's training phrases.
/// Intents whose (nonempty) input contexts are all inactive are excluded, as
/// are pack fallback intents and intents with zero overlap.
std::vector<MatchResult> match_intent(const NormalizedUtterance& u,
                                      const std::vector<std::string>& active_contexts,
                                      const ScenarioPack& pack, const MatchOptions& options = {});

/// Pooled ranking across packs.
std::vector<MatchResult> match_intent(const NormalizedUtterance& u,
                                      const std::vector<std::string>& active_contexts,
                                      const std::vector<ScenarioPack>& packs,
                                      const MatchOptions& options = {});

}  // namespace thea::nlu
