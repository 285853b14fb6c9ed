#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thea/types.hpp"

namespace thea {

/// A renderable response attached to an intent.
///
/// `text` may contain `{placeholder}` slots resolved at render time from the
/// session (`user_name`, `assistant_name`) or from entity bindings.
/// `self_benefit` is carried for authoring completeness only; scoring never
/// reads it.
struct ResponseCandidate {
  std::string text;
  std::vector<Trait> traits;
  DecisionClass decision_class = DecisionClass::kInformative;
  double crew_benefit = 0.0;
  double self_benefit = 0.0;
  std::optional<EmotionLabel> emotion_affinity;
  /// Entity name -> canonical value that must be bound for this candidate to
  /// be eligible.
  std::map<std::string, std::string> condition;
  /// Authoring note; required on directive candidates.
  std::string rationale;

  bool operator==(const ResponseCandidate&) const = default;
};

struct OutputContext {
  std::string name;
  /// Absent means "use the engine's default lifespan".
  std::optional<int> lifespan;

  bool operator==(const OutputContext&) const = default;
};

struct Intent {
  std::string name;
  std::vector<std::string> training_phrases;
  std::vector<std::string> input_contexts;
  std::vector<OutputContext> output_contexts;
  std::vector<ResponseCandidate> responses;
  std::optional<std::string> next_node;
  bool requires_user_name = false;
  /// Pack-level fallback: never matched by phrases, used for no-match turns
  /// while the pack is active.
  bool fallback = false;
  /// Identity question ("are you human?"); receives the self-disclosure
  /// candidate when the persona enables it.
  bool identity = false;
  /// Affect trigger. The only supported value is "strong_insult": the intent
  /// is force-ranked first whenever a strong insult is detected.
  std::optional<std::string> trigger;

  bool operator==(const Intent&) const = default;
};

struct EntityValue {
  std::string value;
  std::vector<std::string> synonyms;

  bool operator==(const EntityValue&) const = default;
};

struct EntityDef {
  std::string name;
  std::vector<EntityValue> values;
  /// Free-text capture (person names). Bound only where a phrase template
  /// places the slot.
  bool capture_freeform = false;

  bool operator==(const EntityDef&) const = default;
};

inline constexpr std::string_view kFallbackMarker = "fallback";
inline constexpr std::string_view kStrongInsultTrigger = "strong_insult";

struct TreeNode {
  std::string id;
  std::vector<std::string> prompt_intents;
  /// Node id, or kFallbackMarker.
  std::string on_no_match = std::string(kFallbackMarker);
  std::optional<TherapyPhase> phase;

  bool operator==(const TreeNode&) const = default;
};

/// Metadata keys with engine meaning. Everything else is inert.
namespace meta {
inline constexpr std::string_view kFallback = "fallback";        // "global"
inline constexpr std::string_view kTherapy = "therapy";          // "true"
inline constexpr std::string_view kNameGated = "name_gated";     // "true"
inline constexpr std::string_view kVoice = "voice";
}  // namespace meta

struct ScenarioPack {
  std::string id;
  std::string title;
  std::vector<Intent> intents;
  std::vector<EntityDef> entities;
  std::vector<TreeNode> nodes;
  std::map<std::string, std::string> metadata;

  const Intent* find_intent(std::string_view name) const;
  const TreeNode* find_node(std::string_view id) const;
  const EntityDef* find_entity(std::string_view name) const;
  bool metadata_flag(std::string_view key) const;
  /// Output context names of every intent in the pack.
  std::vector<std::string> context_names() const;

  bool operator==(const ScenarioPack&) const = default;
};

}  // namespace thea
