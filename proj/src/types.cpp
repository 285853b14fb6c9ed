#include "thea/types.hpp"

namespace thea {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view s,
                        const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(E e, const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [value, name] : table) {
    if (value == e) return name;
  }
  return "?";
}

constexpr std::array<std::pair<Trait, std::string_view>, 7> kTraitNames = {{
    {Trait::kFunctionalIntelligence, "functional_intelligence"},
    {Trait::kAestheticAttraction, "aesthetic_attraction"},
    {Trait::kProtectiveQuality, "protective_quality"},
    {Trait::kSincerity, "sincerity"},
    {Trait::kCreativity, "creativity"},
    {Trait::kSociability, "sociability"},
    {Trait::kEmotionalIntelligence, "emotional_intelligence"},
}};

constexpr std::array<std::pair<EmotionLabel, std::string_view>, 5> kEmotionNames = {{
    {EmotionLabel::kNeutral, "neutral"},
    {EmotionLabel::kStressed, "stressed"},
    {EmotionLabel::kSad, "sad"},
    {EmotionLabel::kAngry, "angry"},
    {EmotionLabel::kPositive, "positive"},
}};

constexpr std::array<std::pair<DecisionClass, std::string_view>, 3> kDecisionNames = {{
    {DecisionClass::kInformative, "informative"},
    {DecisionClass::kSupportive, "supportive"},
    {DecisionClass::kDirective, "directive"},
}};

constexpr std::array<std::pair<TherapyPhase, std::string_view>, 3> kPhaseNames = {{
    {TherapyPhase::kValidate, "validate"},
    {TherapyPhase::kReflect, "reflect"},
    {TherapyPhase::kReassure, "reassure"},
}};

}  // namespace

std::string_view to_string(Trait t) { return name_of(t, kTraitNames); }
std::string_view to_string(EmotionLabel e) { return name_of(e, kEmotionNames); }
std::string_view to_string(DecisionClass d) { return name_of(d, kDecisionNames); }
std::string_view to_string(TherapyPhase p) { return name_of(p, kPhaseNames); }
std::string_view to_string(Speaker s) {
  return s == Speaker::kUser ? "user" : "assistant";
}

std::optional<Speaker> parse_speaker(std::string_view s) {
  if (s == "user") return Speaker::kUser;
  if (s == "assistant") return Speaker::kAssistant;
  return std::nullopt;
}

std::optional<Trait> parse_trait(std::string_view s) { return lookup(s, kTraitNames); }
std::optional<EmotionLabel> parse_emotion_label(std::string_view s) {
  return lookup(s, kEmotionNames);
}
std::optional<DecisionClass> parse_decision_class(std::string_view s) {
  return lookup(s, kDecisionNames);
}
std::optional<TherapyPhase> parse_therapy_phase(std::string_view s) {
  return lookup(s, kPhaseNames);
}

}  // namespace thea
