#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace thea {

/// The seven voice-assistant personality categories used to tag and score
/// responses.
enum class Trait {
  kFunctionalIntelligence,
  kAestheticAttraction,
  kProtectiveQuality,
  kSincerity,
  kCreativity,
  kSociability,
  kEmotionalIntelligence,
};

inline constexpr std::array<Trait, 7> kAllTraits = {
    Trait::kFunctionalIntelligence, Trait::kAestheticAttraction,
    Trait::kProtectiveQuality,      Trait::kSincerity,
    Trait::kCreativity,             Trait::kSociability,
    Trait::kEmotionalIntelligence,
};

enum class EmotionLabel { kNeutral, kStressed, kSad, kAngry, kPositive };

enum class DecisionClass { kInformative, kSupportive, kDirective };

/// Therapy phases of the "not doing so well" scenario, in their only legal
/// order.
enum class TherapyPhase { kValidate, kReflect, kReassure };

enum class Speaker { kUser, kAssistant };

std::string_view to_string(Trait t);
std::string_view to_string(EmotionLabel e);
std::string_view to_string(DecisionClass d);
std::string_view to_string(TherapyPhase p);
std::string_view to_string(Speaker s);

std::optional<Trait> parse_trait(std::string_view s);
std::optional<EmotionLabel> parse_emotion_label(std::string_view s);
std::optional<DecisionClass> parse_decision_class(std::string_view s);
std::optional<TherapyPhase> parse_therapy_phase(std::string_view s);
std::optional<Speaker> parse_speaker(std::string_view s);

/// Position of a phase in the validate -> reflect -> reassure order.
constexpr int phase_rank(TherapyPhase p) { return static_cast<int>(p); }

}  // namespace thea
