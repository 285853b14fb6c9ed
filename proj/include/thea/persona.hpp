#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "thea/affect.hpp"
#include "thea/scenario_pack.hpp"
#include "thea/types.hpp"

namespace thea::persona {

/// Scenario class whose packs may never emit directive responses: the
/// assistant has no decision-making authority over the crew.
inline constexpr std::string_view kCrisisScenario = "crisis";

/// Functional intelligence, sincerity, creativity and emotional intelligence
/// at 1.0; the other three categories at 0.25.
std::map<Trait, double> default_trait_weights();

struct PersonaProfile {
  std::string name = "SPACE THEA";
  std::map<Trait, double> trait_weights = default_trait_weights();
  /// Inert; a downstream voice would read it.
  std::string voice_metadata = "en-CA-female-2";
  /// Adds a standing "I am a machine" candidate to identity questions.
  bool self_disclosure = true;

  /// Same as a default-constructed profile.
  static PersonaProfile default_profile();

  double weight(Trait t) const;

  bool operator==(const PersonaProfile&) const = default;
};

/// Field-level validation failure, e.g. field "trait_weights.sincerity".
class PersonaError : public std::invalid_argument {
 public:
  PersonaError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Throws PersonaError unless all seven categories are present in [0,1] and
/// the name is nonempty.
void validate_persona(const PersonaProfile& p);

/// Candidate injected into identity intents when self_disclosure is on.
ResponseCandidate self_disclosure_candidate();

/// Drops directive candidates in crisis scenarios; order preserved, output is
/// a subset of the input. An empty result means the caller must fall back.
std::vector<ResponseCandidate> moral_filter(const std::vector<ResponseCandidate>& candidates,
                                            std::string_view scenario_class,
                                            const affect::EmotionEstimate& emotion);

/// crew_benefit + mean trait weight over the candidate's tags + 0.5 when its
/// emotion affinity matches. The assistant's own benefit is not a term.
double score_candidate(const ResponseCandidate& c, const affect::EmotionEstimate& emotion,
                       const PersonaProfile& p);

struct ScoredCandidate {
  const ResponseCandidate* candidate = nullptr;
  double score = 0.0;
};

using Rng = std::mt19937_64;

/// Uniform draw in [0, n) that depends only on the engine's output sequence,
/// so replays are identical across standard libraries.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Index of the highest score; ties are broken by one draw from `rng`
/// (no draw when the maximum is unique). Throws std::invalid_argument on an
/// empty list.
std::size_t select_response(std::span<const ScoredCandidate> scored, Rng& rng);

struct Prosody {
  std::string_view rate;
  std::string_view pitch;
};

Prosody prosody_for(EmotionLabel label);

/// `<speak><prosody rate=".." pitch="..">text</prosody></speak>`, text
/// XML-escaped.
std::string annotate_prosody(std::string_view text, const affect::EmotionEstimate& emotion);

}  // namespace thea::persona
