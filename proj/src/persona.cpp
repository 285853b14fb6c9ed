#include "thea/persona.hpp"

#include <limits>

#include "thea/text.hpp"

namespace thea::persona {

std::map<Trait, double> default_trait_weights() {
  std::map<Trait, double> w;
  for (auto t : kAllTraits) w[t] = 0.25;
  for (auto t : {Trait::kFunctionalIntelligence, Trait::kSincerity, Trait::kCreativity,
                 Trait::kEmotionalIntelligence}) {
    w[t] = 1.0;
  }
  return w;
}

PersonaProfile PersonaProfile::default_profile() { return {}; }

double PersonaProfile::weight(Trait t) const {
  auto it = trait_weights.find(t);
  return it == trait_weights.end() ? 0.0 : it->second;
}

void validate_persona(const PersonaProfile& p) {
  if (p.name.empty()) throw PersonaError("name", "must be nonempty");
  for (auto t : kAllTraits) {
    const std::string field = "trait_weights." + std::string(to_string(t));
    auto it = p.trait_weights.find(t);
    if (it == p.trait_weights.end()) throw PersonaError(field, "missing");
    if (!(it->second >= 0.0 && it->second <= 1.0)) {
      throw PersonaError(field, "must be in [0,1], got " + std::to_string(it->second));
    }
  }
}

ResponseCandidate self_disclosure_candidate() {
  ResponseCandidate c;
  c.text = "To be honest with you, I am a machine. I do not feel things the way you do, "
           "but I am here for you all the same.";
  c.traits = {Trait::kSincerity, Trait::kEmotionalIntelligence};
  c.decision_class = DecisionClass::kInformative;
  c.crew_benefit = 0.6;
  return c;
}

std::vector<ResponseCandidate> moral_filter(const std::vector<ResponseCandidate>& candidates,
                                            std::string_view scenario_class,
                                            const affect::EmotionEstimate& /*emotion*/) {
  if (scenario_class != kCrisisScenario) return candidates;
  std::vector<ResponseCandidate> out;
  for (const auto& c : candidates) {
    if (c.decision_class != DecisionClass::kDirective) out.push_back(c);
  }
  return out;
}

double score_candidate(const ResponseCandidate& c, const affect::EmotionEstimate& emotion,
                       const PersonaProfile& p) {
  double trait_term = 0.0;
  if (!c.traits.empty()) {
    for (auto t : c.traits) trait_term += p.weight(t);
    trait_term /= static_cast<double>(c.traits.size());
  }
  const double affinity_bonus =
      (c.emotion_affinity && *c.emotion_affinity == emotion.label) ? 0.5 : 0.0;
  return c.crew_benefit + trait_term + affinity_bonus;
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n <= 1) return 0;
  const auto range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % range);
}

std::size_t select_response(std::span<const ScoredCandidate> scored, Rng& rng) {
  if (scored.empty()) throw std::invalid_argument("select_response: no candidates");
  double best = scored.front().score;
  for (const auto& s : scored) best = std::max(best, s.score);
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].score == best) ties.push_back(i);
  }
  return ties[uniform_index(rng, ties.size())];
}

Prosody prosody_for(EmotionLabel label) {
  switch (label) {
    case EmotionLabel::kStressed: return {"95%", "-2st"};
    case EmotionLabel::kSad: return {"90%", "-1st"};
    case EmotionLabel::kAngry: return {"100%", "0st"};
    case EmotionLabel::kPositive: return {"105%", "+1st"};
    case EmotionLabel::kNeutral: break;
  }
  return {"100%", "0st"};
}

std::string annotate_prosody(std::string_view text, const affect::EmotionEstimate& emotion) {
  const auto p = prosody_for(emotion.label);
  std::string out = "<speak><prosody rate=\"";
  out += p.rate;
  out += "\" pitch=\"";
  out += p.pitch;
  out += "\">";
  out += text::xml_escape(text);
  out += "</prosody></speak>";
  return out;
}

}  // namespace thea::persona
