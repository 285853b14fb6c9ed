#include <random>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "doctest.h"
#include "thea/persona.hpp"
#include "thea/text.hpp"

using namespace thea;
using namespace thea::persona;

namespace {

ResponseCandidate cand(DecisionClass dc, double crew = 0.5, std::vector<Trait> traits = {Trait::kSincerity}) {
  ResponseCandidate c;
  c.text = "x";
  c.decision_class = dc;
  c.crew_benefit = crew;
  c.traits = std::move(traits);
  return c;
}

affect::EmotionEstimate emotion(EmotionLabel l) {
  affect::EmotionEstimate e;
  e.label = l;
  return e;
}

}  // namespace

TEST_CASE("default profile") {
  const auto p = PersonaProfile::default_profile();
  CHECK(p.name == "SPACE THEA");
  CHECK(p.trait_weights.size() == 7);
  int active = 0;
  for (auto t : kAllTraits) active += p.weight(t) == 1.0;
  CHECK(active == 4);
  CHECK(p.weight(Trait::kFunctionalIntelligence) == 1.0);
  CHECK(p.weight(Trait::kSincerity) == 1.0);
  CHECK(p.weight(Trait::kCreativity) == 1.0);
  CHECK(p.weight(Trait::kEmotionalIntelligence) == 1.0);
  CHECK(p.weight(Trait::kSociability) == 0.25);
  CHECK_NOTHROW(validate_persona(p));
}

TEST_CASE("validate_persona names the field") {
  auto p = PersonaProfile::default_profile();
  p.trait_weights[Trait::kSincerity] = 2.0;
  try {
    validate_persona(p);
    FAIL("accepted");
  } catch (const PersonaError& e) {
    CHECK(e.field() == "trait_weights.sincerity");
  }
  p = PersonaProfile::default_profile();
  p.trait_weights.erase(Trait::kCreativity);
  CHECK_THROWS_AS(validate_persona(p), PersonaError);
  p = PersonaProfile::default_profile();
  p.name.clear();
  CHECK_THROWS_AS(validate_persona(p), PersonaError);
}

TEST_CASE("moral_filter") {
  const auto a = cand(DecisionClass::kSupportive);
  const auto b = cand(DecisionClass::kDirective);
  const auto neutral = emotion(EmotionLabel::kNeutral);
  CHECK(moral_filter({a, b}, "crisis", neutral) == std::vector<ResponseCandidate>{a});
  CHECK(moral_filter({a}, "support", neutral) == std::vector<ResponseCandidate>{a});
  CHECK(moral_filter({b}, "crisis", neutral).empty());
  CHECK(moral_filter({b, a}, "support", neutral) == std::vector<ResponseCandidate>{b, a});
}

TEST_CASE("moral_filter output is an ordered subset of its input") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 500; ++t) {
    std::vector<ResponseCandidate> in;
    for (int i = 0, n = static_cast<int>(rng() % 6); i < n; ++i) {
      in.push_back(cand(static_cast<DecisionClass>(rng() % 3), static_cast<double>(i) / 10));
    }
    const auto out = moral_filter(in, rng() % 2 ? "crisis" : "general", emotion(EmotionLabel::kNeutral));
    CHECK(out.size() <= in.size());
    std::size_t j = 0;
    for (const auto& c : out) {
      while (j < in.size() && !(in[j] == c)) ++j;
      CHECK(j < in.size());
      ++j;
    }
  }
}

TEST_CASE("score_candidate") {
  const auto p = PersonaProfile::default_profile();
  auto c = cand(DecisionClass::kSupportive, 0.8, {Trait::kEmotionalIntelligence});
  c.emotion_affinity = EmotionLabel::kStressed;
  CHECK(score_candidate(c, emotion(EmotionLabel::kStressed), p) == doctest::Approx(2.3));
  CHECK(score_candidate(c, emotion(EmotionLabel::kSad), p) == doctest::Approx(1.8));

  auto selfish = c;
  selfish.self_benefit = 1.0;
  CHECK(score_candidate(selfish, emotion(EmotionLabel::kStressed), p) ==
        score_candidate(c, emotion(EmotionLabel::kStressed), p));

  auto zero = cand(DecisionClass::kInformative, 0.0, {Trait::kSociability, Trait::kSincerity});
  CHECK(score_candidate(zero, emotion(EmotionLabel::kNeutral), p) == doctest::Approx((0.25 + 1.0) / 2));
}

TEST_CASE("select_response") {
  Rng rng(0);
  const auto a = cand(DecisionClass::kSupportive);
  const auto b = cand(DecisionClass::kSupportive);
  std::vector<ScoredCandidate> scored = {{&a, 2.3}, {&b, 1.1}};
  CHECK(select_response(scored, rng) == 0);

  std::vector<ScoredCandidate> tie = {{&a, 1.0}, {&b, 1.0}};
  Rng r1(0), r2(0);
  CHECK(select_response(tie, r1) == select_response(tie, r2));

  std::vector<ScoredCandidate> none;
  CHECK_THROWS_AS(select_response(none, rng), std::invalid_argument);
}

TEST_CASE("tie-breaking draws every tied candidate") {
  const auto a = cand(DecisionClass::kSupportive);
  std::vector<ScoredCandidate> tie = {{&a, 1.0}, {&a, 0.5}, {&a, 1.0}, {&a, 1.0}};
  std::map<std::size_t, int> hits;
  Rng rng(42);
  for (int i = 0; i < 3000; ++i) ++hits[select_response(tie, rng)];
  CHECK(hits.count(1) == 0);
  for (std::size_t i : {0u, 2u, 3u}) {
    CHECK(hits[i] > 850);
    CHECK(hits[i] < 1150);
  }
}

TEST_CASE("self-exclusion: argmax ignores self_benefit") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto p = PersonaProfile::default_profile();
  for (int t = 0; t < 1000; ++t) {
    auto a = cand(DecisionClass::kSupportive, unit(gen), {kAllTraits[gen() % 7]});
    auto b = cand(DecisionClass::kInformative, unit(gen), {kAllTraits[gen() % 7]});
    auto a2 = a, b2 = b;
    a2.self_benefit = unit(gen);
    b2.self_benefit = unit(gen);
    const auto e = emotion(static_cast<EmotionLabel>(gen() % 5));
    std::vector<ScoredCandidate> s1 = {{&a, score_candidate(a, e, p)}, {&b, score_candidate(b, e, p)}};
    std::vector<ScoredCandidate> s2 = {{&a2, score_candidate(a2, e, p)}, {&b2, score_candidate(b2, e, p)}};
    CHECK(s1[0].score == s2[0].score);
    CHECK(s1[1].score == s2[1].score);
    const auto seed = gen();
    Rng r1(seed), r2(seed);
    CHECK(select_response(s1, r1) == select_response(s2, r2));
  }
}

TEST_CASE("annotate_prosody") {
  auto e = emotion(EmotionLabel::kStressed);
  CHECK(annotate_prosody("Let's keep calm and think this through together.", e) ==
        "<speak><prosody rate=\"95%\" pitch=\"-2st\">Let&apos;s keep calm and think this "
        "through together.</prosody></speak>");
  CHECK(annotate_prosody("Good morning, Alex.", emotion(EmotionLabel::kNeutral)) ==
        "<speak><prosody rate=\"100%\" pitch=\"0st\">Good morning, Alex.</prosody></speak>");
  CHECK(annotate_prosody("A & B", emotion(EmotionLabel::kNeutral)).find("A &amp; B") != std::string::npos);
  CHECK(prosody_for(EmotionLabel::kSad).rate == "90%");
  CHECK(prosody_for(EmotionLabel::kPositive).pitch == "+1st");
  CHECK(prosody_for(EmotionLabel::kAngry).rate == "100%");
}

TEST_CASE("SSML is well-formed XML for arbitrary text") {
  std::mt19937_64 rng(8);
  const std::string specials = "<>&\"' \t\n\r;#]]>";
  for (int t = 0; t < 2000; ++t) {
    std::string s;
    for (int i = 0, n = static_cast<int>(rng() % 40); i < n; ++i) {
      switch (rng() % 3) {
        case 0: s.push_back(specials[rng() % specials.size()]); break;
        case 1: s.push_back(static_cast<char>(rng() % 256)); break;
        default: s.push_back(static_cast<char>('a' + rng() % 26)); break;
      }
    }
    const auto ssml = annotate_prosody(s, emotion(static_cast<EmotionLabel>(rng() % 5)));
    REQUIRE(text::is_valid_utf8(ssml));
    std::istringstream in(ssml);
    boost::property_tree::ptree tree;
    CAPTURE(ssml);
    CHECK_NOTHROW(boost::property_tree::read_xml(in, tree));
    CHECK(tree.count("speak") == 1);
  }
}
