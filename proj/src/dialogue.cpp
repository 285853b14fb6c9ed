#include "thea/dialogue.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <random>

#include <spdlog/spdlog.h>

#include "thea/text.hpp"

namespace thea::dialogue {

std::vector<std::string> SessionState::active_context_names() const {
  std::vector<std::string> out;
  out.reserve(active_contexts.size());
  for (const auto& [name, lifespan] : active_contexts) out.push_back(name);
  return out;
}

std::string session_id_for_seed(std::uint64_t seed) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(seed));
  return buf;
}

std::optional<std::uint64_t> seed_from_session_id(std::string_view id) {
  if (id.size() != 17 || id.front() != 's') return std::nullopt;
  std::uint64_t seed = 0;
  for (char c : id.substr(1)) {
    int digit;
    if (c >= '0' && c <= '9') {
      digit = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      digit = c - 'a' + 10;
    } else {
      return std::nullopt;
    }
    seed = (seed << 4) | static_cast<std::uint64_t>(digit);
  }
  return seed;
}

std::string_view to_string(GateReason r) {
  return r == GateReason::kNameRequired ? "name_required" : "phase_order";
}

bool phase_transition_allowed(std::optional<TherapyPhase> from, TherapyPhase to) {
  const int from_rank = from ? phase_rank(*from) : -1;
  const int step = phase_rank(to) - from_rank;
  return step == 0 || step == 1;
}

SessionState advance_therapy(SessionState s, const TreeNode& node) {
  if (!node.phase) throw PhaseError("node \"" + node.id + "\" carries no therapy phase");
  if (!phase_transition_allowed(s.therapy_phase, *node.phase)) {
    throw PhaseError("illegal therapy transition " +
                     std::string(s.therapy_phase ? to_string(*s.therapy_phase) : "unset") +
                     " -> " + std::string(to_string(*node.phase)));
  }
  s.therapy_phase = node.phase;
  return s;
}

GateDecision check_gates(const SessionState& s, const nlu::MatchResult& m,
                         const ScenarioPack& pack) {
  const Intent* intent = pack.find_intent(m.intent_name);
  if (!intent) return GateDecision::admit();
  if (intent->requires_user_name && !s.user_name) {
    return GateDecision::reject(GateReason::kNameRequired);
  }
  if (intent->next_node) {
    const TreeNode* node = pack.find_node(*intent->next_node);
    if (node && node->phase && !phase_transition_allowed(s.therapy_phase, *node->phase)) {
      return GateDecision::reject(GateReason::kPhaseOrder);
    }
  }
  return GateDecision::admit();
}

std::string render_template(std::string_view tmpl, const nlu::Bindings& bindings,
                            const SessionState& s) {
  auto is_ident = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_';
  };
  std::string out;
  out.reserve(tmpl.size() + 16);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const char c = tmpl[pos];
    if (c != '{') {
      out.push_back(c);
      ++pos;
      continue;
    }
    std::size_t end = pos + 1;
    while (end < tmpl.size() && is_ident(tmpl[end])) ++end;
    if (end == pos + 1 || end >= tmpl.size() || tmpl[end] != '}') {
      out.push_back(c);  // not a placeholder
      ++pos;
      continue;
    }
    const std::string name(tmpl.substr(pos + 1, end - pos - 1));
    if (auto it = bindings.find(name); it != bindings.end()) {
      out += it->second;
    } else if (name == "user_name" && s.user_name) {
      out += *s.user_name;
    } else if (name == "assistant_name") {
      out += s.persona.name;
    } else {
      throw RenderError(name);
    }
    pos = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------

struct Engine::Plan {
  TurnOutcome outcome;
  persona::Rng rng;
  /// Intent whose output contexts and next node apply on commit.
  const ScenarioPack* pack = nullptr;
  const Intent* intent = nullptr;
  nlu::Bindings bindings;
  /// Node move for a no-match turn inside the active pack.
  std::optional<std::string> fallback_pack;
  std::optional<std::string> fallback_node;  // empty string = leave tree
};

Engine::Engine(std::vector<ScenarioPack> packs, EngineOptions options, affect::Lexicons lexicons)
    : packs_(std::move(packs)), options_(std::move(options)), lexicons_(std::move(lexicons)) {
  if (packs_.empty()) throw EngineError("no packs loaded");
  if (!(options_.fallback_threshold > 0.0 && options_.fallback_threshold < 1.0)) {
    throw EngineError("fallback_threshold must be in (0,1)");
  }
  if (options_.context_lifespan_default < 1) {
    throw EngineError("context_lifespan_default must be >= 1");
  }
}

const ScenarioPack* Engine::find_pack(std::string_view id) const {
  auto it = std::find_if(packs_.begin(), packs_.end(),
                         [&](const ScenarioPack& p) { return p.id == id; });
  return it == packs_.end() ? nullptr : &*it;
}

SessionState Engine::start_session(persona::PersonaProfile persona,
                                   std::optional<std::uint64_t> seed) const {
  persona::validate_persona(persona);
  if (!seed) {
    std::random_device rd;
    seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  SessionState s;
  s.seed = *seed;
  s.session_id = session_id_for_seed(*seed);
  s.rng.seed(*seed);
  s.persona = std::move(persona);
  return s;
}

std::string Engine::now() const {
  if (options_.clock) return options_.clock();
  const auto tp = std::chrono::system_clock::now();
  const auto secs = std::chrono::system_clock::to_time_t(tp);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(tp.time_since_epoch()) %
                  1000;
  std::tm utc{};
  gmtime_r(&secs, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &utc);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms.count()));
  return out;
}

namespace {

enum class RespondStatus { kOk, kMoralBlock, kNoRenderable };

struct Responded {
  RespondStatus status = RespondStatus::kNoRenderable;
  std::string text;
};

bool condition_met(const ResponseCandidate& c, const nlu::Bindings& bindings) {
  return std::all_of(c.condition.begin(), c.condition.end(), [&](const auto& kv) {
    auto it = bindings.find(kv.first);
    return it != bindings.end() && it->second == kv.second;
  });
}

Responded respond(const Intent& intent, const ScenarioPack& pack, const nlu::Bindings& bindings,
                  const affect::EmotionEstimate& emotion, const SessionState& s,
                  persona::Rng& rng) {
  std::vector<ResponseCandidate> eligible;
  for (const auto& c : intent.responses) {
    if (condition_met(c, bindings)) eligible.push_back(c);
  }
  if (intent.identity && s.persona.self_disclosure) {
    eligible.push_back(persona::self_disclosure_candidate());
  }
  if (eligible.empty()) return {};

  const auto filtered = persona::moral_filter(eligible, pack.id, emotion);
  if (filtered.empty()) return {RespondStatus::kMoralBlock, {}};

  std::vector<persona::ScoredCandidate> scored;
  for (const auto& c : filtered) {
    scored.push_back({&c, persona::score_candidate(c, emotion, s.persona)});
  }
  while (!scored.empty()) {
    const std::size_t pick = persona::select_response(scored, rng);
    try {
      return {RespondStatus::kOk, render_template(scored[pick].candidate->text, bindings, s)};
    } catch (const RenderError&) {
      scored.erase(scored.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }
  return {};
}

std::string greeting_sentence(const std::string& greeting) {
  std::string out = greeting;
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 32);
  return out + "!";
}

// Last whitespace-separated word of the persona name, lowercased ("thea").
std::string address_token(const std::string& name) {
  const auto tokens = text::tokenize(name);
  return tokens.empty() ? std::string{} : tokens.back().text;
}

}  // namespace

Engine::Plan Engine::fallback_plan(const SessionState& s, const affect::EmotionEstimate& emotion,
                                   persona::Rng rng) const {
  Plan plan;
  plan.outcome.emotion = emotion;
  plan.outcome.fallback = true;

  // A pack owns no-match turns while any of its contexts is still alive.
  const ScenarioPack* owner = s.active_pack ? find_pack(*s.active_pack) : nullptr;
  if (owner) {
    const auto names = owner->context_names();
    const bool alive = std::any_of(names.begin(), names.end(), [&](const std::string& n) {
      return s.active_contexts.count(n) > 0;
    });
    if (!alive) owner = nullptr;
  }
  if (owner) {
    for (const auto& intent : owner->intents) {
      if (!intent.fallback) continue;
      auto r = respond(intent, *owner, {}, emotion, s, rng);
      if (r.status != RespondStatus::kOk) continue;
      plan.outcome.response.text = std::move(r.text);
      plan.outcome.pack_id = owner->id;
      plan.fallback_pack = owner->id;
      if (auto it = s.current_node.find(owner->id); it != s.current_node.end()) {
        const TreeNode* node = owner->find_node(it->second);
        if (node) {
          plan.fallback_node =
              node->on_no_match == kFallbackMarker ? std::string{} : node->on_no_match;
        }
      }
      break;
    }
  }
  if (plan.outcome.response.text.empty()) plan.outcome.response.text = options_.fallback_text;
  plan.rng = std::move(rng);
  return plan;
}

Engine::Plan Engine::plan_turn(const SessionState& s, std::string_view text) const {
  const auto u = nlu::normalize(text);
  const auto emotion =
      affect::estimate_emotion(u, lexicons_, options_.affect, address_token(s.persona.name));
  persona::Rng rng = s.rng;

  auto ranked = nlu::match_intent(u, s.active_context_names(), packs_,
                                  nlu::MatchOptions{options_.context_boost});
  std::erase_if(ranked, [&](const nlu::MatchResult& m) {
    return m.score < options_.fallback_threshold;
  });

  // A strong insult routes to the insult-handling intents ahead of phrasing.
  if (affect::detect_insult(u, lexicons_, address_token(s.persona.name)) ==
      affect::InsultSeverity::kStrong) {
    std::vector<nlu::MatchResult> triggered;
    const auto active = s.active_context_names();
    for (const auto& pack : packs_) {
      for (const auto& intent : pack.intents) {
        if (!intent.trigger || *intent.trigger != kStrongInsultTrigger) continue;
        const bool contexts_ok =
            intent.input_contexts.empty() ||
            std::any_of(intent.input_contexts.begin(), intent.input_contexts.end(),
                        [&](const std::string& c) {
                          return std::find(active.begin(), active.end(), c) != active.end();
                        });
        if (!contexts_ok) continue;
        nlu::MatchResult m;
        m.pack_id = pack.id;
        m.intent_name = intent.name;
        m.score = 1.0;
        triggered.push_back(std::move(m));
      }
    }
    ranked.insert(ranked.begin(), triggered.begin(), triggered.end());
  }

  for (const auto& m : ranked) {
    const ScenarioPack* pack = find_pack(m.pack_id);
    const Intent* intent = pack ? pack->find_intent(m.intent_name) : nullptr;
    if (!intent) continue;

    const auto gate = check_gates(s, m, *pack);
    if (gate.rejection == GateReason::kPhaseOrder) continue;
    if (gate.rejection == GateReason::kNameRequired) {
      // Ask for the name instead of failing the turn.
      for (const auto& p : packs_) {
        const Intent* ask = p.find_intent(options_.ask_name_intent);
        if (!ask) continue;
        auto r = respond(*ask, p, {}, emotion, s, rng);
        if (r.status != RespondStatus::kOk) break;
        Plan plan;
        plan.outcome.response.text = std::move(r.text);
        plan.outcome.matched_intent = ask->name;
        plan.outcome.pack_id = p.id;
        plan.outcome.emotion = emotion;
        plan.outcome.fallback = false;
        plan.pack = &p;
        plan.intent = ask;
        plan.rng = std::move(rng);
        return plan;
      }
      return fallback_plan(s, emotion, s.rng);
    }

    auto r = respond(*intent, *pack, m.bindings, emotion, s, rng);
    if (r.status == RespondStatus::kMoralBlock) return fallback_plan(s, emotion, s.rng);
    if (r.status != RespondStatus::kOk) continue;

    Plan plan;
    if (auto greeting = nlu::detect_greeting_prefix(u);
        greeting && nlu::is_greeting_agnostic(*intent)) {
      r.text = greeting_sentence(*greeting) + " " + r.text;
    }
    plan.outcome.response.text = std::move(r.text);
    plan.outcome.matched_intent = intent->name;
    plan.outcome.pack_id = pack->id;
    plan.outcome.emotion = emotion;
    plan.outcome.fallback = false;
    plan.pack = pack;
    plan.intent = intent;
    plan.bindings = m.bindings;
    plan.rng = std::move(rng);
    return plan;
  }
  return fallback_plan(s, emotion, s.rng);
}

void Engine::commit(SessionState& s, std::string_view text, Plan& plan) const {
  TurnOutcome& out = plan.outcome;
  out.response.ssml = persona::annotate_prosody(out.response.text, out.emotion);

  // Contexts: decay everything, drop expired, then (re)add outputs.
  ContextDelta delta;
  for (auto it = s.active_contexts.begin(); it != s.active_contexts.end();) {
    if (--it->second < 1) {
      delta.removed.push_back(it->first);
      it = s.active_contexts.erase(it);
    } else {
      ++it;
    }
  }
  if (plan.intent) {
    for (const auto& ctx : plan.intent->output_contexts) {
      const int lifespan = ctx.lifespan.value_or(options_.context_lifespan_default);
      s.active_contexts[ctx.name] = lifespan;
      std::erase(delta.removed, ctx.name);
      if (std::find(delta.added.begin(), delta.added.end(), ctx.name) == delta.added.end()) {
        delta.added.push_back(ctx.name);
      }
    }
  }
  out.context_delta = std::move(delta);

  if (plan.intent && plan.pack) {
    s.active_pack = plan.pack->id;
    const TreeNode* node =
        plan.intent->next_node ? plan.pack->find_node(*plan.intent->next_node) : nullptr;
    if (node) s.current_node[plan.pack->id] = node->id;
    if (plan.pack->metadata_flag(meta::kTherapy)) {
      if (node && node->phase && phase_transition_allowed(s.therapy_phase, *node->phase)) {
        s = advance_therapy(std::move(s), *node);
      } else if (node) {
        s.therapy_phase.reset();  // left the therapy tree
      }
    }
    for (const auto& [name, value] : plan.bindings) {
      const EntityDef* def = plan.pack->find_entity(name);
      if (def && def->capture_freeform) s.user_name = value;
    }
  } else if (plan.fallback_pack && plan.fallback_node) {
    if (plan.fallback_node->empty()) {
      s.current_node.erase(*plan.fallback_pack);
    } else {
      s.current_node[*plan.fallback_pack] = *plan.fallback_node;
    }
  }

  s.rng = plan.rng;
  const std::string ts = now();
  s.transcript.push_back({Speaker::kUser, std::string(text), out.emotion.label,
                          out.matched_intent, ts});
  s.transcript.push_back({Speaker::kAssistant, out.response.text, out.emotion.label,
                          out.matched_intent, ts});
}

TurnOutcome Engine::step(SessionState& s, std::string_view text) const {
  std::optional<Plan> plan;
  try {
    plan = plan_turn(s, text);
  } catch (const std::exception& e) {
    spdlog::error("session {}: turn failed, falling back: {}", s.session_id, e.what());
    affect::EmotionEstimate neutral;
    plan = fallback_plan(s, neutral, s.rng);
  }
  commit(s, text, *plan);
  return plan->outcome;
}

}  // namespace thea::dialogue
