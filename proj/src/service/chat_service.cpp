#include "thea/service/chat_service.hpp"

#include <condition_variable>
#include <random>

#include <spdlog/spdlog.h>

#include "thea/pack_loader.hpp"
#include "thea/service/transcript.hpp"

namespace thea::service {

using nlohmann::json;
using nlohmann::ordered_json;

persona::PersonaProfile apply_persona_override(const json& o, persona::PersonaProfile p) {
  if (o.is_null()) return p;
  if (!o.is_object()) throw persona::PersonaError("persona", "expected an object");
  for (const auto& [key, v] : o.items()) {
    if (key == "name") {
      if (!v.is_string()) throw persona::PersonaError("name", "expected a string");
      p.name = v.get<std::string>();
    } else if (key == "voice_metadata") {
      if (!v.is_string()) throw persona::PersonaError("voice_metadata", "expected a string");
      p.voice_metadata = v.get<std::string>();
    } else if (key == "self_disclosure") {
      if (!v.is_boolean()) throw persona::PersonaError("self_disclosure", "expected a boolean");
      p.self_disclosure = v.get<bool>();
    } else if (key == "trait_weights") {
      if (!v.is_object()) throw persona::PersonaError("trait_weights", "expected an object");
      for (const auto& [trait_name, w] : v.items()) {
        const std::string field = "trait_weights." + trait_name;
        const auto trait = parse_trait(trait_name);
        if (!trait) throw persona::PersonaError(field, "unknown trait");
        if (!w.is_number()) throw persona::PersonaError(field, "expected a number");
        p.trait_weights[*trait] = w.get<double>();
      }
    } else {
      throw persona::PersonaError(key, "unknown field");
    }
  }
  persona::validate_persona(p);
  return p;
}

std::vector<ScenarioPack> service_packs(const EngineConfig& cfg) {
  auto packs = load_builtin_packs();
  if (cfg.packs_dir) {
    for (auto& p : load_pack_dir(*cfg.packs_dir)) {
      for (const auto& existing : packs) {
        if (existing.id == p.id) throw PackLoadError("pack id " + p.id + " shadows a built-in pack");
      }
      packs.push_back(std::move(p));
    }
  }
  return packs;
}

std::string turn_body(std::size_t index, std::string_view user_text,
                      const dialogue::TurnOutcome& outcome) {
  ordered_json j;
  j["turn"] = index;
  j["user_text"] = std::string(user_text);
  j["text"] = outcome.response.text;
  j["ssml"] = outcome.response.ssml;
  j["emotion"] = {{"label", to_string(outcome.emotion.label)},
                  {"confidence", outcome.emotion.confidence}};
  j["matched_intent"] =
      outcome.matched_intent ? ordered_json(*outcome.matched_intent) : ordered_json(nullptr);
  j["fallback"] = outcome.fallback;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

struct ChatService::Session {
  mutable std::mutex mu;
  mutable std::condition_variable cv;
  dialogue::SessionState state;
  std::vector<std::string> events;
};

ChatService::ChatService(EngineConfig cfg, std::vector<ScenarioPack> packs)
    : config_(std::move(cfg)), engine_(std::move(packs), config_.engine_options()) {
  validate_config(config_);
}

ChatService::~ChatService() { shutdown(); }

std::uint64_t ChatService::next_seed() {
  const auto n = counter_.fetch_add(1);
  if (config_.rng_seed) return *config_.rng_seed + n;
  static thread_local std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string ChatService::create_session(const json& persona_override) {
  auto profile =
      apply_persona_override(persona_override, persona::PersonaProfile::default_profile());
  auto session = std::make_shared<Session>();
  std::unique_lock lock(registry_mu_);
  for (;;) {
    session->state = engine_.start_session(profile, next_seed());
    if (!sessions_.contains(session->state.session_id)) break;
  }
  const auto id = session->state.session_id;
  sessions_.emplace(id, std::move(session));
  spdlog::info("session {} created", id);
  return id;
}

std::shared_ptr<ChatService::Session> ChatService::find(std::string_view id) const {
  std::shared_lock lock(registry_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound(id);
  return it->second;
}

Turn ChatService::post_message(std::string_view session_id, std::string_view text) {
  auto session = find(session_id);
  if (text.empty()) throw InvalidMessage("message text is empty");
  if (text.size() > kMaxMessageBytes) {
    throw MessageTooLarge("message exceeds " + std::to_string(kMaxMessageBytes) + " bytes");
  }
  Turn turn;
  {
    std::lock_guard lock(session->mu);
    turn.outcome = engine_.step(session->state, text);
    turn.index = session->events.size() + 1;
    turn.body = turn_body(turn.index, text, turn.outcome);
    session->events.push_back(turn.body);
    if (config_.transcript_dir) {
      const auto& t = session->state.transcript;
      append_transcript(*config_.transcript_dir, session->state.session_id,
                        std::span(t).subspan(t.size() - 2));
    }
  }
  session->cv.notify_all();
  return turn;
}

std::string ChatService::transcript_ndjson(std::string_view session_id) const {
  auto session = find(session_id);
  std::lock_guard lock(session->mu);
  std::string out;
  for (const auto& e : session->state.transcript) {
    out += transcript_line(e);
    out += '\n';
  }
  return out;
}

std::vector<TurnEvent> ChatService::events_after(std::string_view session_id,
                                                 std::optional<std::size_t> last_seen,
                                                 std::chrono::milliseconds wait) const {
  auto session = find(session_id);
  // Event ids are 1-based turn numbers, stored at id - 1.
  const std::size_t from = last_seen.value_or(0);
  std::unique_lock lock(session->mu);
  session->cv.wait_for(lock, wait,
                       [&] { return stopping_.load() || session->events.size() > from; });
  std::vector<TurnEvent> out;
  for (std::size_t i = from; i < session->events.size(); ++i) {
    out.push_back({i + 1, session->events[i]});
  }
  return out;
}

std::uint64_t ChatService::session_seed(std::string_view session_id) const {
  auto session = find(session_id);
  std::lock_guard lock(session->mu);
  return session->state.seed;
}

void ChatService::shutdown() {
  stopping_ = true;
  std::shared_lock lock(registry_mu_);
  for (const auto& [id, s] : sessions_) {
    { std::lock_guard l(s->mu); }
    s->cv.notify_all();
  }
}

std::size_t ChatService::session_count() const {
  std::shared_lock lock(registry_mu_);
  return sessions_.size();
}

}  // namespace thea::service
