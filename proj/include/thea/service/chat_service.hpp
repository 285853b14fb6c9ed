#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "thea/dialogue.hpp"
#include "thea/service/config.hpp"

namespace thea::service {

/// Largest accepted user message, in bytes.
inline constexpr std::size_t kMaxMessageBytes = 16 * 1024;

class SessionNotFound : public std::runtime_error {
 public:
  explicit SessionNotFound(std::string_view id)
      : std::runtime_error("unknown session " + std::string(id)) {}
};

class InvalidMessage : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MessageTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Applies a JSON persona override ({"name", "trait_weights", "voice_metadata",
/// "self_disclosure"}) on top of `base` and validates the result.
/// Throws persona::PersonaError naming the offending field.
persona::PersonaProfile apply_persona_override(const nlohmann::json& override_json,
                                               persona::PersonaProfile base);

/// Built-in packs followed by the packs in cfg.packs_dir, if any.
std::vector<ScenarioPack> service_packs(const EngineConfig& cfg);

struct Turn {
  dialogue::TurnOutcome outcome;
  std::size_t index = 0;
  /// JSON body sent to the REST caller and, verbatim, on the event stream.
  std::string body;
};

struct TurnEvent {
  std::size_t id = 0;
  std::string data;
};

/// Thread-safe session registry over one immutable engine. Turns within a
/// session run one at a time; sessions do not share mutable state.
class ChatService {
 public:
  ChatService(EngineConfig cfg, std::vector<ScenarioPack> packs);
  ~ChatService();

  /// Throws persona::PersonaError for a bad override.
  std::string create_session(const nlohmann::json& persona_override = nlohmann::json::object());

  /// Throws SessionNotFound, InvalidMessage (empty text) or MessageTooLarge.
  Turn post_message(std::string_view session_id, std::string_view text);

  /// JSON-lines transcript of the session so far.
  std::string transcript_ndjson(std::string_view session_id) const;

  /// Turn events with id > `last_seen` (all events when unset). Blocks up to
  /// `wait` for the first new one; returns empty on timeout or shutdown.
  std::vector<TurnEvent> events_after(std::string_view session_id,
                                      std::optional<std::size_t> last_seen,
                                      std::chrono::milliseconds wait) const;

  /// Seed of a session, for replay.
  std::uint64_t session_seed(std::string_view session_id) const;

  /// Wakes all event waiters; later waits return immediately.
  void shutdown();
  bool stopping() const { return stopping_; }

  std::size_t session_count() const;
  const dialogue::Engine& engine() const { return engine_; }
  const EngineConfig& config() const { return config_; }

 private:
  struct Session;

  std::shared_ptr<Session> find(std::string_view id) const;
  std::uint64_t next_seed();

  EngineConfig config_;
  dialogue::Engine engine_;
  mutable std::shared_mutex registry_mu_;
  std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;
  std::atomic<std::uint64_t> counter_{0};
  std::atomic<bool> stopping_{false};
};

/// {"turn", "user_text", "text", "ssml", "emotion": {"label", "confidence"},
///  "matched_intent", "fallback"} as compact JSON.
std::string turn_body(std::size_t index, std::string_view user_text,
                      const dialogue::TurnOutcome& outcome);

}  // namespace thea::service
