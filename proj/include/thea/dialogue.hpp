#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "thea/affect.hpp"
#include "thea/nlu.hpp"
#include "thea/persona.hpp"
#include "thea/scenario_pack.hpp"
#include "thea/types.hpp"

namespace thea::dialogue {

struct TranscriptEntry {
  Speaker speaker = Speaker::kUser;
  std::string text;
  EmotionLabel emotion = EmotionLabel::kNeutral;
  std::optional<std::string> intent;
  std::string timestamp;

  bool operator==(const TranscriptEntry&) const = default;
};

/// Per-conversation state. Single writer: one step at a time.
struct SessionState {
  std::string session_id;
  std::uint64_t seed = 0;
  persona::Rng rng;
  persona::PersonaProfile persona;
  /// Context name -> remaining lifespan in turns; always >= 1.
  std::map<std::string, int> active_contexts;
  /// Pack id -> current conversation-tree node.
  std::map<std::string, std::string> current_node;
  /// Pack of the last matched intent; owns no-match turns while its contexts
  /// are alive.
  std::optional<std::string> active_pack;
  std::optional<std::string> user_name;
  std::optional<TherapyPhase> therapy_phase;
  /// Append-only.
  std::vector<TranscriptEntry> transcript;

  std::vector<std::string> active_context_names() const;
};

/// Session ids encode the seed ("s" + 16 hex digits) so a transcript file
/// names the seed needed to replay it.
std::string session_id_for_seed(std::uint64_t seed);
std::optional<std::uint64_t> seed_from_session_id(std::string_view id);

struct ContextDelta {
  std::vector<std::string> added;
  std::vector<std::string> removed;
};

struct AnnotatedResponse {
  std::string text;
  std::string ssml;
};

struct TurnOutcome {
  AnnotatedResponse response;
  std::optional<std::string> matched_intent;
  std::optional<std::string> pack_id;
  affect::EmotionEstimate emotion;
  /// True iff matched_intent is absent.
  bool fallback = true;
  ContextDelta context_delta;
};

enum class GateReason { kNameRequired, kPhaseOrder };

std::string_view to_string(GateReason r);

struct GateDecision {
  std::optional<GateReason> rejection;

  bool admitted() const { return !rejection.has_value(); }
  static GateDecision admit() { return {}; }
  static GateDecision reject(GateReason r) { return {r}; }
};

/// Rejects name-gated intents while the user's name is unknown, and intents
/// whose target node would skip or reverse a therapy phase.
GateDecision check_gates(const SessionState& s, const nlu::MatchResult& m,
                         const ScenarioPack& pack);

class RenderError : public std::runtime_error {
 public:
  explicit RenderError(std::string placeholder)
      : std::runtime_error("unresolved placeholder {" + placeholder + "}"),
        placeholder_(std::move(placeholder)) {}
  const std::string& placeholder() const { return placeholder_; }

 private:
  std::string placeholder_;
};

/// Substitutes `{user_name}`, `{assistant_name}` and `{entity}` placeholders.
/// Throws RenderError on anything it cannot resolve.
std::string render_template(std::string_view tmpl, const nlu::Bindings& bindings,
                            const SessionState& s);

/// unset -> validate -> reflect -> reassure, one step at a time; re-entering
/// the current phase is allowed.
bool phase_transition_allowed(std::optional<TherapyPhase> from, TherapyPhase to);

class PhaseError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Moves the session to `node`'s phase. Throws PhaseError on an illegal
/// transition or an untagged node.
SessionState advance_therapy(SessionState s, const TreeNode& node);

struct EngineOptions {
  /// Top match score below which a turn falls back.
  double fallback_threshold = 0.55;
  int context_lifespan_default = 5;
  double context_boost = 0.1;
  affect::AffectPolicy affect;
  std::string fallback_text = "I'm not sure I understood that. Could you say it another way?";
  /// Intent that name-gate rejections redirect to.
  std::string ask_name_intent = "ask_user_name";
  /// Timestamp source for transcript entries; ISO-8601 UTC wall clock if empty.
  std::function<std::string()> clock;
};

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable engine data shared by any number of sessions.
class Engine {
 public:
  /// Throws EngineError("no packs loaded") for an empty pack list.
  explicit Engine(std::vector<ScenarioPack> packs, EngineOptions options = {},
                  affect::Lexicons lexicons = affect::Lexicons::builtin());

  /// Fresh session: no contexts, no user name, empty transcript. A random
  /// seed is drawn when none is supplied.
  SessionState start_session(persona::PersonaProfile persona =
                                 persona::PersonaProfile::default_profile(),
                             std::optional<std::uint64_t> seed = std::nullopt) const;

  /// One user turn. Always yields exactly one response; internal failures
  /// degrade to the fallback response and are logged.
  TurnOutcome step(SessionState& s, std::string_view text) const;

  const std::vector<ScenarioPack>& packs() const { return packs_; }
  const EngineOptions& options() const { return options_; }
  const affect::Lexicons& lexicons() const { return lexicons_; }
  const ScenarioPack* find_pack(std::string_view id) const;

 private:
  struct Plan;

  Plan plan_turn(const SessionState& s, std::string_view text) const;
  Plan fallback_plan(const SessionState& s, const affect::EmotionEstimate& emotion,
                     persona::Rng rng) const;
  void commit(SessionState& s, std::string_view text, Plan& plan) const;
  std::string now() const;

  std::vector<ScenarioPack> packs_;
  EngineOptions options_;
  affect::Lexicons lexicons_;
};

}  // namespace thea::dialogue
