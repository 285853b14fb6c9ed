#include "thea/service/transcript.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "json.hpp"

namespace thea::service {

using nlohmann::json;
using nlohmann::ordered_json;

std::string transcript_line(const dialogue::TranscriptEntry& e) {
  ordered_json j;
  j["speaker"] = to_string(e.speaker);
  j["text"] = e.text;
  j["emotion"] = to_string(e.emotion);
  j["intent"] = e.intent ? ordered_json(*e.intent) : ordered_json(nullptr);
  j["ts"] = e.timestamp;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

dialogue::TranscriptEntry parse_transcript_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw TranscriptError(std::string("not JSON: ") + e.what());
  }
  if (!j.is_object()) throw TranscriptError("expected a JSON object");
  dialogue::TranscriptEntry e;
  try {
    const auto speaker = parse_speaker(j.at("speaker").get<std::string>());
    const auto emotion = parse_emotion_label(j.at("emotion").get<std::string>());
    if (!speaker) throw TranscriptError("bad speaker");
    if (!emotion) throw TranscriptError("bad emotion");
    e.speaker = *speaker;
    e.emotion = *emotion;
    e.text = j.at("text").get<std::string>();
    const auto& intent = j.at("intent");
    if (!intent.is_null()) e.intent = intent.get<std::string>();
    e.timestamp = j.at("ts").get<std::string>();
  } catch (const json::exception& ex) {
    throw TranscriptError(std::string("bad record: ") + ex.what());
  }
  return e;
}

std::vector<dialogue::TranscriptEntry> read_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TranscriptError("cannot read " + path.string());
  std::vector<dialogue::TranscriptEntry> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      out.push_back(parse_transcript_line(line));
    } catch (const TranscriptError& e) {
      throw TranscriptError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::filesystem::path transcript_path(const std::filesystem::path& dir,
                                      std::string_view session_id) {
  return dir / (std::string(session_id) + ".jsonl");
}

bool append_transcript(const std::filesystem::path& dir, std::string_view session_id,
                       std::span<const dialogue::TranscriptEntry> entries) {
  if (entries.empty()) return true;
  const auto path = transcript_path(dir, session_id);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (out) {
    for (const auto& e : entries) out << transcript_line(e) << '\n';
    out.flush();
  }
  if (!out) {
    spdlog::error("session {}: cannot write transcript {}", session_id, path.string());
    return false;
  }
  return true;
}

std::vector<std::string> replay_user_lines(const dialogue::Engine& engine,
                                           const persona::PersonaProfile& persona,
                                           std::uint64_t seed,
                                           std::span<const dialogue::TranscriptEntry> recorded) {
  auto s = engine.start_session(persona, seed);
  std::vector<std::string> out;
  for (const auto& e : recorded) {
    if (e.speaker != Speaker::kUser) continue;
    out.push_back(engine.step(s, e.text).response.text);
  }
  return out;
}

ReplayReport compare_replay(const dialogue::Engine& engine,
                            const persona::PersonaProfile& persona, std::uint64_t seed,
                            std::span<const dialogue::TranscriptEntry> recorded) {
  ReplayReport r;
  for (const auto& e : recorded) {
    if (e.speaker == Speaker::kAssistant) r.recorded.push_back(e.text);
  }
  r.replayed = replay_user_lines(engine, persona, seed, recorded);
  const auto n = std::min(r.recorded.size(), r.replayed.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (r.recorded[i] != r.replayed[i]) {
      r.first_mismatch = i;
      break;
    }
  }
  if (!r.first_mismatch && r.recorded.size() != r.replayed.size()) r.first_mismatch = n;
  return r;
}

}  // namespace thea::service
