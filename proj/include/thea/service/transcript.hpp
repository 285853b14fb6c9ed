#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "thea/dialogue.hpp"

namespace thea::service {

class TranscriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One JSON-lines record, keys in the order speaker, text, emotion, intent, ts.
/// No trailing newline. Invalid UTF-8 in the text becomes U+FFFD.
std::string transcript_line(const dialogue::TranscriptEntry& e);
dialogue::TranscriptEntry parse_transcript_line(std::string_view line);

/// Skips blank lines. Throws TranscriptError naming the bad line.
std::vector<dialogue::TranscriptEntry> read_transcript(const std::filesystem::path& path);

/// `<dir>/<session_id>.jsonl`.
std::filesystem::path transcript_path(const std::filesystem::path& dir,
                                      std::string_view session_id);

/// Appends entries to the session's file and flushes. Nothing is written for
/// an empty span, so an empty session never gets a file. I/O failures are
/// logged and reported through the return value.
bool append_transcript(const std::filesystem::path& dir, std::string_view session_id,
                       std::span<const dialogue::TranscriptEntry> entries);

/// Feeds the user lines of `recorded` through a fresh session seeded with
/// `seed` and returns the assistant lines it produces.
std::vector<std::string> replay_user_lines(const dialogue::Engine& engine,
                                           const persona::PersonaProfile& persona,
                                           std::uint64_t seed,
                                           std::span<const dialogue::TranscriptEntry> recorded);

struct ReplayReport {
  std::vector<std::string> recorded;
  std::vector<std::string> replayed;
  /// Index of the first differing assistant line, if any.
  std::optional<std::size_t> first_mismatch;

  bool identical() const { return !first_mismatch && recorded.size() == replayed.size(); }
};

ReplayReport compare_replay(const dialogue::Engine& engine,
                            const persona::PersonaProfile& persona, std::uint64_t seed,
                            std::span<const dialogue::TranscriptEntry> recorded);

}  // namespace thea::service
