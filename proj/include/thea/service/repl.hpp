#pragma once

#include <iosfwd>
#include <string>

#include "thea/service/chat_service.hpp"

namespace thea::service {

struct ReplOptions {
  /// Print emotion label, confidence and matched intent under each reply.
  bool show_details = true;
  bool show_ssml = false;
  /// Prompt string written before each read; empty for none.
  std::string prompt = "you> ";
};

/// Line-oriented chat over one fresh session until EOF or "/quit".
/// "/ssml" toggles SSML output, "/transcript" prints the transcript so far.
/// Returns the session id.
std::string run_repl(ChatService& service, std::istream& in, std::ostream& out,
                     ReplOptions options = {});

}  // namespace thea::service
