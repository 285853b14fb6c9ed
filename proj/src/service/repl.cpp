#include "thea/service/repl.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

namespace thea::service {

std::string run_repl(ChatService& service, std::istream& in, std::ostream& out,
                     ReplOptions options) {
  const auto id = service.create_session();
  out << "session " << id << " (/quit to leave)\n";
  std::string line;
  for (;;) {
    out << options.prompt << std::flush;
    if (!std::getline(in, line)) break;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "/quit") break;
    if (line == "/ssml") {
      options.show_ssml = !options.show_ssml;
      out << "ssml " << (options.show_ssml ? "on" : "off") << "\n";
      continue;
    }
    if (line == "/transcript") {
      out << service.transcript_ndjson(id);
      continue;
    }
    if (line.size() > kMaxMessageBytes) {
      out << "! message exceeds " << kMaxMessageBytes << " bytes\n";
      continue;
    }
    const auto turn = service.post_message(id, line);
    const auto& o = turn.outcome;
    out << "thea> " << o.response.text << "\n";
    if (options.show_ssml) out << "      " << o.response.ssml << "\n";
    if (options.show_details) {
      char conf[16];
      std::snprintf(conf, sizeof conf, "%.2f", o.emotion.confidence);
      out << "      [" << to_string(o.emotion.label) << " " << conf << " | "
          << o.matched_intent.value_or("fallback") << "]\n";
    }
  }
  return id;
}

}  // namespace thea::service
