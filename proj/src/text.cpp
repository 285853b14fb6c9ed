#include "thea/text.hpp"

#include <cstdint>

namespace thea::text {

namespace {

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point at `pos`. On invalid input returns kInvalid and a
// length of 1 so the caller can resynchronize on the next byte.
char32_t decode(std::string_view s, std::size_t pos, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  len = 1;
  if (b0 < 0x80) return b0;
  std::size_t need;
  char32_t cp;
  char32_t min;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3, cp = b0 & 0x07, min = 0x10000;
  } else {
    return kInvalid;
  }
  if (pos + need >= s.size()) return kInvalid;
  for (std::size_t i = 1; i <= need; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return kInvalid;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return kInvalid;
  len = need + 1;
  return cp;
}

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == 0x2018 || cp == 0x2019; }

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
  }
  if (cp == kInvalid || cp < 0xC0) return false;  // C1 controls, Latin-1 punctuation
  if (cp == 0xD7 || cp == 0xF7) return false;     // multiplication/division signs
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows
  if (cp >= 0x2E00 && cp <= 0x2E7F) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE10 && cp <= 0xFE6F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFFF0) return false;
  return true;
}

bool is_slot_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_';
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::vector<Token> tokenize_impl(std::string_view s, bool allow_slots) {
  std::vector<Token> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    if (allow_slots && s[pos] == '@' && pos + 1 < s.size() && is_slot_char(s[pos + 1])) {
      std::size_t end = pos + 1;
      while (end < s.size() && is_slot_char(s[end])) ++end;
      Token t;
      for (std::size_t i = pos + 1; i < end; ++i) t.text.push_back(ascii_lower(s[i]));
      t.begin = pos;
      t.end = end;
      t.slot = true;
      out.push_back(std::move(t));
      pos = end;
      continue;
    }
    std::size_t len;
    const char32_t cp = decode(s, pos, len);
    if (!is_word_char(cp)) {
      pos += len;
      continue;
    }
    // Maximal run of word characters and apostrophes; apostrophes are trimmed
    // from both ends.
    Token t;
    t.begin = pos;
    std::string pending_apostrophes;
    std::size_t pending_end = pos;
    while (pos < s.size()) {
      const char32_t c = decode(s, pos, len);
      if (is_word_char(c)) {
        t.text += pending_apostrophes;
        pending_apostrophes.clear();
        if (c < 0x80) {
          t.text.push_back(ascii_lower(static_cast<char>(c)));
        } else {
          t.text.append(s.substr(pos, len));
        }
        pos += len;
        pending_end = pos;
      } else if (is_apostrophe(c)) {
        pending_apostrophes.push_back('\'');
        pos += len;
      } else {
        break;
      }
    }
    t.end = pending_end;
    out.push_back(std::move(t));
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

constexpr std::string_view kReplacement = "\xEF\xBF\xBD";

}  // namespace

std::vector<Token> tokenize(std::string_view input) { return tokenize_impl(input, false); }

std::vector<Token> tokenize_phrase(std::string_view phrase) {
  return tokenize_impl(phrase, true);
}

std::vector<std::string> token_texts(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.slot ? "@" + t.text : t.text);
  return out;
}

std::string xml_escape(std::string_view input) {
  std::string out;
  out.reserve(input.size() + 16);
  std::size_t pos = 0;
  while (pos < input.size()) {
    std::size_t len;
    const char32_t cp = decode(input, pos, len);
    pos += len;
    switch (cp) {
      case '&': out += "&amp;"; continue;
      case '<': out += "&lt;"; continue;
      case '>': out += "&gt;"; continue;
      case '"': out += "&quot;"; continue;
      case '\'': out += "&apos;"; continue;
      default: break;
    }
    const bool allowed = cp != kInvalid &&
                         (cp == 0x9 || cp == 0xA || cp == 0xD || (cp >= 0x20 && cp <= 0xD7FF) ||
                          (cp >= 0xE000 && cp <= 0xFFFD) || cp >= 0x10000);
    if (allowed) {
      append_utf8(out, cp);
    } else {
      out += kReplacement;
    }
  }
  return out;
}

std::string sanitize_utf8(std::string_view input) {
  std::string out;
  out.reserve(input.size());
  std::size_t pos = 0;
  while (pos < input.size()) {
    std::size_t len;
    const char32_t cp = decode(input, pos, len);
    if (cp == kInvalid) {
      out += kReplacement;
    } else {
      out.append(input.substr(pos, len));
    }
    pos += len;
  }
  return out;
}

bool is_valid_utf8(std::string_view input) {
  std::size_t pos = 0;
  while (pos < input.size()) {
    std::size_t len;
    if (decode(input, pos, len) == kInvalid) return false;
    pos += len;
  }
  return true;
}

}  // namespace thea::text
