#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace thea::text {

/// A lowercase word token and the byte range it came from in the source.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  /// `@entity` placeholder (only produced by tokenize_phrase).
  bool slot = false;
};

/// Splits arbitrary bytes into lowercase word tokens.
///
/// Word characters are ASCII letters/digits and non-ASCII letters; apostrophes
/// (ASCII or typographic) are kept inside a word and folded to '\''. Invalid
/// UTF-8 acts as a separator, so every token is valid UTF-8.
std::vector<Token> tokenize(std::string_view input);

/// Like tokenize(), but `@name` becomes a slot token whose text is `name`.
std::vector<Token> tokenize_phrase(std::string_view phrase);

std::vector<std::string> token_texts(const std::vector<Token>& tokens);

/// Escapes the five XML special characters and replaces invalid UTF-8 and
/// characters XML 1.0 forbids with U+FFFD.
std::string xml_escape(std::string_view input);

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view input);

bool is_valid_utf8(std::string_view input);

}  // namespace thea::text
