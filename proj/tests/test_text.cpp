#include <random>

#include "doctest.h"
#include "thea/text.hpp"

using namespace thea::text;

TEST_CASE("tokenize lowercases and splits on punctuation") {
  CHECK(token_texts(tokenize("Hi, what is your name?")) ==
        std::vector<std::string>{"hi", "what", "is", "your", "name"});
  CHECK(token_texts(tokenize("")).empty());
  CHECK(token_texts(tokenize("  ...!!  ")).empty());
}

TEST_CASE("apostrophes stay inside words") {
  CHECK(token_texts(tokenize("I'm feeling lonely.")) ==
        std::vector<std::string>{"i'm", "feeling", "lonely"});
  // typographic apostrophe folds to ASCII
  CHECK(token_texts(tokenize("I\xE2\x80\x99m here")) == std::vector<std::string>{"i'm", "here"});
  // leading and trailing quotes are not part of the word
  CHECK(token_texts(tokenize("'quoted' word'")) == std::vector<std::string>{"quoted", "word"});
}

TEST_CASE("token spans point back into the input") {
  const std::string s = "Where is the SWITCH?";
  for (const auto& t : tokenize(s)) {
    std::string piece = s.substr(t.begin, t.end - t.begin);
    for (auto& c : piece) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    CHECK(piece == t.text);
  }
}

TEST_CASE("non-ASCII letters are word characters") {
  CHECK(token_texts(tokenize("Grüße, Zoë")) == std::vector<std::string>{"grüße", "zoë"});
}

TEST_CASE("invalid UTF-8 separates tokens") {
  const std::string bad = "ab\xFF\xFE" "cd";
  CHECK(token_texts(tokenize(bad)) == std::vector<std::string>{"ab", "cd"});
  CHECK_FALSE(is_valid_utf8(bad));
  CHECK(is_valid_utf8(sanitize_utf8(bad)));
  // truncated multibyte sequence at the end
  CHECK(token_texts(tokenize("ok\xE2\x80")) == std::vector<std::string>{"ok"});
}

TEST_CASE("phrase slots") {
  const auto toks = tokenize_phrase("where is the switch in the @room");
  REQUIRE(toks.size() == 7);
  CHECK(toks.back().slot);
  CHECK(toks.back().text == "room");
  CHECK(token_texts(toks).back() == "@room");
}

TEST_CASE("xml_escape") {
  CHECK(xml_escape("a & b") == "a &amp; b");
  CHECK(xml_escape("<x y=\"1\">'") == "&lt;x y=&quot;1&quot;&gt;&apos;");
  CHECK(xml_escape("bell\x07") == "bell\xEF\xBF\xBD");
  CHECK(xml_escape("bad\xC0") == "bad\xEF\xBF\xBD");
  CHECK(xml_escape("tab\tnl\n") == "tab\tnl\n");
}

TEST_CASE("tokenize never yields empty or invalid tokens on random bytes") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> byte(0, 255), len(0, 64);
  for (int i = 0; i < 2000; ++i) {
    std::string s(static_cast<std::size_t>(len(rng)), '\0');
    for (auto& c : s) c = static_cast<char>(byte(rng));
    for (const auto& t : tokenize(s)) {
      REQUIRE_FALSE(t.text.empty());
      REQUIRE(is_valid_utf8(t.text));
      REQUIRE(t.end <= s.size());
    }
    REQUIRE(is_valid_utf8(xml_escape(s)));
  }
}
