#pragma once

#include <span>
#include <string_view>

// Generated at build time from data/ and packs/.
namespace thea::embedded {

std::string_view sentiment_lexicon();
std::string_view insult_lexicon();

struct PackDocument {
  std::string_view file;
  std::string_view text;
};

/// Built-in scenario packs in load order.
std::span<const PackDocument> pack_documents();

}  // namespace thea::embedded
