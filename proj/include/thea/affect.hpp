#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "thea/nlu.hpp"
#include "thea/types.hpp"

namespace thea::affect {

enum class InsultSeverity { kNone, kMild, kStrong };

std::string_view to_string(InsultSeverity s);

class LexiconError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Word lists behind the text-only emotion detectors. Immutable after load.
struct Lexicons {
  std::map<std::string, double> valence;           // token -> [-1, 1]
  std::map<std::string, InsultSeverity> insults;   // token -> mild | strong
  std::set<std::string> negations;
  /// Tokens that address the assistant directly ("you", "thea", ...).
  std::set<std::string> address_terms;

  /// Lexicons shipped with the engine.
  static Lexicons builtin();
};

/// `token<TAB>valence` per line; blank lines and `#` comments are skipped.
std::map<std::string, double> parse_sentiment_lexicon(std::string_view content);
/// `token<TAB>mild|strong` per line.
std::map<std::string, InsultSeverity> parse_insult_lexicon(std::string_view content);

/// Thresholds of the rule table.
struct AffectPolicy {
  double sad_threshold = -0.3;
  double positive_threshold = 0.3;
  int stutter_threshold = 3;
};

struct Signal {
  std::string name;
  double weight = 0.0;

  bool operator==(const Signal&) const = default;
};

struct EmotionEstimate {
  EmotionLabel label = EmotionLabel::kNeutral;
  double confidence = 0.0;
  std::vector<Signal> signals;

  bool operator==(const EmotionEstimate&) const = default;
};

/// Largest number of back-to-back repetitions of any 1-3 token sequence.
/// "I don't, I don't, I don't know" -> 3; plain text -> 1; empty -> 0.
int detect_stutter(std::string_view raw);

/// Lexicon hit addressed at the assistant -> the term's severity; a hit with
/// no second-person or assistant-name address is at most mild.
/// `assistant_name` adds one more address token (the persona's name).
InsultSeverity detect_insult(const nlu::NormalizedUtterance& u, const Lexicons& lex,
                             std::string_view assistant_name = {});

/// Mean valence of lexicon tokens; a negation flips the sign of the next hit
/// if it falls within two tokens. 0 when nothing is in the lexicon.
double score_sentiment(const nlu::NormalizedUtterance& u, const Lexicons& lex);

/// Priority rule: insult > stutter > sad valence > positive valence > neutral.
EmotionEstimate infer_emotion(int stutter, InsultSeverity insult, double valence,
                              const AffectPolicy& policy = {});

/// Runs the three detectors and the rule table on one utterance.
EmotionEstimate estimate_emotion(const nlu::NormalizedUtterance& u, const Lexicons& lex,
                                 const AffectPolicy& policy = {},
                                 std::string_view assistant_name = {});

}  // namespace thea::affect
