#include "thea/affect.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "thea/embedded_data.hpp"
#include "thea/text.hpp"

namespace thea::affect {

std::string_view to_string(InsultSeverity s) {
  switch (s) {
    case InsultSeverity::kNone: return "none";
    case InsultSeverity::kMild: return "mild";
    case InsultSeverity::kStrong: return "strong";
  }
  return "?";
}

namespace {

struct Entry {
  std::string token;
  std::string value;
};

std::vector<Entry> parse_tsv(std::string_view content, std::string_view what) {
  std::vector<Entry> out;
  std::size_t line_no = 0;
  while (!content.empty()) {
    ++line_no;
    const auto nl = content.find('\n');
    std::string_view line = content.substr(0, nl);
    content = nl == std::string_view::npos ? std::string_view{} : content.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size()) {
      throw LexiconError(std::string(what) + " lexicon line " + std::to_string(line_no) +
                         ": expected token<TAB>value");
    }
    const auto tokens = text::tokenize(line.substr(0, tab));
    if (tokens.size() != 1) {
      throw LexiconError(std::string(what) + " lexicon line " + std::to_string(line_no) +
                         ": entry must be a single token");
    }
    out.push_back({tokens.front().text, std::string(line.substr(tab + 1))});
  }
  return out;
}

}  // namespace

std::map<std::string, double> parse_sentiment_lexicon(std::string_view content) {
  std::map<std::string, double> out;
  for (auto& e : parse_tsv(content, "sentiment")) {
    double v = 0.0;
    const auto* first = e.value.data();
    const auto* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !(v >= -1.0 && v <= 1.0)) {
      throw LexiconError("sentiment lexicon: bad valence \"" + e.value + "\" for " + e.token);
    }
    out[e.token] = v;
  }
  return out;
}

std::map<std::string, InsultSeverity> parse_insult_lexicon(std::string_view content) {
  std::map<std::string, InsultSeverity> out;
  for (auto& e : parse_tsv(content, "insult")) {
    if (e.value == "mild") {
      out[e.token] = InsultSeverity::kMild;
    } else if (e.value == "strong") {
      out[e.token] = InsultSeverity::kStrong;
    } else {
      throw LexiconError("insult lexicon: bad severity \"" + e.value + "\" for " + e.token);
    }
  }
  return out;
}

Lexicons Lexicons::builtin() {
  Lexicons lex;
  lex.valence = parse_sentiment_lexicon(embedded::sentiment_lexicon());
  lex.insults = parse_insult_lexicon(embedded::insult_lexicon());
  lex.negations = {"not", "don't", "dont", "no", "never", "didn't", "isn't", "can't", "cannot",
                   "won't", "doesn't", "wasn't", "aren't"};
  lex.address_terms = {"you", "you're", "youre", "your", "yourself", "ya", "u", "thea"};
  return lex;
}

int detect_stutter(std::string_view raw) {
  const auto tokens = text::token_texts(text::tokenize(raw));
  const std::size_t n = tokens.size();
  if (n == 0) return 0;
  int best = 1;
  // runs[i]: repetitions of the window starting at i when scanning with
  // stride len, computed right to left.
  std::vector<int> runs(n);
  for (std::size_t len = 1; len <= 3 && len * 2 <= n; ++len) {
    for (std::size_t i = n; i-- > 0;) {
      runs[i] = 1;
      if (i + 2 * len <= n &&
          std::equal(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                     tokens.begin() + static_cast<std::ptrdiff_t>(i + len),
                     tokens.begin() + static_cast<std::ptrdiff_t>(i + len))) {
        runs[i] = runs[i + len] + 1;
      }
      best = std::max(best, runs[i]);
    }
  }
  return best;
}

InsultSeverity detect_insult(const nlu::NormalizedUtterance& u, const Lexicons& lex,
                             std::string_view assistant_name) {
  InsultSeverity worst = InsultSeverity::kNone;
  bool addressed = false;
  for (const auto& t : u.tokens) {
    if (auto it = lex.insults.find(t); it != lex.insults.end()) {
      worst = std::max(worst, it->second);
    }
    if (lex.address_terms.count(t) || (!assistant_name.empty() && t == assistant_name)) {
      addressed = true;
    }
  }
  if (worst == InsultSeverity::kNone) return worst;
  return addressed ? worst : InsultSeverity::kMild;
}

double score_sentiment(const nlu::NormalizedUtterance& u, const Lexicons& lex) {
  double sum = 0.0;
  int hits = 0;
  std::optional<std::size_t> negation_at;
  for (std::size_t i = 0; i < u.tokens.size(); ++i) {
    const auto& t = u.tokens[i];
    if (lex.negations.count(t)) {
      negation_at = i;
      continue;
    }
    auto it = lex.valence.find(t);
    if (it == lex.valence.end()) continue;
    double v = it->second;
    if (negation_at && i - *negation_at <= 2) {
      v = -v;
      negation_at.reset();
    }
    sum += v;
    ++hits;
  }
  if (hits == 0) return 0.0;
  return std::clamp(sum / hits, -1.0, 1.0);
}

EmotionEstimate infer_emotion(int stutter, InsultSeverity insult, double valence,
                              const AffectPolicy& policy) {
  EmotionEstimate e;
  if (insult == InsultSeverity::kStrong) {
    e.signals.push_back({"insult_strong", 0.9});
  } else if (insult == InsultSeverity::kMild) {
    e.signals.push_back({"insult_mild", 0.6});
  }
  const bool stuttered = stutter >= policy.stutter_threshold;
  if (stuttered) {
    e.signals.push_back({"stutter", std::min(0.5 + 0.1 * stutter, 0.9)});
  }
  const bool sad = valence <= policy.sad_threshold;
  const bool positive = valence >= policy.positive_threshold;
  if (sad || positive) e.signals.push_back({"valence", std::min(std::abs(valence), 1.0)});

  if (insult != InsultSeverity::kNone) {
    e.label = EmotionLabel::kAngry;
  } else if (stuttered) {
    e.label = EmotionLabel::kStressed;
  } else if (sad) {
    e.label = EmotionLabel::kSad;
  } else if (positive) {
    e.label = EmotionLabel::kPositive;
  } else {
    e.label = EmotionLabel::kNeutral;
  }
  for (const auto& s : e.signals) e.confidence = std::max(e.confidence, s.weight);
  return e;
}

EmotionEstimate estimate_emotion(const nlu::NormalizedUtterance& u, const Lexicons& lex,
                                 const AffectPolicy& policy, std::string_view assistant_name) {
  return infer_emotion(detect_stutter(u.raw), detect_insult(u, lex, assistant_name),
                       score_sentiment(u, lex), policy);
}

}  // namespace thea::affect
