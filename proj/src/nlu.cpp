#include "thea/nlu.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace thea::nlu {

namespace {

struct Greeting {
  std::vector<std::string_view> tokens;
  std::string_view text;
};

const std::vector<Greeting>& greetings() {
  static const std::vector<Greeting> kGreetings = {
      {{"good", "morning"}, "good morning"},
      {{"hello"}, "hello"},
      {{"hey"}, "hey"},
      {{"hi"}, "hi"},
  };
  return kGreetings;
}

// Length of the greeting starting at token `pos`, or 0.
std::size_t greeting_at(const std::vector<std::string>& tokens, std::size_t pos,
                        std::string_view* text = nullptr) {
  for (const auto& g : greetings()) {
    if (pos + g.tokens.size() > tokens.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < g.tokens.size() && ok; ++i) ok = tokens[pos + i] == g.tokens[i];
    if (ok) {
      if (text) *text = g.text;
      return g.tokens.size();
    }
  }
  return 0;
}

bool contains_at(const std::vector<std::string>& hay, std::size_t pos,
                 const std::vector<std::string>& needle) {
  if (needle.empty() || pos + needle.size() > hay.size()) return false;
  return std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(pos));
}

std::string capitalize_words(std::string s) {
  bool start = true;
  for (auto& c : s) {
    if (start && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    start = c == ' ';
  }
  return s;
}

// Exact score as a single correctly-rounded division so equal rationals give
// bit-identical doubles: (2I + boost*(U+P)) / (U+P), boost in thousandths.
double f1_score(std::size_t inter, std::size_t total, long boost_millis) {
  const long double num = 2000.0L * static_cast<long double>(inter) +
                          static_cast<long double>(boost_millis) * static_cast<long double>(total);
  const long double den = 1000.0L * static_cast<long double>(total);
  if (num >= den) return 1.0;
  return static_cast<double>(num / den);
}

struct PhraseScore {
  std::size_t inter = 0;
  std::size_t total = 0;  // |U| + |P'|
  Bindings freeform;
};

// a/b > c/d for the F1 ratios 2I/total.
bool better(const PhraseScore& a, const PhraseScore& b) {
  const auto lhs = static_cast<unsigned long long>(a.inter) * b.total;
  const auto rhs = static_cast<unsigned long long>(b.inter) * a.total;
  if (lhs != rhs) return lhs > rhs;
  return a.inter > b.inter;
}

PhraseScore score_phrase(const NormalizedUtterance& u,
                         const std::unordered_set<std::string>& utterance_set,
                         const std::vector<text::Token>& phrase, const ScenarioPack& pack,
                         const std::map<std::string, EntityMatch>& located) {
  std::set<std::string> expanded;
  PhraseScore out;
  for (std::size_t i = 0; i < phrase.size(); ++i) {
    const auto& tok = phrase[i];
    if (!tok.slot) {
      expanded.insert(tok.text);
      continue;
    }
    const EntityDef* def = pack.find_entity(tok.text);
    std::optional<EntityMatch> run;
    if (def && def->capture_freeform) {
      run = capture_freeform(u, phrase, i);
      if (run) out.freeform[tok.text] = run->value;
    } else if (auto it = located.find(tok.text); it != located.end()) {
      run = it->second;
    }
    if (run) {
      for (std::size_t k = run->begin; k < run->end; ++k) expanded.insert(u.tokens[k]);
    } else {
      expanded.insert("@" + tok.text);  // never equals a user token
    }
  }
  for (const auto& t : expanded) out.inter += utterance_set.count(t);
  out.total = utterance_set.size() + expanded.size();
  return out;
}

}  // namespace

NormalizedUtterance normalize(std::string_view input) {
  NormalizedUtterance u;
  u.raw = std::string(input);
  u.spans = text::tokenize(input);
  u.tokens = text::token_texts(u.spans);
  std::string_view greeting;
  if (greeting_at(u.tokens, 0, &greeting) > 0) {
    u.had_greeting_prefix = true;
    u.greeting_token = std::string(greeting);
  }
  return u;
}

std::optional<std::string> detect_greeting_prefix(const NormalizedUtterance& u) {
  const std::size_t len = greeting_at(u.tokens, 0);
  if (len == 0 || len >= u.tokens.size()) return std::nullopt;
  return u.greeting_token;
}

bool is_greeting_agnostic(const Intent& intent) {
  for (const auto& phrase : intent.training_phrases) {
    const auto tokens = text::token_texts(text::tokenize_phrase(phrase));
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (greeting_at(tokens, i) > 0) return false;
    }
  }
  return true;
}

std::map<std::string, EntityMatch> locate_entities(const NormalizedUtterance& u,
                                                   const std::vector<EntityDef>& defs) {
  std::map<std::string, EntityMatch> out;
  for (const auto& def : defs) {
    if (def.capture_freeform) continue;
    std::optional<EntityMatch> best;
    for (const auto& value : def.values) {
      std::vector<std::string_view> forms{value.value};
      forms.insert(forms.end(), value.synonyms.begin(), value.synonyms.end());
      for (auto form : forms) {
        const auto needle = text::token_texts(text::tokenize(form));
        if (needle.empty()) continue;
        for (std::size_t pos = 0; pos + needle.size() <= u.tokens.size(); ++pos) {
          if (!contains_at(u.tokens, pos, needle)) continue;
          const std::size_t len = needle.size();
          // Longest wins; then earliest; then declaration order.
          if (!best || len > best->end - best->begin ||
              (len == best->end - best->begin && pos < best->begin)) {
            best = EntityMatch{value.value, pos, pos + len};
          }
          break;
        }
      }
    }
    if (best) out.emplace(def.name, std::move(*best));
  }
  return out;
}

Bindings extract_entities(const NormalizedUtterance& u, const std::vector<EntityDef>& defs) {
  Bindings out;
  for (auto& [name, match] : locate_entities(u, defs)) out.emplace(name, match.value);
  return out;
}

std::optional<EntityMatch> capture_freeform(const NormalizedUtterance& u,
                                            const std::vector<text::Token>& phrase,
                                            std::size_t slot_index) {
  constexpr std::size_t kMaxCaptureTokens = 2;
  std::vector<std::string> before;
  for (std::size_t i = slot_index; i > 0 && !phrase[i - 1].slot; --i) {
    before.insert(before.begin(), phrase[i - 1].text);
  }
  std::optional<std::string> after;
  if (slot_index + 1 < phrase.size() && !phrase[slot_index + 1].slot) {
    after = phrase[slot_index + 1].text;
  }

  std::size_t start = 0;
  if (before.empty()) {
    // A leading greeting is never part of a name.
    const std::size_t g = greeting_at(u.tokens, 0);
    if (g < u.tokens.size()) start = g;
  } else {
    bool found = false;
    for (std::size_t pos = 0; pos + before.size() <= u.tokens.size(); ++pos) {
      if (contains_at(u.tokens, pos, before)) {
        start = pos + before.size();
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  std::size_t end = u.tokens.size();
  if (after) {
    auto it = std::find(u.tokens.begin() + static_cast<std::ptrdiff_t>(start), u.tokens.end(),
                        *after);
    end = static_cast<std::size_t>(it - u.tokens.begin());
  }
  if (end <= start || end - start > kMaxCaptureTokens) return std::nullopt;

  std::string value;
  for (std::size_t k = start; k < end; ++k) {
    if (!value.empty()) value.push_back(' ');
    const auto& span = u.spans[k];
    value.append(u.raw, span.begin, span.end - span.begin);
  }
  return EntityMatch{capitalize_words(std::move(value)), start, end};
}

bool ranks_before(const MatchResult& a, const MatchResult& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.context_boosted != b.context_boosted) return a.context_boosted;
  if (a.matched_tokens != b.matched_tokens) return a.matched_tokens > b.matched_tokens;
  if (a.intent_name != b.intent_name) return a.intent_name < b.intent_name;
  return a.pack_id < b.pack_id;
}

std::vector<MatchResult> match_intent(const NormalizedUtterance& u,
                                      const std::vector<std::string>& active_contexts,
                                      const ScenarioPack& pack, const MatchOptions& options) {
  std::vector<MatchResult> out;
  if (u.tokens.empty()) return out;
  const long boost_millis = std::lround(options.context_boost * 1000.0);
  const std::unordered_set<std::string> utterance_set(u.tokens.begin(), u.tokens.end());
  const auto located = locate_entities(u, pack.entities);

  for (const auto& intent : pack.intents) {
    if (intent.fallback) continue;
    bool boosted = false;
    if (!intent.input_contexts.empty()) {
      boosted = std::any_of(intent.input_contexts.begin(), intent.input_contexts.end(),
                            [&](const std::string& c) {
                              return std::find(active_contexts.begin(), active_contexts.end(),
                                               c) != active_contexts.end();
                            });
      if (!boosted) continue;
    }

    std::optional<PhraseScore> best;
    std::set<std::string> slot_entities;
    for (const auto& phrase_text : intent.training_phrases) {
      const auto phrase = text::tokenize_phrase(phrase_text);
      for (const auto& t : phrase) {
        if (t.slot) slot_entities.insert(t.text);
      }
      auto s = score_phrase(u, utterance_set, phrase, pack, located);
      if (!best || better(s, *best)) best = std::move(s);
    }
    if (!best || best->inter == 0) continue;

    MatchResult m;
    m.pack_id = pack.id;
    m.intent_name = intent.name;
    m.context_boosted = boosted;
    m.matched_tokens = best->inter;
    m.score = f1_score(best->inter, best->total, boosted ? boost_millis : 0);
    for (const auto& name : slot_entities) {
      if (auto it = located.find(name); it != located.end()) {
        m.bindings.emplace(name, it->second.value);
      }
    }
    for (auto& [name, value] : best->freeform) m.bindings[name] = value;
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

std::vector<MatchResult> match_intent(const NormalizedUtterance& u,
                                      const std::vector<std::string>& active_contexts,
                                      const std::vector<ScenarioPack>& packs,
                                      const MatchOptions& options) {
  std::vector<MatchResult> out;
  for (const auto& pack : packs) {
    auto part = match_intent(u, active_contexts, pack, options);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

}  // namespace thea::nlu
