#include "thea/pack_validator.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "thea/text.hpp"

namespace thea {

std::string_view to_string(Severity s) { return s == Severity::kError ? "error" : "warning"; }

std::string_view to_string(DefectKind k) {
  switch (k) {
    case DefectKind::kUnreachableNode: return "unreachable_node";
    case DefectKind::kPhraseOverlap: return "phrase_overlap";
    case DefectKind::kMissingFallback: return "missing_fallback";
    case DefectKind::kPhaseOrder: return "phase_order";
    case DefectKind::kNameGate: return "name_gate";
    case DefectKind::kDirectiveWithoutRationale: return "directive_without_rationale";
  }
  return "?";
}

std::size_t ValidationReport::count(DefectKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      defects.begin(), defects.end(), [&](const Defect& d) { return d.kind == kind; }));
}

bool ValidationReport::overlap_flagged(std::string_view a, std::string_view b) const {
  return std::any_of(defects.begin(), defects.end(), [&](const Defect& d) {
    if (d.kind != DefectKind::kPhraseOverlap || d.subjects.size() != 2) return false;
    return (d.subjects[0] == a && d.subjects[1] == b) ||
           (d.subjects[0] == b && d.subjects[1] == a);
  });
}

namespace {

std::set<std::string> phrase_set(std::string_view phrase) {
  std::set<std::string> out;
  for (auto& t : text::token_texts(text::tokenize_phrase(phrase))) out.insert(std::move(t));
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : a) inter += b.count(t);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

void check_reachability(const ScenarioPack& pack, ValidationReport& report) {
  if (pack.nodes.empty()) return;
  std::set<std::string> reached;
  std::deque<std::string> queue;
  auto visit = [&](const std::string& id) {
    if (reached.insert(id).second) queue.push_back(id);
  };
  visit(pack.nodes.front().id);
  for (const auto& intent : pack.intents) {
    if (intent.next_node) visit(*intent.next_node);
  }
  while (!queue.empty()) {
    const TreeNode* node = pack.find_node(queue.front());
    queue.pop_front();
    if (node && node->on_no_match != kFallbackMarker) visit(node->on_no_match);
  }
  for (const auto& node : pack.nodes) {
    if (!reached.count(node.id)) {
      report.defects.push_back({DefectKind::kUnreachableNode, Severity::kWarning,
                                "node \"" + node.id + "\" is unreachable", {node.id}});
    }
  }
}

void check_phase_order(const ScenarioPack& pack, ValidationReport& report) {
  const bool therapy = pack.metadata_flag(meta::kTherapy);
  for (const auto& node : pack.nodes) {
    if (node.phase && !therapy) {
      report.defects.push_back({DefectKind::kPhaseOrder, Severity::kError,
                                "phase tag on node \"" + node.id + "\" outside a therapy pack",
                                {node.id}});
    }
  }
  if (!therapy) return;

  auto phase_of = [&](const std::optional<std::string>& id) -> std::optional<TherapyPhase> {
    if (!id) return std::nullopt;
    const TreeNode* n = pack.find_node(*id);
    return n ? n->phase : std::nullopt;
  };
  std::set<std::string> prompted;
  for (const auto& node : pack.nodes) {
    for (const auto& name : node.prompt_intents) prompted.insert(name);
  }
  // Entry intents can fire with no phase set, so they may only open the
  // validate phase.
  for (const auto& intent : pack.intents) {
    if (prompted.count(intent.name)) continue;
    auto to = phase_of(intent.next_node);
    if (to && *to != TherapyPhase::kValidate) {
      report.defects.push_back(
          {DefectKind::kPhaseOrder, Severity::kError,
           "entry intent \"" + intent.name + "\" jumps to phase " + std::string(to_string(*to)),
           {intent.name}});
    }
  }
  for (const auto& node : pack.nodes) {
    for (const auto& name : node.prompt_intents) {
      const Intent* intent = pack.find_intent(name);
      if (!intent) continue;
      auto to = phase_of(intent->next_node);
      if (!to) continue;
      const int from_rank = node.phase ? phase_rank(*node.phase) : -1;
      const int step = phase_rank(*to) - from_rank;
      if (step != 0 && step != 1) {
        report.defects.push_back({DefectKind::kPhaseOrder, Severity::kError,
                                  "edge " + node.id + " -> " + *intent->next_node + " via \"" +
                                      name + "\" skips or regresses a therapy phase",
                                  {node.id, *intent->next_node}});
      }
    }
  }
}

}  // namespace

double phrase_jaccard(std::string_view a, std::string_view b) {
  return jaccard(phrase_set(a), phrase_set(b));
}

std::vector<PhraseOverlap> find_phrase_overlaps(const std::vector<const Intent*>& intents) {
  std::vector<std::vector<std::set<std::string>>> sets;
  sets.reserve(intents.size());
  for (const Intent* intent : intents) {
    auto& row = sets.emplace_back();
    for (const auto& p : intent->training_phrases) row.push_back(phrase_set(p));
  }
  std::vector<PhraseOverlap> out;
  for (std::size_t i = 0; i < intents.size(); ++i) {
    for (std::size_t j = i + 1; j < intents.size(); ++j) {
      PhraseOverlap best;
      for (std::size_t pi = 0; pi < sets[i].size(); ++pi) {
        for (std::size_t pj = 0; pj < sets[j].size(); ++pj) {
          const double sim = jaccard(sets[i][pi], sets[j][pj]);
          if (sim > best.similarity) {
            best = {intents[i]->name, intents[i]->training_phrases[pi], intents[j]->name,
                    intents[j]->training_phrases[pj], sim};
          }
        }
      }
      if (best.similarity >= kOverlapThreshold) out.push_back(std::move(best));
    }
  }
  return out;
}

ValidationReport validate_pack(const ScenarioPack& pack) {
  ValidationReport report;

  check_reachability(pack, report);

  std::vector<const Intent*> intents;
  for (const auto& intent : pack.intents) intents.push_back(&intent);
  for (auto& o : find_phrase_overlaps(intents)) {
    report.defects.push_back({DefectKind::kPhraseOverlap, Severity::kWarning,
                              "\"" + o.phrase_a + "\" (" + o.intent_a + ") overlaps \"" +
                                  o.phrase_b + "\" (" + o.intent_b + ")",
                              {o.intent_a, o.intent_b}});
  }

  const bool has_fallback_intent = std::any_of(pack.intents.begin(), pack.intents.end(),
                                                [](const Intent& i) { return i.fallback; });
  auto fb = pack.metadata.find(std::string(meta::kFallback));
  if (!has_fallback_intent && (fb == pack.metadata.end() || fb->second != "global")) {
    report.defects.push_back({DefectKind::kMissingFallback, Severity::kError,
                              "no fallback intent and metadata.fallback is not \"global\"",
                              {pack.id}});
  }

  check_phase_order(pack, report);

  if (pack.metadata_flag(meta::kNameGated) || pack.id == "wakeup") {
    for (const auto& intent : pack.intents) {
      if (!intent.requires_user_name) {
        report.defects.push_back({DefectKind::kNameGate, Severity::kError,
                                  "intent \"" + intent.name + "\" is not name-gated",
                                  {intent.name}});
      }
    }
  }

  for (const auto& intent : pack.intents) {
    for (const auto& c : intent.responses) {
      if (c.decision_class == DecisionClass::kDirective && c.rationale.empty()) {
        report.defects.push_back({DefectKind::kDirectiveWithoutRationale, Severity::kWarning,
                                  "directive response of \"" + intent.name +
                                      "\" lacks a crew-benefit rationale",
                                  {intent.name}});
      }
    }
  }
  return report;
}

}  // namespace thea
