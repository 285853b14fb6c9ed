#include "thea/pack_format.hpp"

#include <algorithm>
#include <initializer_list>
#include <set>

#include "json.hpp"

#include "thea/text.hpp"

namespace thea {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(PackErrorKind kind) {
  switch (kind) {
    case PackErrorKind::kSyntax: return "syntax";
    case PackErrorKind::kUnknownField: return "unknown_field";
    case PackErrorKind::kDanglingReference: return "dangling_reference";
    case PackErrorKind::kDuplicateIntent: return "duplicate_intent";
    case PackErrorKind::kSchema: return "schema";
  }
  return "?";
}

PackError::PackError(PackErrorKind kind, std::string message, std::string subject,
                     std::optional<std::size_t> position)
    : std::runtime_error(std::move(message)),
      kind_(kind),
      subject_(std::move(subject)),
      position_(position) {}

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw PackError(PackErrorKind::kSchema, (path.empty() ? std::string("pack") : path) + ": " + what, path);
}

[[noreturn]] void dangling(const std::string& path, const std::string& name,
                           std::string_view what) {
  throw PackError(PackErrorKind::kDanglingReference,
                  path + ": unknown " + std::string(what) + " \"" + name + "\"", name);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed,
                std::initializer_list<std::string_view> required) {
  if (!obj.is_object()) schema_error(path, "expected object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      const std::string where = path.empty() ? key : path + "." + key;
      throw PackError(PackErrorKind::kUnknownField, "unknown field \"" + where + "\"", where);
    }
  }
  for (auto key : required) {
    if (!obj.contains(key)) schema_error(path, "missing required field \"" + std::string(key) + "\"");
  }
}

std::string get_string(const json& obj, std::string_view key, const std::string& path,
                       bool nonempty = true) {
  const auto& v = obj.at(key);
  if (!v.is_string()) schema_error(path + "." + std::string(key), "expected string");
  auto s = v.get<std::string>();
  if (nonempty && s.empty()) schema_error(path + "." + std::string(key), "must be nonempty");
  return s;
}

bool get_bool(const json& obj, std::string_view key, const std::string& path) {
  if (!obj.contains(key)) return false;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) schema_error(path + "." + std::string(key), "expected boolean");
  return v.get<bool>();
}

double get_unit(const json& obj, std::string_view key, const std::string& path) {
  if (!obj.contains(key)) return 0.0;
  const auto& v = obj.at(key);
  const std::string where = path + "." + std::string(key);
  if (!v.is_number()) schema_error(where, "expected number");
  const double d = v.get<double>();
  if (!(d >= 0.0 && d <= 1.0)) schema_error(where, "must be in [0,1]");
  return d;
}

std::vector<std::string> get_string_list(const json& obj, std::string_view key,
                                         const std::string& path) {
  std::vector<std::string> out;
  if (!obj.contains(key)) return out;
  const auto& v = obj.at(key);
  const std::string where = path + "." + std::string(key);
  if (!v.is_array()) schema_error(where, "expected array");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string() || v[i].get_ref<const std::string&>().empty()) {
      schema_error(where + "[" + std::to_string(i) + "]", "expected nonempty string");
    }
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

const json& get_array(const json& obj, std::string_view key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_array()) schema_error(path + "." + std::string(key), "expected array");
  return v;
}

ResponseCandidate parse_candidate(const json& j, const std::string& path) {
  check_keys(j, path,
             {"text", "traits", "decision_class", "crew_benefit", "self_benefit",
              "emotion_affinity", "condition", "rationale"},
             {"text", "traits", "decision_class"});
  ResponseCandidate c;
  c.text = get_string(j, "text", path);
  for (const auto& name : get_string_list(j, "traits", path)) {
    auto trait = parse_trait(name);
    if (!trait) schema_error(path + ".traits", "unknown trait \"" + name + "\"");
    if (std::find(c.traits.begin(), c.traits.end(), *trait) != c.traits.end()) {
      schema_error(path + ".traits", "duplicate trait \"" + name + "\"");
    }
    c.traits.push_back(*trait);
  }
  if (c.traits.empty()) schema_error(path + ".traits", "must be nonempty");
  auto dc = parse_decision_class(get_string(j, "decision_class", path));
  if (!dc) schema_error(path + ".decision_class", "expected informative|supportive|directive");
  c.decision_class = *dc;
  c.crew_benefit = get_unit(j, "crew_benefit", path);
  c.self_benefit = get_unit(j, "self_benefit", path);
  if (j.contains("emotion_affinity")) {
    auto e = parse_emotion_label(get_string(j, "emotion_affinity", path));
    if (!e) schema_error(path + ".emotion_affinity", "unknown emotion label");
    c.emotion_affinity = *e;
  }
  if (j.contains("condition")) {
    const auto& cond = j.at("condition");
    if (!cond.is_object()) schema_error(path + ".condition", "expected object");
    for (const auto& [entity, value] : cond.items()) {
      if (!value.is_string()) schema_error(path + ".condition." + entity, "expected string");
      c.condition.emplace(entity, value.get<std::string>());
    }
  }
  if (j.contains("rationale")) c.rationale = get_string(j, "rationale", path);
  return c;
}

Intent parse_intent(const json& j, const std::string& path) {
  check_keys(j, path,
             {"name", "training_phrases", "input_contexts", "output_contexts", "responses",
              "next_node", "requires_user_name", "fallback", "identity", "trigger"},
             {"name", "training_phrases", "responses"});
  Intent intent;
  intent.name = get_string(j, "name", path);
  intent.training_phrases = get_string_list(j, "training_phrases", path);
  if (intent.training_phrases.empty()) {
    schema_error(path + ".training_phrases", "at least one training phrase required");
  }
  for (std::size_t i = 0; i < intent.training_phrases.size(); ++i) {
    if (text::tokenize_phrase(intent.training_phrases[i]).empty()) {
      schema_error(path + ".training_phrases[" + std::to_string(i) + "]",
                   "empty after normalization");
    }
  }
  intent.input_contexts = get_string_list(j, "input_contexts", path);
  if (j.contains("output_contexts")) {
    const auto& arr = get_array(j, "output_contexts", path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = path + ".output_contexts[" + std::to_string(i) + "]";
      check_keys(arr[i], p, {"name", "lifespan"}, {"name"});
      OutputContext ctx;
      ctx.name = get_string(arr[i], "name", p);
      if (arr[i].contains("lifespan")) {
        const auto& l = arr[i].at("lifespan");
        if (!l.is_number_integer() || l.get<long long>() < 1 || l.get<long long>() > 1000) {
          schema_error(p + ".lifespan", "lifespan must be an integer in [1,1000]");
        }
        ctx.lifespan = static_cast<int>(l.get<long long>());
      }
      intent.output_contexts.push_back(std::move(ctx));
    }
  }
  const auto& responses = get_array(j, "responses", path);
  for (std::size_t i = 0; i < responses.size(); ++i) {
    intent.responses.push_back(
        parse_candidate(responses[i], path + ".responses[" + std::to_string(i) + "]"));
  }
  if (intent.responses.empty()) schema_error(path + ".responses", "at least one response required");
  if (j.contains("next_node") && !j.at("next_node").is_null()) {
    intent.next_node = get_string(j, "next_node", path);
  }
  intent.requires_user_name = get_bool(j, "requires_user_name", path);
  intent.fallback = get_bool(j, "fallback", path);
  intent.identity = get_bool(j, "identity", path);
  if (j.contains("trigger")) {
    auto trig = get_string(j, "trigger", path);
    if (trig != kStrongInsultTrigger) schema_error(path + ".trigger", "unsupported trigger");
    intent.trigger = trig;
  }
  return intent;
}

EntityDef parse_entity(const json& j, const std::string& path) {
  check_keys(j, path, {"name", "values", "capture_freeform"}, {"name"});
  EntityDef def;
  def.name = get_string(j, "name", path);
  def.capture_freeform = get_bool(j, "capture_freeform", path);
  if (j.contains("values")) {
    const auto& arr = get_array(j, "values", path);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = path + ".values[" + std::to_string(i) + "]";
      check_keys(arr[i], p, {"value", "synonyms"}, {"value"});
      EntityValue v;
      v.value = get_string(arr[i], "value", p);
      if (text::tokenize(v.value).empty()) schema_error(p + ".value", "empty after normalization");
      v.synonyms = get_string_list(arr[i], "synonyms", p);
      if (!seen.insert(v.value).second) {
        schema_error(p + ".value", "duplicate canonical value \"" + v.value + "\"");
      }
      def.values.push_back(std::move(v));
    }
  }
  if (def.values.empty() && !def.capture_freeform) {
    schema_error(path + ".values", "values required unless capture_freeform");
  }
  return def;
}

TreeNode parse_node(const json& j, const std::string& path) {
  check_keys(j, path, {"id", "prompt_intents", "on_no_match", "phase"}, {"id", "prompt_intents"});
  TreeNode node;
  node.id = get_string(j, "id", path);
  if (node.id == kFallbackMarker) schema_error(path + ".id", "\"fallback\" is reserved");
  node.prompt_intents = get_string_list(j, "prompt_intents", path);
  if (node.prompt_intents.empty()) schema_error(path + ".prompt_intents", "must be nonempty");
  if (j.contains("on_no_match")) node.on_no_match = get_string(j, "on_no_match", path);
  if (j.contains("phase") && !j.at("phase").is_null()) {
    auto phase = parse_therapy_phase(get_string(j, "phase", path));
    if (!phase) schema_error(path + ".phase", "expected validate|reflect|reassure");
    node.phase = *phase;
  }
  return node;
}

void link(const ScenarioPack& pack) {
  std::set<std::string> names;
  for (const auto& intent : pack.intents) {
    if (!names.insert(intent.name).second) {
      throw PackError(PackErrorKind::kDuplicateIntent,
                      "duplicate intent name \"" + intent.name + "\"", intent.name);
    }
  }
  std::set<std::string> node_ids;
  for (const auto& node : pack.nodes) {
    if (!node_ids.insert(node.id).second) {
      schema_error("nodes", "duplicate node id \"" + node.id + "\"");
    }
  }
  std::set<std::string> entity_names;
  for (const auto& e : pack.entities) {
    if (!entity_names.insert(e.name).second) {
      schema_error("entities", "duplicate entity name \"" + e.name + "\"");
    }
  }
  for (const auto& intent : pack.intents) {
    const std::string path = "intents." + intent.name;
    if (intent.next_node && !node_ids.count(*intent.next_node)) {
      dangling(path + ".next_node", *intent.next_node, "node");
    }
    for (const auto& phrase : intent.training_phrases) {
      for (const auto& tok : text::tokenize_phrase(phrase)) {
        if (tok.slot && !entity_names.count(tok.text)) {
          dangling(path + ".training_phrases", tok.text, "entity");
        }
      }
    }
    for (const auto& cand : intent.responses) {
      for (const auto& [entity, value] : cand.condition) {
        const EntityDef* def = pack.find_entity(entity);
        if (!def) dangling(path + ".responses.condition", entity, "entity");
        const bool known = std::any_of(def->values.begin(), def->values.end(),
                                       [&](const EntityValue& v) { return v.value == value; });
        if (!known) dangling(path + ".responses.condition." + entity, value, "entity value");
      }
    }
  }
  for (const auto& node : pack.nodes) {
    const std::string path = "nodes." + node.id;
    for (const auto& name : node.prompt_intents) {
      if (!names.count(name)) dangling(path + ".prompt_intents", name, "intent");
    }
    if (node.on_no_match != kFallbackMarker && !node_ids.count(node.on_no_match)) {
      dangling(path + ".on_no_match", node.on_no_match, "node");
    }
  }
}

ordered_json candidate_to_json(const ResponseCandidate& c) {
  ordered_json j;
  j["text"] = c.text;
  ordered_json traits = ordered_json::array();
  for (auto t : c.traits) traits.push_back(std::string(to_string(t)));
  j["traits"] = std::move(traits);
  j["decision_class"] = std::string(to_string(c.decision_class));
  j["crew_benefit"] = c.crew_benefit;
  j["self_benefit"] = c.self_benefit;
  if (c.emotion_affinity) j["emotion_affinity"] = std::string(to_string(*c.emotion_affinity));
  if (!c.condition.empty()) {
    ordered_json cond = ordered_json::object();
    for (const auto& [k, v] : c.condition) cond[k] = v;
    j["condition"] = std::move(cond);
  }
  if (!c.rationale.empty()) j["rationale"] = c.rationale;
  return j;
}

}  // namespace

ScenarioPack parse_pack(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    // nlohmann counts bytes from 1.
    throw PackError(PackErrorKind::kSyntax, std::string("syntax error: ") + e.what(), {},
                    e.byte > 0 ? e.byte - 1 : 0);
  } catch (const json::exception& e) {
    throw PackError(PackErrorKind::kSyntax, std::string("syntax error: ") + e.what());
  }

  try {
    check_keys(root, "", {"id", "title", "intents", "entities", "nodes", "metadata"},
               {"id", "title", "intents", "entities", "nodes", "metadata"});
    ScenarioPack pack;
    pack.id = get_string(root, "id", "pack");
    pack.title = get_string(root, "title", "pack", false);
    const auto& intents = get_array(root, "intents", "pack");
    for (std::size_t i = 0; i < intents.size(); ++i) {
      pack.intents.push_back(parse_intent(intents[i], "intents[" + std::to_string(i) + "]"));
    }
    const auto& entities = get_array(root, "entities", "pack");
    for (std::size_t i = 0; i < entities.size(); ++i) {
      pack.entities.push_back(parse_entity(entities[i], "entities[" + std::to_string(i) + "]"));
    }
    const auto& nodes = get_array(root, "nodes", "pack");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      pack.nodes.push_back(parse_node(nodes[i], "nodes[" + std::to_string(i) + "]"));
    }
    const auto& metadata = root.at("metadata");
    if (!metadata.is_object()) schema_error("metadata", "expected object");
    for (const auto& [key, value] : metadata.items()) {
      if (!value.is_string()) schema_error("metadata." + key, "expected string");
      pack.metadata.emplace(key, value.get<std::string>());
    }
    link(pack);
    return pack;
  } catch (const json::exception& e) {
    // Type errors from nlohmann accessors that slipped past explicit checks.
    throw PackError(PackErrorKind::kSchema, std::string("schema error: ") + e.what());
  }
}

std::string serialize_pack(const ScenarioPack& pack) {
  ordered_json root;
  root["id"] = pack.id;
  root["title"] = pack.title;
  ordered_json intents = ordered_json::array();
  for (const auto& intent : pack.intents) {
    ordered_json j;
    j["name"] = intent.name;
    j["training_phrases"] = intent.training_phrases;
    j["input_contexts"] = intent.input_contexts;
    ordered_json outs = ordered_json::array();
    for (const auto& ctx : intent.output_contexts) {
      ordered_json o;
      o["name"] = ctx.name;
      if (ctx.lifespan) o["lifespan"] = *ctx.lifespan;
      outs.push_back(std::move(o));
    }
    j["output_contexts"] = std::move(outs);
    ordered_json responses = ordered_json::array();
    for (const auto& c : intent.responses) responses.push_back(candidate_to_json(c));
    j["responses"] = std::move(responses);
    j["next_node"] = intent.next_node ? ordered_json(*intent.next_node) : ordered_json(nullptr);
    j["requires_user_name"] = intent.requires_user_name;
    j["fallback"] = intent.fallback;
    j["identity"] = intent.identity;
    if (intent.trigger) j["trigger"] = *intent.trigger;
    intents.push_back(std::move(j));
  }
  root["intents"] = std::move(intents);
  ordered_json entities = ordered_json::array();
  for (const auto& e : pack.entities) {
    ordered_json j;
    j["name"] = e.name;
    ordered_json values = ordered_json::array();
    for (const auto& v : e.values) {
      ordered_json vj;
      vj["value"] = v.value;
      vj["synonyms"] = v.synonyms;
      values.push_back(std::move(vj));
    }
    j["values"] = std::move(values);
    j["capture_freeform"] = e.capture_freeform;
    entities.push_back(std::move(j));
  }
  root["entities"] = std::move(entities);
  ordered_json nodes = ordered_json::array();
  for (const auto& n : pack.nodes) {
    ordered_json j;
    j["id"] = n.id;
    j["prompt_intents"] = n.prompt_intents;
    j["on_no_match"] = n.on_no_match;
    j["phase"] = n.phase ? ordered_json(std::string(to_string(*n.phase))) : ordered_json(nullptr);
    nodes.push_back(std::move(j));
  }
  root["nodes"] = std::move(nodes);
  ordered_json metadata = ordered_json::object();
  for (const auto& [k, v] : pack.metadata) metadata[k] = v;
  root["metadata"] = std::move(metadata);
  return root.dump(2) + "\n";
}

}  // namespace thea
