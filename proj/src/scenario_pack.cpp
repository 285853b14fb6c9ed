#include "thea/scenario_pack.hpp"

#include <algorithm>

namespace thea {

const Intent* ScenarioPack::find_intent(std::string_view name) const {
  auto it = std::find_if(intents.begin(), intents.end(),
                         [&](const Intent& i) { return i.name == name; });
  return it == intents.end() ? nullptr : &*it;
}

const TreeNode* ScenarioPack::find_node(std::string_view node_id) const {
  auto it = std::find_if(nodes.begin(), nodes.end(),
                         [&](const TreeNode& n) { return n.id == node_id; });
  return it == nodes.end() ? nullptr : &*it;
}

const EntityDef* ScenarioPack::find_entity(std::string_view name) const {
  auto it = std::find_if(entities.begin(), entities.end(),
                         [&](const EntityDef& e) { return e.name == name; });
  return it == entities.end() ? nullptr : &*it;
}

bool ScenarioPack::metadata_flag(std::string_view key) const {
  auto it = metadata.find(std::string(key));
  return it != metadata.end() && it->second == "true";
}

std::vector<std::string> ScenarioPack::context_names() const {
  std::vector<std::string> out;
  for (const auto& intent : intents) {
    for (const auto& ctx : intent.output_contexts) {
      if (std::find(out.begin(), out.end(), ctx.name) == out.end()) {
        out.push_back(ctx.name);
      }
    }
  }
  return out;
}

}  // namespace thea
