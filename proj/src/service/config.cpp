#include "thea/service/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace thea::service {

using nlohmann::json;

dialogue::EngineOptions EngineConfig::engine_options() const {
  dialogue::EngineOptions o;
  o.fallback_threshold = fallback_threshold;
  o.context_lifespan_default = context_lifespan_default;
  o.context_boost = context_boost;
  o.affect = affect;
  return o;
}

ListenAddress parse_listen_address(std::string_view s) {
  const auto colon = s.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == s.size()) {
    throw ConfigError("listen_address: expected host:port, got \"" + std::string(s) + "\"");
  }
  ListenAddress out;
  out.host = std::string(s.substr(0, colon));
  const auto port = s.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), out.port);
  if (ec != std::errc() || ptr != port.data() + port.size() || out.port < 0 || out.port > 65535) {
    throw ConfigError("listen_address: bad port \"" + std::string(port) + "\"");
  }
  return out;
}

namespace {

template <typename T>
T get_as(const json& j, std::string_view key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(key) + ": wrong type");
  }
}

void read_affect(const json& j, affect::AffectPolicy& p) {
  if (!j.is_object()) throw ConfigError("affect: expected an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "sad_threshold") {
      p.sad_threshold = get_as<double>(v, "affect.sad_threshold");
    } else if (key == "positive_threshold") {
      p.positive_threshold = get_as<double>(v, "affect.positive_threshold");
    } else if (key == "stutter_threshold") {
      p.stutter_threshold = get_as<int>(v, "affect.stutter_threshold");
    } else {
      throw ConfigError("affect: unknown key \"" + key + "\"");
    }
  }
}

}  // namespace

EngineConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  EngineConfig cfg;
  for (const auto& [key, v] : j.items()) {
    if (key == "packs_dir") {
      if (!v.is_null()) cfg.packs_dir = get_as<std::string>(v, key);
    } else if (key == "fallback_threshold") {
      cfg.fallback_threshold = get_as<double>(v, key);
    } else if (key == "context_lifespan_default") {
      if (!v.is_number_integer()) throw ConfigError(key + ": expected an integer");
      cfg.context_lifespan_default = v.get<int>();
    } else if (key == "context_boost") {
      cfg.context_boost = get_as<double>(v, key);
    } else if (key == "affect") {
      read_affect(v, cfg.affect);
    } else if (key == "listen_address") {
      cfg.listen_address = parse_listen_address(get_as<std::string>(v, key));
    } else if (key == "transcript_dir") {
      if (!v.is_null()) cfg.transcript_dir = get_as<std::string>(v, key);
    } else if (key == "rng_seed") {
      if (!v.is_null()) {
        if (!v.is_number_unsigned()) throw ConfigError("rng_seed: expected a nonnegative integer");
        cfg.rng_seed = v.get<std::uint64_t>();
      }
    } else if (key == "auth_token") {
      if (!v.is_null()) cfg.auth_token = get_as<std::string>(v, key);
    } else {
      throw ConfigError("config: unknown key \"" + key + "\"");
    }
  }
  validate_config(cfg);
  return cfg;
}

EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate_config(const EngineConfig& cfg) {
  if (!(cfg.fallback_threshold > 0.0 && cfg.fallback_threshold < 1.0)) {
    throw ConfigError("fallback_threshold: must be in (0,1)");
  }
  if (cfg.context_lifespan_default < 1) {
    throw ConfigError("context_lifespan_default: must be >= 1");
  }
  if (!(cfg.context_boost >= 0.0 && cfg.context_boost < 1.0)) {
    throw ConfigError("context_boost: must be in [0,1)");
  }
  if (cfg.affect.stutter_threshold < 2) throw ConfigError("affect.stutter_threshold: must be >= 2");
  if (!(cfg.affect.sad_threshold < 0.0 && cfg.affect.positive_threshold > 0.0)) {
    throw ConfigError("affect: sad_threshold must be < 0 < positive_threshold");
  }
  if (cfg.auth_token && cfg.auth_token->empty()) throw ConfigError("auth_token: must be nonempty");
  std::error_code ec;
  if (cfg.packs_dir && !std::filesystem::is_directory(*cfg.packs_dir, ec)) {
    throw ConfigError("packs_dir: not a directory: " + cfg.packs_dir->string());
  }
  if (cfg.transcript_dir) {
    std::filesystem::create_directories(*cfg.transcript_dir, ec);
    if (!std::filesystem::is_directory(*cfg.transcript_dir, ec)) {
      throw ConfigError("transcript_dir: cannot create " + cfg.transcript_dir->string());
    }
  }
}

}  // namespace thea::service
