#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "thea/dialogue.hpp"

namespace thea::service {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 8080;
};

/// Immutable after startup.
struct EngineConfig {
  /// Extra packs loaded after the built-in ones.
  std::optional<std::filesystem::path> packs_dir;
  double fallback_threshold = 0.55;
  int context_lifespan_default = 5;
  double context_boost = 0.1;
  affect::AffectPolicy affect;
  ListenAddress listen_address;
  /// No transcripts are written when unset.
  std::optional<std::filesystem::path> transcript_dir;
  /// Session n gets seed rng_seed + n; random seeds when unset.
  std::optional<std::uint64_t> rng_seed;
  /// Bearer token required on every request when set.
  std::optional<std::string> auth_token;

  dialogue::EngineOptions engine_options() const;
};

/// "host:port"; the port must be in [0, 65535].
ListenAddress parse_listen_address(std::string_view s);

/// JSON object with the EngineConfig field names; missing keys keep their
/// defaults and unknown keys are rejected.
EngineConfig parse_config(std::string_view json_text);
EngineConfig load_config(const std::filesystem::path& path);

/// Checks the invariants and that the paths resolve. Creates transcript_dir
/// when it does not exist yet.
void validate_config(const EngineConfig& cfg);

}  // namespace thea::service
