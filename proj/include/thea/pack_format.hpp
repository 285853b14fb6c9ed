#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "thea/scenario_pack.hpp"

namespace thea {

/// Scenario-pack files use this extension.
inline constexpr std::string_view kPackExtension = ".thea.json";

enum class PackErrorKind {
  kSyntax,             // not JSON / not UTF-8
  kUnknownField,       // key outside the fixed schema
  kDanglingReference,  // node, intent or entity that does not exist
  kDuplicateIntent,    // intent name repeated within the pack
  kSchema,             // wrong type, missing key or violated field invariant
};

std::string_view to_string(PackErrorKind kind);

class PackError : public std::runtime_error {
 public:
  PackError(PackErrorKind kind, std::string message, std::string subject = {},
            std::optional<std::size_t> position = std::nullopt);

  PackErrorKind kind() const { return kind_; }
  /// The offending name or JSON path (e.g. the missing node id).
  const std::string& subject() const { return subject_; }
  /// Zero-based byte offset of the offending byte, for syntax errors.
  std::optional<std::size_t> position() const { return position_; }

 private:
  PackErrorKind kind_;
  std::string subject_;
  std::optional<std::size_t> position_;
};

/// Parses and links a scenario-pack document. Throws PackError; never repairs.
ScenarioPack parse_pack(std::string_view document);

/// Canonical JSON text for a pack; parse_pack(serialize_pack(p)) == p.
std::string serialize_pack(const ScenarioPack& pack);

}  // namespace thea
