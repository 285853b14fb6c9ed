#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "thea/scenario_pack.hpp"

namespace thea {

class PackLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The seven packs compiled into the binary, in load order. A pack that fails
/// to parse or carries an error-severity defect is fatal (PackLoadError).
std::vector<ScenarioPack> load_builtin_packs();

/// Every `*.thea.json` in `dir`, sorted by file name, with the same checks.
std::vector<ScenarioPack> load_pack_dir(const std::filesystem::path& dir);

}  // namespace thea
