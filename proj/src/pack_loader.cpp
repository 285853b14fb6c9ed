#include "thea/pack_loader.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "thea/embedded_data.hpp"
#include "thea/pack_format.hpp"
#include "thea/pack_validator.hpp"

namespace thea {

namespace {

ScenarioPack load_one(std::string_view origin, std::string_view document) {
  ScenarioPack pack;
  try {
    pack = parse_pack(document);
  } catch (const PackError& e) {
    throw PackLoadError(std::string(origin) + ": " + e.what());
  }
  for (const auto& d : validate_pack(pack).defects) {
    if (d.severity == Severity::kError) {
      throw PackLoadError(std::string(origin) + ": " + std::string(to_string(d.kind)) + ": " +
                          d.message);
    }
    spdlog::warn("{}: {}: {}", origin, to_string(d.kind), d.message);
  }
  return pack;
}

void check_unique_ids(const std::vector<ScenarioPack>& packs) {
  std::set<std::string> seen;
  for (const auto& p : packs) {
    if (!seen.insert(p.id).second) throw PackLoadError("duplicate pack id " + p.id);
  }
}

}  // namespace

std::vector<ScenarioPack> load_builtin_packs() {
  std::vector<ScenarioPack> out;
  for (const auto& doc : embedded::pack_documents()) out.push_back(load_one(doc.file, doc.text));
  check_unique_ids(out);
  return out;
}

std::vector<ScenarioPack> load_pack_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw PackLoadError("packs directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > kPackExtension.size() &&
        name.ends_with(kPackExtension)) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ScenarioPack> out;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw PackLoadError("cannot read " + f.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    out.push_back(load_one(f.filename().string(), buf.str()));
  }
  if (out.empty()) throw PackLoadError("no *.thea.json packs in " + dir.string());
  check_unique_ids(out);
  return out;
}

}  // namespace thea
