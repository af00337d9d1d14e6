#include "viprom/io/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "viprom/core/hash.hpp"

namespace viprom::io {

void require_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                  const std::string& context) {
  if (!obj.is_object()) throw std::invalid_argument(context + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument(context + ": unknown key '" + key + "'");
  }
}

std::string snapshot_config(const nlohmann::ordered_json& resolved, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::string canonical = resolved.dump(2);
  std::string fp = core::content_fingerprint(canonical);
  {
    std::ofstream f(fs::path(out_dir) / "config.resolved.json", std::ios::binary);
    if (!f) throw std::runtime_error("snapshot_config: cannot write to " + out_dir);
    f << canonical << "\n";
  }
  {
    std::ofstream f(fs::path(out_dir) / "config.fingerprint", std::ios::binary);
    f << fp << "\n";
  }
  return fp;
}

std::string resolve_data_root(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("VIPROM_DATA_ROOT"); env && *env) return env;
  return ".";
}

}  // namespace viprom::io
