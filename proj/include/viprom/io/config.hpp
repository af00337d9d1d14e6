// config.hpp - run-config conventions: strict key validation, canonical
// resolved-config snapshots with content fingerprints, seed fanout discipline.
#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace viprom::io {

// Rejects unknown keys; error names the offending key and context.
void require_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                  const std::string& context);

// Writes <out_dir>/config.resolved.json (canonical form) and
// <out_dir>/config.fingerprint; returns the fingerprint.
std::string snapshot_config(const nlohmann::ordered_json& resolved, const std::string& out_dir);

// data_root resolution: explicit flag > VIPROM_DATA_ROOT env > cwd.
std::string resolve_data_root(const std::string& flag_value);

}  // namespace viprom::io
