// manifest.hpp - clip manifests: narration-anchored 1 s clips at a given fps
// with uniform stride down-sampling. Serialization is canonical and
// byte-stable.
#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace viprom::data {

struct NarrationRecord {
  std::string video_id;
  double timestamp_s = 0.0;
  std::string text;  // retained for provenance only
};

struct ClipEntry {
  std::string clip_id;
  std::string video_id;
  std::vector<int> raw_frame_indices;       // pre-downsampling
  std::vector<int> retained_frame_indices;  // stride subsequence of raw
  std::optional<int> label_hint;            // synthetic corpus ground truth
};

struct ManifestMeta {
  std::int64_t skipped_out_of_bounds = 0;
  std::string generator;  // "annotations" | "synthetic-temporal" | "synthetic-static"
  std::uint64_t seed = 0;
  int n_classes = 0;
  int image_h = 0, image_w = 0;
};

struct ClipManifest {
  int version = 1;
  int fps = 30;
  double clip_duration_s = 1.0;
  int downsample_factor = 10;
  ManifestMeta meta;
  std::vector<ClipEntry> clips;

  int retained_per_clip() const;
  std::int64_t total_retained_frames() const;

  nlohmann::ordered_json to_json() const;
  static ClipManifest from_json(const nlohmann::json& j);
  std::string canonical_text() const;  // byte-stable serialization
  void save(const std::string& path) const;
  static ClipManifest load(const std::string& path);
  std::string fingerprint() const;
};

// One clip per narration spanning [timestamp, timestamp + duration); retained
// frames are the stride-`downsample_factor` subsequence anchored at the first
// raw frame. Narrations whose clip would run past the video end are skipped
// and counted in metadata. Narrations must be timestamp-sorted per video.
ClipManifest build_manifest(const std::vector<NarrationRecord>& narrations,
                            const std::map<std::string, double>& video_durations, int fps,
                            double clip_duration_s, int downsample_factor);

// Annotations file: {"videos":[{"video_id","duration_s","narrations":[{"timestamp_s","text"}]}]}
std::vector<NarrationRecord> load_narrations(const std::string& path,
                                             std::map<std::string, double>& durations_out);

}  // namespace viprom::data
