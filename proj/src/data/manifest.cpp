#include "viprom/data/manifest.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "viprom/core/hash.hpp"

namespace viprom::data {

int ClipManifest::retained_per_clip() const {
  return static_cast<int>(std::floor(fps * clip_duration_s / downsample_factor + 1e-9));
}

std::int64_t ClipManifest::total_retained_frames() const {
  std::int64_t n = 0;
  for (const auto& c : clips) n += static_cast<std::int64_t>(c.retained_frame_indices.size());
  return n;
}

nlohmann::ordered_json ClipManifest::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["fps"] = fps;
  j["clip_duration_s"] = clip_duration_s;
  j["downsample_factor"] = downsample_factor;
  j["metadata"] = {{"skipped_out_of_bounds", meta.skipped_out_of_bounds},
                   {"generator", meta.generator},
                   {"seed", meta.seed},
                   {"n_classes", meta.n_classes},
                   {"image_hw", {meta.image_h, meta.image_w}}};
  auto clips_j = nlohmann::ordered_json::array();
  for (const auto& c : clips) {
    nlohmann::ordered_json cj;
    cj["clip_id"] = c.clip_id;
    cj["video_id"] = c.video_id;
    cj["raw_frame_indices"] = c.raw_frame_indices;
    cj["retained_frame_indices"] = c.retained_frame_indices;
    if (c.label_hint)
      cj["label_hint"] = *c.label_hint;
    else
      cj["label_hint"] = nullptr;
    clips_j.push_back(std::move(cj));
  }
  j["clips"] = std::move(clips_j);
  return j;
}

ClipManifest ClipManifest::from_json(const nlohmann::json& j) {
  ClipManifest m;
  m.version = j.at("version").get<int>();
  m.fps = j.at("fps").get<int>();
  m.clip_duration_s = j.at("clip_duration_s").get<double>();
  m.downsample_factor = j.at("downsample_factor").get<int>();
  const auto& meta = j.at("metadata");
  m.meta.skipped_out_of_bounds = meta.at("skipped_out_of_bounds").get<std::int64_t>();
  m.meta.generator = meta.at("generator").get<std::string>();
  m.meta.seed = meta.at("seed").get<std::uint64_t>();
  m.meta.n_classes = meta.at("n_classes").get<int>();
  m.meta.image_h = meta.at("image_hw").at(0).get<int>();
  m.meta.image_w = meta.at("image_hw").at(1).get<int>();
  for (const auto& cj : j.at("clips")) {
    ClipEntry c;
    c.clip_id = cj.at("clip_id").get<std::string>();
    c.video_id = cj.at("video_id").get<std::string>();
    c.raw_frame_indices = cj.at("raw_frame_indices").get<std::vector<int>>();
    c.retained_frame_indices = cj.at("retained_frame_indices").get<std::vector<int>>();
    if (!cj.at("label_hint").is_null()) c.label_hint = cj.at("label_hint").get<int>();
    m.clips.push_back(std::move(c));
  }
  return m;
}

std::string ClipManifest::canonical_text() const { return to_json().dump(); }

void ClipManifest::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("manifest: cannot open for write: " + path);
  f << canonical_text();
}

ClipManifest ClipManifest::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("manifest: cannot open: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  return from_json(j);
}

std::string ClipManifest::fingerprint() const {
  return core::content_fingerprint(canonical_text());
}

ClipManifest build_manifest(const std::vector<NarrationRecord>& narrations,
                            const std::map<std::string, double>& video_durations, int fps,
                            double clip_duration_s, int downsample_factor) {
  if (fps <= 0) throw std::invalid_argument("build_manifest: fps must be positive");
  if (downsample_factor <= 0)
    throw std::invalid_argument("build_manifest: downsample_factor must be positive");
  if (clip_duration_s <= 0)
    throw std::invalid_argument("build_manifest: clip_duration_s must be positive");

  // Timestamp ordering per video is a precondition.
  std::map<std::string, double> last_ts;
  for (const auto& n : narrations) {
    auto it = last_ts.find(n.video_id);
    if (it != last_ts.end() && n.timestamp_s < it->second)
      throw std::invalid_argument("build_manifest: narrations not timestamp-sorted for video " +
                                  n.video_id);
    last_ts[n.video_id] = n.timestamp_s;
  }

  ClipManifest m;
  m.fps = fps;
  m.clip_duration_s = clip_duration_s;
  m.downsample_factor = downsample_factor;
  m.meta.generator = "annotations";

  int n_raw = static_cast<int>(std::floor(fps * clip_duration_s + 1e-9));
  int n_keep = static_cast<int>(std::floor(fps * clip_duration_s / downsample_factor + 1e-9));

  std::map<std::string, int> per_video_idx;
  for (const auto& n : narrations) {
    auto dit = video_durations.find(n.video_id);
    if (dit != video_durations.end() && n.timestamp_s + clip_duration_s > dit->second + 1e-9) {
      ++m.meta.skipped_out_of_bounds;
      continue;
    }
    int idx = per_video_idx[n.video_id]++;
    ClipEntry c;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d", idx);
    c.clip_id = n.video_id + ":" + buf;
    c.video_id = n.video_id;
    int start = static_cast<int>(std::floor(n.timestamp_s * fps + 1e-9));
    c.raw_frame_indices.reserve(static_cast<std::size_t>(n_raw));
    for (int i = 0; i < n_raw; ++i) c.raw_frame_indices.push_back(start + i);
    c.retained_frame_indices.reserve(static_cast<std::size_t>(n_keep));
    for (int i = 0; i < n_keep; ++i)
      c.retained_frame_indices.push_back(start + i * downsample_factor);
    m.clips.push_back(std::move(c));
  }
  return m;
}

std::vector<NarrationRecord> load_narrations(const std::string& path,
                                             std::map<std::string, double>& durations_out) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("annotations: cannot open: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  std::vector<NarrationRecord> out;
  for (const auto& vj : j.at("videos")) {
    std::string vid = vj.at("video_id").get<std::string>();
    durations_out[vid] = vj.at("duration_s").get<double>();
    for (const auto& nj : vj.at("narrations")) {
      NarrationRecord r;
      r.video_id = vid;
      r.timestamp_s = nj.at("timestamp_s").get<double>();
      if (nj.contains("text")) r.text = nj.at("text").get<std::string>();
      if (r.timestamp_s < 0) throw std::runtime_error("annotations: negative timestamp");
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace viprom::data
