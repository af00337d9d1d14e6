// framestore.hpp - storage for raw clip frames. On disk: per-clip directories
// of RLE-compressed .vpi images next to the manifest file; in memory: u8
// frames keyed by clip id, converted to float on access.
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "viprom/core/image.hpp"
#include "viprom/data/manifest.hpp"

namespace viprom::data {

struct FrameStore {
  int h = 0, w = 0;
  // Frames indexed by position within the clip (0..n_raw-1, aligned with
  // raw_frame_indices order).
  std::unordered_map<std::string, std::vector<core::ImageU8>> clips;

  bool has_clip(const std::string& clip_id) const { return clips.count(clip_id) > 0; }
  int frames_in(const std::string& clip_id) const;

  const core::ImageU8& frame_u8(const std::string& clip_id, int pos) const;
  core::FrameImage frame(const ClipEntry& clip, int pos) const;

  void add_clip(const std::string& clip_id, std::vector<core::ImageU8> frames);

  // dir layout: <dir>/manifest.json + <dir>/frames/<sanitized clip_id>/f####.vpi
  void write(const std::string& dir) const;
  static FrameStore read(const std::string& dir, const ClipManifest& manifest);
};

std::string sanitize_clip_id(const std::string& clip_id);

struct Corpus {
  ClipManifest manifest;
  FrameStore store;
};

void save_corpus(const Corpus& corpus, const std::string& dir);
Corpus load_corpus(const std::string& dir);

}  // namespace viprom::data
