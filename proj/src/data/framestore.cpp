#include "viprom/data/framestore.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace fs = std::filesystem;

namespace viprom::data {

std::string sanitize_clip_id(const std::string& clip_id) {
  std::string out = clip_id;
  for (auto& c : out)
    if (c == ':' || c == '/' || c == '\\') c = '_';
  return out;
}

int FrameStore::frames_in(const std::string& clip_id) const {
  auto it = clips.find(clip_id);
  if (it == clips.end()) throw std::out_of_range("framestore: unknown clip " + clip_id);
  return static_cast<int>(it->second.size());
}

const core::ImageU8& FrameStore::frame_u8(const std::string& clip_id, int pos) const {
  auto it = clips.find(clip_id);
  if (it == clips.end()) throw std::out_of_range("framestore: unknown clip " + clip_id);
  if (pos < 0 || pos >= static_cast<int>(it->second.size()))
    throw std::out_of_range("framestore: frame " + std::to_string(pos) + " out of range for clip " +
                            clip_id);
  return it->second[static_cast<std::size_t>(pos)];
}

core::FrameImage FrameStore::frame(const ClipEntry& clip, int pos) const {
  const auto& u8 = frame_u8(clip.clip_id, pos);
  int frame_index = pos < static_cast<int>(clip.raw_frame_indices.size())
                        ? clip.raw_frame_indices[static_cast<std::size_t>(pos)]
                        : pos;
  return core::to_float(u8, clip.clip_id, frame_index);
}

void FrameStore::add_clip(const std::string& clip_id, std::vector<core::ImageU8> frames) {
  if (!frames.empty()) {
    if (h == 0) {
      h = frames[0].h;
      w = frames[0].w;
    }
    for (const auto& f : frames)
      if (f.h != h || f.w != w) throw std::invalid_argument("framestore: mixed frame shapes");
  }
  clips[clip_id] = std::move(frames);
}

void FrameStore::write(const std::string& dir) const {
  fs::create_directories(fs::path(dir) / "frames");
  // Deterministic order for reproducible directory contents.
  std::vector<std::string> ids;
  ids.reserve(clips.size());
  for (const auto& [id, _] : clips) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) {
    fs::path cdir = fs::path(dir) / "frames" / sanitize_clip_id(id);
    fs::create_directories(cdir);
    const auto& frames = clips.at(id);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "f%04zu.vpi", i);
      core::write_vpi((cdir / buf).string(), frames[i]);
    }
  }
}

FrameStore FrameStore::read(const std::string& dir, const ClipManifest& manifest) {
  FrameStore st;
  for (const auto& clip : manifest.clips) {
    fs::path cdir = fs::path(dir) / "frames" / sanitize_clip_id(clip.clip_id);
    std::vector<core::ImageU8> frames;
    frames.reserve(clip.raw_frame_indices.size());
    for (std::size_t i = 0; i < clip.raw_frame_indices.size(); ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "f%04zu.vpi", i);
      fs::path p = cdir / buf;
      if (!fs::exists(p))
        throw std::runtime_error("framestore: missing frame file " + p.string());
      frames.push_back(core::read_vpi(p.string()));
    }
    st.add_clip(clip.clip_id, std::move(frames));
  }
  return st;
}

void save_corpus(const Corpus& corpus, const std::string& dir) {
  fs::create_directories(dir);
  corpus.manifest.save((fs::path(dir) / "manifest.json").string());
  corpus.store.write(dir);
}

Corpus load_corpus(const std::string& dir) {
  Corpus c;
  c.manifest = ClipManifest::load((fs::path(dir) / "manifest.json").string());
  c.store = FrameStore::read(dir, c.manifest);
  return c;
}

}  // namespace viprom::data
