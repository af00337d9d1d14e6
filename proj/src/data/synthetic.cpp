#include "viprom/data/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "viprom/core/rng.hpp"

namespace viprom::data {

namespace {

const core::Color kPalette[12] = {
    {0.90f, 0.15f, 0.15f}, {0.15f, 0.75f, 0.20f}, {0.20f, 0.35f, 0.95f}, {0.95f, 0.75f, 0.10f},
    {0.80f, 0.20f, 0.85f}, {0.10f, 0.80f, 0.80f}, {0.95f, 0.45f, 0.10f}, {0.55f, 0.85f, 0.25f},
    {0.35f, 0.15f, 0.75f}, {0.85f, 0.30f, 0.50f}, {0.25f, 0.55f, 0.45f}, {0.70f, 0.60f, 0.30f}};

constexpr float kBg = 0.10f;
const core::Color kHand = {0.92f, 0.92f, 0.92f};

void draw_class_shape(core::Canvas& cv, int cls, float x, float y, float size) {
  core::Color c = class_color(cls);
  switch (class_shape(cls)) {
    case 0: cv.disc(x, y, size, c); break;
    case 1: cv.rect(x, y, size * 0.85f, size * 0.85f, c); break;
    case 2: cv.triangle(x, y, size * 1.15f, c); break;
    default: cv.ring(x, y, size * 0.85f, size * 0.55f, c); break;
  }
}

}  // namespace

int class_shape(int cls) { return cls % 4; }

core::Color class_color(int cls) { return kPalette[static_cast<std::size_t>(cls % 12)]; }

int max_synthetic_classes() { return 12; }

float class_centroid_x(const core::FrameImage& frame, int cls) {
  core::Color c = class_color(cls);
  double wsum = 0.0, xsum = 0.0;
  for (int y = 0; y < frame.h; ++y)
    for (int x = 0; x < frame.w; ++x) {
      float r = frame.chw[(0 * frame.h + y) * static_cast<std::size_t>(frame.w) + x];
      float g = frame.chw[(1 * static_cast<std::size_t>(frame.h) + y) * frame.w + x];
      float b = frame.chw[(2 * static_cast<std::size_t>(frame.h) + y) * frame.w + x];
      float d = std::fabs(r - c[0]) + std::fabs(g - c[1]) + std::fabs(b - c[2]);
      if (d < 0.25f) {
        wsum += 1.0;
        xsum += (x + 0.5) / frame.w;
      }
    }
  if (wsum == 0.0) return -1.0f;
  return static_cast<float>(xsum / wsum);
}

Corpus generate_synthetic_corpus(const SynthConfig& cfg) {
  if (cfg.n_classes < 2) throw std::invalid_argument("synthetic corpus: n_classes must be >= 2");
  if (cfg.n_classes > max_synthetic_classes())
    throw std::invalid_argument("synthetic corpus: at most " +
                                std::to_string(max_synthetic_classes()) + " distinct classes");
  if (cfg.n_clips < 1) throw std::invalid_argument("synthetic corpus: n_clips must be >= 1");
  if (cfg.h <= 0 || cfg.w <= 0)
    throw std::invalid_argument("synthetic corpus: zero-size image config");

  Corpus out;
  ClipManifest& m = out.manifest;
  m.fps = cfg.fps;
  m.clip_duration_s = cfg.duration_s;
  m.downsample_factor = cfg.downsample_factor;
  m.meta.generator = cfg.variant == CorpusVariant::Temporal ? "synthetic-temporal"
                                                            : "synthetic-static";
  m.meta.seed = cfg.seed;
  m.meta.n_classes = cfg.n_classes;
  m.meta.image_h = cfg.h;
  m.meta.image_w = cfg.w;

  int n_raw = static_cast<int>(std::floor(cfg.fps * cfg.duration_s + 1e-9));
  int n_keep =
      static_cast<int>(std::floor(cfg.fps * cfg.duration_s / cfg.downsample_factor + 1e-9));
  if (n_raw < 1) throw std::invalid_argument("synthetic corpus: fps*duration must be >= 1 frame");

  for (int ci = 0; ci < cfg.n_clips; ++ci) {
    int cls = ci % cfg.n_classes;  // balanced labels
    core::Rng rng(core::fanout(cfg.seed, "clip", static_cast<std::uint64_t>(ci)));

    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d", ci);
    ClipEntry entry;
    entry.clip_id = std::string("synthetic:") + buf;
    entry.video_id = "synthetic";
    entry.label_hint = cls;
    for (int i = 0; i < n_raw; ++i) entry.raw_frame_indices.push_back(ci * n_raw + i);
    for (int i = 0; i < n_keep; ++i)
      entry.retained_frame_indices.push_back(ci * n_raw + i * cfg.downsample_factor);

    float size = static_cast<float>(rng.range(0.09, 0.13));
    std::vector<core::ImageU8> frames;
    frames.reserve(static_cast<std::size_t>(n_raw));

    if (cfg.variant == CorpusVariant::Temporal) {
      // Object sweeps left to right; y interpolates between two random levels.
      float y0 = static_cast<float>(rng.range(0.25, 0.75));
      float y1 = static_cast<float>(rng.range(0.25, 0.75));
      float hx0 = static_cast<float>(rng.range(0.15, 0.85));
      float hy0 = static_cast<float>(rng.bernoulli(0.5) ? rng.range(0.08, 0.2)
                                                        : rng.range(0.8, 0.92));
      float trail_y = hy0 < 0.5f ? -0.13f : 0.13f;

      // Static distractor props in non-class colors keep multi-object scenes
      // in-distribution without breaking single-frame class recovery.
      struct Prop {
        int shape;
        core::Color color;
        float x, y, size;
      };
      std::vector<Prop> props;
      int n_props = rng.uniform_int(3);
      for (int p = 0; p < n_props; ++p) {
        Prop pr;
        pr.shape = rng.uniform_int(5);
        int pick = rng.uniform_int(3);
        if (pick == 0 && cfg.n_classes < 12) {
          int ci2 = cfg.n_classes + rng.uniform_int(12 - cfg.n_classes);
          pr.color = kPalette[static_cast<std::size_t>(ci2)];
        } else if (pick == 1) {
          pr.color = {0.35f, 0.35f, 0.40f};  // track gray
        } else {
          pr.color = {0.55f, 0.55f, 0.55f};
        }
        pr.x = static_cast<float>(rng.range(0.12, 0.88));
        pr.y = static_cast<float>(rng.range(0.12, 0.88));
        pr.size = static_cast<float>(rng.range(0.05, 0.10));
        props.push_back(pr);
      }

      for (int i = 0; i < n_raw; ++i) {
        float t = n_raw > 1 ? static_cast<float>(i) / (n_raw - 1) : 0.0f;
        float ox = 0.15f + 0.70f * t;
        float oy = y0 + (y1 - y0) * t;
        // Hand approaches a trailing offset next to the object; the object is
        // drawn on top so the class stays recoverable from every frame.
        float approach = std::min(1.0f, t * 1.6f);
        float hx = hx0 + (ox - 0.10f - hx0) * approach;
        float hy = hy0 + (oy + trail_y - hy0) * approach;
        core::Canvas cv(cfg.h, cfg.w);
        cv.fill({kBg, kBg, kBg});
        for (const auto& pr : props) {
          switch (pr.shape) {
            case 0: cv.disc(pr.x, pr.y, pr.size, pr.color); break;
            case 1: cv.rect(pr.x, pr.y, pr.size * 0.85f, pr.size * 0.85f, pr.color); break;
            case 2: cv.triangle(pr.x, pr.y, pr.size * 1.15f, pr.color); break;
            case 3: cv.ring(pr.x, pr.y, pr.size * 0.85f, pr.size * 0.55f, pr.color); break;
            default: cv.rect(pr.x, pr.y, 0.22f, 0.012f, pr.color); break;  // track-like bar
          }
        }
        cv.disc(hx, hy, 0.055f, kHand);
        draw_class_shape(cv, cls, ox, oy, size);
        frames.push_back(cv.snapshot());
      }
    } else {
      // Object-centric still: centered shape with a small per-clip jitter.
      float ox = 0.5f + static_cast<float>(rng.range(-0.05, 0.05));
      float oy = 0.5f + static_cast<float>(rng.range(-0.05, 0.05));
      core::Canvas cv(cfg.h, cfg.w);
      cv.fill({kBg, kBg, kBg});
      draw_class_shape(cv, cls, ox, oy, size);
      core::ImageU8 still = cv.snapshot();
      for (int i = 0; i < n_raw; ++i) frames.push_back(still);
    }
    out.store.add_clip(entry.clip_id, std::move(frames));
    m.clips.push_back(std::move(entry));
  }
  return out;
}

}  // namespace viprom::data
