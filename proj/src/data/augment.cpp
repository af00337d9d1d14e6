#include "viprom/data/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace viprom::data {

core::FrameImage augment_view(const core::FrameImage& image, core::Rng& rng,
                              const AugmentConfig& cfg) {
  if (image.h <= 0 || image.w <= 0 || image.chw.empty())
    throw std::invalid_argument("augment: empty image");

  // Random resized crop (square window, area fraction in [min_scale,max_scale]).
  float scale = static_cast<float>(rng.range(cfg.min_scale, cfg.max_scale));
  float side = std::sqrt(scale) * static_cast<float>(std::min(image.h, image.w));
  float y0 = static_cast<float>(rng.range(0.0, image.h - side));
  float x0 = static_cast<float>(rng.range(0.0, image.w - side));
  core::FrameImage out = core::resize_crop(image, y0, x0, side, image.h, image.w);

  if (rng.bernoulli(cfg.flip_prob)) out = core::hflip(out);

  // Color jitter: brightness, contrast about the mean, per-channel gains.
  float bright = 1.0f + static_cast<float>(rng.range(-cfg.brightness, cfg.brightness));
  float contr = 1.0f + static_cast<float>(rng.range(-cfg.contrast, cfg.contrast));
  float gains[3];
  for (auto& g : gains) g = 1.0f + static_cast<float>(rng.range(-cfg.channel, cfg.channel));

  float mean = 0.0f;
  for (float v : out.chw) mean += v;
  mean /= static_cast<float>(out.chw.size());

  std::size_t plane = static_cast<std::size_t>(out.h) * out.w;
  for (int ch = 0; ch < 3; ++ch) {
    float g = bright * gains[ch];
    for (std::size_t i = 0; i < plane; ++i) {
      float& p = out.chw[static_cast<std::size_t>(ch) * plane + i];
      p = ((p - mean) * contr + mean) * g;
      p = std::clamp(p, 0.0f, 1.0f);
    }
  }

  if (rng.bernoulli(cfg.blur_prob)) out = core::blur3(out);
  return out;
}

std::pair<core::FrameImage, core::FrameImage> augment_pair(const core::FrameImage& image,
                                                           std::uint64_t rng_seed,
                                                           const AugmentConfig& cfg) {
  core::Rng rng(core::fanout(rng_seed, "augment-pair"));
  core::FrameImage a = augment_view(image, rng, cfg);
  core::FrameImage b = augment_view(image, rng, cfg);
  return {std::move(a), std::move(b)};
}

}  // namespace viprom::data
