// augment.hpp - two-view augmentation for contrastive pre-training: random
// resized crop, horizontal flip, color jitter, optional blur. Deterministic
// under the given seed.
#pragma once

#include <cstdint>
#include <utility>

#include "viprom/core/image.hpp"
#include "viprom/core/rng.hpp"

namespace viprom::data {

struct AugmentConfig {
  float min_scale = 0.6f;   // crop area fraction lower bound
  float max_scale = 1.0f;
  float flip_prob = 0.5f;
  float brightness = 0.25f;  // multiplicative jitter half-range
  float contrast = 0.25f;
  float channel = 0.15f;     // per-channel gain jitter half-range
  float blur_prob = 0.3f;
};

core::FrameImage augment_view(const core::FrameImage& image, core::Rng& rng,
                              const AugmentConfig& cfg);

std::pair<core::FrameImage, core::FrameImage> augment_pair(const core::FrameImage& image,
                                                           std::uint64_t rng_seed,
                                                           const AugmentConfig& cfg = {});

}  // namespace viprom::data
