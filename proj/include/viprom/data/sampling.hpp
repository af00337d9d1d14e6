// sampling.hpp - frame sampling and frame-order samples.
#pragma once

#include <cstdint>
#include <vector>

#include "viprom/core/image.hpp"
#include "viprom/data/framestore.hpp"

namespace viprom::data {

// Uniform first-frame-anchored sampling: constant integer stride
// floor((m-1)/(n-1)), so 30 raw frames at n=5 give positions {0,7,14,21,28}
// and n=m is the identity.
std::vector<int> uniform_stride_positions(int m, int n);

// n frames sampled uniformly over the raw clip, in temporal order. rng_seed
// is accepted for interface stability (sampling is stride-deterministic).
std::vector<core::FrameImage> sample_clip_frames(const FrameStore& store, const ClipEntry& clip,
                                                 int n, std::uint64_t rng_seed = 0);

struct OrderSample {
  std::vector<core::FrameImage> frames;  // shuffled presentation order
  std::vector<int> labels;               // original position of each presented frame
  std::uint64_t permutation_seed = 0;
};

std::vector<int> permutation_from_seed(std::uint64_t seed, int n);

OrderSample make_order_sample(const FrameStore& store, const ClipEntry& clip, int n,
                              std::uint64_t seed);

}  // namespace viprom::data
