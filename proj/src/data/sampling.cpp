#include "viprom/data/sampling.hpp"

#include <stdexcept>

#include "viprom/core/rng.hpp"

namespace viprom::data {

std::vector<int> uniform_stride_positions(int m, int n) {
  if (n < 1) throw std::invalid_argument("uniform_stride_positions: n must be >= 1");
  if (n > m)
    throw std::invalid_argument("uniform_stride_positions: requested " + std::to_string(n) +
                                " frames from " + std::to_string(m));
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  if (n == 1) {
    out.push_back(0);
    return out;
  }
  int stride = (m - 1) / (n - 1);
  if (stride < 1) stride = 1;
  for (int k = 0; k < n; ++k) out.push_back(k * stride);
  return out;
}

std::vector<core::FrameImage> sample_clip_frames(const FrameStore& store, const ClipEntry& clip,
                                                 int n, std::uint64_t rng_seed) {
  (void)rng_seed;
  int m = static_cast<int>(clip.raw_frame_indices.size());
  if (n > m)
    throw std::invalid_argument("sample_clip_frames: clip " + clip.clip_id + " has " +
                                std::to_string(m) + " frames, requested " + std::to_string(n));
  auto pos = uniform_stride_positions(m, n);
  std::vector<core::FrameImage> out;
  out.reserve(pos.size());
  for (int p : pos) out.push_back(store.frame(clip, p));
  return out;
}

std::vector<int> permutation_from_seed(std::uint64_t seed, int n) {
  core::Rng rng(core::fanout(seed, "order-permutation"));
  return rng.permutation(n);
}

OrderSample make_order_sample(const FrameStore& store, const ClipEntry& clip, int n,
                              std::uint64_t seed) {
  auto ordered = sample_clip_frames(store, clip, n, seed);
  auto perm = permutation_from_seed(seed, n);
  OrderSample s;
  s.permutation_seed = seed;
  s.frames.reserve(static_cast<std::size_t>(n));
  s.labels.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    s.frames.push_back(ordered[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])]);
    s.labels.push_back(perm[static_cast<std::size_t>(j)]);
  }
  return s;
}

}  // namespace viprom::data
