// synthetic.hpp - desk-scale synthetic labeled video corpus. Each temporal
// clip shows a hand disc approaching a class-specific shape that sweeps the
// workspace with strictly increasing x, so class is recoverable from any
// frame and temporal order from frame content. The static variant renders
// one centered motionless shape per clip (object-centric stills).
#pragma once

#include <cstdint>
#include <string>

#include "viprom/core/image.hpp"
#include "viprom/data/framestore.hpp"

namespace viprom::data {

enum class CorpusVariant { Temporal, Static };

struct SynthConfig {
  std::uint64_t seed = 7;
  int n_clips = 64;
  int n_classes = 4;
  int fps = 30;
  double duration_s = 1.0;
  int downsample_factor = 10;
  int h = 24, w = 24;
  CorpusVariant variant = CorpusVariant::Temporal;
};

Corpus generate_synthetic_corpus(const SynthConfig& cfg);

// Class appearance shared with tests (shape index, fill color).
int class_shape(int cls);
core::Color class_color(int cls);
int max_synthetic_classes();

// x centroid (normalized) of pixels matching the class color; used by
// order-recoverability checks.
float class_centroid_x(const core::FrameImage& frame, int cls);

}  // namespace viprom::data
