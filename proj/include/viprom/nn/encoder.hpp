// encoder.hpp - image encoder builders. tiny-conv is the desk-scale default;
// res-34/50/101 keep the ResNet stage structure at reduced width so the
// architecture axis stays exercisable on a CPU. All encoders end with
// flatten + fc so the embedding keeps spatial information.
#pragma once

#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>

#include "viprom/core/image.hpp"
#include "viprom/nn/layers.hpp"

namespace viprom::nn {

enum class Arch { TinyConv, Res34, Res50, Res101 };

inline std::string arch_name(Arch a) {
  switch (a) {
    case Arch::TinyConv: return "tiny-conv";
    case Arch::Res34: return "res-34";
    case Arch::Res50: return "res-50";
    case Arch::Res101: return "res-101";
  }
  return "?";
}

inline Arch parse_arch(const std::string& s) {
  if (s == "tiny-conv") return Arch::TinyConv;
  if (s == "res-34") return Arch::Res34;
  if (s == "res-50") return Arch::Res50;
  if (s == "res-101") return Arch::Res101;
  throw std::invalid_argument("unknown architecture: " + s);
}

struct EncoderConfig {
  Arch arch = Arch::TinyConv;
  int embedding_dim = 64;
  int in_h = 24, in_w = 24;
  int width = 8;  // base channel count

  nlohmann::ordered_json to_json() const {
    return {{"architecture", arch_name(arch)},
            {"embedding_dim", embedding_dim},
            {"input_hw", {in_h, in_w}},
            {"width", width}};
  }

  static EncoderConfig from_json(const nlohmann::json& j) {
    EncoderConfig c;
    c.arch = parse_arch(j.at("architecture").get<std::string>());
    c.embedding_dim = j.at("embedding_dim").get<int>();
    c.in_h = j.at("input_hw").at(0).get<int>();
    c.in_w = j.at("input_hw").at(1).get<int>();
    c.width = j.at("width").get<int>();
    c.validate();
    return c;
  }

  void validate() const {
    if (embedding_dim <= 0) throw std::invalid_argument("embedding_dim must be positive");
    if (width <= 0) throw std::invalid_argument("width must be positive");
    if (in_h < 8 || in_w < 8 || in_h % 8 || in_w % 8)
      throw std::invalid_argument("input_hw must be multiples of 8 and at least 8");
  }
};

template <class T>
Sequential<T> make_encoder(const EncoderConfig& cfg) {
  cfg.validate();
  Sequential<T> net;
  int w = cfg.width;
  if (cfg.arch == Arch::TinyConv) {
    net.template add<Conv2d<T>>("conv1", 3, w, 3, 1, 1);
    net.template add<ReLU<T>>("relu1");
    net.template add<MaxPool2<T>>("pool1");
    net.template add<Conv2d<T>>("conv2", w, 2 * w, 3, 1, 1);
    net.template add<ReLU<T>>("relu2");
    net.template add<MaxPool2<T>>("pool2");
    net.template add<Conv2d<T>>("conv3", 2 * w, 4 * w, 3, 1, 1);
    net.template add<ReLU<T>>("relu3");
    net.template add<MaxPool2<T>>("pool3");
    net.template add<Conv2d<T>>("conv4", 4 * w, 4 * w, 3, 1, 1);
    net.template add<ReLU<T>>("relu4");
    net.template add<Flatten<T>>("flat");
    int spatial = (cfg.in_h / 8) * (cfg.in_w / 8);
    net.template add<Linear<T>>("fc", 4 * w * spatial, cfg.embedding_dim);
    return net;
  }

  // ResNet family: stem conv + pool, four stages, flatten + fc.
  bool bottleneck = (cfg.arch != Arch::Res34);
  const int expansion = bottleneck ? 2 : 1;
  std::vector<int> blocks;
  if (cfg.arch == Arch::Res34 || cfg.arch == Arch::Res50)
    blocks = {3, 4, 6, 3};
  else
    blocks = {3, 4, 23, 3};

  net.template add<Conv2d<T>>("stem", 3, w, 3, 1, 1);
  net.template add<ReLU<T>>("stem_relu");
  net.template add<MaxPool2<T>>("stem_pool");

  int ci = w;
  int h = cfg.in_h / 2, ww2 = cfg.in_w / 2;
  for (int stage = 0; stage < 4; ++stage) {
    int base = w << stage;
    int co = base * expansion;
    for (int b = 0; b < blocks[static_cast<std::size_t>(stage)]; ++b) {
      int stride = (stage > 0 && b == 0) ? 2 : 1;
      std::string nm = "s" + std::to_string(stage + 1) + "b" + std::to_string(b);
      if (bottleneck)
        net.template add<BottleneckBlock<T>>(nm, ci, base, co, stride);
      else
        net.template add<BasicBlock<T>>(nm, ci, co, stride);
      ci = co;
      if (stride == 2) {
        h = (h + 1) / 2;
        ww2 = (ww2 + 1) / 2;
      }
    }
  }
  net.template add<Flatten<T>>("flat");
  net.template add<Linear<T>>("fc", ci * h * ww2, cfg.embedding_dim);
  return net;
}

// Stack a list of same-shaped frames into an [N,3,H,W] batch.
template <class T>
Tensor<T> batch_from_frames(const std::vector<core::FrameImage>& frames) {
  if (frames.empty()) throw std::invalid_argument("batch_from_frames: empty batch");
  int h = frames[0].h, w = frames[0].w;
  Tensor<T> x({static_cast<int>(frames.size()), 3, h, w});
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.h != h || f.w != w)
      throw std::invalid_argument("batch_from_frames: frame shape mismatch: expected " +
                                  std::to_string(h) + "x" + std::to_string(w) + ", got " +
                                  std::to_string(f.h) + "x" + std::to_string(f.w));
    for (std::size_t j = 0; j < f.chw.size(); ++j)
      x.at(static_cast<std::int64_t>(i) * static_cast<std::int64_t>(f.chw.size()) +
           static_cast<std::int64_t>(j)) = static_cast<T>(f.chw[j]);
  }
  return x;
}

}  // namespace viprom::nn
