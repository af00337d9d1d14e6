// image.hpp - frame pixel containers, the shared shape renderer used by both
// the synthetic corpus and the toy environment, resampling helpers, and the
// RLE-compressed .vpi image file format used by frame stores and demo files.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace viprom::core {

// Canonical pixel representation: u8 quantized, CHW. Float views are u8/255,
// so in-memory and reloaded-from-disk frames are identical.
struct ImageU8 {
  int h = 0, w = 0;
  std::vector<std::uint8_t> chw;  // 3*h*w
};

struct FrameImage {
  int h = 0, w = 0;
  std::vector<float> chw;  // 3*h*w, values in [0,1]
  std::string clip_id;
  int frame_index = -1;
};

using Color = std::array<float, 3>;

FrameImage to_float(const ImageU8& im, const std::string& clip_id = "", int frame_index = -1);
ImageU8 quantize(const FrameImage& im);

// Anti-aliased 2D renderer over normalized [0,1]^2 coordinates
// (x right, y down). Edge softness ~1 pixel.
struct Canvas {
  int h = 0, w = 0;
  std::vector<float> chw;

  Canvas(int h_, int w_) : h(h_), w(w_), chw(static_cast<std::size_t>(3) * h_ * w_, 0.f) {}
  void fill(const Color& c);
  void disc(float cx, float cy, float r, const Color& c);
  void rect(float cx, float cy, float hx, float hy, const Color& c);
  void ring(float cx, float cy, float r, float thickness, const Color& c);
  void triangle(float cx, float cy, float r, const Color& c);  // points up
  ImageU8 snapshot() const;
};

// Bilinear crop-resize: square source window (top-left y0,x0, side `side`, in
// source pixel coordinates, may be fractional) resampled to out_h x out_w.
FrameImage resize_crop(const FrameImage& src, float y0, float x0, float side, int out_h,
                       int out_w);

FrameImage hflip(const FrameImage& src);
FrameImage blur3(const FrameImage& src);  // 1-2-1 binomial kernel, clamped edges

// .vpi: magic "VPI1", u16 h, u16 w, u32 payload bytes, byte-wise RLE
// (run,value pairs) of the CHW plane data.
std::vector<std::uint8_t> rle_encode(const std::vector<std::uint8_t>& raw);
std::vector<std::uint8_t> rle_decode(const std::vector<std::uint8_t>& enc, std::size_t raw_size);
void write_vpi(const std::string& path, const ImageU8& im);
ImageU8 read_vpi(const std::string& path);
std::vector<std::uint8_t> vpi_bytes(const ImageU8& im);
ImageU8 vpi_from_bytes(const std::uint8_t* data, std::size_t n, std::size_t* consumed);

}  // namespace viprom::core
