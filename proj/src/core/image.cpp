#include "viprom/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace viprom::core {

FrameImage to_float(const ImageU8& im, const std::string& clip_id, int frame_index) {
  FrameImage f;
  f.h = im.h;
  f.w = im.w;
  f.clip_id = clip_id;
  f.frame_index = frame_index;
  f.chw.resize(im.chw.size());
  for (std::size_t i = 0; i < im.chw.size(); ++i) f.chw[i] = im.chw[i] * (1.0f / 255.0f);
  return f;
}

ImageU8 quantize(const FrameImage& im) {
  ImageU8 q;
  q.h = im.h;
  q.w = im.w;
  q.chw.resize(im.chw.size());
  for (std::size_t i = 0; i < im.chw.size(); ++i) {
    float v = std::clamp(im.chw[i], 0.0f, 1.0f);
    q.chw[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return q;
}

void Canvas::fill(const Color& c) {
  for (int ch = 0; ch < 3; ++ch)
    std::fill(chw.begin() + static_cast<std::ptrdiff_t>(ch) * h * w,
              chw.begin() + static_cast<std::ptrdiff_t>(ch + 1) * h * w, c[static_cast<std::size_t>(ch)]);
}

namespace {

// Blend alpha coverage derived from a signed distance (in normalized units);
// aa is the softness band, about one pixel.
inline float coverage(float sd, float aa) {
  float a = 0.5f - sd / aa;
  return std::clamp(a, 0.0f, 1.0f);
}

template <class SdFn>
void paint(Canvas& cv, const Color& c, float x_lo, float x_hi, float y_lo, float y_hi, SdFn sd) {
  float aa = 1.0f / static_cast<float>(std::min(cv.h, cv.w));
  int px0 = std::max(0, static_cast<int>(std::floor((x_lo - aa) * cv.w)));
  int px1 = std::min(cv.w - 1, static_cast<int>(std::ceil((x_hi + aa) * cv.w)));
  int py0 = std::max(0, static_cast<int>(std::floor((y_lo - aa) * cv.h)));
  int py1 = std::min(cv.h - 1, static_cast<int>(std::ceil((y_hi + aa) * cv.h)));
  for (int py = py0; py <= py1; ++py) {
    float y = (py + 0.5f) / cv.h;
    for (int px = px0; px <= px1; ++px) {
      float x = (px + 0.5f) / cv.w;
      float a = coverage(sd(x, y), aa);
      if (a <= 0.0f) continue;
      for (int ch = 0; ch < 3; ++ch) {
        float& p = cv.chw[(static_cast<std::size_t>(ch) * cv.h + py) * cv.w + px];
        p = p * (1.0f - a) + c[static_cast<std::size_t>(ch)] * a;
      }
    }
  }
}

}  // namespace

void Canvas::disc(float cx, float cy, float r, const Color& c) {
  paint(*this, c, cx - r, cx + r, cy - r, cy + r, [=](float x, float y) {
    float dx = x - cx, dy = y - cy;
    return std::sqrt(dx * dx + dy * dy) - r;
  });
}

void Canvas::rect(float cx, float cy, float hx, float hy, const Color& c) {
  paint(*this, c, cx - hx, cx + hx, cy - hy, cy + hy, [=](float x, float y) {
    return std::max(std::fabs(x - cx) - hx, std::fabs(y - cy) - hy);
  });
}

void Canvas::ring(float cx, float cy, float r, float thickness, const Color& c) {
  float half = thickness * 0.5f;
  paint(*this, c, cx - r - half, cx + r + half, cy - r - half, cy + r + half,
        [=](float x, float y) {
          float dx = x - cx, dy = y - cy;
          return std::fabs(std::sqrt(dx * dx + dy * dy) - r) - half;
        });
}

void Canvas::triangle(float cx, float cy, float r, const Color& c) {
  // Equilateral, apex up, circumradius r: signed distance is the max over the
  // three edge half-planes (convex polygon).
  float ax = cx, ay = cy - r;
  float bx = cx + r * 0.8660254f, by = cy + r * 0.5f;
  float dx_ = cx - r * 0.8660254f, dy_ = cy + r * 0.5f;
  auto edge = [](float px, float py, float qx, float qy, float x, float y) {
    // positive outside for counter-clockwise winding in y-down coords
    float ex = qx - px, ey = qy - py;
    float len = std::sqrt(ex * ex + ey * ey);
    return ((x - px) * ey - (y - py) * ex) / len;
  };
  paint(*this, c, cx - r, cx + r, cy - r, cy + r, [=](float x, float y) {
    float d1 = edge(ax, ay, bx, by, x, y);
    float d2 = edge(bx, by, dx_, dy_, x, y);
    float d3 = edge(dx_, dy_, ax, ay, x, y);
    return std::max(d1, std::max(d2, d3));
  });
}

ImageU8 Canvas::snapshot() const {
  FrameImage f;
  f.h = h;
  f.w = w;
  f.chw = chw;
  return quantize(f);
}

FrameImage resize_crop(const FrameImage& src, float y0, float x0, float side, int out_h,
                       int out_w) {
  FrameImage out;
  out.h = out_h;
  out.w = out_w;
  out.clip_id = src.clip_id;
  out.frame_index = src.frame_index;
  out.chw.resize(static_cast<std::size_t>(3) * out_h * out_w);
  for (int oy = 0; oy < out_h; ++oy) {
    float sy = y0 + (oy + 0.5f) * side / out_h - 0.5f;
    float fy = std::clamp(sy, 0.0f, static_cast<float>(src.h - 1));
    int iy0 = static_cast<int>(std::floor(fy));
    int iy1 = std::min(iy0 + 1, src.h - 1);
    float wy = fy - iy0;
    for (int ox = 0; ox < out_w; ++ox) {
      float sx = x0 + (ox + 0.5f) * side / out_w - 0.5f;
      float fx = std::clamp(sx, 0.0f, static_cast<float>(src.w - 1));
      int ix0 = static_cast<int>(std::floor(fx));
      int ix1 = std::min(ix0 + 1, src.w - 1);
      float wx = fx - ix0;
      for (int ch = 0; ch < 3; ++ch) {
        const float* p = src.chw.data() + static_cast<std::size_t>(ch) * src.h * src.w;
        float v00 = p[iy0 * src.w + ix0], v01 = p[iy0 * src.w + ix1];
        float v10 = p[iy1 * src.w + ix0], v11 = p[iy1 * src.w + ix1];
        float v = (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11);
        out.chw[(static_cast<std::size_t>(ch) * out_h + oy) * out_w + ox] = v;
      }
    }
  }
  return out;
}

FrameImage hflip(const FrameImage& src) {
  FrameImage out = src;
  for (int ch = 0; ch < 3; ++ch)
    for (int y = 0; y < src.h; ++y)
      for (int x = 0; x < src.w; ++x)
        out.chw[(static_cast<std::size_t>(ch) * src.h + y) * src.w + x] =
            src.chw[(static_cast<std::size_t>(ch) * src.h + y) * src.w + (src.w - 1 - x)];
  return out;
}

FrameImage blur3(const FrameImage& src) {
  FrameImage out = src;
  static const float k[3] = {0.25f, 0.5f, 0.25f};
  std::vector<float> tmp(src.chw.size());
  for (int ch = 0; ch < 3; ++ch) {
    const float* p = src.chw.data() + static_cast<std::size_t>(ch) * src.h * src.w;
    float* t = tmp.data() + static_cast<std::size_t>(ch) * src.h * src.w;
    for (int y = 0; y < src.h; ++y)
      for (int x = 0; x < src.w; ++x) {
        float acc = 0;
        for (int d = -1; d <= 1; ++d) {
          int xx = std::clamp(x + d, 0, src.w - 1);
          acc += k[d + 1] * p[y * src.w + xx];
        }
        t[y * src.w + x] = acc;
      }
    float* o = out.chw.data() + static_cast<std::size_t>(ch) * src.h * src.w;
    for (int y = 0; y < src.h; ++y)
      for (int x = 0; x < src.w; ++x) {
        float acc = 0;
        for (int d = -1; d <= 1; ++d) {
          int yy = std::clamp(y + d, 0, src.h - 1);
          acc += k[d + 1] * t[yy * src.w + x];
        }
        o[y * src.w + x] = acc;
      }
  }
  return out;
}

std::vector<std::uint8_t> rle_encode(const std::vector<std::uint8_t>& raw) {
  std::vector<std::uint8_t> out;
  std::size_t i = 0;
  while (i < raw.size()) {
    std::uint8_t v = raw[i];
    std::size_t run = 1;
    while (i + run < raw.size() && raw[i + run] == v && run < 255) ++run;
    out.push_back(static_cast<std::uint8_t>(run));
    out.push_back(v);
    i += run;
  }
  return out;
}

std::vector<std::uint8_t> rle_decode(const std::vector<std::uint8_t>& enc, std::size_t raw_size) {
  std::vector<std::uint8_t> out;
  out.reserve(raw_size);
  for (std::size_t i = 0; i + 1 < enc.size(); i += 2) {
    out.insert(out.end(), enc[i], enc[i + 1]);
  }
  if (out.size() != raw_size) throw std::runtime_error("rle_decode: size mismatch");
  return out;
}

std::vector<std::uint8_t> vpi_bytes(const ImageU8& im) {
  auto enc = rle_encode(im.chw);
  std::vector<std::uint8_t> out;
  out.reserve(12 + enc.size());
  const char* magic = "VPI1";
  out.insert(out.end(), magic, magic + 4);
  auto push16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  auto push32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  };
  push16(static_cast<std::uint16_t>(im.h));
  push16(static_cast<std::uint16_t>(im.w));
  push32(static_cast<std::uint32_t>(enc.size()));
  out.insert(out.end(), enc.begin(), enc.end());
  return out;
}

ImageU8 vpi_from_bytes(const std::uint8_t* data, std::size_t n, std::size_t* consumed) {
  if (n < 12 || std::memcmp(data, "VPI1", 4) != 0) throw std::runtime_error("vpi: bad header");
  ImageU8 im;
  im.h = data[4] | (data[5] << 8);
  im.w = data[6] | (data[7] << 8);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(data[8 + i]) << (8 * i);
  if (n < 12 + static_cast<std::size_t>(len)) throw std::runtime_error("vpi: truncated");
  std::vector<std::uint8_t> enc(data + 12, data + 12 + len);
  im.chw = rle_decode(enc, static_cast<std::size_t>(3) * im.h * im.w);
  if (consumed) *consumed = 12 + static_cast<std::size_t>(len);
  return im;
}

void write_vpi(const std::string& path, const ImageU8& im) {
  auto bytes = vpi_bytes(im);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("vpi: cannot open for write: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ImageU8 read_vpi(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("vpi: cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  std::size_t consumed = 0;
  return vpi_from_bytes(bytes.data(), bytes.size(), &consumed);
}

}  // namespace viprom::core
