// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace t2d {

// 8-bit raster with interleaved channels, row-major.
// 3 channels = RGB scene, 4 channels = RGBA sprite.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, int c) : width(w), height(h), channels(c) {
    data.assign(static_cast<std::size_t>(w) * h * c, 0);
  }

  static Image rgb(int w, int h) { return Image(w, h, 3); }
  static Image rgba(int w, int h) { return Image(w, h, 4); }

  std::uint8_t& at(int x, int y, int c) {
    assert(x >= 0 && x < width && y >= 0 && y < height && c >= 0 && c < channels);
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    assert(x >= 0 && x < width && y >= 0 && y < height && c >= 0 && c < channels);
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::size_t size_bytes() const { return data.size(); }
  bool empty() const { return data.empty(); }

  bool operator==(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels &&
           data == o.data;
  }
};

// RGBA foreground prototype. Canonical form: pixels with alpha 0 carry
// zero color.
using Sprite = Image;

// Composited RGB scene.
using SceneImage = Image;

// Inclusive bounding box of pixels with nonzero alpha.
struct AlphaBox {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
  bool empty() const { return x1 < x0 || y1 < y0; }
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
};

AlphaBox alpha_bbox(const Sprite& s);

// Zeroes the color of fully transparent pixels (canonical sprite form).
void canonicalize_sprite(Sprite& s);

// Fraction of pixels with nonzero alpha.
double alpha_coverage(const Sprite& s);

// Bilinear resize; works for any channel count. Alpha is resized like any
// other channel.
Image resize_bilinear(const Image& src, int out_w, int out_h);

inline std::uint8_t clamp_u8(double v) {
  if (v <= 0.0) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(v + 0.5);
}

}  // namespace t2d
