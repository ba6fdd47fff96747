// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#include "t2d/image.hpp"

#include <algorithm>
#include <cmath>

namespace t2d {

AlphaBox alpha_bbox(const Sprite& s) {
  AlphaBox box;
  box.x0 = s.width;
  box.y0 = s.height;
  box.x1 = -1;
  box.y1 = -1;
  if (s.channels != 4) return box;
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      if (s.at(x, y, 3) != 0) {
        box.x0 = std::min(box.x0, x);
        box.y0 = std::min(box.y0, y);
        box.x1 = std::max(box.x1, x);
        box.y1 = std::max(box.y1, y);
      }
    }
  }
  return box;
}

void canonicalize_sprite(Sprite& s) {
  if (s.channels != 4) return;
  for (std::size_t i = 0; i < s.data.size(); i += 4) {
    if (s.data[i + 3] == 0) {
      s.data[i] = s.data[i + 1] = s.data[i + 2] = 0;
    }
  }
}

double alpha_coverage(const Sprite& s) {
  if (s.channels != 4 || s.empty()) return 0.0;
  std::size_t n = 0;
  for (std::size_t i = 3; i < s.data.size(); i += 4) {
    if (s.data[i] != 0) ++n;
  }
  return static_cast<double>(n) / static_cast<double>(s.pixel_count());
}

Image resize_bilinear(const Image& src, int out_w, int out_h) {
  Image dst(out_w, out_h, src.channels);
  if (src.empty() || out_w <= 0 || out_h <= 0) return dst;
  const double sx = out_w > 1 ? static_cast<double>(src.width - 1) / (out_w - 1) : 0.0;
  const double sy = out_h > 1 ? static_cast<double>(src.height - 1) / (out_h - 1) : 0.0;
  for (int y = 0; y < out_h; ++y) {
    const double fy = y * sy;
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = x * sx;
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < src.channels; ++c) {
        const double v =
            (1 - wy) * ((1 - wx) * src.at(x0, y0, c) + wx * src.at(x1, y0, c)) +
            wy * ((1 - wx) * src.at(x0, y1, c) + wx * src.at(x1, y1, c));
        dst.at(x, y, c) = clamp_u8(v);
      }
    }
  }
  return dst;
}

}  // namespace t2d
