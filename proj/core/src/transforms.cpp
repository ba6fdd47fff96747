// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#include "t2d/transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "t2d/errors.hpp"

namespace t2d {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<std::string_view, kTransformKindCount> kKindNames = {
    "rotate",    "scale",    "shear",     "vflip",   "hflip",   "translate",
    "hue",       "brightness", "grayscale", "posterize", "invert", "sharpen",
    "blur",      "noise",    "pixelate",  "elastic", "erasing", "contrast"};

// Integer BT.601 luma with round-to-nearest.
inline int luma_int(int r, int g, int b) {
  return (299 * r + 587 * g + 114 * b + 500) / 1000;
}

inline double luma_real(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

// Symmetric reflection with edge repeat: ..., 1, 0 | 0, 1, ..., n-1 | n-1, ...
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

// Bilinear tap with zero fill outside the image. Exact at integer
// coordinates.
inline void sample_bilinear(const Image& src, double fx, double fy,
                            double* out) {
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double wx = fx - x0;
  const double wy = fy - y0;
  const double w00 = (1 - wx) * (1 - wy);
  const double w10 = wx * (1 - wy);
  const double w01 = (1 - wx) * wy;
  const double w11 = wx * wy;
  for (int c = 0; c < src.channels; ++c) out[c] = 0.0;
  auto add = [&](int x, int y, double w) {
    if (w == 0.0 || x < 0 || x >= src.width || y < 0 || y >= src.height) return;
    for (int c = 0; c < src.channels; ++c) out[c] += w * src.at(x, y, c);
  };
  add(x0, y0, w00);
  add(x0 + 1, y0, w10);
  add(x0, y0 + 1, w01);
  add(x0 + 1, y0 + 1, w11);
}

// Inverse-mapped affine resampling about the canvas center:
// src = M_inv * (dst - center) + center - offset.
Image affine_resample(const Image& src, double m00, double m01, double m10,
                      double m11, double dx, double dy) {
  Image dst(src.width, src.height, src.channels);
  const double cx = (src.width - 1) * 0.5;
  const double cy = (src.height - 1) * 0.5;
  std::array<double, 4> px;
  for (int y = 0; y < dst.height; ++y) {
    for (int x = 0; x < dst.width; ++x) {
      const double rx = x - dx - cx;
      const double ry = y - dy - cy;
      const double sx = m00 * rx + m01 * ry + cx;
      const double sy = m10 * rx + m11 * ry + cy;
      sample_bilinear(src, sx, sy, px.data());
      for (int c = 0; c < src.channels; ++c) {
        dst.at(x, y, c) = clamp_u8(px[c]);
      }
    }
  }
  return dst;
}

Image apply_rotate(const Image& img, double degrees) {
  const double rad = degrees * kPi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  // Inverse of a CCW rotation.
  return affine_resample(img, c, s, -s, c, 0.0, 0.0);
}

Image apply_scale(const Image& img, double factor) {
  const double inv = 1.0 / factor;
  return affine_resample(img, inv, 0.0, 0.0, inv, 0.0, 0.0);
}

Image apply_shear(const Image& img, double deg_x, double deg_y) {
  // Sequential x- then y-shear: M = [[1+tx*ty, tx], [ty, 1]], det = 1.
  const double tx = std::tan(deg_x * kPi / 180.0);
  const double ty = std::tan(deg_y * kPi / 180.0);
  return affine_resample(img, 1.0, -tx, -ty, 1.0 + tx * ty, 0.0, 0.0);
}

Image apply_translate_offset(const Image& img, double dx, double dy) {
  return affine_resample(img, 1.0, 0.0, 0.0, 1.0, dx, dy);
}

// Places the sprite's alpha bounding box uniformly on the canvas.
// p0/p1 in [0,1) select among all integer placements that keep the
// box fully inside. Pure index shift, no resampling.
Image apply_translate_placement(const Sprite& s, double p0, double p1) {
  const AlphaBox box = alpha_bbox(s);
  if (box.empty()) return s;
  const int nx = s.width - box.width() + 1;
  const int ny = s.height - box.height() + 1;
  const int px = std::min(static_cast<int>(p0 * nx), nx - 1);
  const int py = std::min(static_cast<int>(p1 * ny), ny - 1);
  const int dx = px - box.x0;
  const int dy = py - box.y0;
  Image dst(s.width, s.height, s.channels);
  for (int y = 0; y < s.height; ++y) {
    const int sy = y - dy;
    if (sy < 0 || sy >= s.height) continue;
    for (int x = 0; x < s.width; ++x) {
      const int sx = x - dx;
      if (sx < 0 || sx >= s.width) continue;
      for (int c = 0; c < s.channels; ++c) dst.at(x, y, c) = s.at(sx, sy, c);
    }
  }
  return dst;
}

Image apply_flip(const Image& img, bool horizontal) {
  Image dst(img.width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y) {
    const int sy = horizontal ? y : img.height - 1 - y;
    for (int x = 0; x < img.width; ++x) {
      const int sx = horizontal ? img.width - 1 - x : x;
      for (int c = 0; c < img.channels; ++c) dst.at(x, y, c) = img.at(sx, sy, c);
    }
  }
  return dst;
}

int color_channels(const Image& img) { return img.channels == 4 ? 3 : img.channels; }

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  v = mx;
  s = mx == 0.0 ? 0.0 : d / mx;
  if (d == 0.0) {
    h = 0.0;
  } else if (mx == r) {
    h = (g - b) / d / 6.0;
    if (h < 0.0) h += 1.0;
  } else if (mx == g) {
    h = ((b - r) / d + 2.0) / 6.0;
  } else {
    h = ((r - g) / d + 4.0) / 6.0;
  }
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  if (s == 0.0) {
    r = g = b = v;
    return;
  }
  h = h - std::floor(h);
  const double hh = h * 6.0;
  const int sector = std::min(5, static_cast<int>(hh));
  const double f = hh - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

Image apply_hue(const Image& img, double shift) {
  Image dst = img;
  const int cc = color_channels(img);
  if (cc < 3) return dst;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double h, s, v;
      rgb_to_hsv(img.at(x, y, 0) / 255.0, img.at(x, y, 1) / 255.0,
                 img.at(x, y, 2) / 255.0, h, s, v);
      double r, g, b;
      hsv_to_rgb(h + shift, s, v, r, g, b);
      dst.at(x, y, 0) = clamp_u8(r * 255.0);
      dst.at(x, y, 1) = clamp_u8(g * 255.0);
      dst.at(x, y, 2) = clamp_u8(b * 255.0);
    }
  }
  return dst;
}

Image apply_brightness(const Image& img, double delta) {
  Image dst = img;
  const int cc = color_channels(img);
  const double d = delta * 255.0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < cc; ++c)
        dst.at(x, y, c) = clamp_u8(img.at(x, y, c) + d);
  return dst;
}

Image apply_grayscale(const Image& img) {
  Image dst = img;
  const int cc = color_channels(img);
  if (cc < 3) return dst;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int g = luma_int(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
      dst.at(x, y, 0) = dst.at(x, y, 1) = dst.at(x, y, 2) =
          static_cast<std::uint8_t>(g);
    }
  }
  return dst;
}

Image apply_posterize(const Image& img) {
  // 1-bit posterization: keep the most significant bit.
  Image dst = img;
  const int cc = color_channels(img);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < cc; ++c)
        dst.at(x, y, c) = img.at(x, y, c) & 0x80;
  return dst;
}

Image apply_invert(const Image& img) {
  Image dst = img;
  const int cc = color_channels(img);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < cc; ++c)
        dst.at(x, y, c) = static_cast<std::uint8_t>(255 - img.at(x, y, c));
  return dst;
}

Image apply_sharpen(const Image& img) {
  // out = smooth + 7 * (x - smooth), 3x3 box smoothing.
  Image dst = img;
  const int cc = color_channels(img);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < cc; ++c) {
        double sum = 0.0;
        for (int oy = -1; oy <= 1; ++oy) {
          const int yy = reflect_index(y + oy, img.height);
          for (int ox = -1; ox <= 1; ++ox) {
            const int xx = reflect_index(x + ox, img.width);
            sum += img.at(xx, yy, c);
          }
        }
        const double smooth = sum / 9.0;
        dst.at(x, y, c) = clamp_u8(smooth + 7.0 * (img.at(x, y, c) - smooth));
      }
    }
  }
  return dst;
}

Image apply_blur(const Image& img, double sigma) {
  const std::vector<double> kernel = gaussian_kernel(7, sigma);
  Image dst = img;
  const int cc = color_channels(img);
  std::vector<double> plane(img.pixel_count());
  for (int c = 0; c < cc; ++c) {
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        plane[static_cast<std::size_t>(y) * img.width + x] = img.at(x, y, c);
    convolve_separable(plane, img.width, img.height, kernel);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        dst.at(x, y, c) =
            clamp_u8(plane[static_cast<std::size_t>(y) * img.width + x]);
  }
  return dst;
}

Image apply_noise(const Image& img, double sigma, bool raw_scale,
                  std::uint64_t field_seed) {
  Image dst = img;
  const int cc = color_channels(img);
  const double amp = raw_scale ? sigma : sigma * 255.0;
  RngStream rng(field_seed, 0x6e6f697365ULL);  // "noise"
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < cc; ++c)
        dst.at(x, y, c) = clamp_u8(img.at(x, y, c) + amp * rng.normal());
  return dst;
}

Image apply_pixelate(const Image& img) {
  // Half-resolution block averaging, written back at full size.
  Image dst = img;
  const int cc = color_channels(img);
  for (int by = 0; by < img.height; by += 2) {
    const int bh = std::min(2, img.height - by);
    for (int bx = 0; bx < img.width; bx += 2) {
      const int bw = std::min(2, img.width - bx);
      for (int c = 0; c < cc; ++c) {
        int sum = 0;
        for (int y = 0; y < bh; ++y)
          for (int x = 0; x < bw; ++x) sum += img.at(bx + x, by + y, c);
        const int n = bw * bh;
        const std::uint8_t v = static_cast<std::uint8_t>((sum + n / 2) / n);
        for (int y = 0; y < bh; ++y)
          for (int x = 0; x < bw; ++x) dst.at(bx + x, by + y, c) = v;
      }
    }
  }
  return dst;
}

Image apply_elastic(const Image& img, double alpha, std::uint64_t field_seed) {
  const int w = img.width, h = img.height;
  const std::size_t n = img.pixel_count();
  std::vector<double> dx(n), dy(n);
  RngStream rx(field_seed, 0x656c61737431ULL);
  RngStream ry(field_seed, 0x656c61737432ULL);
  for (std::size_t i = 0; i < n; ++i) dx[i] = rx.uniform_real(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) dy[i] = ry.uniform_real(-1.0, 1.0);
  const double sigma = 5.0;
  const int ksize = 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
  const std::vector<double> kernel = gaussian_kernel(ksize, sigma);
  convolve_separable(dx, w, h, kernel);
  convolve_separable(dy, w, h, kernel);
  // alpha is quoted on a 224-pixel scale; rescale to this resolution.
  const double scale = alpha * w / 224.0;
  Image dst = img;
  const int cc = color_channels(img);
  std::array<double, 4> px;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      sample_bilinear(img, x + scale * dx[i], y + scale * dy[i], px.data());
      for (int c = 0; c < cc; ++c) dst.at(x, y, c) = clamp_u8(px[c]);
    }
  }
  return dst;
}

Image apply_erasing(const Image& img, double p0, double p1) {
  Image dst = img;
  const int side_w = std::max(1, (img.width * 14 + 16) / 32);
  const int side_h = std::max(1, (img.height * 14 + 16) / 32);
  const int sw = std::min(side_w, img.width);
  const int sh = std::min(side_h, img.height);
  const int nx = img.width - sw + 1;
  const int ny = img.height - sh + 1;
  const int x0 = std::min(static_cast<int>(p0 * nx), nx - 1);
  const int y0 = std::min(static_cast<int>(p1 * ny), ny - 1);
  for (int y = y0; y < y0 + sh; ++y)
    for (int x = x0; x < x0 + sw; ++x)
      for (int c = 0; c < img.channels; ++c) dst.at(x, y, c) = 0;
  return dst;
}

Image apply_contrast(const Image& img, double delta) {
  const int cc = color_channels(img);
  double mu = 0.0;
  if (cc >= 3) {
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        mu += luma_real(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
  } else {
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) mu += img.at(x, y, 0);
  }
  mu /= static_cast<double>(img.pixel_count());
  const double gain = 1.0 + delta;
  Image dst = img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < cc; ++c)
        dst.at(x, y, c) = clamp_u8(mu + gain * (img.at(x, y, c) - mu));
  return dst;
}

Image apply_one(const TransformSpec& spec, const Image& img) {
  if (is_identity(spec)) return img;
  switch (spec.kind) {
    case TransformKind::Rotate:
      return apply_rotate(img, spec.p0);
    case TransformKind::Scale:
      return apply_scale(img, spec.p0);
    case TransformKind::Shear:
      return apply_shear(img, spec.p0, spec.p1);
    case TransformKind::VFlip:
      return apply_flip(img, false);
    case TransformKind::HFlip:
      return apply_flip(img, true);
    case TransformKind::Translate:
      if (spec.placement) {
        if (img.channels != 4)
          throw BadInput("placement translation requires an alpha channel");
        return apply_translate_placement(img, spec.p0, spec.p1);
      }
      return apply_translate_offset(img, spec.p0 * img.width,
                                    spec.p1 * img.height);
    case TransformKind::Hue:
      return apply_hue(img, spec.p0);
    case TransformKind::Brightness:
      return apply_brightness(img, spec.p0);
    case TransformKind::Grayscale:
      return apply_grayscale(img);
    case TransformKind::Posterize:
      return apply_posterize(img);
    case TransformKind::Invert:
      return apply_invert(img);
    case TransformKind::Sharpen:
      return apply_sharpen(img);
    case TransformKind::Blur:
      return apply_blur(img, spec.p0);
    case TransformKind::Noise:
      return apply_noise(img, spec.p0, spec.p1 != 0.0, spec.field_seed);
    case TransformKind::Pixelate:
      return apply_pixelate(img);
    case TransformKind::Elastic:
      return apply_elastic(img, spec.p0, spec.field_seed);
    case TransformKind::Erasing:
      return apply_erasing(img, spec.p0, spec.p1);
    case TransformKind::Contrast:
      return apply_contrast(img, spec.p0);
  }
  throw BadParameter("unknown transform kind");
}

}  // namespace

TransformCategory category(TransformKind kind) {
  const int i = static_cast<int>(kind);
  if (i < 6) return TransformCategory::Geometric;
  if (i < 12) return TransformCategory::Photometric;
  return TransformCategory::Corruption;
}

std::string_view kind_name(TransformKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

TransformKind kind_from_name(std::string_view name) {
  for (int i = 0; i < kTransformKindCount; ++i) {
    if (kKindNames[static_cast<std::size_t>(i)] == name)
      return static_cast<TransformKind>(i);
  }
  throw BadParameter("unknown transform name: " + std::string(name));
}

std::vector<TransformKind> all_transform_kinds() {
  std::vector<TransformKind> kinds(kTransformKindCount);
  for (int i = 0; i < kTransformKindCount; ++i)
    kinds[static_cast<std::size_t>(i)] = static_cast<TransformKind>(i);
  return kinds;
}

TransformSet::TransformSet(std::vector<TransformKind> k, TransformMode m,
                           NoiseScale ns)
    : kinds(std::move(k)), mode(m), noise_scale(ns) {
  if (kinds.empty()) throw BadParameter("transform set must not be empty");
  for (std::size_t i = 0; i < kinds.size(); ++i)
    for (std::size_t j = i + 1; j < kinds.size(); ++j)
      if (kinds[i] == kinds[j])
        throw BadParameter("transform set kinds must be distinct");
}

TransformSet TransformSet::canonical(std::vector<TransformKind> kinds,
                                     TransformMode mode, NoiseScale ns) {
  std::sort(kinds.begin(), kinds.end());
  return TransformSet(std::move(kinds), mode, ns);
}

bool TransformSet::contains(TransformKind k) const {
  return std::find(kinds.begin(), kinds.end(), k) != kinds.end();
}

std::vector<TransformSpec> sample_transform(const TransformSet& set,
                                            RngStream& rng) {
  std::vector<TransformSpec> specs;
  specs.reserve(set.kinds.size());
  for (const TransformKind kind : set.kinds) {
    TransformSpec s;
    s.kind = kind;
    switch (kind) {
      case TransformKind::Rotate:
        s.p0 = rng.uniform_real(0.0, 360.0);
        break;
      case TransformKind::Scale:
        s.p0 = rng.uniform_real(0.4, 1.0);
        break;
      case TransformKind::Shear:
        s.p0 = rng.uniform_real(-50.0, 50.0);
        s.p1 = rng.uniform_real(-50.0, 50.0);
        break;
      case TransformKind::VFlip:
      case TransformKind::HFlip:
        s.enabled = rng.bernoulli(0.5);
        break;
      case TransformKind::Translate:
        if (set.mode == TransformMode::Object) {
          s.placement = true;
          s.p0 = rng.unit_real();
          s.p1 = rng.unit_real();
        } else {
          s.p0 = rng.uniform_real(-0.3, 0.3);
          s.p1 = rng.uniform_real(-0.3, 0.3);
        }
        break;
      case TransformKind::Hue:
        s.p0 = rng.uniform_real(-0.5, 0.5);
        break;
      case TransformKind::Brightness:
        s.p0 = rng.uniform_real(-1.0, 1.0);
        break;
      case TransformKind::Grayscale:
      case TransformKind::Posterize:
      case TransformKind::Invert:
      case TransformKind::Sharpen:
      case TransformKind::Pixelate:
        s.enabled = rng.bernoulli(0.5);
        break;
      case TransformKind::Blur:
        s.p0 = rng.uniform_real(0.1, 1.5);
        break;
      case TransformKind::Noise:
        s.enabled = rng.bernoulli(0.5);
        s.p0 = 1.0;
        s.p1 = set.noise_scale == NoiseScale::Raw ? 1.0 : 0.0;
        s.field_seed = rng.next_u64();
        break;
      case TransformKind::Elastic:
        s.enabled = rng.bernoulli(0.5);
        s.p0 = 150.0;
        s.field_seed = rng.next_u64();
        break;
      case TransformKind::Erasing:
        s.enabled = rng.bernoulli(0.5);
        s.p0 = rng.unit_real();
        s.p1 = rng.unit_real();
        break;
      case TransformKind::Contrast:
        s.p0 = rng.uniform_real(-1.0, 1.0);
        break;
    }
    specs.push_back(s);
  }
  return specs;
}

bool is_identity(const TransformSpec& spec) {
  if (!spec.enabled) return true;
  switch (spec.kind) {
    case TransformKind::Rotate:
    case TransformKind::Hue:
    case TransformKind::Brightness:
    case TransformKind::Contrast:
      return spec.p0 == 0.0;
    case TransformKind::Scale:
      return spec.p0 == 1.0;
    case TransformKind::Shear:
      return spec.p0 == 0.0 && spec.p1 == 0.0;
    case TransformKind::Translate:
      return !spec.placement && spec.p0 == 0.0 && spec.p1 == 0.0;
    default:
      return false;
  }
}

Sprite apply_to_sprite(std::span<const TransformSpec> specs, const Sprite& s) {
  if (s.channels != 4) throw BadInput("apply_to_sprite expects RGBA");
  Sprite cur = s;
  for (const TransformSpec& spec : specs) cur = apply_one(spec, cur);
  canonicalize_sprite(cur);
  return cur;
}

SceneImage apply_to_image(std::span<const TransformSpec> specs,
                          const SceneImage& img) {
  if (img.channels != 3) throw BadInput("apply_to_image expects RGB");
  SceneImage cur = img;
  for (const TransformSpec& spec : specs) cur = apply_one(spec, cur);
  return cur;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  if (size < 1 || size % 2 == 0 || sigma <= 0.0)
    throw BadParameter("gaussian kernel needs odd size and positive sigma");
  std::vector<double> k(static_cast<std::size_t>(size));
  const int r = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - r;
    k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= sum;
  return k;
}

void convolve_separable(std::vector<double>& plane, int w, int h,
                        const std::vector<double>& kernel) {
  const int r = static_cast<int>(kernel.size()) / 2;
  std::vector<double> tmp(plane.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -r; t <= r; ++t) {
        const int xx = reflect_index(x + t, w);
        acc += kernel[static_cast<std::size_t>(t + r)] *
               plane[static_cast<std::size_t>(y) * w + xx];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) {
      double acc = 0.0;
      for (int t = -r; t <= r; ++t) {
        const int yy = reflect_index(y + t, h);
        acc += kernel[static_cast<std::size_t>(t + r)] *
               tmp[static_cast<std::size_t>(yy) * w + x];
      }
      plane[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
}

}  // namespace t2d
