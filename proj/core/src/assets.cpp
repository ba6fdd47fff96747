// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#include "t2d/assets.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "t2d/errors.hpp"
#include "t2d/png_io.hpp"
#include "t2d/rng.hpp"

namespace fs = std::filesystem;

namespace t2d {

namespace {

struct Rgb {
  std::uint8_t r, g, b;
};

Rgb hsv_color(double h, double s, double v) {
  h -= std::floor(h);
  const double hh = h * 6.0;
  const int sector = std::min(5, static_cast<int>(hh));
  const double f = hh - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  double r, g, b;
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  return {clamp_u8(r * 255.0), clamp_u8(g * 255.0), clamp_u8(b * 255.0)};
}

// Point-in-convex-polygon via winding sign; vertices in order.
bool inside_polygon(double px, double py, const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  int sign = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const double cross =
        (xs[j] - xs[i]) * (py - ys[i]) - (ys[j] - ys[i]) * (px - xs[i]);
    if (cross == 0.0) continue;
    const int s = cross > 0.0 ? 1 : -1;
    if (sign == 0) {
      sign = s;
    } else if (s != sign) {
      return false;
    }
  }
  return true;
}

// Base silhouette for one procedural sprite; returns the covered mask.
std::vector<bool> rasterize_base(RngStream& rng, int res, double target_cover) {
  const double cx = (res - 1) * 0.5;
  const double cy = (res - 1) * 0.5;
  std::vector<bool> mask(static_cast<std::size_t>(res) * res, false);
  const bool use_polygon = rng.bernoulli(0.4);
  if (use_polygon) {
    // Convex-ish polygon: radii around the center at sorted angles.
    const int verts = static_cast<int>(rng.uniform_int(3, 7));
    std::vector<double> angles(static_cast<std::size_t>(verts));
    for (double& a : angles) a = rng.uniform_real(0.0, 2.0 * std::numbers::pi);
    std::sort(angles.begin(), angles.end());
    // Radius chosen so the polygon area lands near the target coverage.
    const double base_r = std::sqrt(target_cover * res * res / std::numbers::pi);
    std::vector<double> xs(static_cast<std::size_t>(verts));
    std::vector<double> ys(static_cast<std::size_t>(verts));
    for (int i = 0; i < verts; ++i) {
      const double r = base_r * rng.uniform_real(1.0, 1.35);
      xs[static_cast<std::size_t>(i)] =
          cx + std::min(r, cx) * std::cos(angles[static_cast<std::size_t>(i)]);
      ys[static_cast<std::size_t>(i)] =
          cy + std::min(r, cy) * std::sin(angles[static_cast<std::size_t>(i)]);
    }
    for (int y = 0; y < res; ++y)
      for (int x = 0; x < res; ++x)
        if (inside_polygon(x, y, xs, ys))
          mask[static_cast<std::size_t>(y) * res + x] = true;
  } else {
    // Rotated ellipse with the requested area.
    const double theta = rng.uniform_real(0.0, std::numbers::pi);
    const double area = target_cover * res * res;
    const double ratio = rng.uniform_real(0.55, 1.0);  // b / a
    double a = std::sqrt(area / (std::numbers::pi * ratio));
    a = std::min(a, (res - 1) * 0.5);
    const double b = area / (std::numbers::pi * a);
    const double ct = std::cos(theta), st = std::sin(theta);
    for (int y = 0; y < res; ++y) {
      for (int x = 0; x < res; ++x) {
        const double dx = x - cx, dy = y - cy;
        const double u = ct * dx + st * dy;
        const double v = -st * dx + ct * dy;
        if (u * u / (a * a) + v * v / (b * b) <= 1.0)
          mask[static_cast<std::size_t>(y) * res + x] = true;
      }
    }
  }
  return mask;
}

Sprite make_procedural_sprite(RngStream rng, int res) {
  Sprite sprite = Image::rgba(res, res);
  // Retry the silhouette until the alpha mask covers 50-80% of the canvas.
  std::vector<bool> mask;
  for (int attempt = 0; attempt < 32; ++attempt) {
    const double target = rng.uniform_real(0.55, 0.75);
    mask = rasterize_base(rng, res, target);
    const double cover =
        static_cast<double>(std::count(mask.begin(), mask.end(), true)) /
        static_cast<double>(mask.size());
    if (cover >= 0.5 && cover <= 0.8) break;
    mask.clear();
  }
  if (mask.empty()) {
    // Fallback: centered disk with ~64% coverage.
    const double r2 = 0.64 * res * res / std::numbers::pi;
    const double c = (res - 1) * 0.5;
    mask.assign(static_cast<std::size_t>(res) * res, false);
    for (int y = 0; y < res; ++y)
      for (int x = 0; x < res; ++x)
        if ((x - c) * (x - c) + (y - c) * (y - c) <= r2)
          mask[static_cast<std::size_t>(y) * res + x] = true;
  }

  const double base_hue = rng.unit_real();
  const Rgb base = hsv_color(base_hue, rng.uniform_real(0.6, 1.0),
                             rng.uniform_real(0.6, 1.0));
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      if (!mask[static_cast<std::size_t>(y) * res + x]) continue;
      sprite.at(x, y, 0) = base.r;
      sprite.at(x, y, 1) = base.g;
      sprite.at(x, y, 2) = base.b;
      sprite.at(x, y, 3) = 255;
    }
  }

  // Overlay details inside the silhouette: ellipses and stripes in
  // contrasting colors.
  const int overlays = static_cast<int>(rng.uniform_int(2, 4));
  for (int k = 0; k < overlays; ++k) {
    const Rgb col = hsv_color(base_hue + rng.uniform_real(0.2, 0.8),
                              rng.uniform_real(0.5, 1.0),
                              rng.uniform_real(0.4, 1.0));
    if (rng.bernoulli(0.5)) {
      const double ox = rng.uniform_real(res * 0.2, res * 0.8);
      const double oy = rng.uniform_real(res * 0.2, res * 0.8);
      const double ra = rng.uniform_real(res * 0.08, res * 0.28);
      const double rb = rng.uniform_real(res * 0.08, res * 0.28);
      for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
          if (sprite.at(x, y, 3) == 0) continue;
          const double dx = (x - ox) / ra, dy = (y - oy) / rb;
          if (dx * dx + dy * dy <= 1.0) {
            sprite.at(x, y, 0) = col.r;
            sprite.at(x, y, 1) = col.g;
            sprite.at(x, y, 2) = col.b;
          }
        }
      }
    } else {
      // Stripe: band around a random direction through a random point.
      const double ang = rng.uniform_real(0.0, std::numbers::pi);
      const double nx = std::cos(ang), ny = std::sin(ang);
      const double c0 = rng.uniform_real(0.0, static_cast<double>(res));
      const double half = rng.uniform_real(1.0, res * 0.12);
      for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
          if (sprite.at(x, y, 3) == 0) continue;
          if (std::abs(nx * x + ny * y - c0) <= half) {
            sprite.at(x, y, 0) = col.r;
            sprite.at(x, y, 1) = col.g;
            sprite.at(x, y, 2) = col.b;
          }
        }
      }
    }
  }
  return sprite;
}

std::vector<std::string> sorted_files(const std::string& dir,
                                      const std::string& ext) {
  if (!fs::exists(dir)) throw IoError("no such directory: " + dir);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string p = e.path().string();
    std::string lower = e.path().extension().string();
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    if (lower == ext) names.push_back(p);
  }
  std::sort(names.begin(), names.end());
  return names;
}

constexpr std::size_t kCifarPixels = 3072;

void decode_cifar_record(const std::uint8_t* px, Image& img) {
  img = Image::rgb(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = px[static_cast<std::size_t>(c) * 1024 + y * 32 + x];
}

}  // namespace

std::vector<SpritePrototype> generate_procedural_sprites(int count,
                                                         std::uint64_t seed,
                                                         int resolution) {
  if (count <= 0) throw EmptyCatalog("procedural sprite count must be positive");
  if (resolution < 8) throw BadParameter("resolution too small for sprites");
  std::vector<SpritePrototype> out(static_cast<std::size_t>(count));
  RngStream root(seed, 0x70726f63ULL);  // "proc"
  for (int i = 0; i < count; ++i) {
    SpritePrototype& p = out[static_cast<std::size_t>(i)];
    p.id = i;
    p.provenance = SpriteProvenance::Procedural;
    p.sprite = make_procedural_sprite(root.derive(static_cast<std::uint64_t>(i)),
                                      resolution);
    canonicalize_sprite(p.sprite);
  }
  return out;
}

std::vector<SpritePrototype> generate_random_pattern_sprites(int count,
                                                             double size_fraction,
                                                             std::uint64_t seed,
                                                             int resolution) {
  if (count <= 0) throw EmptyCatalog("random pattern count must be positive");
  if (!(size_fraction > 0.0) || size_fraction > 1.0)
    throw BadParameter("size_fraction must be in (0, 1]");
  const int side = std::max(1, static_cast<int>(size_fraction * resolution));
  const int off = (resolution - side) / 2;
  std::vector<SpritePrototype> out(static_cast<std::size_t>(count));
  RngStream root(seed, 0x726e6470ULL);  // "rndp"
  for (int i = 0; i < count; ++i) {
    SpritePrototype& p = out[static_cast<std::size_t>(i)];
    p.id = i;
    p.provenance = SpriteProvenance::RandomPattern;
    p.sprite = Image::rgba(resolution, resolution);
    RngStream rng = root.derive(static_cast<std::uint64_t>(i));
    for (int y = off; y < off + side; ++y) {
      for (int x = off; x < off + side; ++x) {
        p.sprite.at(x, y, 0) = static_cast<std::uint8_t>(rng.uniform_below(256));
        p.sprite.at(x, y, 1) = static_cast<std::uint8_t>(rng.uniform_below(256));
        p.sprite.at(x, y, 2) = static_cast<std::uint8_t>(rng.uniform_below(256));
        p.sprite.at(x, y, 3) = 255;
      }
    }
  }
  return out;
}

BackgroundPool generate_backgrounds(int count, BackgroundMode mode,
                                    std::uint64_t seed, int resolution) {
  if (count <= 0) throw EmptyCatalog("background count must be positive");
  BackgroundPool pool;
  pool.images.resize(static_cast<std::size_t>(count));
  RngStream root(seed, 0x62616b67ULL);  // "bakg"
  constexpr int kLattice = 4;
  for (int i = 0; i < count; ++i) {
    SceneImage& img = pool.images[static_cast<std::size_t>(i)];
    img = Image::rgb(resolution, resolution);
    RngStream rng = root.derive(static_cast<std::uint64_t>(i));
    if (mode == BackgroundMode::UniformRandom) {
      for (auto& v : img.data)
        v = static_cast<std::uint8_t>(rng.uniform_below(256));
      continue;
    }
    // Value noise: random lattice, bilinear upsample.
    double lattice[kLattice][kLattice][3];
    for (int ly = 0; ly < kLattice; ++ly)
      for (int lx = 0; lx < kLattice; ++lx)
        for (int c = 0; c < 3; ++c)
          lattice[ly][lx][c] = rng.uniform_real(0.0, 255.0);
    const double step = resolution > 1
                            ? static_cast<double>(kLattice - 1) / (resolution - 1)
                            : 0.0;
    for (int y = 0; y < resolution; ++y) {
      const double fy = y * step;
      const int y0 = std::min(static_cast<int>(fy), kLattice - 2);
      const double wy = fy - y0;
      for (int x = 0; x < resolution; ++x) {
        const double fx = x * step;
        const int x0 = std::min(static_cast<int>(fx), kLattice - 2);
        const double wx = fx - x0;
        for (int c = 0; c < 3; ++c) {
          const double v = (1 - wy) * ((1 - wx) * lattice[y0][x0][c] +
                                       wx * lattice[y0][x0 + 1][c]) +
                           wy * ((1 - wx) * lattice[y0 + 1][x0][c] +
                                 wx * lattice[y0 + 1][x0 + 1][c]);
          img.at(x, y, c) = clamp_u8(v);
        }
      }
    }
  }
  return pool;
}

std::vector<SpritePrototype> import_sprites(const std::string& dir,
                                            int resolution) {
  const auto files = sorted_files(dir, ".png");
  if (files.empty()) throw EmptyCatalog("no PNG sprites in " + dir);
  std::vector<SpritePrototype> out;
  out.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    Image img = read_png(files[i]);
    if (img.channels == 3) {
      // No alpha channel: treat the whole image as opaque foreground.
      Image rgba = Image::rgba(img.width, img.height);
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
          rgba.at(x, y, 0) = img.at(x, y, 0);
          rgba.at(x, y, 1) = img.at(x, y, 1);
          rgba.at(x, y, 2) = img.at(x, y, 2);
          rgba.at(x, y, 3) = 255;
        }
      img = std::move(rgba);
    }
    if (img.width != resolution || img.height != resolution)
      img = resize_bilinear(img, resolution, resolution);
    canonicalize_sprite(img);
    out.push_back({static_cast<int>(i), std::move(img), SpriteProvenance::Imported});
  }
  return out;
}

BackgroundPool import_backgrounds(const std::string& dir, int resolution) {
  const auto files = sorted_files(dir, ".png");
  if (files.empty()) throw EmptyCatalog("no PNG backgrounds in " + dir);
  BackgroundPool pool;
  pool.images.reserve(files.size());
  for (const auto& f : files) {
    Image img = read_png(f);
    if (img.channels == 4) {
      Image rgb = Image::rgb(img.width, img.height);
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
          for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = img.at(x, y, c);
      img = std::move(rgb);
    }
    if (img.width != resolution || img.height != resolution)
      img = resize_bilinear(img, resolution, resolution);
    pool.images.push_back(std::move(img));
  }
  return pool;
}

LabeledImageSet import_cifar(const std::string& path) {
  std::vector<std::string> files;
  if (fs::is_directory(path)) {
    files = sorted_files(path, ".bin");
    if (files.empty()) throw EmptyCatalog("no .bin batches in " + path);
  } else if (fs::exists(path)) {
    files.push_back(path);
  } else {
    throw IoError("no such path: " + path);
  }

  LabeledImageSet set;
  bool layout_known = false;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open " + f);
    const std::streamsize len = in.tellg();
    in.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(len));
    in.read(reinterpret_cast<char*>(bytes.data()), len);

    const bool is10 = len % 3073 == 0 && len > 0;
    const bool is100 = len % 3074 == 0 && len > 0;
    if (!is10 && !is100)
      throw FormatError("file length " + std::to_string(len) +
                        " does not match a CIFAR record layout: " + f);
    const bool cifar100 = is100 && !is10;
    if (!layout_known) {
      set.cifar100 = cifar100;
      layout_known = true;
    } else if (set.cifar100 != cifar100) {
      throw FormatError("mixed CIFAR-10/100 batches in one import");
    }
    const std::size_t rec = set.cifar100 ? 3074 : 3073;
    const std::size_t n = static_cast<std::size_t>(len) / rec;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t* r = bytes.data() + i * rec;
      Image img;
      if (set.cifar100) {
        set.aux_labels.push_back(r[0]);  // coarse label
        set.labels.push_back(r[1]);      // fine label
        decode_cifar_record(r + 2, img);
      } else {
        set.labels.push_back(r[0]);
        decode_cifar_record(r + 1, img);
      }
      set.images.push_back(std::move(img));
    }
  }
  set.class_count = set.cifar100 ? 100 : 10;
  for (const int l : set.labels)
    if (l < 0 || l >= set.class_count)
      throw FormatError("CIFAR label out of range");
  return set;
}

std::vector<std::uint8_t> serialize_cifar(const LabeledImageSet& set) {
  const std::size_t rec = set.cifar100 ? 3074 : 3073;
  std::vector<std::uint8_t> out(rec * set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::uint8_t* r = out.data() + i * rec;
    std::size_t off = 0;
    if (set.cifar100) {
      r[off++] = static_cast<std::uint8_t>(set.aux_labels[i]);
      r[off++] = static_cast<std::uint8_t>(set.labels[i]);
    } else {
      r[off++] = static_cast<std::uint8_t>(set.labels[i]);
    }
    const Image& img = set.images[i];
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
          r[off + static_cast<std::size_t>(c) * 1024 + y * 32 + x] =
              img.at(x, y, c);
  }
  return out;
}

}  // namespace t2d
