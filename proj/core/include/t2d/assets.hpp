// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "t2d/image.hpp"

namespace t2d {

inline constexpr int kDefaultResolution = 32;
inline constexpr int kDefaultSpriteBudget = 61;
inline constexpr int kDefaultBackgroundCount = 867;

enum class SpriteProvenance { Procedural, RandomPattern, Imported };

// One foreground prototype; each prototype defines one class.
struct SpritePrototype {
  int id = 0;
  Sprite sprite;
  SpriteProvenance provenance = SpriteProvenance::Procedural;
};

// Shared pool of 3-channel background canvases.
struct BackgroundPool {
  std::vector<SceneImage> images;

  std::size_t size() const { return images.size(); }
  const SceneImage& at(std::size_t i) const { return images[i]; }
};

enum class BackgroundMode { SmoothNoise, UniformRandom };

// Flat labeled image collection (CIFAR batches and generated data).
struct LabeledImageSet {
  std::vector<Image> images;
  std::vector<int> labels;
  int class_count = 0;
  // Set for CIFAR-100 loads: the per-record coarse label byte, kept so
  // re-serialization is lossless.
  std::vector<int> aux_labels;
  bool cifar100 = false;

  std::size_t size() const { return images.size(); }
};

// Deterministic stand-ins for photographic foreground objects: layered
// colored ellipses/polygons with an alpha mask covering 50-80% of the
// canvas. Same (count, seed, resolution) gives bit-identical sprites.
std::vector<SpritePrototype> generate_procedural_sprites(
    int count, std::uint64_t seed, int resolution = kDefaultResolution);

// Square patterns with i.i.d. uniform RGB and opaque alpha inside the
// square; side = floor(size_fraction * resolution), centered.
std::vector<SpritePrototype> generate_random_pattern_sprites(
    int count, double size_fraction, std::uint64_t seed,
    int resolution = kDefaultResolution);

// SmoothNoise: low-frequency colored fields (4x4 value-noise lattice,
// bilinear upsample). UniformRandom: i.i.d. uniform pixels.
BackgroundPool generate_backgrounds(int count, BackgroundMode mode,
                                    std::uint64_t seed,
                                    int resolution = kDefaultResolution);

enum class ImportKind { Sprites, Backgrounds, CifarBinary };

// Loads sprite PNGs from a directory in lexicographic order, rescaled to
// the working resolution.
std::vector<SpritePrototype> import_sprites(const std::string& dir,
                                            int resolution = kDefaultResolution);

// Loads background PNGs from a directory, rescaled to the working
// resolution.
BackgroundPool import_backgrounds(const std::string& dir,
                                  int resolution = kDefaultResolution);

// Loads CIFAR binary batches. `path` may be one .bin file or a directory
// (all *.bin files, lexicographic order). Detects the CIFAR-10 record
// layout (1 label byte + 3072 pixel bytes) and the CIFAR-100 layout
// (coarse + fine label bytes + 3072 pixel bytes; the fine label is used).
LabeledImageSet import_cifar(const std::string& path);

// Re-serializes a loaded CIFAR set to the original binary record layout.
std::vector<std::uint8_t> serialize_cifar(const LabeledImageSet& set);

}  // namespace t2d
