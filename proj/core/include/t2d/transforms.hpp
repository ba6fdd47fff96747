// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "t2d/image.hpp"
#include "t2d/rng.hpp"

namespace t2d {

// The 18 transformation types, in canonical composition order:
// geometric, then photometric, then corruption.
enum class TransformKind : int {
  // geometric
  Rotate = 0,
  Scale,
  Shear,
  VFlip,
  HFlip,
  Translate,
  // photometric
  Hue,
  Brightness,
  Grayscale,
  Posterize,
  Invert,
  Sharpen,
  // corruption
  Blur,
  Noise,
  Pixelate,
  Elastic,
  Erasing,
  Contrast,
};

inline constexpr int kTransformKindCount = 18;

enum class TransformCategory { Geometric, Photometric, Corruption };

TransformCategory category(TransformKind kind);
std::string_view kind_name(TransformKind kind);
TransformKind kind_from_name(std::string_view name);  // throws BadParameter
std::vector<TransformKind> all_transform_kinds();

// Object mode positions the sprite anywhere on the canvas; augmentation
// mode (for full-image pipelines) replaces that with offset translation
// of up to +/-30% of the image size per axis.
enum class TransformMode { Object, Augmentation };

// Scale for the additive Gaussian noise transform. The default adds
// sigma=1 noise in normalized [0,1] space; Raw adds it on the raw
// 0..255 scale instead.
enum class NoiseScale { Normalized, Raw };

// One concrete sampled transformation. Parameter meaning by kind:
//   Rotate      p0 = angle in degrees, [0, 360)
//   Scale       p0 = size factor, [0.4, 1.0]
//   Shear       p0/p1 = x/y shear angle in degrees, [-50, 50]
//   Translate   placement=true:  p0/p1 = placement fractions in [0, 1)
//               placement=false: p0/p1 = offset as fraction of size
//   Hue         p0 = hue shift as fraction of the color cycle, [-0.5, 0.5]
//   Brightness  p0 = additive offset in normalized [0,1] space, [-1, 1]
//   Blur        p0 = Gaussian sigma, [0.1, 1.5] (kernel size 7)
//   Noise       p0 = sigma, p1 = 0 normalized / 1 raw scale
//   Elastic     p0 = distortion strength on a 224-pixel scale
//   Erasing     p0/p1 = square position fractions in [0, 1)
//   Contrast    p0 = contrast delta, [-1, 1]
// Bernoulli-gated kinds (flips, grayscale, posterize, invert, sharpen,
// noise, pixelate, elastic, erasing) use `enabled`; the rest are always
// enabled. Noise and elastic carry a field_seed for their pixel fields.
struct TransformSpec {
  TransformKind kind = TransformKind::Rotate;
  double p0 = 0.0;
  double p1 = 0.0;
  bool enabled = true;
  bool placement = false;
  std::uint64_t field_seed = 0;
};

// An ordered set of distinct transformation types with a sampling mode.
// The stored order is the composition order.
struct TransformSet {
  std::vector<TransformKind> kinds;
  TransformMode mode = TransformMode::Object;
  NoiseScale noise_scale = NoiseScale::Normalized;

  // Throws BadParameter on an empty or duplicated kind list.
  TransformSet(std::vector<TransformKind> kinds, TransformMode mode,
               NoiseScale noise_scale = NoiseScale::Normalized);

  // Same, but first sorts the kinds into canonical composition order
  // (geometric, photometric, corruption).
  static TransformSet canonical(std::vector<TransformKind> kinds,
                                TransformMode mode,
                                NoiseScale noise_scale = NoiseScale::Normalized);

  std::size_t size() const { return kinds.size(); }
  bool contains(TransformKind k) const;
};

// Draws one concrete transformation per kind in set order. Distributions
// follow the dataset family's fixed per-type parameter ranges.
std::vector<TransformSpec> sample_transform(const TransformSet& set,
                                            RngStream& rng);

// Applies specs left-to-right to an RGBA sprite. Geometric transforms
// resample color and alpha jointly (out-of-bounds reads are transparent);
// photometric and corruption transforms touch color only and preserve
// alpha, except erasing which clears it inside the erased square.
// The result is in canonical sprite form.
Sprite apply_to_sprite(std::span<const TransformSpec> specs, const Sprite& s);

// Same kernels on a 3-channel image; out-of-bounds regions fill black.
// Placement-mode translation specs are rejected (BadInput).
SceneImage apply_to_image(std::span<const TransformSpec> specs,
                          const SceneImage& img);

// True when the spec is a no-op by parameter value (disabled gate,
// zero rotation, unit scale, ...).
bool is_identity(const TransformSpec& spec);

// Exposed for direct-convolution oracles and kernel tests.
std::vector<double> gaussian_kernel(int size, double sigma);
// Separable convolution of a single channel plane with symmetric
// (edge-repeating) boundary reflection.
void convolve_separable(std::vector<double>& plane, int w, int h,
                        const std::vector<double>& kernel);

}  // namespace t2d
