// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "t2d/assets.hpp"
#include "t2d/image.hpp"
#include "t2d/rng.hpp"
#include "t2d/transforms.hpp"

namespace t2d {

enum class Split { Train, Val, Test };
std::string_view split_name(Split s);

// Foreground prototypes plus the shared background pool.
struct AssetBundle {
  std::vector<SpritePrototype> sprites;
  BackgroundPool backgrounds;

  // Restricted view: keeps only the prototypes with the given ids
  // (relabeled densely in the given order).
  AssetBundle subset(const std::vector<int>& ids) const;
};

struct DatasetConfig {
  std::vector<int> objects;          // prototype ids, label = position
  std::vector<TransformKind> transforms;
  TransformMode mode = TransformMode::Object;
  NoiseScale noise_scale = NoiseScale::Normalized;
  int n_train = 50000;
  int n_val = 10000;
  int n_test = 10000;
  int resolution = kDefaultResolution;
  std::uint64_t seed = 0;

  int samples_for(Split s) const {
    return s == Split::Train ? n_train : s == Split::Val ? n_val : n_test;
  }
  // Composition order: geometric, then photometric, then corruption.
  TransformSet transform_set() const;
};

// Packed labeled image collection. On-disk layout (little-endian):
//   magic "T2D1" | u32 version | u32 width | u32 height | u32 channels |
//   u64 sample_count | u32 class_count | u64 seed |
//   records: u16 label + width*height*channels raw bytes each.
struct DatasetArchive {
  int width = 0;
  int height = 0;
  int channels = 3;
  int class_count = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint16_t> labels;
  std::vector<std::uint8_t> pixels;  // concatenated records, row-major

  std::size_t size() const { return labels.size(); }
  std::size_t sample_bytes() const {
    return static_cast<std::size_t>(width) * height * channels;
  }
  const std::uint8_t* sample(std::size_t i) const {
    return pixels.data() + i * sample_bytes();
  }
  Image image(std::size_t i) const;
  void append(const Image& img, int label);

  std::vector<std::uint8_t> to_bytes() const;
  static DatasetArchive from_bytes(const std::vector<std::uint8_t>& bytes);
  void save(const std::string& path) const;           // writes .t2d
  static DatasetArchive load(const std::string& path);

  // One PNG per sample under dir/class_<label>/<index>.png.
  void export_png(const std::string& dir) const;
};

// Alpha-composites the transformed sprite over the background:
// out = alpha * fg + (1 - alpha) * bg, rounded to nearest.
SceneImage compose_scene(const Sprite& object,
                         std::span<const TransformSpec> specs,
                         const SceneImage& background);

// Draws every sample of one split. Each sample's randomness derives from
// (config seed, split, sample index), so any thread layout produces
// identical bytes. n_threads = 0 uses all hardware threads.
DatasetArchive generate_dataset(const DatasetConfig& cfg,
                                const AssetBundle& assets, Split split,
                                unsigned n_threads = 0);

// Serialized sidecar describing a generated archive (JSON).
std::string dataset_manifest(const DatasetConfig& cfg, Split split,
                             const std::string& archive_sha256);

// Disjoint object and transform splits plus the class-relationship
// variants of the training objects.
struct SplitProtocol {
  std::vector<int> objects_train;    // O_t
  std::vector<int> objects_eval;     // O_e, disjoint from O_t
  std::vector<TransformKind> transforms_train;  // T_t
  std::vector<TransformKind> transforms_eval;   // T_e, disjoint from T_t
  std::vector<int> objects_subset;    // subset of O_t, |O_t|/3
  std::vector<int> objects_disjoint;  // disjoint from O_t, same size
  std::vector<int> objects_superset;  // superset of O_t, 2x size
};

struct SplitSizes {
  int n_train_objects = 30;
  int n_eval_objects = 30;
  int n_transforms = 3;
};

// Uniformly samples the protocol sets; deterministic in master_seed.
// available_objects must cover the superset (2 * n_train_objects).
SplitProtocol derive_split(std::uint64_t master_seed, int available_objects,
                           int available_transforms = kTransformKindCount,
                           const SplitSizes& sizes = {});

// Inclusion chain T_1 c T_2 c ... c T_max_k with |T_i| = i, kinds drawn
// without replacement.
std::vector<TransformSet> nested_transform_sets(int max_k, std::uint64_t seed,
                                                TransformMode mode = TransformMode::Object);

enum class HybridLabels { BaseClasses, ObjectClasses };
enum class PastePosition { UniformRandom, UpperRightCorner };
enum class HybridBackground { BaseImages, Black };

// Base images with small object prototypes pasted on them.
// alpha: probability that the pasted object is the one linked to the
// base label (else uniform); beta: probability that anything is pasted.
struct HybridConfig {
  const LabeledImageSet* base = nullptr;
  std::vector<SpritePrototype> prototypes;  // expected count: 10
  double alpha = 0.0;
  double beta = 1.0;
  HybridLabels label_target = HybridLabels::BaseClasses;
  PastePosition paste_position = PastePosition::UniformRandom;
  HybridBackground background = HybridBackground::BaseImages;
  int paste_size = 14;
};

DatasetArchive build_hybrid(const HybridConfig& cfg, std::uint64_t seed);

// Pair streams for the sensitivity estimator.
struct PairStream {
  std::vector<SceneImage> first;
  std::vector<SceneImage> second;
  std::size_t size() const { return first.size(); }
};

struct SensPairs {
  PairStream matched;        // same object and background, fresh transforms
  PairStream unconstrained;  // fully independent draws
};

SensPairs generate_sens_pairs(const DatasetConfig& cfg,
                              const AssetBundle& assets, int n_pairs,
                              std::uint64_t seed);

// Pair streams over full images with transforms applied as augmentations:
// matched pairs share the base image, unconstrained pairs are independent.
SensPairs generate_augmentation_sens_pairs(const LabeledImageSet& base,
                                           const TransformSet& set,
                                           int n_pairs, std::uint64_t seed);

enum class HybridVary { Background, Object };

// Pair streams over hybrid images for the irrelevant-feature sensitivity
// columns: vary one factor, hold the other fixed.
SensPairs generate_hybrid_sens_pairs(const LabeledImageSet& base,
                                     const std::vector<SpritePrototype>& protos,
                                     HybridVary vary, int n_pairs,
                                     std::uint64_t seed, int paste_size = 14);

}  // namespace t2d
