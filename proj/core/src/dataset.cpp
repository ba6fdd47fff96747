// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#include "t2d/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "t2d/errors.hpp"
#include "t2d/parallel.hpp"
#include "t2d/png_io.hpp"
#include "t2d/sha256.hpp"

namespace fs = std::filesystem;

namespace t2d {

namespace {

constexpr char kMagic[4] = {'T', '2', 'D', '1'};
constexpr std::uint32_t kVersion = 1;

// Stream tags keep the per-purpose RNG families apart.
constexpr std::uint64_t kTagSample = 0x73616d70ULL;     // per-sample draws
constexpr std::uint64_t kTagMatched = 0x6d617463ULL;    // matched pairs
constexpr std::uint64_t kTagFree = 0x66726565ULL;       // unconstrained pairs
constexpr std::uint64_t kTagHybrid = 0x68796272ULL;     // hybrid pasting
constexpr std::uint64_t kTagSplit = 0x73706c74ULL;      // protocol splits
constexpr std::uint64_t kTagNested = 0x6e657374ULL;     // nested chains

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

std::uint64_t split_tag(Split s) {
  switch (s) {
    case Split::Train: return 0;
    case Split::Val: return 1;
    case Split::Test: return 2;
  }
  return 0;
}

// Paste an RGBA patch over an RGB image at (ox, oy), alpha compositing
// with round-to-nearest.
void paste_over(SceneImage& dst, const Sprite& patch, int ox, int oy) {
  for (int y = 0; y < patch.height; ++y) {
    const int ty = oy + y;
    if (ty < 0 || ty >= dst.height) continue;
    for (int x = 0; x < patch.width; ++x) {
      const int tx = ox + x;
      if (tx < 0 || tx >= dst.width) continue;
      const int a = patch.at(x, y, 3);
      if (a == 0) continue;
      for (int c = 0; c < 3; ++c) {
        const int fg = patch.at(x, y, c);
        const int bg = dst.at(tx, ty, c);
        dst.at(tx, ty, c) =
            static_cast<std::uint8_t>((a * fg + (255 - a) * bg + 127) / 255);
      }
    }
  }
}

// Draws one Transforms-2D sample: object ~ uniform, transform ~ P_T,
// background ~ uniform, composited scene. A null set means the
// no-transform baseline (untransformed objects).
SceneImage draw_scene(const DatasetConfig& cfg, const AssetBundle& assets,
                      const TransformSet* set, RngStream& rng, int& label) {
  const std::size_t oi = rng.uniform_below(cfg.objects.size());
  const std::size_t bi = rng.uniform_below(assets.backgrounds.size());
  std::vector<TransformSpec> specs;
  if (set) specs = sample_transform(*set, rng);
  label = static_cast<int>(oi);
  const int proto_id = cfg.objects[oi];
  return compose_scene(assets.sprites[static_cast<std::size_t>(proto_id)].sprite,
                       specs, assets.backgrounds.at(bi));
}

void check_assets(const DatasetConfig& cfg, const AssetBundle& assets) {
  if (cfg.objects.empty()) throw EmptyCatalog("dataset needs at least one object");
  if (assets.backgrounds.size() == 0) throw EmptyCatalog("empty background pool");
  for (const int id : cfg.objects)
    if (id < 0 || id >= static_cast<int>(assets.sprites.size()))
      throw BadParameter("object id out of catalog range");
}

std::vector<int> sample_distinct(RngStream& rng, int available, int count,
                                 const std::vector<int>& exclude) {
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(available));
  for (int i = 0; i < available; ++i)
    if (std::find(exclude.begin(), exclude.end(), i) == exclude.end())
      pool.push_back(i);
  if (static_cast<int>(pool.size()) < count)
    throw BadParameter("not enough objects available for the requested split");
  rng.shuffle(pool);
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

}  // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

AssetBundle AssetBundle::subset(const std::vector<int>& ids) const {
  AssetBundle out;
  out.backgrounds = backgrounds;
  out.sprites.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id < 0 || id >= static_cast<int>(sprites.size()))
      throw BadParameter("sprite id out of range in subset");
    SpritePrototype p = sprites[static_cast<std::size_t>(id)];
    p.id = static_cast<int>(i);
    out.sprites.push_back(std::move(p));
  }
  return out;
}

TransformSet DatasetConfig::transform_set() const {
  return TransformSet::canonical(transforms, mode, noise_scale);
}

Image DatasetArchive::image(std::size_t i) const {
  Image img(width, height, channels);
  std::memcpy(img.data.data(), sample(i), sample_bytes());
  return img;
}

void DatasetArchive::append(const Image& img, int label) {
  if (img.width != width || img.height != height || img.channels != channels)
    throw BadInput("archive/sample shape mismatch");
  labels.push_back(static_cast<std::uint16_t>(label));
  pixels.insert(pixels.end(), img.data.begin(), img.data.end());
}

std::vector<std::uint8_t> DatasetArchive::to_bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(40 + size() * (2 + sample_bytes()));
  out.insert(out.end(), kMagic, kMagic + 4);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(width));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(height));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(channels));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(class_count));
  put_le<std::uint64_t>(out, seed);
  const std::size_t bytes = sample_bytes();
  for (std::size_t i = 0; i < size(); ++i) {
    put_le<std::uint16_t>(out, labels[i]);
    const std::uint8_t* p = sample(i);
    out.insert(out.end(), p, p + bytes);
  }
  return out;
}

DatasetArchive DatasetArchive::from_bytes(const std::vector<std::uint8_t>& b) {
  if (b.size() < 40 || std::memcmp(b.data(), kMagic, 4) != 0)
    throw FormatError("not a T2D1 archive");
  const std::uint32_t version = get_le<std::uint32_t>(b.data() + 4);
  if (version != kVersion) throw FormatError("unsupported archive version");
  DatasetArchive a;
  a.width = static_cast<int>(get_le<std::uint32_t>(b.data() + 8));
  a.height = static_cast<int>(get_le<std::uint32_t>(b.data() + 12));
  a.channels = static_cast<int>(get_le<std::uint32_t>(b.data() + 16));
  const std::uint64_t n = get_le<std::uint64_t>(b.data() + 20);
  a.class_count = static_cast<int>(get_le<std::uint32_t>(b.data() + 28));
  a.seed = get_le<std::uint64_t>(b.data() + 32);
  if (a.width <= 0 || a.height <= 0 || a.channels <= 0)
    throw FormatError("bad archive dimensions");
  const std::size_t rec = 2 + a.sample_bytes();
  if (b.size() != 40 + n * rec)
    throw FormatError("archive record count does not match header");
  a.labels.reserve(n);
  a.pixels.reserve(n * a.sample_bytes());
  const std::uint8_t* p = b.data() + 40;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint16_t label = get_le<std::uint16_t>(p);
    if (label >= a.class_count)
      throw FormatError("archive label exceeds class count");
    a.labels.push_back(label);
    a.pixels.insert(a.pixels.end(), p + 2, p + rec);
    p += rec;
  }
  return a;
}

void DatasetArchive::save(const std::string& path) const {
  const auto bytes = to_bytes();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

DatasetArchive DatasetArchive::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open " + path);
  const std::streamsize len = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(len));
  in.read(reinterpret_cast<char*>(bytes.data()), len);
  if (!in) throw IoError("short read from " + path);
  return from_bytes(bytes);
}

void DatasetArchive::export_png(const std::string& dir) const {
  fs::create_directories(dir);
  std::vector<int> counter(static_cast<std::size_t>(class_count), 0);
  for (std::size_t i = 0; i < size(); ++i) {
    const int label = labels[i];
    const fs::path cls = fs::path(dir) / ("class_" + std::to_string(label));
    fs::create_directories(cls);
    const int idx = counter[static_cast<std::size_t>(label)]++;
    write_png((cls / (std::to_string(idx) + ".png")).string(), image(i));
  }
}

SceneImage compose_scene(const Sprite& object,
                         std::span<const TransformSpec> specs,
                         const SceneImage& background) {
  if (object.width > background.width || object.height > background.height)
    throw BadInput("sprite larger than background canvas");
  const Sprite fg = apply_to_sprite(specs, object);
  SceneImage out = background;
  paste_over(out, fg, 0, 0);
  return out;
}

DatasetArchive generate_dataset(const DatasetConfig& cfg,
                                const AssetBundle& assets, Split split,
                                unsigned n_threads) {
  check_assets(cfg, assets);
  const int n = cfg.samples_for(split);
  std::optional<TransformSet> set;
  if (!cfg.transforms.empty()) set = cfg.transform_set();

  DatasetArchive a;
  a.width = cfg.resolution;
  a.height = cfg.resolution;
  a.channels = 3;
  a.class_count = static_cast<int>(cfg.objects.size());
  a.seed = cfg.seed;
  a.labels.assign(static_cast<std::size_t>(n), 0);
  a.pixels.assign(static_cast<std::size_t>(n) * a.sample_bytes(), 0);

  const std::uint64_t tag = substream(kTagSample, split_tag(split));
  parallel_for(static_cast<std::size_t>(n), n_threads, [&](std::size_t i) {
    RngStream rng(cfg.seed, substream(tag, i));
    int label = 0;
    const SceneImage img =
        draw_scene(cfg, assets, set ? &*set : nullptr, rng, label);
    a.labels[i] = static_cast<std::uint16_t>(label);
    std::memcpy(a.pixels.data() + i * a.sample_bytes(), img.data.data(),
                a.sample_bytes());
  });
  return a;
}

std::string dataset_manifest(const DatasetConfig& cfg, Split split,
                             const std::string& archive_sha256) {
  nlohmann::json j;
  j["format"] = "t2d";
  j["version"] = kVersion;
  j["split"] = std::string(split_name(split));
  j["seed"] = cfg.seed;
  j["resolution"] = cfg.resolution;
  j["objects"] = cfg.objects;
  std::vector<std::string> names;
  if (!cfg.transforms.empty())
    for (const auto k : cfg.transform_set().kinds)
      names.emplace_back(kind_name(k));
  j["transforms"] = names;
  j["mode"] = cfg.mode == TransformMode::Object ? "object" : "augmentation";
  j["noise_scale"] =
      cfg.noise_scale == NoiseScale::Normalized ? "normalized" : "raw";
  j["samples"] = {{"train", cfg.n_train}, {"val", cfg.n_val}, {"test", cfg.n_test}};
  j["sha256"] = archive_sha256;
  return j.dump(2);
}

SplitProtocol derive_split(std::uint64_t master_seed, int available_objects,
                           int available_transforms, const SplitSizes& sizes) {
  if (sizes.n_train_objects < 1 || sizes.n_eval_objects < 1 ||
      sizes.n_transforms < 1)
    throw BadParameter("split sizes must be positive");
  if (available_objects < 2 * sizes.n_train_objects ||
      available_objects < sizes.n_train_objects + sizes.n_eval_objects)
    throw BadParameter("not enough objects for the requested split");
  if (available_transforms > kTransformKindCount || available_transforms < 1)
    throw BadParameter("available_transforms out of range");
  if (2 * sizes.n_transforms > available_transforms)
    throw BadParameter("not enough transform kinds for disjoint sets");

  RngStream rng(master_seed, kTagSplit);
  SplitProtocol p;

  std::vector<int> objects(static_cast<std::size_t>(available_objects));
  for (int i = 0; i < available_objects; ++i)
    objects[static_cast<std::size_t>(i)] = i;
  rng.shuffle(objects);
  p.objects_train.assign(objects.begin(),
                         objects.begin() + sizes.n_train_objects);
  p.objects_eval.assign(objects.begin() + sizes.n_train_objects,
                        objects.begin() + sizes.n_train_objects +
                            sizes.n_eval_objects);

  std::vector<int> kinds(static_cast<std::size_t>(available_transforms));
  for (int i = 0; i < available_transforms; ++i)
    kinds[static_cast<std::size_t>(i)] = i;
  rng.shuffle(kinds);
  for (int i = 0; i < sizes.n_transforms; ++i)
    p.transforms_train.push_back(
        static_cast<TransformKind>(kinds[static_cast<std::size_t>(i)]));
  for (int i = 0; i < sizes.n_transforms; ++i)
    p.transforms_eval.push_back(static_cast<TransformKind>(
        kinds[static_cast<std::size_t>(sizes.n_transforms + i)]));

  // Class-relationship variants of the training objects.
  const int n_sub = std::max(1, sizes.n_train_objects / 3);
  p.objects_subset.assign(p.objects_train.begin(),
                          p.objects_train.begin() + n_sub);
  p.objects_disjoint =
      sample_distinct(rng, available_objects, sizes.n_train_objects,
                      p.objects_train);
  p.objects_superset = p.objects_train;
  const auto extra = sample_distinct(rng, available_objects,
                                     sizes.n_train_objects, p.objects_train);
  p.objects_superset.insert(p.objects_superset.end(), extra.begin(), extra.end());
  return p;
}

std::vector<TransformSet> nested_transform_sets(int max_k, std::uint64_t seed,
                                                TransformMode mode) {
  if (max_k < 1 || max_k > kTransformKindCount)
    throw BadParameter("max_k must be in [1, 18]");
  RngStream rng(seed, kTagNested);
  std::vector<TransformKind> kinds = all_transform_kinds();
  rng.shuffle(kinds);
  std::vector<TransformSet> out;
  out.reserve(static_cast<std::size_t>(max_k));
  for (int k = 1; k <= max_k; ++k) {
    std::vector<TransformKind> prefix(kinds.begin(), kinds.begin() + k);
    out.push_back(TransformSet::canonical(std::move(prefix), mode));
  }
  return out;
}

DatasetArchive build_hybrid(const HybridConfig& cfg, std::uint64_t seed) {
  if (cfg.base == nullptr || cfg.base->size() == 0)
    throw BadParameter("hybrid config needs a base image set");
  if (cfg.prototypes.empty())
    throw BadParameter("hybrid config needs object prototypes");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0 || cfg.beta < 0.0 || cfg.beta > 1.0)
    throw BadParameter("alpha and beta must lie in [0, 1]");
  if (cfg.label_target == HybridLabels::ObjectClasses && cfg.beta < 1.0)
    throw BadParameter("object labels require beta = 1 (an object per image)");

  const LabeledImageSet& base = *cfg.base;
  const int w = base.images.front().width;
  const int h = base.images.front().height;
  const int k = static_cast<int>(cfg.prototypes.size());

  // Pre-scale prototypes to the paste size.
  std::vector<Sprite> small(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    small[static_cast<std::size_t>(i)] = resize_bilinear(
        cfg.prototypes[static_cast<std::size_t>(i)].sprite, cfg.paste_size,
        cfg.paste_size);

  DatasetArchive a;
  a.width = w;
  a.height = h;
  a.channels = 3;
  a.class_count =
      cfg.label_target == HybridLabels::BaseClasses ? base.class_count : k;
  a.seed = seed;
  a.labels.reserve(base.size());
  a.pixels.reserve(base.size() * a.sample_bytes());

  for (std::size_t i = 0; i < base.size(); ++i) {
    RngStream rng(seed, substream(kTagHybrid, i));
    SceneImage img = cfg.background == HybridBackground::Black
                         ? Image::rgb(w, h)
                         : base.images[i];
    int object_id = -1;
    if (rng.bernoulli(cfg.beta)) {
      object_id = rng.bernoulli(cfg.alpha)
                      ? base.labels[i] % k
                      : static_cast<int>(rng.uniform_below(
                            static_cast<std::uint64_t>(k)));
      int ox = w - cfg.paste_size, oy = 0;  // upper right
      if (cfg.paste_position == PastePosition::UniformRandom) {
        ox = static_cast<int>(rng.uniform_below(
            static_cast<std::uint64_t>(w - cfg.paste_size + 1)));
        oy = static_cast<int>(rng.uniform_below(
            static_cast<std::uint64_t>(h - cfg.paste_size + 1)));
      }
      paste_over(img, small[static_cast<std::size_t>(object_id)], ox, oy);
    }
    const int label = cfg.label_target == HybridLabels::BaseClasses
                          ? base.labels[i]
                          : object_id;
    a.append(img, label);
  }
  return a;
}

SensPairs generate_sens_pairs(const DatasetConfig& cfg,
                              const AssetBundle& assets, int n_pairs,
                              std::uint64_t seed) {
  if (n_pairs < 1) throw BadParameter("n_pairs must be at least 1");
  check_assets(cfg, assets);
  const TransformSet set = cfg.transform_set();

  SensPairs out;
  out.matched.first.resize(static_cast<std::size_t>(n_pairs));
  out.matched.second.resize(static_cast<std::size_t>(n_pairs));
  out.unconstrained.first.resize(static_cast<std::size_t>(n_pairs));
  out.unconstrained.second.resize(static_cast<std::size_t>(n_pairs));

  for (int i = 0; i < n_pairs; ++i) {
    // Matched: shared object and background, independent transforms.
    RngStream rng(seed, substream(kTagMatched, static_cast<std::uint64_t>(i)));
    const std::size_t oi = rng.uniform_below(cfg.objects.size());
    const std::size_t bi = rng.uniform_below(assets.backgrounds.size());
    const Sprite& sprite =
        assets.sprites[static_cast<std::size_t>(cfg.objects[oi])].sprite;
    const SceneImage& bg = assets.backgrounds.at(bi);
    const auto t1 = sample_transform(set, rng);
    const auto t2 = sample_transform(set, rng);
    out.matched.first[static_cast<std::size_t>(i)] = compose_scene(sprite, t1, bg);
    out.matched.second[static_cast<std::size_t>(i)] = compose_scene(sprite, t2, bg);

    // Unconstrained: two fully independent samples.
    RngStream rng2(seed, substream(kTagFree, static_cast<std::uint64_t>(i)));
    int label = 0;
    out.unconstrained.first[static_cast<std::size_t>(i)] =
        draw_scene(cfg, assets, &set, rng2, label);
    out.unconstrained.second[static_cast<std::size_t>(i)] =
        draw_scene(cfg, assets, &set, rng2, label);
  }
  return out;
}

SensPairs generate_augmentation_sens_pairs(const LabeledImageSet& base,
                                           const TransformSet& set,
                                           int n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) throw BadParameter("n_pairs must be at least 1");
  if (base.size() == 0) throw BadParameter("empty base image set");

  SensPairs out;
  out.matched.first.resize(static_cast<std::size_t>(n_pairs));
  out.matched.second.resize(static_cast<std::size_t>(n_pairs));
  out.unconstrained.first.resize(static_cast<std::size_t>(n_pairs));
  out.unconstrained.second.resize(static_cast<std::size_t>(n_pairs));

  for (int i = 0; i < n_pairs; ++i) {
    RngStream rng(seed, substream(kTagMatched, static_cast<std::uint64_t>(i)));
    const SceneImage& img = base.images[rng.uniform_below(base.size())];
    const auto t1 = sample_transform(set, rng);
    const auto t2 = sample_transform(set, rng);
    out.matched.first[static_cast<std::size_t>(i)] = apply_to_image(t1, img);
    out.matched.second[static_cast<std::size_t>(i)] = apply_to_image(t2, img);

    RngStream rng2(seed, substream(kTagFree, static_cast<std::uint64_t>(i)));
    const SceneImage& a = base.images[rng2.uniform_below(base.size())];
    const auto ta = sample_transform(set, rng2);
    out.unconstrained.first[static_cast<std::size_t>(i)] = apply_to_image(ta, a);
    const SceneImage& b = base.images[rng2.uniform_below(base.size())];
    const auto tb = sample_transform(set, rng2);
    out.unconstrained.second[static_cast<std::size_t>(i)] = apply_to_image(tb, b);
  }
  return out;
}

SensPairs generate_hybrid_sens_pairs(const LabeledImageSet& base,
                                     const std::vector<SpritePrototype>& protos,
                                     HybridVary vary, int n_pairs,
                                     std::uint64_t seed, int paste_size) {
  if (n_pairs < 1) throw BadParameter("n_pairs must be at least 1");
  if (base.size() == 0 || protos.empty())
    throw BadParameter("hybrid pairs need base images and prototypes");
  const int w = base.images.front().width;
  const int h = base.images.front().height;

  std::vector<Sprite> small(protos.size());
  for (std::size_t i = 0; i < protos.size(); ++i)
    small[i] = resize_bilinear(protos[i].sprite, paste_size, paste_size);

  auto paste_at = [&](const SceneImage& bg, std::size_t obj, int ox, int oy) {
    SceneImage img = bg;
    paste_over(img, small[obj], ox, oy);
    return img;
  };

  SensPairs out;
  out.matched.first.resize(static_cast<std::size_t>(n_pairs));
  out.matched.second.resize(static_cast<std::size_t>(n_pairs));
  out.unconstrained.first.resize(static_cast<std::size_t>(n_pairs));
  out.unconstrained.second.resize(static_cast<std::size_t>(n_pairs));

  for (int i = 0; i < n_pairs; ++i) {
    RngStream rng(seed, substream(kTagMatched, static_cast<std::uint64_t>(i)));
    const int ox = static_cast<int>(
        rng.uniform_below(static_cast<std::uint64_t>(w - paste_size + 1)));
    const int oy = static_cast<int>(
        rng.uniform_below(static_cast<std::uint64_t>(h - paste_size + 1)));
    if (vary == HybridVary::Background) {
      const std::size_t obj = rng.uniform_below(small.size());
      const std::size_t b1 = rng.uniform_below(base.size());
      const std::size_t b2 = rng.uniform_below(base.size());
      out.matched.first[static_cast<std::size_t>(i)] =
          paste_at(base.images[b1], obj, ox, oy);
      out.matched.second[static_cast<std::size_t>(i)] =
          paste_at(base.images[b2], obj, ox, oy);
    } else {
      const std::size_t bg = rng.uniform_below(base.size());
      const std::size_t o1 = rng.uniform_below(small.size());
      const std::size_t o2 = rng.uniform_below(small.size());
      out.matched.first[static_cast<std::size_t>(i)] =
          paste_at(base.images[bg], o1, ox, oy);
      out.matched.second[static_cast<std::size_t>(i)] =
          paste_at(base.images[bg], o2, ox, oy);
    }

    RngStream rng2(seed, substream(kTagFree, static_cast<std::uint64_t>(i)));
    for (int side = 0; side < 2; ++side) {
      const std::size_t bg = rng2.uniform_below(base.size());
      const std::size_t obj = rng2.uniform_below(small.size());
      const int x = static_cast<int>(
          rng2.uniform_below(static_cast<std::uint64_t>(w - paste_size + 1)));
      const int y = static_cast<int>(
          rng2.uniform_below(static_cast<std::uint64_t>(h - paste_size + 1)));
      auto& stream = side == 0 ? out.unconstrained.first : out.unconstrained.second;
      stream[static_cast<std::size_t>(i)] = paste_at(base.images[bg], obj, x, y);
    }
  }
  return out;
}

}  // namespace t2d
