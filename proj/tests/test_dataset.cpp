// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "t2d/dataset.hpp"
#include "t2d/errors.hpp"
#include "t2d/experiments.hpp"
#include "t2d/sha256.hpp"

using namespace t2d;
namespace fs = std::filesystem;

namespace {

AssetBundle tiny_assets(std::uint64_t seed, int sprites = 4, int backgrounds = 3) {
  AssetBundle b;
  b.sprites = generate_procedural_sprites(sprites, seed);
  b.backgrounds = generate_backgrounds(backgrounds, BackgroundMode::SmoothNoise,
                                       seed + 1);
  return b;
}

DatasetConfig tiny_config(std::uint64_t seed) {
  DatasetConfig cfg;
  cfg.objects = {0, 1, 2};
  cfg.transforms = {TransformKind::HFlip};
  cfg.n_train = 64;
  cfg.n_val = 16;
  cfg.n_test = 16;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("compose_scene: transparent, opaque and half-alpha pixels") {
  const SceneImage bg = generate_backgrounds(1, BackgroundMode::SmoothNoise, 2).images[0];

  Sprite transparent = Image::rgba(32, 32);
  CHECK(compose_scene(transparent, {}, bg) == bg);

  Sprite opaque = Image::rgba(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      opaque.at(x, y, 0) = 77;
      opaque.at(x, y, 1) = 12;
      opaque.at(x, y, 2) = 240;
      opaque.at(x, y, 3) = 255;
    }
  const SceneImage all_fg = compose_scene(opaque, {}, bg);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      CHECK(all_fg.at(x, y, 0) == 77);
      CHECK(all_fg.at(x, y, 1) == 12);
      CHECK(all_fg.at(x, y, 2) == 240);
    }

  // alpha=128, fg=200 over bg=0 -> round(200*128/255) = 100.
  Sprite half = Image::rgba(32, 32);
  half.at(0, 0, 0) = 200;
  half.at(0, 0, 3) = 128;
  SceneImage black = Image::rgb(32, 32);
  const SceneImage mixed = compose_scene(half, {}, black);
  CHECK(mixed.at(0, 0, 0) == 100);
}

TEST_CASE("generated archives are byte-identical across runs and threads") {
  const AssetBundle assets = tiny_assets(10);
  const DatasetConfig cfg = tiny_config(77);
  const DatasetArchive a = generate_dataset(cfg, assets, Split::Train, 1);
  const DatasetArchive b = generate_dataset(cfg, assets, Split::Train, 2);
  const DatasetArchive c = generate_dataset(cfg, assets, Split::Train, 0);
  CHECK(a.to_bytes() == b.to_bytes());
  CHECK(a.to_bytes() == c.to_bytes());

  // Splits draw from distinct streams.
  const DatasetArchive val = generate_dataset(cfg, assets, Split::Val, 1);
  CHECK(val.size() == 16);
  CHECK_FALSE(a.to_bytes() == val.to_bytes());
}

TEST_CASE("labels cover the declared classes roughly uniformly") {
  AssetBundle assets;
  assets.sprites = generate_procedural_sprites(30, 5);
  assets.backgrounds = generate_backgrounds(50, BackgroundMode::SmoothNoise, 6);
  DatasetConfig cfg;
  for (int i = 0; i < 30; ++i) cfg.objects.push_back(i);
  cfg.transforms = {TransformKind::HFlip, TransformKind::Posterize,
                    TransformKind::Invert};
  cfg.n_train = 50000;
  cfg.seed = 3;
  const DatasetArchive a = generate_dataset(cfg, assets, Split::Train, 0);
  REQUIRE(a.size() == 50000);
  REQUIRE(a.class_count == 30);
  std::vector<int> hist(30, 0);
  for (const auto l : a.labels) ++hist[l];
  // Each class within 5 sigma of 50000/30 under Binomial(50000, 1/30).
  const double expected = 50000.0 / 30.0;
  const double sigma = std::sqrt(50000.0 * (1.0 / 30.0) * (29.0 / 30.0));
  for (const int h : hist) CHECK(std::abs(h - expected) < 5.0 * sigma);
}

TEST_CASE("archive serialization round-trips byte-identically") {
  const AssetBundle assets = tiny_assets(11);
  const DatasetArchive a =
      generate_dataset(tiny_config(5), assets, Split::Train, 1);
  const auto bytes = a.to_bytes();
  const DatasetArchive b = DatasetArchive::from_bytes(bytes);
  CHECK(b.to_bytes() == bytes);

  const fs::path path = fs::temp_directory_path() / "t2d_roundtrip.t2d";
  a.save(path.string());
  CHECK(DatasetArchive::load(path.string()).to_bytes() == bytes);

  // Corrupt: truncated record stream.
  auto truncated = bytes;
  truncated.resize(truncated.size() - 1);
  CHECK_THROWS_AS(DatasetArchive::from_bytes(truncated), FormatError);

  // Corrupt: label out of range.
  auto bad_label = bytes;
  bad_label[40] = 0xff;
  bad_label[41] = 0xff;
  CHECK_THROWS_AS(DatasetArchive::from_bytes(bad_label), FormatError);
}

TEST_CASE("png export writes class directories") {
  const AssetBundle assets = tiny_assets(12);
  DatasetConfig cfg = tiny_config(6);
  cfg.n_train = 8;
  const DatasetArchive a = generate_dataset(cfg, assets, Split::Train, 1);
  const fs::path dir = fs::temp_directory_path() / "t2d_png_export";
  fs::remove_all(dir);
  a.export_png(dir.string());
  std::size_t count = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) ++count;
  CHECK(count == 8);
}

TEST_CASE("empty object lists and bad ids are rejected") {
  const AssetBundle assets = tiny_assets(13);
  DatasetConfig cfg = tiny_config(7);
  cfg.objects = {};
  CHECK_THROWS_AS(generate_dataset(cfg, assets, Split::Train, 1), EmptyCatalog);
  cfg.objects = {99};
  CHECK_THROWS_AS(generate_dataset(cfg, assets, Split::Train, 1), BadParameter);
}

TEST_CASE("derive_split honors the paper protocol at default sizes") {
  const SplitProtocol p = derive_split(1, 61, 18);
  CHECK(p.objects_train.size() == 30);
  CHECK(p.objects_eval.size() == 30);
  CHECK(p.transforms_train.size() == 3);
  CHECK(p.transforms_eval.size() == 3);
  CHECK(p.objects_subset.size() == 10);  // |O_t| / 3
  CHECK(p.objects_disjoint.size() == 30);
  CHECK(p.objects_superset.size() == 60);
}

TEST_CASE("split invariants hold over a thousand seeds") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const SplitProtocol p = derive_split(seed, 61, 18);
    std::set<int> train(p.objects_train.begin(), p.objects_train.end());
    std::set<int> eval(p.objects_eval.begin(), p.objects_eval.end());
    REQUIRE(train.size() == 30);
    REQUIRE(eval.size() == 30);
    for (const int o : eval) REQUIRE(train.count(o) == 0);

    std::set<TransformKind> tt(p.transforms_train.begin(), p.transforms_train.end());
    std::set<TransformKind> te(p.transforms_eval.begin(), p.transforms_eval.end());
    REQUIRE(tt.size() == 3);
    REQUIRE(te.size() == 3);
    for (const auto t : te) REQUIRE(tt.count(t) == 0);

    // Subset lies inside O_t; disjoint avoids it; superset contains it.
    for (const int o : p.objects_subset) REQUIRE(train.count(o) == 1);
    for (const int o : p.objects_disjoint) REQUIRE(train.count(o) == 0);
    std::set<int> sup(p.objects_superset.begin(), p.objects_superset.end());
    REQUIRE(sup.size() == 60);
    for (const int o : p.objects_train) REQUIRE(sup.count(o) == 1);
  }
}

TEST_CASE("transform splits differ across seeds") {
  std::set<std::string> keys;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SplitProtocol p = derive_split(seed, 61, 18);
    std::string key;
    auto add = [&key](const std::vector<TransformKind>& kinds) {
      std::vector<int> v;
      for (const auto k : kinds) v.push_back(static_cast<int>(k));
      std::sort(v.begin(), v.end());
      for (const int i : v) key += std::to_string(i) + ",";
      key += "|";
    };
    add(p.transforms_train);
    add(p.transforms_eval);
    keys.insert(key);
  }
  CHECK(keys.size() >= 95);
}

TEST_CASE("derive_split rejects undersized catalogs") {
  CHECK_THROWS_AS(derive_split(1, 59, 18), BadParameter);
  CHECK_THROWS_AS(derive_split(1, 61, 5), BadParameter);  // 2*3 > 5
}

TEST_CASE("nested transform sets form an inclusion chain") {
  const auto sets = nested_transform_sets(8, 4);
  REQUIRE(sets.size() == 8);
  for (int i = 0; i < 8; ++i) {
    CHECK(sets[static_cast<std::size_t>(i)].size() ==
          static_cast<std::size_t>(i) + 1);
    if (i > 0) {
      for (const auto k : sets[static_cast<std::size_t>(i - 1)].kinds)
        CHECK(sets[static_cast<std::size_t>(i)].contains(k));
    }
  }
  CHECK(nested_transform_sets(1, 4).size() == 1);
  // Deterministic in the seed.
  const auto again = nested_transform_sets(8, 4);
  for (int i = 0; i < 8; ++i)
    CHECK(sets[static_cast<std::size_t>(i)].kinds ==
          again[static_cast<std::size_t>(i)].kinds);
  CHECK_THROWS_AS(nested_transform_sets(0, 4), BadParameter);
  CHECK_THROWS_AS(nested_transform_sets(19, 4), BadParameter);
}

TEST_CASE("hybrid: beta=0 reproduces the base images bit-exactly") {
  const AssetBundle assets = tiny_assets(14, 10);
  DatasetConfig base_cfg = tiny_config(8);
  base_cfg.objects = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  base_cfg.n_train = 40;
  const LabeledImageSet base = archive_to_labeled(
      generate_dataset(base_cfg, assets, Split::Train, 1));

  HybridConfig hc;
  hc.base = &base;
  hc.prototypes = assets.sprites;
  hc.beta = 0.0;
  const DatasetArchive out = build_hybrid(hc, 9);
  REQUIRE(out.size() == 40);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out.image(i) == base.images[i]);
    CHECK(out.labels[i] == base.labels[i]);
  }
}

TEST_CASE("hybrid: alpha=1 ties the object to the base label") {
  const AssetBundle assets = tiny_assets(15, 10);
  DatasetConfig base_cfg = tiny_config(10);
  base_cfg.objects = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  base_cfg.n_train = 60;
  const LabeledImageSet base = archive_to_labeled(
      generate_dataset(base_cfg, assets, Split::Train, 1));

  HybridConfig hc;
  hc.base = &base;
  hc.prototypes = assets.sprites;
  hc.alpha = 1.0;
  hc.beta = 1.0;
  hc.label_target = HybridLabels::ObjectClasses;
  const DatasetArchive out = build_hybrid(hc, 11);
  // Perfect correlation: the object label equals the base label.
  for (std::size_t i = 0; i < out.size(); ++i)
    CHECK(out.labels[i] == base.labels[i] % 10);
}

TEST_CASE("hybrid: object labels demand full availability") {
  const AssetBundle assets = tiny_assets(16, 10);
  DatasetConfig base_cfg = tiny_config(12);
  base_cfg.n_train = 10;
  const LabeledImageSet base = archive_to_labeled(
      generate_dataset(base_cfg, assets, Split::Train, 1));
  HybridConfig hc;
  hc.base = &base;
  hc.prototypes = assets.sprites;
  hc.beta = 0.5;
  hc.label_target = HybridLabels::ObjectClasses;
  CHECK_THROWS_AS(build_hybrid(hc, 1), BadParameter);
}

TEST_CASE("hybrid: upper-right pasting only touches that corner") {
  const AssetBundle assets = tiny_assets(17, 10);
  DatasetConfig base_cfg = tiny_config(13);
  base_cfg.objects = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  base_cfg.n_train = 20;
  const LabeledImageSet base = archive_to_labeled(
      generate_dataset(base_cfg, assets, Split::Train, 1));
  HybridConfig hc;
  hc.base = &base;
  hc.prototypes = assets.sprites;
  hc.beta = 1.0;
  hc.paste_position = PastePosition::UpperRightCorner;
  const DatasetArchive out = build_hybrid(hc, 14);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Image img = out.image(i);
    const Image& b = base.images[i];
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        if (x >= 32 - 14 && y < 14) continue;  // paste region
        for (int c = 0; c < 3; ++c) {
          REQUIRE(img.at(x, y, c) == b.at(x, y, c));
        }
      }
  }
}

TEST_CASE("hybrid: black background variant ignores base pixels") {
  const AssetBundle assets = tiny_assets(18, 10);
  DatasetConfig base_cfg = tiny_config(15);
  base_cfg.objects = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  base_cfg.n_train = 10;
  const LabeledImageSet base = archive_to_labeled(
      generate_dataset(base_cfg, assets, Split::Train, 1));
  HybridConfig hc;
  hc.base = &base;
  hc.prototypes = assets.sprites;
  hc.beta = 1.0;
  hc.label_target = HybridLabels::ObjectClasses;
  hc.background = HybridBackground::Black;
  const DatasetArchive out = build_hybrid(hc, 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Image img = out.image(i);
    // Everything outside a 14x14 patch must be black.
    int nonblack = 0;
    for (const auto v : img.data)
      if (v != 0) ++nonblack;
    CHECK(nonblack <= 14 * 14 * 3);
  }
}

TEST_CASE("sens pairs share object and background in the matched stream") {
  const AssetBundle assets = tiny_assets(19);
  DatasetConfig cfg = tiny_config(17);
  cfg.transforms = {TransformKind::HFlip};
  const SensPairs pairs = generate_sens_pairs(cfg, assets, 400, 21);
  REQUIRE(pairs.matched.size() == 400);
  REQUIRE(pairs.unconstrained.size() == 400);

  // With a single Bernoulli transform, a quarter of matched pairs draw
  // (off, off) and must be pixel-identical; (on, off) pairs must differ.
  int identical = 0;
  for (std::size_t i = 0; i < pairs.matched.size(); ++i)
    if (pairs.matched.first[i] == pairs.matched.second[i]) ++identical;
  // (off,off) and (on,on) both give identical pairs: probability 1/2.
  CHECK(identical > 120);
  CHECK(identical < 280);
}

TEST_CASE("pair counts match the request exactly") {
  const AssetBundle assets = tiny_assets(20);
  DatasetConfig cfg = tiny_config(18);
  const SensPairs pairs = generate_sens_pairs(cfg, assets, 10000, 5);
  CHECK(pairs.matched.size() == 10000);
  CHECK(pairs.unconstrained.size() == 10000);
  CHECK_THROWS_AS(generate_sens_pairs(cfg, assets, 0, 5), BadParameter);
}

TEST_CASE("augmentation pairs share the base image in the matched stream") {
  const AssetBundle assets = tiny_assets(21, 6);
  DatasetConfig base_cfg = tiny_config(19);
  base_cfg.objects = {0, 1, 2, 3, 4, 5};
  base_cfg.n_train = 12;
  const LabeledImageSet base = archive_to_labeled(
      generate_dataset(base_cfg, assets, Split::Train, 1));
  const TransformSet set({TransformKind::HFlip}, TransformMode::Augmentation);
  const SensPairs pairs = generate_augmentation_sens_pairs(base, set, 200, 3);
  int identical = 0;
  for (std::size_t i = 0; i < pairs.matched.size(); ++i)
    if (pairs.matched.first[i] == pairs.matched.second[i]) ++identical;
  CHECK(identical > 60);   // flips agree half the time
  CHECK(identical < 140);
}

TEST_CASE("manifest records config, split and digest") {
  DatasetConfig cfg = tiny_config(23);
  const std::string manifest = dataset_manifest(cfg, Split::Val, "abc123");
  CHECK(manifest.find("\"split\": \"val\"") != std::string::npos);
  CHECK(manifest.find("abc123") != std::string::npos);
  CHECK(manifest.find("hflip") != std::string::npos);
}
