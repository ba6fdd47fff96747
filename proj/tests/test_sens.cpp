// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>

#include "t2d/dataset.hpp"
#include "t2d/errors.hpp"
#include "t2d/sens.hpp"

using namespace t2d;

namespace {

// Tiny enumerable catalog: two distinct solid-color objects, two
// backgrounds, one Bernoulli transform (HFlip) => 2 x 2 x 2 images.
struct TinyWorld {
  AssetBundle assets;
  DatasetConfig cfg;

  TinyWorld() {
    for (int o = 0; o < 2; ++o) {
      SpritePrototype p;
      p.id = o;
      p.sprite = Image::rgba(32, 32);
      for (int y = 8; y < 24; ++y)
        for (int x = 4; x < 20 + 8 * o; ++x) {  // asymmetric so flips matter
          p.sprite.at(x, y, o == 0 ? 0 : 2) = 230;
          p.sprite.at(x, y, 1) = static_cast<std::uint8_t>(40 + 90 * o);
          p.sprite.at(x, y, 3) = 255;
        }
      assets.sprites.push_back(std::move(p));
    }
    assets.backgrounds =
        generate_backgrounds(2, BackgroundMode::SmoothNoise, 77);
    cfg.objects = {0, 1};
    cfg.transforms = {TransformKind::HFlip};
    cfg.seed = 5;
  }

  // All eight images indexed by (object, flip, background).
  SceneImage image(int o, bool flip, int b) const {
    TransformSpec spec;
    spec.kind = TransformKind::HFlip;
    spec.enabled = flip;
    const TransformSpec specs[] = {spec};
    return compose_scene(assets.sprites[static_cast<std::size_t>(o)].sprite,
                         specs, assets.backgrounds.at(static_cast<std::size_t>(b)));
  }
};

double l2(const Matrix<float>& a, const Matrix<float>& b) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = double(a.data()[i]) - double(b.data()[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("transform-blind representations have sens zero") {
  TinyWorld w;
  const SensPairs pairs = generate_sens_pairs(w.cfg, w.assets, 500, 9);
  // One-hot of the object id, recovered from the dominant color channel.
  const RepFn one_hot = [](std::span<const SceneImage> imgs) {
    Matrix<float> reps = Matrix<float>::Zero(2, static_cast<Eigen::Index>(imgs.size()));
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      long red = 0, blue = 0;
      for (int y = 0; y < imgs[i].height; ++y)
        for (int x = 0; x < imgs[i].width; ++x) {
          red += imgs[i].at(x, y, 0);
          blue += imgs[i].at(x, y, 2);
        }
      reps(red > blue ? 0 : 1, static_cast<Eigen::Index>(i)) = 1.0f;
    }
    return reps;
  };
  const SensReport r = estimate_sens(one_hot, pairs);
  CHECK(r.sens == 0.0);
  CHECK(r.numerator_mean == 0.0);
  CHECK(r.normalizer > 0.0);
}

TEST_CASE("constant representations are degenerate") {
  TinyWorld w;
  const SensPairs pairs = generate_sens_pairs(w.cfg, w.assets, 50, 10);
  const RepFn constant = [](std::span<const SceneImage> imgs) {
    return Matrix<float>::Ones(4, static_cast<Eigen::Index>(imgs.size()));
  };
  CHECK_THROWS_AS(estimate_sens(constant, pairs), DegenerateRepresentation);
}

TEST_CASE("input-independent random representations have sens one") {
  TinyWorld w;
  const SensPairs pairs = generate_sens_pairs(w.cfg, w.assets, 10000, 11);
  auto rng = std::make_shared<RngStream>(21, 0);
  const RepFn random_rep = [rng](std::span<const SceneImage> imgs) {
    Matrix<float> reps(16, static_cast<Eigen::Index>(imgs.size()));
    for (Eigen::Index i = 0; i < reps.size(); ++i)
      reps.data()[i] = static_cast<float>(rng->normal());
    return reps;
  };
  const SensReport r = estimate_sens(random_rep, pairs);
  CHECK(r.sens == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("monte-carlo sens matches exhaustive enumeration on a tiny space") {
  TinyWorld w;

  // Exhaustive oracle over the eight images with raw-pixel representation.
  std::vector<SceneImage> all;
  for (int o = 0; o < 2; ++o)
    for (int t = 0; t < 2; ++t)
      for (int b = 0; b < 2; ++b) all.push_back(w.image(o, t == 1, b));
  const RepFn pixels = pixel_rep_fn();
  const Matrix<float> reps = pixels(all);
  auto rep_of = [&](int o, int t, int b) {
    return Matrix<float>(reps.col(static_cast<Eigen::Index>(o * 4 + t * 2 + b)));
  };

  double matched = 0.0;
  int nm = 0;
  for (int o = 0; o < 2; ++o)
    for (int b = 0; b < 2; ++b)
      for (int t1 = 0; t1 < 2; ++t1)
        for (int t2 = 0; t2 < 2; ++t2) {
          matched += l2(rep_of(o, t1, b), rep_of(o, t2, b));
          ++nm;
        }
  matched /= nm;

  double unconstrained = 0.0;
  int nu = 0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      unconstrained += l2(reps.col(i), reps.col(j));
      ++nu;
    }
  unconstrained /= nu;
  const double exact = matched / unconstrained;

  const SensPairs pairs = generate_sens_pairs(w.cfg, w.assets, 4000, 12);
  const SensReport mc = estimate_sens(pixels, pairs);
  CHECK(std::abs(mc.sens - exact) <= 2.0 * mc.stderr_half_width);
}

TEST_CASE("sens is invariant to isometries and rescaling") {
  TinyWorld w;
  const SensPairs pairs = generate_sens_pairs(w.cfg, w.assets, 800, 13);

  const int d = 16;
  auto base_rep = [](std::span<const SceneImage> imgs) {
    // Deterministic spatial-moment features in a moderate range.
    Matrix<float> reps(16, static_cast<Eigen::Index>(imgs.size()));
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      const SceneImage& img = imgs[i];
      for (int f = 0; f < 16; ++f) {
        double acc = 0.0;
        for (int y = 0; y < img.height; ++y)
          for (int x = 0; x < img.width; ++x)
            acc += img.at(x, y, f % 3) *
                   std::cos(0.07 * (f + 1) * x + 0.05 * (f + 2) * y);
        reps(f, static_cast<Eigen::Index>(i)) =
            static_cast<float>(acc / (255.0 * img.pixel_count()));
      }
    }
    return reps;
  };
  const RepFn base = base_rep;
  const SensReport before = estimate_sens(base, pairs);

  // Random orthogonal map plus offset.
  Eigen::MatrixXd gauss(d, d);
  RngStream rng(31, 0);
  for (Eigen::Index i = 0; i < gauss.size(); ++i) gauss.data()[i] = rng.normal();
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
  Eigen::VectorXd offset(d);
  for (int i = 0; i < d; ++i) offset(i) = rng.normal();

  const RepFn mapped = [base, q, offset](std::span<const SceneImage> imgs) {
    const Matrix<float> r = base(imgs);
    const Eigen::MatrixXd rd =
        (q * r.cast<double>()).colwise() + offset;
    return Matrix<float>(rd.cast<float>());
  };
  const SensReport after = estimate_sens(mapped, pairs);
  CHECK(std::abs(after.sens - before.sens) < 1e-6);

  const RepFn scaled = [base](std::span<const SceneImage> imgs) {
    return Matrix<float>(base(imgs) * 3.7f);
  };
  const SensReport rescaled = estimate_sens(scaled, pairs);
  CHECK(std::abs(rescaled.sens - before.sens) < 1e-6);
}

TEST_CASE("stderr shrinks like the square root of the pair count") {
  TinyWorld w;
  const RepFn pixels = pixel_rep_fn();
  const SensReport small = estimate_sens(
      pixels, generate_sens_pairs(w.cfg, w.assets, 1000, 14));
  const SensReport big = estimate_sens(
      pixels, generate_sens_pairs(w.cfg, w.assets, 4000, 14));
  const double ratio = small.stderr_half_width / big.stderr_half_width;
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.8);
}

TEST_CASE("sens matrix aggregates rows and columns correctly") {
  const std::vector<TransformKind> kinds = {
      TransformKind::Rotate, TransformKind::Hue, TransformKind::Blur};
  SensMatrix m;
  m.transforms = kinds;
  m.cells = {
      {0.1, 0.5, 0.6},
      {0.7, 0.2, 0.8},
      {0.4, 0.9, 0.3},
      {0.5, 0.6, 0.7},  // baseline row
  };
  CHECK(m.same_mean() == doctest::Approx((0.1 + 0.2 + 0.3) / 3));
  CHECK(m.other_mean() ==
        doctest::Approx((0.5 + 0.6 + 0.7 + 0.8 + 0.4 + 0.9) / 6));
  CHECK(m.none_mean() == doctest::Approx((0.5 + 0.6 + 0.7) / 3));
  CHECK(m.diagonal_wins() == 3);
  const std::string csv = m.to_csv();
  CHECK(csv.find("train_transform,rotate,hue,blur") != std::string::npos);
  CHECK(csv.find("none,0.5,0.6,0.7") != std::string::npos);
}

TEST_CASE("sens matrix evaluation wires reps to the right cells") {
  // Full-image augmentation pairs: a flip permutes pixels, so any
  // permutation-invariant statistic is exactly flip-blind.
  LabeledImageSet base;
  base.class_count = 4;
  const BackgroundPool pool =
      generate_backgrounds(8, BackgroundMode::SmoothNoise, 99);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    base.images.push_back(pool.images[i]);
    base.labels.push_back(static_cast<int>(i % 4));
  }

  const std::vector<TransformKind> kinds = {TransformKind::HFlip,
                                            TransformKind::Invert};
  const RepFn row_flip = pixel_rep_fn();
  const RepFn row_invert = [](std::span<const SceneImage> imgs) {
    // Mean color per channel: flip-blind, inversion-sensitive.
    Matrix<float> reps(3, static_cast<Eigen::Index>(imgs.size()));
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      double sum[3] = {0, 0, 0};
      for (int y = 0; y < imgs[i].height; ++y)
        for (int x = 0; x < imgs[i].width; ++x)
          for (int c = 0; c < 3; ++c) sum[c] += imgs[i].at(x, y, c);
      for (int c = 0; c < 3; ++c)
        reps(c, static_cast<Eigen::Index>(i)) =
            static_cast<float>(sum[c] / imgs[i].pixel_count());
    }
    return reps;
  };
  const std::vector<RepFn> rows = {row_flip, row_invert, pixel_rep_fn()};

  const auto pairs_for = [&](TransformKind k) {
    const TransformSet set({k}, TransformMode::Augmentation);
    return generate_augmentation_sens_pairs(base, set, 300,
                                            static_cast<std::uint64_t>(k) + 100);
  };
  const SensMatrix m = sens_matrix(rows, kinds, pairs_for, 2);
  REQUIRE(m.cells.size() == 3);
  REQUIRE(m.cells[0].size() == 2);
  CHECK(m.cells[1][0] < 1e-6);  // mean color ignores flips
  CHECK(m.cells[1][1] > 0.1);   // but reacts to inversion
  CHECK(m.cells[0][0] > 0.05);  // raw pixels react to flips
}
