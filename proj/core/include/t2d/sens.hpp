// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "t2d/dataset.hpp"
#include "t2d/nnet.hpp"

namespace t2d {

// Maps a batch of images to representation columns (d x n).
using RepFn = std::function<Matrix<float>(std::span<const SceneImage>)>;

// Monte-Carlo estimate of the sensitivity ratio: mean representation
// distance between transformation-matched pairs over the mean distance
// between unconstrained pairs. Lower means more invariant.
struct SensReport {
  double sens = 0.0;
  double numerator_mean = 0.0;
  double normalizer = 0.0;   // C
  double stderr_half_width = 0.0;
  int n_pairs = 0;
};

// Distances accumulate in double. Throws DegenerateRepresentation when
// the normalizer falls below degenerate_eps (constant representation).
SensReport estimate_sens(const RepFn& rep, const SensPairs& pairs,
                         double degenerate_eps = 1e-9);

// Per-transform invariance grid: row = training transform of the model
// (plus a trailing "none" baseline row), column = evaluated transform.
struct SensMatrix {
  std::vector<TransformKind> transforms;  // row/column order
  std::vector<std::vector<double>> cells; // transforms.size()+1 rows

  double same_mean() const;   // diagonal over the transform rows
  double other_mean() const;  // off-diagonal over the transform rows
  double none_mean() const;   // baseline row
  // Number of transform rows whose diagonal beats their off-diagonal mean.
  int diagonal_wins() const;
  std::string to_csv() const;
};

// Builds the matrix: row_reps must hold one representation map per
// transform (same order as `transforms`) plus the no-transform baseline
// last. pairs_for(kind) supplies the evaluation pair streams; it is
// called once per column and the streams are shared across rows.
// Columns evaluate concurrently on up to n_threads workers; every cell
// has a preassigned slot so the result is scheduling-independent.
SensMatrix sens_matrix(std::span<const RepFn> row_reps,
                       std::span<const TransformKind> transforms,
                       const std::function<SensPairs(TransformKind)>& pairs_for,
                       unsigned n_threads = 1);

// Penultimate-layer representation map of a trained model.
RepFn model_rep_fn(const ModelState& m);

// Raw flattened pixels in [0,1]; the trivial representation.
RepFn pixel_rep_fn();

}  // namespace t2d
