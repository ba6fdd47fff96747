// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#include "t2d/sens.hpp"

#include <cmath>
#include <sstream>

#include "t2d/errors.hpp"
#include "t2d/parallel.hpp"

namespace t2d {

namespace {

// Pairwise L2 distances between matching columns, in double.
void pair_distances(const Matrix<float>& a, const Matrix<float>& b,
                    std::vector<double>& out) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw BadInput("representation shape mismatch between pair sides");
  out.resize(static_cast<std::size_t>(a.cols()));
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    double acc = 0.0;
    const float* pa = a.col(i).data();
    const float* pb = b.col(i).data();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      const double d = static_cast<double>(pa[r]) - static_cast<double>(pb[r]);
      acc += d * d;
    }
    out[static_cast<std::size_t>(i)] = std::sqrt(acc);
  }
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // sample variance
};

MeanVar mean_var(const std::vector<double>& v) {
  MeanVar mv;
  if (v.empty()) return mv;
  double sum = 0.0;
  for (const double x : v) sum += x;
  mv.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (const double x : v) ss += (x - mv.mean) * (x - mv.mean);
    mv.var = ss / static_cast<double>(v.size() - 1);
  }
  return mv;
}

Matrix<float> apply_rep(const RepFn& rep, const std::vector<SceneImage>& imgs) {
  // Batch through the representation map in slices to bound peak memory.
  constexpr std::size_t kBatch = 512;
  Matrix<float> out;
  for (std::size_t start = 0; start < imgs.size(); start += kBatch) {
    const std::size_t len = std::min(kBatch, imgs.size() - start);
    const Matrix<float> r = rep(std::span<const SceneImage>(
        imgs.data() + start, len));
    if (out.size() == 0)
      out.resize(r.rows(), static_cast<Eigen::Index>(imgs.size()));
    out.middleCols(static_cast<Eigen::Index>(start),
                   static_cast<Eigen::Index>(len)) = r;
  }
  return out;
}

}  // namespace

SensReport estimate_sens(const RepFn& rep, const SensPairs& pairs,
                         double degenerate_eps) {
  if (pairs.matched.size() == 0 || pairs.unconstrained.size() == 0)
    throw BadParameter("sens estimation needs non-empty pair streams");

  std::vector<double> matched_d, free_d;
  {
    const Matrix<float> a = apply_rep(rep, pairs.matched.first);
    const Matrix<float> b = apply_rep(rep, pairs.matched.second);
    pair_distances(a, b, matched_d);
  }
  {
    const Matrix<float> a = apply_rep(rep, pairs.unconstrained.first);
    const Matrix<float> b = apply_rep(rep, pairs.unconstrained.second);
    pair_distances(a, b, free_d);
  }

  const MeanVar num = mean_var(matched_d);
  const MeanVar den = mean_var(free_d);
  if (den.mean < degenerate_eps)
    throw DegenerateRepresentation(
        "normalizer below epsilon: representation is (near) constant");

  SensReport r;
  r.n_pairs = static_cast<int>(matched_d.size());
  r.numerator_mean = num.mean;
  r.normalizer = den.mean;
  r.sens = num.mean / den.mean;
  // Delta-method standard error of the ratio of two independent means.
  const double n1 = static_cast<double>(matched_d.size());
  const double n2 = static_cast<double>(free_d.size());
  const double rel_num = num.var / (n1 * num.mean * num.mean);
  const double rel_den = den.var / (n2 * den.mean * den.mean);
  if (num.mean > 0.0) {
    r.stderr_half_width = r.sens * std::sqrt(rel_num + rel_den);
  } else {
    r.stderr_half_width = 0.0;
  }
  return r;
}

double SensMatrix::same_mean() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < transforms.size(); ++i) sum += cells[i][i];
  return sum / static_cast<double>(transforms.size());
}

double SensMatrix::other_mean() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < transforms.size(); ++i) {
    for (std::size_t j = 0; j < transforms.size(); ++j) {
      if (i == j) continue;
      sum += cells[i][j];
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

double SensMatrix::none_mean() const {
  const auto& row = cells.back();
  double sum = 0.0;
  for (const double v : row) sum += v;
  return row.empty() ? 0.0 : sum / static_cast<double>(row.size());
}

int SensMatrix::diagonal_wins() const {
  int wins = 0;
  for (std::size_t i = 0; i < transforms.size(); ++i) {
    double off = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < transforms.size(); ++j) {
      if (i == j) continue;
      off += cells[i][j];
      ++n;
    }
    if (n > 0 && cells[i][i] < off / static_cast<double>(n)) ++wins;
  }
  return wins;
}

std::string SensMatrix::to_csv() const {
  std::ostringstream out;
  out << "train_transform";
  for (const auto k : transforms) out << ',' << kind_name(k);
  out << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out << (i < transforms.size() ? kind_name(transforms[i]) : "none");
    for (const double v : cells[i]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

SensMatrix sens_matrix(std::span<const RepFn> row_reps,
                       std::span<const TransformKind> transforms,
                       const std::function<SensPairs(TransformKind)>& pairs_for,
                       unsigned n_threads) {
  if (row_reps.size() != transforms.size() + 1)
    throw BadParameter("need one rep per transform plus the baseline");
  SensMatrix m;
  m.transforms.assign(transforms.begin(), transforms.end());
  m.cells.assign(row_reps.size(),
                 std::vector<double>(transforms.size(), 0.0));
  parallel_for(transforms.size(), n_threads, [&](std::size_t j) {
    const SensPairs pairs = pairs_for(transforms[j]);
    for (std::size_t i = 0; i < row_reps.size(); ++i) {
      m.cells[i][j] = estimate_sens(row_reps[i], pairs).sens;
    }
  });
  return m;
}

RepFn model_rep_fn(const ModelState& m) {
  std::shared_ptr<Network<float>> net = m.net;
  return [net](std::span<const SceneImage> imgs) {
    return net->representations(images_to_matrix(imgs));
  };
}

RepFn pixel_rep_fn() {
  return [](std::span<const SceneImage> imgs) {
    return images_to_matrix(imgs);
  };
}

}  // namespace t2d
