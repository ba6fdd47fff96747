// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "t2d/dataset.hpp"
#include "t2d/image.hpp"
#include "t2d/rng.hpp"

namespace t2d {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class ArchKind { SmallCnn, Mlp };

// Small configurable architectures standing in for the full-scale model
// zoo: a 2-block CNN (3x3 conv, ReLU, 2x2 max-pool per block, GAP, affine
// to the representation width) and an MLP.
struct ModelConfig {
  ArchKind arch = ArchKind::SmallCnn;
  int conv_channels = 32;        // first block width; second block doubles it
  std::vector<int> hidden = {};  // MLP hidden widths
  int rep_dim = 128;
  int class_count = 10;
  int resolution = kDefaultResolution;
  int in_channels = 3;
  std::uint64_t init_seed = 0;

  int input_dim() const { return in_channels * resolution * resolution; }
  std::string describe() const;
};

template <typename Scalar>
struct ParamRef {
  std::string name;
  Matrix<Scalar>* value = nullptr;
  Matrix<Scalar>* grad = nullptr;
};

// Layers own their output and gradient buffers and return references to
// them, so steady-state training does no per-batch allocation. The usual
// sequential contract applies: a layer's returned buffers stay valid
// until its next forward/backward call.
template <typename Scalar>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual const Matrix<Scalar>& forward(const Matrix<Scalar>& x) = 0;
  virtual const Matrix<Scalar>& backward(const Matrix<Scalar>& dy) = 0;
  virtual void collect_params(std::vector<ParamRef<Scalar>>& out) {}
  // First-layer convolutions skip the input gradient.
  virtual void set_needs_input_grad(bool) {}
};

// Explicit body/head split: body maps inputs to penultimate
// representations, head is the affine classifier on top.
template <typename Scalar>
class Network {
 public:
  explicit Network(const ModelConfig& cfg);
  // Deep copy: fresh layers with the same parameter values.
  Network(const Network& other);
  Network& operator=(const Network&) = delete;
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const ModelConfig& config() const { return cfg_; }

  // x: (input_dim x n), channel-planar, values in [0, 1].
  Matrix<Scalar> representations(const Matrix<Scalar>& x);
  // Full pass; returns (representations, logits).
  std::pair<Matrix<Scalar>, Matrix<Scalar>> forward(const Matrix<Scalar>& x);

  // Backprop from dlogits through head and body; fills parameter grads.
  void backward(const Matrix<Scalar>& dlogits);

  std::vector<ParamRef<Scalar>> body_params();
  std::vector<ParamRef<Scalar>> head_params();
  std::vector<ParamRef<Scalar>> all_params();

  std::vector<Matrix<Scalar>> snapshot_params();
  void restore_params(const std::vector<Matrix<Scalar>>& snap);
  // SHA-256 over the body parameter bytes (little-endian f32/f64).
  std::string body_digest();

 private:
  ModelConfig cfg_;
  std::vector<std::unique_ptr<Layer<Scalar>>> body_;
  std::unique_ptr<Layer<Scalar>> head_;
};

enum class LrSchedule { Constant, LinearDecay };

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int epochs = 20;
  int batch_size = 128;
  LrSchedule schedule = LrSchedule::Constant;
  std::uint64_t shuffle_seed = 0;
  std::string log_csv;  // per-epoch CSV log path; empty = no log
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

// Trained model plus training metadata.
struct ModelState {
  ModelConfig config;
  std::shared_ptr<Network<float>> net;
  int epochs_seen = 0;
  double best_val_acc = 0.0;
  std::vector<EpochStats> history;

  static ModelState init(const ModelConfig& cfg);
  void save(const std::string& path) const;
  static ModelState load(const std::string& path);
};

// Converts archive pixels (interleaved u8) to a channel-planar matrix
// (input_dim x n) scaled to [0, 1].
Matrix<float> archive_to_matrix(const DatasetArchive& a);
Matrix<float> images_to_matrix(std::span<const SceneImage> images);
std::vector<int> archive_labels(const DatasetArchive& a);

// Mean cross-entropy with 64-bit log-sum-exp; also writes the softmax
// gradient (p - onehot)/n into dlogits if non-null.
double cross_entropy(const Matrix<float>& logits, std::span<const int> labels,
                     Matrix<float>* dlogits);
double accuracy(const Matrix<float>& logits, std::span<const int> labels);

// Adam training loop with best-validation-accuracy checkpointing.
// Returns the state at the best validation checkpoint. Throws
// DivergenceError when the loss turns non-finite.
ModelState train(ModelState m, const DatasetArchive& train_data,
                 const DatasetArchive& val_data, const TrainConfig& cfg);

double evaluate_accuracy(const ModelState& m, const DatasetArchive& data);

// Replaces the head parameters (rebuilding the head when the class count
// differs); body parameters are carried over unchanged.
void install_head(ModelState& m, const Matrix<float>& weight,
                  const Matrix<float>& bias);

struct ProbeResult {
  Matrix<float> head_weight;
  Matrix<float> head_bias;
  double train_acc = 0.0;
  double test_acc = 0.0;
};

// Trains a fresh affine head on frozen body representations. The body is
// never touched. val_data may be empty (no checkpoint selection).
ProbeResult linear_probe(const ModelState& m, const DatasetArchive& probe_train,
                         const DatasetArchive& probe_val,
                         const DatasetArchive& probe_test,
                         const TrainConfig& cfg);

// Head trainer on explicit feature matrices; exposed for oracle tests
// and reused by the probe.
ProbeResult train_linear_head(const Matrix<float>& train_reps,
                              std::span<const int> train_labels,
                              const Matrix<float>& val_reps,
                              std::span<const int> val_labels,
                              const Matrix<float>& test_reps,
                              std::span<const int> test_labels, int class_count,
                              const TrainConfig& cfg);

// Unfreezes everything and fine-tunes on n_finetune samples drawn
// deterministically from target_train. n_finetune = 0 returns m unchanged.
ModelState fine_tune_full(ModelState m, const DatasetArchive& target_train,
                          const DatasetArchive& target_val,
                          const TrainConfig& cfg, int n_finetune);

struct GradCheckReport {
  double max_rel_error = 0.0;
  int n_checked = 0;
  bool passed = false;
};

// Compares analytic gradients against central finite differences at
// 64-bit precision on a random batch; checks a deterministic subsample
// of entries from every parameter tensor.
GradCheckReport gradient_check(const ModelConfig& cfg, double tolerance = 1e-4,
                               std::uint64_t seed = 0);

}  // namespace t2d
