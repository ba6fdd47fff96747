// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "t2d/dataset.hpp"
#include "t2d/nnet.hpp"
#include "t2d/sens.hpp"

namespace t2d {

enum class ExperimentKind {
  FactorComparison,
  IrrelevantFeatures,
  RelevanceAvailability,
  OodInvariance,
  NestedMismatch,
  FullFinetune,
};

enum class RunScale { Desk, Paper };

ExperimentKind experiment_from_name(const std::string& name);
std::string_view experiment_name(ExperimentKind kind);

// Full experiment configuration. `resolve` fills every unset knob with
// the scale's defaults; the desk scale keeps CPU runtimes in minutes
// while preserving the orderings under test.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::FactorComparison;
  RunScale scale = RunScale::Desk;
  std::vector<std::uint64_t> seeds;  // empty = scale default
  std::string out_dir = "out";
  std::string cifar_dir;             // empty = synthetic stand-in base
  unsigned threads = 0;              // 0 = hardware concurrency

  // Dataset/training knobs (-1 = use scale default).
  int classes = -1;
  int n_train = -1;
  int n_val = -1;
  int n_test = -1;
  int pretrain_epochs = -1;
  int probe_epochs = -1;
  int finetune_epochs = -1;
  int sens_pairs = -1;
  int matrix_pairs = -1;  // pairs per sens-matrix cell
  int nested_max_k = -1;
  int batch_size = 128;
  std::uint64_t asset_seed = 9001;
  std::vector<int> sample_grid;          // factor grid for dataset size
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;
  std::vector<std::string> ood_settings; // subset of {in_dist, mild_ood, strong_ood, aug_base}

  void resolve();
  std::string to_json() const;
  static ExperimentConfig from_json_file(const std::string& path);
};

// One result row; the fixed CSV schema is
// experiment,seed,factor,factor_value,transform_rel,train_acc,transfer_acc,
// sens_same,sens_other.
struct ReportRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string factor;
  std::string factor_value;
  std::string transform_rel;  // Same | Disjoint | Subset | Superset | None | -
  double train_acc = 0.0;
  double transfer_acc = 0.0;
  double sens_same = std::numeric_limits<double>::quiet_NaN();
  double sens_other = std::numeric_limits<double>::quiet_NaN();
};

struct Aggregate {
  std::string factor;
  std::string factor_value;
  std::string transform_rel;
  int count = 0;
  double train_acc_mean = 0.0, train_acc_std = 0.0;
  double transfer_acc_mean = 0.0, transfer_acc_std = 0.0;
};

struct RunReport {
  std::string experiment;
  std::string config_json;
  std::vector<ReportRow> rows;
  // Extra artifacts: name -> file content, written next to report.csv.
  std::map<std::string, std::string> artifacts;

  std::vector<Aggregate> aggregates() const;
  std::string to_csv() const;
  std::string to_json() const;
  // Writes report.csv, report.json and all artifacts into dir.
  void write(const std::string& dir) const;

  // Mean transfer accuracy over rows matching the given keys.
  double mean_transfer(const std::string& factor, const std::string& value,
                       const std::string& rel) const;
};

RunReport run_factor_comparison(const ExperimentConfig& cfg);
RunReport run_irrelevant_features(const ExperimentConfig& cfg);
RunReport run_relevance_availability(const ExperimentConfig& cfg);
RunReport run_ood_invariance(const ExperimentConfig& cfg);
RunReport run_nested_mismatch(const ExperimentConfig& cfg);
RunReport run_full_finetune(const ExperimentConfig& cfg);
RunReport run_experiment(const ExperimentConfig& cfg);

// Shared asset builders.
AssetBundle make_image_family(std::uint64_t seed, int sprite_count = kDefaultSpriteBudget,
                              int background_count = kDefaultBackgroundCount,
                              int resolution = kDefaultResolution);
AssetBundle make_random_family(std::uint64_t seed, int sprite_count = 30,
                               int background_count = kDefaultBackgroundCount,
                               int resolution = kDefaultResolution);

// Base image sets for the hybrid experiments: CIFAR when a directory is
// given, otherwise a procedurally generated 10-class stand-in (reports
// are flagged "synthetic-base").
struct BaseSets {
  LabeledImageSet train, val, test;
  bool synthetic = false;
};
BaseSets load_base_sets(const std::string& cifar_dir, int n_train, int n_val,
                        int n_test, std::uint64_t seed,
                        int resolution = kDefaultResolution);

LabeledImageSet archive_to_labeled(const DatasetArchive& a);

}  // namespace t2d
