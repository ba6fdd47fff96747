// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line entry point: dataset generation, training, linear probing,
// sensitivity estimation and full experiment protocols.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "t2d/errors.hpp"
#include "t2d/experiments.hpp"
#include "t2d/png_io.hpp"
#include "t2d/sha256.hpp"

namespace fs = std::filesystem;
using namespace t2d;

namespace {

std::vector<TransformKind> parse_kinds(const std::string& csv) {
  std::vector<TransformKind> kinds;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) kinds.push_back(kind_from_name(item));
  }
  return kinds;
}

AssetBundle assets_for(const std::string& family, std::uint64_t seed,
                       const std::string& sprite_dir,
                       const std::string& background_dir) {
  AssetBundle b;
  if (!sprite_dir.empty()) {
    b.sprites = import_sprites(sprite_dir);
  } else if (family == "random") {
    b.sprites = generate_random_pattern_sprites(30, 0.7, seed);
  } else {
    b.sprites = generate_procedural_sprites(kDefaultSpriteBudget, seed);
  }
  if (!background_dir.empty()) {
    b.backgrounds = import_backgrounds(background_dir);
  } else {
    b.backgrounds = generate_backgrounds(
        kDefaultBackgroundCount,
        family == "random" ? BackgroundMode::UniformRandom
                           : BackgroundMode::SmoothNoise,
        substream(seed, 0xa55e7));
  }
  return b;
}

int cmd_generate(const std::string& out, std::uint64_t seed, int classes,
                 int n_train, int n_val, int n_test,
                 const std::string& transforms, const std::string& family,
                 const std::string& sprite_dir, const std::string& bg_dir,
                 unsigned threads, const std::string& png_dir) {
  const AssetBundle assets = assets_for(family, seed, sprite_dir, bg_dir);
  if (classes > static_cast<int>(assets.sprites.size()))
    throw BadParameter("not enough sprites for the requested class count");

  DatasetConfig cfg;
  for (int i = 0; i < classes; ++i) cfg.objects.push_back(i);
  cfg.transforms = parse_kinds(transforms);
  cfg.n_train = n_train;
  cfg.n_val = n_val;
  cfg.n_test = n_test;
  cfg.seed = seed;

  fs::create_directories(out);
  for (const Split split : {Split::Train, Split::Val, Split::Test}) {
    const DatasetArchive a = generate_dataset(cfg, assets, split, threads);
    const std::string stem = std::string(split_name(split));
    const std::string path = (fs::path(out) / (stem + ".t2d")).string();
    a.save(path);
    const std::string digest = Sha256::hex_file(path);
    std::ofstream manifest(fs::path(out) / (stem + ".manifest.json"));
    manifest << dataset_manifest(cfg, split, digest);
    std::cout << stem << ": " << a.size() << " samples, sha256 " << digest
              << "\n";
    if (!png_dir.empty())
      a.export_png((fs::path(png_dir) / stem).string());
  }
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& out,
              const std::string& arch, int epochs, std::uint64_t seed,
              const std::string& log_csv) {
  const DatasetArchive train_data =
      DatasetArchive::load((fs::path(data_dir) / "train.t2d").string());
  const DatasetArchive val_data =
      DatasetArchive::load((fs::path(data_dir) / "val.t2d").string());

  ModelConfig mcfg;
  if (arch.rfind("smallcnn", 0) == 0) {
    mcfg.arch = ArchKind::SmallCnn;
    if (arch.size() > 8) mcfg.conv_channels = std::stoi(arch.substr(8));
  } else if (arch.rfind("mlp", 0) == 0) {
    mcfg.arch = ArchKind::Mlp;
    mcfg.hidden = {256};
    if (arch.size() > 3) mcfg.hidden = {std::stoi(arch.substr(3))};
  } else {
    throw BadParameter("unknown arch: " + arch);
  }
  mcfg.class_count = train_data.class_count;
  mcfg.resolution = train_data.width;
  mcfg.init_seed = seed;

  TrainConfig tcfg;
  tcfg.epochs = epochs;
  tcfg.shuffle_seed = seed;
  tcfg.log_csv = log_csv;

  ModelState m = ModelState::init(mcfg);
  m = train(std::move(m), train_data, val_data, tcfg);
  m.save(out);
  std::cout << "model " << mcfg.describe() << ": best val acc "
            << m.best_val_acc << ", saved to " << out << "\n";
  return 0;
}

int cmd_probe(const std::string& model_path, const std::string& data_dir,
              int epochs, std::uint64_t seed, const std::string& out_csv) {
  const ModelState m = ModelState::load(model_path);
  const DatasetArchive tr =
      DatasetArchive::load((fs::path(data_dir) / "train.t2d").string());
  const DatasetArchive va =
      DatasetArchive::load((fs::path(data_dir) / "val.t2d").string());
  const DatasetArchive te =
      DatasetArchive::load((fs::path(data_dir) / "test.t2d").string());
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.shuffle_seed = seed;
  const ProbeResult res = linear_probe(m, tr, va, te, cfg);
  std::cout << "probe train acc " << res.train_acc << ", test acc "
            << res.test_acc << "\n";
  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    out << "train_acc,test_acc\n" << res.train_acc << ',' << res.test_acc << "\n";
  }
  return 0;
}

int cmd_sens(const std::string& model_path, std::uint64_t seed, int classes,
             int pairs, const std::string& transforms,
             const std::string& family, const std::string& out_csv) {
  const ModelState m = ModelState::load(model_path);
  const AssetBundle assets = assets_for(family, seed, "", "");
  DatasetConfig cfg;
  for (int i = 0; i < classes; ++i) cfg.objects.push_back(i);
  cfg.transforms = parse_kinds(transforms);
  cfg.seed = seed;
  if (cfg.transforms.empty())
    throw BadParameter("sens needs at least one transform");
  const SensPairs streams =
      generate_sens_pairs(cfg, assets, pairs, substream(seed, 0x9a125));
  const SensReport r = estimate_sens(model_rep_fn(m), streams);
  std::cout << "sens " << r.sens << " (numerator " << r.numerator_mean
            << ", C " << r.normalizer << ", +/- " << r.stderr_half_width
            << ", " << r.n_pairs << " pairs)\n";
  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    out << "sens,numerator_mean,normalizer,stderr_half_width,n_pairs\n"
        << r.sens << ',' << r.numerator_mean << ',' << r.normalizer << ','
        << r.stderr_half_width << ',' << r.n_pairs << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transforms-2D toolkit: synthetic datasets, invariance "
               "training and sensitivity evaluation"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a Transforms-2D dataset");
  std::string gen_out = "dataset";
  std::uint64_t gen_seed = 1;
  int gen_classes = 10, gen_train = 5000, gen_val = 1000, gen_test = 1000;
  std::string gen_transforms = "rotate,blur,hue";
  std::string gen_family = "image", gen_sprites, gen_bgs, gen_png;
  unsigned gen_threads = 0;
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--classes", gen_classes, "Number of object classes");
  gen->add_option("--train", gen_train, "Training samples");
  gen->add_option("--val", gen_val, "Validation samples");
  gen->add_option("--test", gen_test, "Test samples");
  gen->add_option("--transforms", gen_transforms,
                  "Comma-separated transform list (empty = none)");
  gen->add_option("--family", gen_family, "Asset family: image | random");
  gen->add_option("--sprite-dir", gen_sprites, "Import sprites from PNG dir");
  gen->add_option("--background-dir", gen_bgs, "Import backgrounds from PNG dir");
  gen->add_option("--threads", gen_threads, "Worker threads (0 = all)");
  gen->add_option("--export-png", gen_png, "Also export PNGs to this dir");

  // train
  auto* tr = app.add_subcommand("train", "Train a model on a dataset dir");
  std::string tr_data = "dataset", tr_out = "model.t2dm", tr_arch = "smallcnn32";
  std::string tr_log;
  int tr_epochs = 20;
  std::uint64_t tr_seed = 1;
  tr->add_option("--data", tr_data, "Dataset directory (train/val .t2d)");
  tr->add_option("--out", tr_out, "Checkpoint output path");
  tr->add_option("--arch", tr_arch, "smallcnn<channels> | mlp<width>");
  tr->add_option("--epochs", tr_epochs, "Training epochs");
  tr->add_option("--seed", tr_seed, "Init/shuffle seed");
  tr->add_option("--log", tr_log, "Per-epoch CSV log path");

  // probe
  auto* pr = app.add_subcommand("probe", "Linear-probe a trained model");
  std::string pr_model = "model.t2dm", pr_data = "dataset", pr_csv;
  int pr_epochs = 40;
  std::uint64_t pr_seed = 1;
  pr->add_option("--model", pr_model, "Model checkpoint");
  pr->add_option("--data", pr_data, "Target dataset directory");
  pr->add_option("--epochs", pr_epochs, "Probe epochs");
  pr->add_option("--seed", pr_seed, "Shuffle seed");
  pr->add_option("--out", pr_csv, "Result CSV path");

  // sens
  auto* se = app.add_subcommand("sens", "Estimate the sensitivity score");
  std::string se_model = "model.t2dm", se_transforms = "rotate";
  std::string se_family = "image", se_csv;
  int se_pairs = 10000, se_classes = 10;
  std::uint64_t se_seed = 1;
  se->add_option("--model", se_model, "Model checkpoint");
  se->add_option("--transforms", se_transforms, "Transform set for the pairs");
  se->add_option("--pairs", se_pairs, "Number of sample pairs");
  se->add_option("--classes", se_classes, "Object classes in the pair stream");
  se->add_option("--seed", se_seed, "Pair stream seed");
  se->add_option("--family", se_family, "Asset family: image | random");
  se->add_option("--out", se_csv, "Result CSV path");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a full experiment protocol");
  std::string exp_kind = "factor-comparison", exp_config, exp_out, exp_cifar;
  std::string exp_scale;
  std::vector<std::uint64_t> exp_seeds;
  unsigned exp_threads = 0;
  exp->add_option("kind", exp_kind,
                  "factor-comparison | irrelevant-features | "
                  "relevance-availability | ood-invariance | nested-mismatch | "
                  "full-finetune");
  exp->add_option("--config", exp_config, "JSON config file");
  exp->add_option("--seed", exp_seeds, "Seeds (repeatable)");
  exp->add_option("--out", exp_out, "Output directory");
  exp->add_option("--scale", exp_scale, "desk | paper");
  exp->add_option("--cifar-dir", exp_cifar, "CIFAR binary batch directory");
  exp->add_option("--threads", exp_threads, "Concurrent runs (0 = all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate(gen_out, gen_seed, gen_classes, gen_train, gen_val,
                          gen_test, gen_transforms, gen_family, gen_sprites,
                          gen_bgs, gen_threads, gen_png);
    if (tr->parsed())
      return cmd_train(tr_data, tr_out, tr_arch, tr_epochs, tr_seed, tr_log);
    if (pr->parsed())
      return cmd_probe(pr_model, pr_data, pr_epochs, pr_seed, pr_csv);
    if (se->parsed())
      return cmd_sens(se_model, se_seed, se_classes, se_pairs, se_transforms,
                      se_family, se_csv);
    if (exp->parsed()) {
      ExperimentConfig cfg;
      if (!exp_config.empty())
        cfg = ExperimentConfig::from_json_file(exp_config);
      cfg.kind = experiment_from_name(exp_kind);
      if (!exp_seeds.empty()) cfg.seeds = exp_seeds;
      if (!exp_out.empty()) cfg.out_dir = exp_out;
      if (!exp_scale.empty())
        cfg.scale = exp_scale == "paper" ? RunScale::Paper : RunScale::Desk;
      if (!exp_cifar.empty()) cfg.cifar_dir = exp_cifar;
      if (exp_threads != 0) cfg.threads = exp_threads;
      cfg.resolve();
      const RunReport report = run_experiment(cfg);
      report.write(cfg.out_dir);
      std::cout << "wrote " << report.rows.size() << " rows to " << cfg.out_dir
                << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
