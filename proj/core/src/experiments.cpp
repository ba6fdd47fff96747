// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0

#include "t2d/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "t2d/errors.hpp"
#include "t2d/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace t2d {

namespace {

constexpr std::uint64_t kTagData = 0xda7a;
constexpr std::uint64_t kTagModel = 0x30d31;
constexpr std::uint64_t kTagProbe = 0x9806e;
constexpr std::uint64_t kTagAssets = 0xa55e7;
constexpr std::uint64_t kTagPairs = 0x9a125;

std::uint64_t tag(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return substream(substream(seed, a), b);
}

struct DataTriple {
  DatasetArchive train, val, test;
};

DataTriple gen_triple(const DatasetConfig& cfg, const AssetBundle& assets) {
  return {generate_dataset(cfg, assets, Split::Train, 1),
          generate_dataset(cfg, assets, Split::Val, 1),
          generate_dataset(cfg, assets, Split::Test, 1)};
}

DatasetConfig make_dataset_cfg(const std::vector<int>& objects,
                               const std::vector<TransformKind>& transforms,
                               const ExperimentConfig& ex, std::uint64_t seed,
                               int n_train_override = -1) {
  DatasetConfig cfg;
  cfg.objects = objects;
  cfg.transforms = transforms;
  cfg.mode = TransformMode::Object;
  cfg.n_train = n_train_override > 0 ? n_train_override : ex.n_train;
  cfg.n_val = ex.n_val;
  cfg.n_test = ex.n_test;
  cfg.seed = seed;
  return cfg;
}

ModelConfig arch_smallcnn(int channels, int classes, std::uint64_t init_seed) {
  ModelConfig cfg;
  cfg.arch = ArchKind::SmallCnn;
  cfg.conv_channels = channels;
  cfg.class_count = classes;
  cfg.init_seed = init_seed;
  return cfg;
}

ModelConfig arch_mlp(std::vector<int> hidden, int classes,
                     std::uint64_t init_seed) {
  ModelConfig cfg;
  cfg.arch = ArchKind::Mlp;
  cfg.hidden = std::move(hidden);
  cfg.class_count = classes;
  cfg.init_seed = init_seed;
  return cfg;
}

TrainConfig pretrain_cfg(const ExperimentConfig& ex, std::uint64_t shuffle_seed,
                         int epochs_override = -1) {
  TrainConfig cfg;
  cfg.epochs = epochs_override > 0 ? epochs_override : ex.pretrain_epochs;
  cfg.batch_size = ex.batch_size;
  cfg.shuffle_seed = shuffle_seed;
  return cfg;
}

TrainConfig probe_cfg(const ExperimentConfig& ex, std::uint64_t shuffle_seed) {
  TrainConfig cfg;
  cfg.epochs = ex.probe_epochs;
  cfg.batch_size = ex.batch_size;
  cfg.shuffle_seed = shuffle_seed;
  return cfg;
}

struct PretrainOut {
  ModelState model;
  double own_test_acc = 0.0;
};

PretrainOut pretrain_model(const ModelConfig& arch, const DataTriple& data,
                           const TrainConfig& cfg) {
  ModelState m = ModelState::init(arch);
  m = train(std::move(m), data.train, data.val, cfg);
  PretrainOut out{std::move(m), 0.0};
  out.own_test_acc = evaluate_accuracy(out.model, data.test);
  return out;
}

ProbeResult probe_on(const ModelState& m, const DataTriple& target,
                     const TrainConfig& cfg) {
  return linear_probe(m, target.train, target.val, target.test, cfg);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

// Object-id pools per seed: a deterministic shuffle of the catalog.
std::vector<int> shuffled_ids(int available, std::uint64_t seed,
                              std::uint64_t stream) {
  std::vector<int> ids(static_cast<std::size_t>(available));
  std::iota(ids.begin(), ids.end(), 0);
  RngStream rng(seed, stream);
  rng.shuffle(ids);
  return ids;
}

}  // namespace

ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "factor-comparison") return ExperimentKind::FactorComparison;
  if (name == "irrelevant-features") return ExperimentKind::IrrelevantFeatures;
  if (name == "relevance-availability")
    return ExperimentKind::RelevanceAvailability;
  if (name == "ood-invariance") return ExperimentKind::OodInvariance;
  if (name == "nested-mismatch") return ExperimentKind::NestedMismatch;
  if (name == "full-finetune") return ExperimentKind::FullFinetune;
  throw BadParameter("unknown experiment: " + name);
}

std::string_view experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::FactorComparison: return "factor-comparison";
    case ExperimentKind::IrrelevantFeatures: return "irrelevant-features";
    case ExperimentKind::RelevanceAvailability: return "relevance-availability";
    case ExperimentKind::OodInvariance: return "ood-invariance";
    case ExperimentKind::NestedMismatch: return "nested-mismatch";
    case ExperimentKind::FullFinetune: return "full-finetune";
  }
  return "factor-comparison";
}

void ExperimentConfig::resolve() {
  const bool desk = scale == RunScale::Desk;
  if (seeds.empty()) {
    const int n = desk ? 3 : 10;
    for (int i = 1; i <= n; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
  }
  auto def = [](int& v, int desk_v, int paper_v, bool is_desk) {
    if (v < 0) v = is_desk ? desk_v : paper_v;
  };
  def(classes, 10, 30, desk);
  def(n_train, 5000, 50000, desk);
  def(n_val, 1000, 10000, desk);
  def(n_test, 1000, 10000, desk);
  def(pretrain_epochs, 20, 50, desk);
  def(probe_epochs, 40, 200, desk);
  def(finetune_epochs, 30, 50, desk);
  def(sens_pairs, 2000, 10000, desk);
  def(matrix_pairs, 400, 10000, desk);
  def(nested_max_k, 5, 8, desk);
  if (sample_grid.empty())
    sample_grid = desk ? std::vector<int>{1000, 2000, 5000}
                       : std::vector<int>{1000, 10000, 50000, 100000, 500000};
  if (alpha_grid.empty())
    alpha_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 0.85, 0.9, 0.95, 1.0};
  if (beta_grid.empty()) beta_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  if (ood_settings.empty())
    ood_settings = {"in_dist", "mild_ood", "strong_ood", "aug_base"};
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = std::string(experiment_name(kind));
  j["scale"] = scale == RunScale::Desk ? "desk" : "paper";
  j["seeds"] = seeds;
  j["out_dir"] = out_dir;
  j["cifar_dir"] = cifar_dir;
  j["threads"] = threads;
  j["classes"] = classes;
  j["n_train"] = n_train;
  j["n_val"] = n_val;
  j["n_test"] = n_test;
  j["pretrain_epochs"] = pretrain_epochs;
  j["probe_epochs"] = probe_epochs;
  j["finetune_epochs"] = finetune_epochs;
  j["sens_pairs"] = sens_pairs;
  j["matrix_pairs"] = matrix_pairs;
  j["nested_max_k"] = nested_max_k;
  j["batch_size"] = batch_size;
  j["asset_seed"] = asset_seed;
  j["sample_grid"] = sample_grid;
  j["alpha_grid"] = alpha_grid;
  j["beta_grid"] = beta_grid;
  j["ood_settings"] = ood_settings;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("bad config JSON: " + std::string(e.what()));
  }
  ExperimentConfig cfg;
  if (j.contains("experiment"))
    cfg.kind = experiment_from_name(j["experiment"].get<std::string>());
  if (j.contains("scale"))
    cfg.scale = j["scale"] == "paper" ? RunScale::Paper : RunScale::Desk;
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  opt("seeds", cfg.seeds);
  opt("out_dir", cfg.out_dir);
  opt("cifar_dir", cfg.cifar_dir);
  opt("threads", cfg.threads);
  opt("classes", cfg.classes);
  opt("n_train", cfg.n_train);
  opt("n_val", cfg.n_val);
  opt("n_test", cfg.n_test);
  opt("pretrain_epochs", cfg.pretrain_epochs);
  opt("probe_epochs", cfg.probe_epochs);
  opt("finetune_epochs", cfg.finetune_epochs);
  opt("sens_pairs", cfg.sens_pairs);
  opt("matrix_pairs", cfg.matrix_pairs);
  opt("nested_max_k", cfg.nested_max_k);
  opt("batch_size", cfg.batch_size);
  opt("asset_seed", cfg.asset_seed);
  opt("sample_grid", cfg.sample_grid);
  opt("alpha_grid", cfg.alpha_grid);
  opt("beta_grid", cfg.beta_grid);
  opt("ood_settings", cfg.ood_settings);
  return cfg;
}

std::vector<Aggregate> RunReport::aggregates() const {
  std::map<std::string, Aggregate> groups;
  std::map<std::string, std::vector<std::pair<double, double>>> values;
  for (const auto& r : rows) {
    const std::string key = r.factor + "\x1f" + r.factor_value + "\x1f" +
                            r.transform_rel;
    auto& agg = groups[key];
    agg.factor = r.factor;
    agg.factor_value = r.factor_value;
    agg.transform_rel = r.transform_rel;
    values[key].emplace_back(r.train_acc, r.transfer_acc);
  }
  std::vector<Aggregate> out;
  for (auto& [key, agg] : groups) {
    const auto& v = values[key];
    agg.count = static_cast<int>(v.size());
    double tm = 0, xm = 0;
    for (const auto& [t, x] : v) {
      tm += t;
      xm += x;
    }
    tm /= agg.count;
    xm /= agg.count;
    double ts = 0, xs = 0;
    for (const auto& [t, x] : v) {
      ts += (t - tm) * (t - tm);
      xs += (x - xm) * (x - xm);
    }
    agg.train_acc_mean = tm;
    agg.transfer_acc_mean = xm;
    if (agg.count > 1) {
      agg.train_acc_std = std::sqrt(ts / (agg.count - 1));
      agg.transfer_acc_std = std::sqrt(xs / (agg.count - 1));
    }
    out.push_back(agg);
  }
  return out;
}

std::string RunReport::to_csv() const {
  std::ostringstream out;
  out << "experiment,seed,factor,factor_value,transform_rel,train_acc,"
         "transfer_acc,sens_same,sens_other\n";
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.seed << ',' << r.factor << ','
        << r.factor_value << ',' << r.transform_rel << ',' << fmt(r.train_acc)
        << ',' << fmt(r.transfer_acc) << ',';
    if (std::isnan(r.sens_same)) out << "";
    else out << fmt(r.sens_same);
    out << ',';
    if (std::isnan(r.sens_other)) out << "";
    else out << fmt(r.sens_other);
    out << '\n';
  }
  return out.str();
}

std::string RunReport::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["config"] = json::parse(config_json);
  json rows_j = json::array();
  for (const auto& r : rows) {
    json rj;
    rj["experiment"] = r.experiment;
    rj["seed"] = r.seed;
    rj["factor"] = r.factor;
    rj["factor_value"] = r.factor_value;
    rj["transform_rel"] = r.transform_rel;
    rj["train_acc"] = r.train_acc;
    rj["transfer_acc"] = r.transfer_acc;
    if (!std::isnan(r.sens_same)) rj["sens_same"] = r.sens_same;
    if (!std::isnan(r.sens_other)) rj["sens_other"] = r.sens_other;
    rows_j.push_back(rj);
  }
  j["rows"] = rows_j;
  json aggs = json::array();
  for (const auto& a : aggregates()) {
    json aj;
    aj["factor"] = a.factor;
    aj["factor_value"] = a.factor_value;
    aj["transform_rel"] = a.transform_rel;
    aj["count"] = a.count;
    aj["train_acc_mean"] = a.train_acc_mean;
    aj["train_acc_std"] = a.train_acc_std;
    aj["transfer_acc_mean"] = a.transfer_acc_mean;
    aj["transfer_acc_std"] = a.transfer_acc_std;
    aggs.push_back(aj);
  }
  j["aggregates"] = aggs;
  return j.dump(2);
}

void RunReport::write(const std::string& dir) const {
  fs::create_directories(dir);
  auto dump = [&](const std::string& name, const std::string& content) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw IoError("cannot write " + name + " in " + dir);
    out << content;
  };
  dump("report.csv", to_csv());
  dump("report.json", to_json());
  for (const auto& [name, content] : artifacts) dump(name, content);
}

double RunReport::mean_transfer(const std::string& factor,
                                const std::string& value,
                                const std::string& rel) const {
  std::vector<double> v;
  for (const auto& r : rows)
    if (r.factor == factor && r.factor_value == value && r.transform_rel == rel)
      v.push_back(r.transfer_acc);
  return mean_of(v);
}

AssetBundle make_image_family(std::uint64_t seed, int sprite_count,
                              int background_count, int resolution) {
  AssetBundle b;
  b.sprites = generate_procedural_sprites(sprite_count, seed, resolution);
  b.backgrounds = generate_backgrounds(background_count,
                                       BackgroundMode::SmoothNoise,
                                       substream(seed, kTagAssets), resolution);
  return b;
}

AssetBundle make_random_family(std::uint64_t seed, int sprite_count,
                               int background_count, int resolution) {
  AssetBundle b;
  b.sprites = generate_random_pattern_sprites(sprite_count, 0.7, seed, resolution);
  b.backgrounds = generate_backgrounds(background_count,
                                       BackgroundMode::UniformRandom,
                                       substream(seed, kTagAssets), resolution);
  return b;
}

LabeledImageSet archive_to_labeled(const DatasetArchive& a) {
  LabeledImageSet set;
  set.class_count = a.class_count;
  set.images.reserve(a.size());
  set.labels.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    set.images.push_back(a.image(i));
    set.labels.push_back(a.labels[i]);
  }
  return set;
}

BaseSets load_base_sets(const std::string& cifar_dir, int n_train, int n_val,
                        int n_test, std::uint64_t seed, int resolution) {
  BaseSets out;
  if (!cifar_dir.empty()) {
    LabeledImageSet all = import_cifar(cifar_dir);
    if (all.size() < static_cast<std::size_t>(n_train + n_val + n_test))
      throw BadParameter("CIFAR import too small for the requested splits");
    std::vector<int> idx(all.size());
    std::iota(idx.begin(), idx.end(), 0);
    RngStream rng(seed, 0xc1fa);
    rng.shuffle(idx);
    auto take = [&](int offset, int count) {
      LabeledImageSet s;
      s.class_count = all.class_count;
      for (int i = 0; i < count; ++i) {
        const int src = idx[static_cast<std::size_t>(offset + i)];
        s.images.push_back(all.images[static_cast<std::size_t>(src)]);
        s.labels.push_back(all.labels[static_cast<std::size_t>(src)]);
      }
      return s;
    };
    out.train = take(0, n_train);
    out.val = take(n_train, n_val);
    out.test = take(n_train + n_val, n_test);
    return out;
  }

  // Synthetic stand-in: 10 classes of translated/scaled procedural objects
  // (catalog ids 30..39, disjoint from the pasted prototypes 0..9) on
  // smooth-noise backgrounds.
  out.synthetic = true;
  AssetBundle assets = make_image_family(substream(seed, 0xba5e));
  std::vector<int> objects;
  for (int i = 30; i < 40; ++i) objects.push_back(i);
  DatasetConfig cfg;
  cfg.objects = objects;
  cfg.transforms = {TransformKind::Translate, TransformKind::Scale};
  cfg.n_train = n_train;
  cfg.n_val = n_val;
  cfg.n_test = n_test;
  cfg.resolution = resolution;
  cfg.seed = substream(seed, 0xba5e2);
  out.train = archive_to_labeled(generate_dataset(cfg, assets, Split::Train, 1));
  out.val = archive_to_labeled(generate_dataset(cfg, assets, Split::Val, 1));
  out.test = archive_to_labeled(generate_dataset(cfg, assets, Split::Test, 1));
  return out;
}

// ---------------------------------------------------------------------------
// Factor comparison (invariance vs dataset size / architecture / classes)

namespace {

struct FactorJob {
  std::uint64_t seed = 0;
  std::string factor;
  std::string value;
  bool same_transforms = false;  // D_s vs D_d
  ModelConfig arch;
  std::vector<int> objects;
  int n_train = -1;
  int epochs = -1;
};

// Semantic identity of a pretraining cell. Factor grids overlap at the
// base configuration (e.g. the default sample count appears in both the
// sample-count grid and the architecture grid); cells with equal keys
// share one training run and produce identical rows by construction.
std::string job_key(const FactorJob& job, const ExperimentConfig& ex) {
  std::string key = std::to_string(job.seed);
  key += job.same_transforms ? "|s|" : "|d|";
  key += job.arch.describe();
  key += '|' + std::to_string(job.n_train > 0 ? job.n_train : ex.n_train);
  key += '|';
  for (const int o : job.objects) key += std::to_string(o) + ',';
  return key;
}

ReportRow run_factor_job(const ExperimentConfig& ex, const FactorJob& job,
                         const SplitProtocol& split, const DataTriple& target,
                         const AssetBundle& assets, const std::string& name) {
  const auto& transforms =
      job.same_transforms ? split.transforms_eval : split.transforms_train;
  const std::uint64_t job_tag =
      tag(job.seed, std::hash<std::string>{}(job_key(job, ex)),
          job.same_transforms ? 1 : 2);
  DatasetConfig dcfg = make_dataset_cfg(job.objects, transforms, ex,
                                        substream(job_tag, kTagData),
                                        job.n_train);
  const DataTriple data = gen_triple(dcfg, assets);
  ModelConfig arch = job.arch;
  arch.init_seed = substream(job_tag, kTagModel);
  const PretrainOut pre =
      pretrain_model(arch, data, pretrain_cfg(ex, substream(job_tag, 0x7), job.epochs));
  const ProbeResult probe =
      probe_on(pre.model, target, probe_cfg(ex, substream(job_tag, kTagProbe)));

  ReportRow row;
  row.experiment = name;
  row.seed = job.seed;
  row.factor = job.factor;
  row.factor_value = job.value;
  row.transform_rel = job.same_transforms ? "Same" : "Disjoint";
  row.train_acc = pre.own_test_acc;
  row.transfer_acc = probe.test_acc;
  return row;
}

// Per-factor min-max spans and mean invariance gap (the Fig. 3 shapes).
std::string factor_summary_csv(const RunReport& report,
                               const std::vector<std::string>& factors) {
  std::ostringstream out;
  out << "factor,same_min,same_max,disjoint_min,disjoint_max,mean_gap\n";
  const auto aggs = report.aggregates();
  for (const auto& f : factors) {
    double smin = 1e9, smax = -1e9, dmin = 1e9, dmax = -1e9;
    std::vector<double> gaps;
    std::map<std::string, std::pair<double, double>> by_value;
    for (const auto& a : aggs) {
      if (a.factor != f) continue;
      if (a.transform_rel == "Same") {
        smin = std::min(smin, a.transfer_acc_mean);
        smax = std::max(smax, a.transfer_acc_mean);
        by_value[a.factor_value].first = a.transfer_acc_mean;
      } else if (a.transform_rel == "Disjoint") {
        dmin = std::min(dmin, a.transfer_acc_mean);
        dmax = std::max(dmax, a.transfer_acc_mean);
        by_value[a.factor_value].second = a.transfer_acc_mean;
      }
    }
    for (const auto& [value, pair] : by_value)
      gaps.push_back(pair.first - pair.second);
    out << f << ',' << fmt(smin) << ',' << fmt(smax) << ',' << fmt(dmin) << ','
        << fmt(dmax) << ',' << fmt(mean_of(gaps)) << '\n';
  }
  return out.str();
}

std::vector<FactorJob> build_factor_jobs(const ExperimentConfig& ex,
                                         const SplitProtocol& split,
                                         std::uint64_t seed) {
  std::vector<FactorJob> jobs;
  auto add_pair = [&](const std::string& factor, const std::string& value,
                      const ModelConfig& arch, const std::vector<int>& objects,
                      int n_train) {
    for (const bool same : {true, false}) {
      FactorJob j;
      j.seed = seed;
      j.factor = factor;
      j.value = value;
      j.same_transforms = same;
      j.arch = arch;
      j.objects = objects;
      j.n_train = n_train;
      jobs.push_back(std::move(j));
    }
  };

  const ModelConfig base = arch_smallcnn(32, ex.classes, 0);
  for (const int n : ex.sample_grid)
    add_pair("n_samples", std::to_string(n), base, split.objects_train, n);

  const std::vector<std::pair<std::string, ModelConfig>> archs = {
      {"mlp-small", arch_mlp({256}, ex.classes, 0)},
      {"mlp-wide", arch_mlp({1024}, ex.classes, 0)},
      {"smallcnn-32", arch_smallcnn(32, ex.classes, 0)},
      {"smallcnn-64", arch_smallcnn(64, ex.classes, 0)},
  };
  for (const auto& [name, arch] : archs)
    add_pair("architecture", name, arch, split.objects_train, -1);

  const std::vector<std::pair<std::string, const std::vector<int>*>> rels = {
      {"subset", &split.objects_subset},
      {"disjoint", &split.objects_disjoint},
      {"same", &split.objects_train},
      {"superset", &split.objects_superset},
  };
  for (const auto& [name, objects] : rels) {
    ModelConfig arch = base;
    arch.class_count = static_cast<int>(objects->size());
    add_pair("class_relationship", name, arch, *objects, -1);
  }
  return jobs;
}

RunReport run_factor_like(const ExperimentConfig& cfg, bool finetune_stage) {
  ExperimentConfig ex = cfg;
  ex.resolve();
  const std::string name(experiment_name(ex.kind));

  const AssetBundle assets = make_image_family(ex.asset_seed);

  // Per-seed protocol splits and shared probe targets.
  std::map<std::uint64_t, SplitProtocol> splits;
  std::map<std::uint64_t, DataTriple> targets;
  SplitSizes sizes{ex.classes, ex.classes, 3};
  for (const std::uint64_t seed : ex.seeds) {
    splits.emplace(seed, derive_split(seed, static_cast<int>(assets.sprites.size()),
                                      kTransformKindCount, sizes));
    const auto& split = splits.at(seed);
    const DatasetConfig tcfg = make_dataset_cfg(
        split.objects_eval, split.transforms_eval, ex, tag(seed, kTagData, 0xe));
    targets.emplace(seed, gen_triple(tcfg, assets));
  }

  std::vector<FactorJob> jobs;
  for (const std::uint64_t seed : ex.seeds) {
    auto seed_jobs = finetune_stage
                         ? std::vector<FactorJob>{}
                         : build_factor_jobs(ex, splits.at(seed), seed);
    if (finetune_stage) {
      // Fine-tuning reuses the base configuration pair only.
      for (const bool same : {true, false}) {
        FactorJob j;
        j.seed = seed;
        j.factor = "finetune_base";
        j.value = std::to_string(ex.n_train);
        j.same_transforms = same;
        j.arch = arch_smallcnn(32, ex.classes, 0);
        j.objects = splits.at(seed).objects_train;
        seed_jobs.push_back(std::move(j));
      }
    }
    jobs.insert(jobs.end(), seed_jobs.begin(), seed_jobs.end());
  }

  RunReport report;
  report.experiment = name;
  report.config_json = ex.to_json();

  if (!finetune_stage) {
    // Collapse factor-grid overlaps onto unique training cells and order
    // the heavy cells first so the worker pool drains evenly.
    std::map<std::string, std::size_t> unique_index;
    std::vector<std::size_t> job_to_unique(jobs.size());
    std::vector<std::size_t> unique_jobs;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const std::string key = job_key(jobs[i], ex);
      auto [it, inserted] = unique_index.emplace(key, unique_jobs.size());
      if (inserted) unique_jobs.push_back(i);
      job_to_unique[i] = it->second;
    }
    std::vector<std::size_t> order(unique_jobs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto cost = [&](std::size_t u) {
      const FactorJob& j = jobs[unique_jobs[u]];
      const int n = j.n_train > 0 ? j.n_train : ex.n_train;
      const double arch_weight =
          j.arch.arch == ArchKind::Mlp ? 0.2 : j.arch.conv_channels / 32.0;
      return arch_weight * n;
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cost(a) > cost(b); });

    std::vector<ReportRow> unique_rows(unique_jobs.size());
    parallel_for(order.size(), ex.threads, [&](std::size_t k) {
      const std::size_t u = order[k];
      const FactorJob& job = jobs[unique_jobs[u]];
      unique_rows[u] = run_factor_job(ex, job, splits.at(job.seed),
                                      targets.at(job.seed), assets, name);
    });
    report.rows.resize(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      ReportRow row = unique_rows[job_to_unique[i]];
      row.factor = jobs[i].factor;
      row.factor_value = jobs[i].value;
      report.rows[i] = std::move(row);
    }
    report.artifacts["fig3_summary.csv"] = factor_summary_csv(
        report, {"n_samples", "architecture", "class_relationship"});
    return report;
  }

  // Full fine-tuning stage: probe, install the probed head, then
  // fine-tune everything on low/high-data target subsets.
  const std::vector<int> ft_sizes = {200, 2000};
  struct FtResult {
    ReportRow rows[2];
  };
  std::vector<FtResult> results(jobs.size());
  parallel_for(jobs.size(), ex.threads, [&](std::size_t i) {
    const FactorJob& job = jobs[i];
    const SplitProtocol& split = splits.at(job.seed);
    const DataTriple& target = targets.at(job.seed);
    const auto& transforms =
        job.same_transforms ? split.transforms_eval : split.transforms_train;
    const std::uint64_t job_tag = tag(job.seed, 0xf7, job.same_transforms);
    DatasetConfig dcfg = make_dataset_cfg(job.objects, transforms, ex,
                                          substream(job_tag, kTagData));
    const DataTriple data = gen_triple(dcfg, assets);
    ModelConfig arch = job.arch;
    arch.init_seed = substream(job_tag, kTagModel);
    const PretrainOut pre =
        pretrain_model(arch, data, pretrain_cfg(ex, substream(job_tag, 0x7)));
    const ProbeResult probe =
        probe_on(pre.model, target, probe_cfg(ex, substream(job_tag, kTagProbe)));

    for (std::size_t k = 0; k < ft_sizes.size(); ++k) {
      ModelState m = pre.model;
      m.net = std::make_shared<Network<float>>(*m.net);  // private copy
      install_head(m, probe.head_weight, probe.head_bias);
      TrainConfig ft;
      ft.epochs = ex.finetune_epochs;
      ft.batch_size = std::min(ex.batch_size, ft_sizes[k]);
      ft.schedule = LrSchedule::LinearDecay;
      ft.shuffle_seed = substream(job_tag, 0xf0 + k);
      m = fine_tune_full(std::move(m), target.train, target.val, ft,
                         ft_sizes[k]);
      ReportRow row;
      row.experiment = name;
      row.seed = job.seed;
      row.factor = "finetune";
      row.factor_value = std::to_string(ft_sizes[k]);
      row.transform_rel = job.same_transforms ? "Same" : "Disjoint";
      row.train_acc = probe.test_acc;  // pre-finetune probe accuracy
      row.transfer_acc = evaluate_accuracy(m, target.test);
      results[i].rows[k] = row;
    }
  });
  for (const auto& r : results) {
    report.rows.push_back(r.rows[0]);
    report.rows.push_back(r.rows[1]);
  }
  return report;
}

}  // namespace

RunReport run_factor_comparison(const ExperimentConfig& cfg) {
  return run_factor_like(cfg, false);
}

RunReport run_full_finetune(const ExperimentConfig& cfg) {
  return run_factor_like(cfg, true);
}

// ---------------------------------------------------------------------------
// Irrelevant features (Table 1 shape)

namespace {

struct HybridDatasetDef {
  std::string name;
  double beta = 1.0;
  HybridLabels labels = HybridLabels::BaseClasses;
  HybridBackground background = HybridBackground::BaseImages;
};

const std::vector<HybridDatasetDef>& table1_defs() {
  static const std::vector<HybridDatasetDef> defs = {
      {"X=C,Y=C", 0.0, HybridLabels::BaseClasses, HybridBackground::BaseImages},
      {"X=C+O,Y=C", 1.0, HybridLabels::BaseClasses, HybridBackground::BaseImages},
      {"X=C+O,Y=O", 1.0, HybridLabels::ObjectClasses, HybridBackground::BaseImages},
      {"X=O,Y=O", 1.0, HybridLabels::ObjectClasses, HybridBackground::Black},
  };
  return defs;
}

DataTriple build_hybrid_triple(const HybridDatasetDef& def, const BaseSets& base,
                               const std::vector<SpritePrototype>& protos,
                               double alpha, PastePosition pos,
                               std::uint64_t seed) {
  HybridConfig cfg;
  cfg.prototypes = protos;
  cfg.alpha = alpha;
  cfg.beta = def.beta;
  cfg.label_target = def.labels;
  cfg.background = def.background;
  cfg.paste_position = pos;
  DataTriple out;
  cfg.base = &base.train;
  out.train = build_hybrid(cfg, substream(seed, 1));
  cfg.base = &base.val;
  out.val = build_hybrid(cfg, substream(seed, 2));
  cfg.base = &base.test;
  out.test = build_hybrid(cfg, substream(seed, 3));
  return out;
}

}  // namespace

RunReport run_irrelevant_features(const ExperimentConfig& cfg) {
  ExperimentConfig ex = cfg;
  ex.resolve();
  const std::string name(experiment_name(ex.kind));

  const AssetBundle family = make_image_family(ex.asset_seed);
  std::vector<SpritePrototype> protos(family.sprites.begin(),
                                      family.sprites.begin() + 10);
  const BaseSets base = load_base_sets(ex.cifar_dir, ex.n_train, ex.n_val,
                                       ex.n_test, substream(ex.asset_seed, 0xb));
  const auto& defs = table1_defs();

  RunReport report;
  report.experiment = name;
  report.config_json = ex.to_json();

  struct Cell {
    double acc[4] = {0, 0, 0, 0};
    double own_acc = 0.0;
    double bg_sens = 0.0;
    double obj_sens = 0.0;
  };
  std::vector<Cell> cells(ex.seeds.size() * defs.size());

  // One job per (seed, pretraining dataset).
  parallel_for(cells.size(), ex.threads, [&](std::size_t idx) {
    const std::size_t si = idx / defs.size();
    const std::size_t di = idx % defs.size();
    const std::uint64_t seed = ex.seeds[si];
    const std::uint64_t job_tag = tag(seed, 0x1fe, di);

    // All four dataset triples for this seed (targets and pretraining).
    std::vector<DataTriple> triples;
    triples.reserve(defs.size());
    for (std::size_t t = 0; t < defs.size(); ++t)
      triples.push_back(build_hybrid_triple(defs[t], base, protos, 0.0,
                                            PastePosition::UniformRandom,
                                            tag(seed, 0xd5, t)));

    const int classes = defs[di].labels == HybridLabels::BaseClasses
                            ? base.train.class_count
                            : static_cast<int>(protos.size());
    ModelConfig arch = arch_smallcnn(32, classes, substream(job_tag, kTagModel));
    const PretrainOut pre = pretrain_model(arch, triples[di],
                                           pretrain_cfg(ex, substream(job_tag, 7)));
    Cell& cell = cells[idx];
    cell.own_acc = pre.own_test_acc;
    for (std::size_t t = 0; t < defs.size(); ++t) {
      const ProbeResult probe = probe_on(
          pre.model, triples[t], probe_cfg(ex, tag(job_tag, kTagProbe, t)));
      cell.acc[t] = probe.test_acc;
    }
    const RepFn rep = model_rep_fn(pre.model);
    const SensPairs bg_pairs = generate_hybrid_sens_pairs(
        base.test, protos, HybridVary::Background, ex.sens_pairs,
        tag(seed, kTagPairs, 0));
    const SensPairs obj_pairs = generate_hybrid_sens_pairs(
        base.test, protos, HybridVary::Object, ex.sens_pairs,
        tag(seed, kTagPairs, 1));
    cell.bg_sens = estimate_sens(rep, bg_pairs).sens;
    cell.obj_sens = estimate_sens(rep, obj_pairs).sens;
  });

  for (std::size_t si = 0; si < ex.seeds.size(); ++si) {
    for (std::size_t di = 0; di < defs.size(); ++di) {
      const Cell& cell = cells[si * defs.size() + di];
      for (std::size_t t = 0; t < defs.size(); ++t) {
        ReportRow row;
        row.experiment = name;
        row.seed = ex.seeds[si];
        row.factor = "pretrain:" + defs[di].name;
        row.factor_value = "target:" + defs[t].name;
        row.transform_rel = "-";
        row.train_acc = cell.own_acc;
        row.transfer_acc = cell.acc[t];
        row.sens_same = cell.bg_sens;   // background sensitivity
        row.sens_other = cell.obj_sens; // object sensitivity
        report.rows.push_back(row);
      }
    }
  }

  // Table-1 shaped artifact: mean transfer accuracies plus the two
  // sensitivity columns.
  std::ostringstream t1;
  t1 << "pretrain";
  for (const auto& d : defs) t1 << ",acc:" << d.name;
  t1 << ",sens:background,sens:objects\n";
  for (std::size_t di = 0; di < defs.size(); ++di) {
    t1 << defs[di].name;
    for (std::size_t t = 0; t < defs.size(); ++t) {
      std::vector<double> v;
      for (std::size_t si = 0; si < ex.seeds.size(); ++si)
        v.push_back(cells[si * defs.size() + di].acc[t]);
      t1 << ',' << fmt(mean_of(v));
    }
    std::vector<double> bg, obj;
    for (std::size_t si = 0; si < ex.seeds.size(); ++si) {
      bg.push_back(cells[si * defs.size() + di].bg_sens);
      obj.push_back(cells[si * defs.size() + di].obj_sens);
    }
    t1 << ',' << fmt(mean_of(bg)) << ',' << fmt(mean_of(obj)) << '\n';
  }
  report.artifacts["table1.csv"] = t1.str();
  if (base.synthetic) report.artifacts["synthetic-base.flag"] = "synthetic-base\n";
  return report;
}

// ---------------------------------------------------------------------------
// Relevance (alpha) and availability (beta) sweeps

RunReport run_relevance_availability(const ExperimentConfig& cfg) {
  ExperimentConfig ex = cfg;
  ex.resolve();
  const std::string name(experiment_name(ex.kind));

  const AssetBundle family = make_image_family(ex.asset_seed);
  std::vector<SpritePrototype> protos(family.sprites.begin(),
                                      family.sprites.begin() + 10);
  const BaseSets base = load_base_sets(ex.cifar_dir, ex.n_train, ex.n_val,
                                       ex.n_test, substream(ex.asset_seed, 0xb));

  struct SweepJob {
    std::uint64_t seed = 0;
    bool is_alpha = false;
    double value = 0.0;
  };
  std::vector<SweepJob> jobs;
  for (const std::uint64_t seed : ex.seeds) {
    for (const double a : ex.alpha_grid) jobs.push_back({seed, true, a});
    for (const double b : ex.beta_grid) jobs.push_back({seed, false, b});
  }

  struct SweepResult {
    double cifar_acc = 0.0;
    double object_acc = 0.0;
    double own_acc = 0.0;
  };
  std::vector<SweepResult> results(jobs.size());

  RunReport report;
  report.experiment = name;
  report.config_json = ex.to_json();

  parallel_for(jobs.size(), ex.threads, [&](std::size_t i) {
    const SweepJob& job = jobs[i];
    const std::uint64_t job_tag =
        tag(job.seed, job.is_alpha ? 0xa1 : 0xb2,
            static_cast<std::uint64_t>(job.value * 1000));

    // Training dataset: objects pasted in the upper-right corner; alpha
    // sweeps correlation at full availability, beta sweeps availability
    // at zero correlation. The model always predicts base classes.
    HybridConfig hc;
    hc.prototypes = protos;
    hc.alpha = job.is_alpha ? job.value : 0.0;
    hc.beta = job.is_alpha ? 1.0 : job.value;
    hc.label_target = HybridLabels::BaseClasses;
    hc.paste_position = PastePosition::UpperRightCorner;
    DataTriple data;
    hc.base = &base.train;
    data.train = build_hybrid(hc, substream(job_tag, 1));
    hc.base = &base.val;
    data.val = build_hybrid(hc, substream(job_tag, 2));
    hc.base = &base.test;
    data.test = build_hybrid(hc, substream(job_tag, 3));

    ModelConfig arch = arch_smallcnn(32, base.train.class_count,
                                     substream(job_tag, kTagModel));
    const PretrainOut pre =
        pretrain_model(arch, data, pretrain_cfg(ex, substream(job_tag, 7)));
    results[i].own_acc = pre.own_test_acc;

    // Shared targets: uncorrelated always-pasted images, labeled by base
    // class and by object class.
    const HybridDatasetDef cifar_target{"X=C+O,Y=C", 1.0,
                                        HybridLabels::BaseClasses,
                                        HybridBackground::BaseImages};
    const HybridDatasetDef object_target{"X=C+O,Y=O", 1.0,
                                         HybridLabels::ObjectClasses,
                                         HybridBackground::BaseImages};
    const DataTriple t_cifar = build_hybrid_triple(
        cifar_target, base, protos, 0.0, PastePosition::UpperRightCorner,
        tag(job.seed, 0x7c, 0));
    const DataTriple t_obj = build_hybrid_triple(
        object_target, base, protos, 0.0, PastePosition::UpperRightCorner,
        tag(job.seed, 0x7c, 1));
    results[i].cifar_acc =
        probe_on(pre.model, t_cifar, probe_cfg(ex, tag(job_tag, kTagProbe, 0)))
            .test_acc;
    results[i].object_acc =
        probe_on(pre.model, t_obj, probe_cfg(ex, tag(job_tag, kTagProbe, 1)))
            .test_acc;
  });

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const SweepJob& job = jobs[i];
    const std::string prefix = job.is_alpha ? "alpha" : "beta";
    for (const bool to_objects : {false, true}) {
      ReportRow row;
      row.experiment = name;
      row.seed = job.seed;
      row.factor = prefix + (to_objects ? ":objects" : ":cifar");
      row.factor_value = fmt(job.value, 3);
      row.transform_rel = "-";
      row.train_acc = results[i].own_acc;
      row.transfer_acc = to_objects ? results[i].object_acc : results[i].cifar_acc;
      report.rows.push_back(row);
    }
  }
  if (base.synthetic) report.artifacts["synthetic-base.flag"] = "synthetic-base\n";
  return report;
}

// ---------------------------------------------------------------------------
// OOD invariance transfer (Table 2 / App. D matrices)

namespace {

struct FamilyAssets {
  std::string name;
  AssetBundle train_assets;
  std::vector<int> train_objects;
  std::vector<int> mild_objects;
};

}  // namespace

RunReport run_ood_invariance(const ExperimentConfig& cfg) {
  ExperimentConfig ex = cfg;
  ex.resolve();
  // Single-transform training converges quickly; the OOD stage uses a
  // shorter schedule than the factor experiments by default.
  const int ood_epochs = ex.pretrain_epochs > 10 && ex.scale == RunScale::Desk
                             ? 10
                             : ex.pretrain_epochs;
  const std::string name(experiment_name(ex.kind));
  const auto kinds = all_transform_kinds();

  RunReport report;
  report.experiment = name;
  report.config_json = ex.to_json();

  std::optional<BaseSets> base;
  if (std::find(ex.ood_settings.begin(), ex.ood_settings.end(), "aug_base") !=
      ex.ood_settings.end()) {
    base = load_base_sets(ex.cifar_dir, std::max(ex.n_test, 512), 0,
                          std::max(ex.n_test, 512),
                          substream(ex.asset_seed, 0xb));
    if (base->synthetic)
      report.artifacts["synthetic-base.flag"] = "synthetic-base\n";
  }

  for (const std::uint64_t seed : ex.seeds) {
    // Two prototype families with disjoint train/mild-OOD object subsets.
    std::vector<FamilyAssets> families;
    {
      FamilyAssets img;
      img.name = "image";
      img.train_assets = make_image_family(tag(ex.asset_seed, seed, 0x1));
      const auto ids = shuffled_ids(
          static_cast<int>(img.train_assets.sprites.size()), seed, 0x0dd1);
      img.train_objects.assign(ids.begin(), ids.begin() + ex.classes);
      img.mild_objects.assign(ids.begin() + ex.classes,
                              ids.begin() + 2 * ex.classes);
      families.push_back(std::move(img));

      FamilyAssets rnd;
      rnd.name = "random";
      rnd.train_assets = make_random_family(tag(ex.asset_seed, seed, 0x2),
                                            std::max(30, 2 * ex.classes));
      const auto rids = shuffled_ids(
          static_cast<int>(rnd.train_assets.sprites.size()), seed, 0x0dd2);
      rnd.train_objects.assign(rids.begin(), rids.begin() + ex.classes);
      rnd.mild_objects.assign(rids.begin() + ex.classes,
                              rids.begin() + 2 * ex.classes);
      families.push_back(std::move(rnd));
    }

    for (std::size_t fi = 0; fi < families.size(); ++fi) {
      const FamilyAssets& fam = families[fi];
      const FamilyAssets& other = families[1 - fi];

      // Train the 18 single-transform models plus the baseline.
      std::vector<PretrainOut> models(kinds.size() + 1);
      parallel_for(models.size(), ex.threads, [&](std::size_t mi) {
        std::vector<TransformKind> transforms;
        if (mi < kinds.size()) transforms = {kinds[mi]};
        const std::uint64_t job_tag = tag(seed, 0x00d + fi, mi);
        const DatasetConfig dcfg = make_dataset_cfg(
            fam.train_objects, transforms, ex, substream(job_tag, kTagData));
        const DataTriple data = gen_triple(dcfg, fam.train_assets);
        ModelConfig arch =
            arch_smallcnn(32, ex.classes, substream(job_tag, kTagModel));
        models[mi] = pretrain_model(
            arch, data, pretrain_cfg(ex, substream(job_tag, 7), ood_epochs));
      });

      std::vector<RepFn> reps;
      for (const auto& m : models) reps.push_back(model_rep_fn(m.model));
      std::vector<double> train_accs;
      for (const auto& m : models) train_accs.push_back(m.own_test_acc);

      for (const std::string& setting : ex.ood_settings) {
        auto pairs_for = [&](TransformKind k) -> SensPairs {
          const std::uint64_t pseed = tag(seed, kTagPairs ^ fi,
                                          static_cast<std::uint64_t>(k) +
                                              1000 * std::hash<std::string>{}(setting));
          if (setting == "aug_base") {
            const TransformSet set({k}, TransformMode::Augmentation);
            return generate_augmentation_sens_pairs(base->test, set,
                                                    ex.matrix_pairs, pseed);
          }
          const FamilyAssets& src = setting == "strong_ood" ? other : fam;
          const std::vector<int>& objects = setting == "mild_ood"
                                                ? src.mild_objects
                                                : src.train_objects;
          DatasetConfig pcfg = make_dataset_cfg(objects, {k}, ex, pseed);
          return generate_sens_pairs(pcfg, src.train_assets, ex.matrix_pairs,
                                     pseed);
        };

        const SensMatrix matrix = sens_matrix(reps, kinds, pairs_for, ex.threads);
        report.artifacts["matrix_" + fam.name + "_" + setting + "_seed" +
                         std::to_string(seed) + ".csv"] = matrix.to_csv();

        const double tacc = mean_of(train_accs);
        const struct {
          const char* rel;
          double value;
        } aggs[3] = {{"Same", matrix.same_mean()},
                     {"Other", matrix.other_mean()},
                     {"None", matrix.none_mean()}};
        for (const auto& a : aggs) {
          ReportRow row;
          row.experiment = name;
          row.seed = seed;
          row.factor = fam.name;
          row.factor_value = setting;
          row.transform_rel = a.rel;
          row.train_acc = tacc;
          row.transfer_acc = 0.0;
          row.sens_same = a.value;
          report.rows.push_back(row);
        }
        ReportRow diag;
        diag.experiment = name;
        diag.seed = seed;
        diag.factor = fam.name;
        diag.factor_value = setting + ":diagonal_wins";
        diag.transform_rel = "-";
        diag.train_acc = tacc;
        diag.transfer_acc = static_cast<double>(matrix.diagonal_wins());
        report.rows.push_back(diag);
      }
    }
  }

  // Table-2 shaped summary: mean sens by family, setting, relationship.
  std::ostringstream t2;
  t2 << "family,transform_rel";
  for (const auto& s : ex.ood_settings) t2 << ',' << s;
  t2 << '\n';
  for (const std::string fam : {"image", "random"}) {
    for (const std::string rel : {"Same", "Other", "None"}) {
      t2 << fam << ',' << rel;
      for (const auto& setting : ex.ood_settings) {
        std::vector<double> v;
        for (const auto& r : report.rows)
          if (r.factor == fam && r.factor_value == setting &&
              r.transform_rel == rel && !std::isnan(r.sens_same))
            v.push_back(r.sens_same);
        t2 << ',' << fmt(mean_of(v));
      }
      t2 << '\n';
    }
  }
  report.artifacts["table2_summary.csv"] = t2.str();
  return report;
}

// ---------------------------------------------------------------------------
// Nested transform mismatch (Fig. 4 shape)

RunReport run_nested_mismatch(const ExperimentConfig& cfg) {
  ExperimentConfig ex = cfg;
  ex.resolve();
  const std::string name(experiment_name(ex.kind));

  const AssetBundle assets = make_image_family(ex.asset_seed);

  RunReport report;
  report.experiment = name;
  report.config_json = ex.to_json();

  for (const std::uint64_t seed : ex.seeds) {
    const auto ids = shuffled_ids(static_cast<int>(assets.sprites.size()),
                                  seed, 0x4e57);
    const std::vector<int> o_train(ids.begin(), ids.begin() + ex.classes);
    const std::vector<int> o_eval(ids.begin() + ex.classes,
                                  ids.begin() + 2 * ex.classes);
    const auto sets = nested_transform_sets(ex.nested_max_k, seed);

    // Targets for every chain member.
    std::vector<DataTriple> targets(sets.size());
    parallel_for(sets.size(), ex.threads, [&](std::size_t i) {
      const DatasetConfig tcfg = make_dataset_cfg(o_eval, sets[i].kinds, ex,
                                                  tag(seed, 0x4e, i));
      targets[i] = gen_triple(tcfg, assets);
    });

    std::vector<PretrainOut> models(sets.size());
    parallel_for(sets.size(), ex.threads, [&](std::size_t j) {
      const std::uint64_t job_tag = tag(seed, 0x4f, j);
      const DatasetConfig dcfg = make_dataset_cfg(o_train, sets[j].kinds, ex,
                                                  substream(job_tag, kTagData));
      const DataTriple data = gen_triple(dcfg, assets);
      ModelConfig arch =
          arch_smallcnn(32, ex.classes, substream(job_tag, kTagModel));
      models[j] = pretrain_model(arch, data,
                                 pretrain_cfg(ex, substream(job_tag, 7)));
    });

    std::vector<ReportRow> rows(sets.size() * sets.size());
    parallel_for(rows.size(), ex.threads, [&](std::size_t idx) {
      const std::size_t j = idx / sets.size();  // training chain index
      const std::size_t i = idx % sets.size();  // target chain index
      const ProbeResult probe =
          probe_on(models[j].model, targets[i],
                   probe_cfg(ex, tag(seed, 0x50, idx)));
      ReportRow row;
      row.experiment = name;
      row.seed = seed;
      row.factor = "train_k=" + std::to_string(j + 1);
      row.factor_value = std::to_string(i + 1);
      row.transform_rel = j == i ? "Same" : (j > i ? "Superset" : "Subset");
      row.train_acc = models[j].own_test_acc;
      row.transfer_acc = probe.test_acc;
      rows[idx] = row;
    });
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }

  // Fig. 4 shaped grid: mean accuracy, training size x target size.
  std::ostringstream grid;
  grid << "train_k\\target_k";
  for (int i = 1; i <= ex.nested_max_k; ++i) grid << ',' << i;
  grid << '\n';
  for (int j = 1; j <= ex.nested_max_k; ++j) {
    grid << j;
    for (int i = 1; i <= ex.nested_max_k; ++i) {
      grid << ','
           << fmt(report.mean_transfer("train_k=" + std::to_string(j),
                                       std::to_string(i),
                                       j == i ? "Same"
                                              : (j > i ? "Superset" : "Subset")));
    }
    grid << '\n';
  }
  report.artifacts["fig4_grid.csv"] = grid.str();
  return report;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::FactorComparison: return run_factor_comparison(cfg);
    case ExperimentKind::IrrelevantFeatures: return run_irrelevant_features(cfg);
    case ExperimentKind::RelevanceAvailability:
      return run_relevance_availability(cfg);
    case ExperimentKind::OodInvariance: return run_ood_invariance(cfg);
    case ExperimentKind::NestedMismatch: return run_nested_mismatch(cfg);
    case ExperimentKind::FullFinetune: return run_full_finetune(cfg);
  }
  throw BadParameter("unknown experiment kind");
}

}  // namespace t2d
