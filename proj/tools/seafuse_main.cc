/* Copyright 2026 The Seafuse Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Command-line front end: synthesis, splits, geometry utilities, training,
// evaluation, ablation and gradient checking.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "seafuse/config.h"
#include "seafuse/dataio.h"
#include "seafuse/eval.h"
#include "seafuse/geometry.h"
#include "seafuse/model.h"
#include "seafuse/random.h"
#include "seafuse/sync.h"
#include "seafuse/training.h"

namespace fs = std::filesystem;

namespace seafuse {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Raised for bad inputs detected by the CLI itself.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Invocation {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
  std::map<std::string, std::string> files;
  bool nearest = false;
  bool verbose = false;
};

RunConfig ResolveConfig(const Invocation& inv) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const std::string& s : inv.sets) {
    const size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("--set expects key=value, got '" + s + "'");
    }
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& kv : inv.flags) overrides.push_back(kv);
  ConfigLoad load = LoadConfig(inv.config_path, overrides);
  for (const std::string& w : load.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  load.config.Validate();
  std::cerr << "# effective config\n" << load.config.ToText();
  return load.config;
}

void WriteFile(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out.flush()) throw std::runtime_error(path.string() + ": write failed");
}

// Records the effective config next to a file or inside a directory.
void RecordConfig(const RunConfig& cfg, const fs::path& output,
                  bool output_is_dir) {
  WriteFile(output_is_dir ? output / "config.txt"
                          : fs::path(output.string() + ".config.txt"),
            cfg.ToText());
}

const std::string& RequireFile(const Invocation& inv, const std::string& key) {
  auto it = inv.files.find(key);
  if (it == inv.files.end() || it->second.empty()) {
    throw ValidationError("--" + key + " is required");
  }
  if (!fs::exists(it->second)) {
    throw ValidationError("--" + key + ": " + it->second + " does not exist");
  }
  return it->second;
}

fs::path RequireData(const RunConfig& cfg) {
  if (cfg.data.empty()) throw ValidationError("no dataset given (--data)");
  if (!fs::is_directory(cfg.data)) {
    throw ValidationError(cfg.data.string() + " is not a directory");
  }
  return cfg.data;
}

fs::path RequireCheckpoint(const RunConfig& cfg) {
  if (cfg.checkpoint.empty()) {
    throw ValidationError("no checkpoint given (--checkpoint)");
  }
  if (!fs::is_regular_file(cfg.checkpoint)) {
    throw ValidationError(cfg.checkpoint.string() + " does not exist");
  }
  return cfg.checkpoint;
}

struct SplitData {
  SplitSpec spec;
  std::vector<FrameBundle> train;
  std::vector<FrameBundle> val;
  std::vector<FrameBundle> test;
};

// Uses splits/<kind>/ under the dataset when present, else draws them.
SplitData LoadSplitData(const RunConfig& cfg) {
  const fs::path root = RequireData(cfg);
  const DatasetManifest manifest = LoadDataset(root);
  SplitData data;
  if (fs::is_directory(root / "splits" / SplitKindName(cfg.split))) {
    data.spec = ReadSplits(root, cfg.split);
  } else {
    data.spec = MakeSplits(manifest, cfg.split, cfg.val_ratio, cfg.seed);
  }
  data.train = LoadFrames(manifest, data.spec.train, cfg.lidar_normalizer);
  data.val = LoadFrames(manifest, data.spec.val, cfg.lidar_normalizer);
  data.test = LoadFrames(manifest, data.spec.test, cfg.lidar_normalizer);
  return data;
}

std::string Percent(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *v * 100.0);
  return buf;
}

int RunSynth(const Invocation& inv) {
  const RunConfig cfg = ResolveConfig(inv);
  const std::vector<FrameBundle> frames =
      SynthesizeSequence(cfg.synth, cfg.day_frames, cfg.night_frames);
  SaveSequence(frames, SyntheticRig(cfg.synth), cfg.out);
  RecordConfig(cfg, cfg.out, true);
  std::cout << "synth: wrote " << cfg.day_frames << " day and "
            << cfg.night_frames << " night frames to " << cfg.out.string()
            << "\n";
  return kExitOk;
}

int RunSplits(const Invocation& inv) {
  const RunConfig cfg = ResolveConfig(inv);
  const fs::path root = RequireData(cfg);
  const SplitSpec spec =
      MakeSplits(LoadDataset(root), cfg.split, cfg.val_ratio, cfg.seed);
  WriteSplits(root, spec);
  RecordConfig(cfg, root / "splits" / SplitKindName(cfg.split), true);
  std::cout << "splits: " << SplitKindName(cfg.split) << " train "
            << spec.train.size() << " val " << spec.val.size() << " test "
            << spec.test.size() << "\n";
  return kExitOk;
}

TrainResult TrainVariant(const RunConfig& cfg, const SplitData& data,
                         const fs::path& out, bool verbose) {
  fs::create_directories(out);
  TrainResult result = Train(
      cfg.train, cfg.model, data.train, data.val, [&](const EpochLogRow& row) {
        if (!verbose) return;
        std::cerr << VariantName(cfg.variant) << " epoch " << row.epoch
                  << " loss " << row.loss.total << " val mIoU "
                  << Percent(row.val_miou) << "\n";
      });
  WriteEpochLog(out / "epoch_log.csv", result.log);
  SaveCheckpoint(out / "checkpoint.bin", result.best);
  RecordConfig(cfg, out, true);
  return result;
}

int RunTrain(const Invocation& inv) {
  const RunConfig cfg = ResolveConfig(inv);
  const SplitData data = LoadSplitData(cfg);
  const TrainResult result = TrainVariant(cfg, data, cfg.out, inv.verbose);
  std::cout << "train: " << VariantName(cfg.variant) << " best epoch "
            << result.best_epoch << " val mIoU "
            << Percent(result.best_val_miou) << " -> "
            << (cfg.out / "checkpoint.bin").string() << "\n";
  return kExitOk;
}

std::vector<NamedReport> EvaluateSplits(const Params& params,
                                        const SplitData& data,
                                        const std::string& prefix) {
  return {{prefix + "val", Evaluate(params, data.val)},
          {prefix + "test", Evaluate(params, data.test)}};
}

int RunEval(const Invocation& inv) {
  const RunConfig cfg = ResolveConfig(inv);
  const Params params = LoadCheckpoint(RequireCheckpoint(cfg));
  const SplitData data = LoadSplitData(cfg);
  const std::vector<NamedReport> reports = EvaluateSplits(params, data, "");
  EmitReport(reports, cfg.out);
  WriteRadarCsv(cfg.out / "radar.csv", reports[0].metrics, reports[1].metrics);
  RecordConfig(cfg, cfg.out, true);
  std::cout << "eval: val mIoU " << Percent(reports[0].metrics.miou)
            << " test mIoU " << Percent(reports[1].metrics.miou) << "\n";
  return kExitOk;
}

int RunAblate(const Invocation& inv) {
  const RunConfig cfg = ResolveConfig(inv);
  const Params params = LoadCheckpoint(RequireCheckpoint(cfg));
  const SplitData data = LoadSplitData(cfg);
  const AblationReport report =
      AblationSweep(params, data.test, cfg.modalities);
  EmitAblation(report, cfg.out);
  RecordConfig(cfg, cfg.out, true);
  std::cout << "ablate: " << report.rows.size() << " subsets on "
            << data.test.size() << " test frames, monotone "
            << (report.monotone ? "yes" : "no") << "\n";
  return kExitOk;
}

int RunProject(const Invocation& inv) {
  const RunConfig cfg = ResolveConfig(inv);
  const PointCloud cloud = ReadPointCloud(RequireFile(inv, "cloud"));
  const CameraCalibration calib = ReadCalibration(RequireFile(inv, "calib"));
  const SparseDepth sparse =
      ProjectPoints(cloud, calib.lidar_to_camera, calib.model);
  WriteSparseDepth(cfg.out, sparse);
  RecordConfig(cfg, cfg.out, false);
  std::cout << "project: " << sparse.samples.size() << " of "
            << cloud.points.size() << " points in view -> " << cfg.out.string()
            << "\n";
  return kExitOk;
}

int RunDensify(const Invocation& inv) {
  const RunConfig cfg = ResolveConfig(inv);
  const SparseDepth sparse = ReadSparseDepth(RequireFile(inv, "sparse"));
  const CameraCalibration calib = ReadCalibration(RequireFile(inv, "calib"));
  const DenseDepth dense =
      DensifyDepth(sparse, calib.model, static_cast<size_t>(cfg.max_controls));
  SaveDepthPng(cfg.out, dense);
  RecordConfig(cfg, cfg.out, false);
  const auto [lo, hi] =
      std::minmax_element(dense.data().begin(), dense.data().end());
  std::cout << "densify: " << sparse.samples.size() << " samples -> "
            << dense.width() << "x" << dense.height() << " depth in [" << *lo
            << ", " << *hi << "] m -> " << cfg.out.string() << "\n";
  return kExitOk;
}

int RunRemap(const Invocation& inv) {
  const RunConfig cfg = ResolveConfig(inv);
  const CameraCalibration src = ReadCalibration(RequireFile(inv, "src-calib"));
  const CameraCalibration dst = ReadCalibration(RequireFile(inv, "dst-calib"));
  const DenseDepth depth = LoadDepthPng(RequireFile(inv, "depth"));
  // Both calibrations share the LIDAR frame, which links the two cameras.
  const Extrinsics dst_to_src =
      src.lidar_to_camera * dst.lidar_to_camera.Inverse();
  const bool labels = inv.files.contains("labels");
  const bool image = inv.files.contains("image");
  if (labels == image) {
    throw ValidationError("give exactly one of --image or --labels");
  }
  size_t valid = 0, total = 0;
  if (labels) {
    const LabelMap out =
        TransferLabels(LoadLabels(RequireFile(inv, "labels")), src.model,
                       dst_to_src, dst.model, depth);
    SaveLabels(cfg.out, out);
    for (uint8_t id : out.ids()) valid += id != label::kIgnore;
    total = out.size();
  } else {
    const RemapResult out = RemapImage(
        LoadImage(RequireFile(inv, "image")), src.model, dst_to_src, dst.model,
        depth, inv.nearest ? Sampling::kNearest : Sampling::kBilinear);
    SaveImage(cfg.out, out.image);
    for (uint8_t v : out.valid) valid += v;
    total = out.valid.size();
  }
  RecordConfig(cfg, cfg.out, false);
  std::cout << "remap: " << valid << " of " << total << " pixels valid -> "
            << cfg.out.string() << "\n";
  return kExitOk;
}

int RunBundle(const Invocation& inv) {
  const RunConfig cfg = ResolveConfig(inv);
  const DatasetManifest manifest = LoadSequence(RequireData(cfg));
  const SequenceInfo& info = manifest.sequences.begin()->second;
  const StreamIndex* reference = nullptr;
  std::vector<StreamIndex> others;
  for (const StreamIndex& s : info.streams) {
    if (s.sensor_id == "zed") {
      reference = &s;
    } else {
      others.push_back(s);
    }
  }
  if (reference == nullptr || reference->timestamps.empty()) {
    throw ValidationError("sequence has no reference camera timestamps");
  }
  std::string csv = "reference_t,sensor_id,index,delta_us,valid\n";
  size_t valid = 0, total = 0;
  for (const BundleRecord& r : Bundle(*reference, others)) {
    for (const SensorMatch& m : r.sensors) {
      csv += std::to_string(r.reference_t) + "," + m.sensor_id + "," +
             std::to_string(m.index) + "," + std::to_string(m.delta) + "," +
             (m.valid ? "1" : "0") + "\n";
      valid += m.valid;
      ++total;
    }
  }
  WriteFile(cfg.out, csv);
  RecordConfig(cfg, cfg.out, false);
  std::cout << "bundle: " << reference->timestamps.size()
            << " reference frames, " << valid << " of " << total
            << " sensor matches valid -> " << cfg.out.string() << "\n";
  return kExitOk;
}

int RunGradCheck(const Invocation& inv) {
  const RunConfig cfg = ResolveConfig(inv);
  const auto start = std::chrono::steady_clock::now();
  const FrameBundle frame = SynthesizeFrame(cfg.synth, 0);
  const Params params =
      JitterBiases(InitParams(cfg.model, cfg.seed), kGradCheckBiasJitter,
                   Rng::Mix(cfg.seed, 1));
  const GradCheckResult r =
      GradCheck(params, frame, frame.labels, cfg.train, cfg.gradcheck);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  const bool ok = r.max_rel_error < kGradCheckTolerance;
  std::cout << "gradcheck: " << VariantName(cfg.variant)
            << " max relative error " << r.max_rel_error << " over "
            << r.samples << " samples (worst " << r.worst_parameter << ", "
            << r.kink_skips << " kink draws replaced, " << seconds << " s) "
            << (ok ? "ok" : "FAILED") << "\n";
  return ok ? kExitOk : kExitFailure;
}

int RunRepro(const Invocation& inv) {
  RunConfig cfg = ResolveConfig(inv);
  const fs::path root = cfg.out;
  const fs::path data_dir = root / "data" / "synthetic";
  SaveSequence(SynthesizeSequence(cfg.synth, cfg.day_frames, cfg.night_frames),
               SyntheticRig(cfg.synth), data_dir);
  cfg.data = root / "data";
  cfg.split = SplitKind::kDayNight;
  const SplitSpec spec =
      MakeSplits(LoadDataset(cfg.data), cfg.split, cfg.val_ratio, cfg.seed);
  WriteSplits(cfg.data, spec);
  RecordConfig(cfg, root, true);
  const SplitData data = LoadSplitData(cfg);
  std::cerr << "repro: train " << data.train.size() << " val "
            << data.val.size() << " test " << data.test.size() << "\n";

  std::vector<NamedReport> reports;
  std::optional<Params> d_model;
  for (Variant v :
       {Variant::kBaseline, Variant::kH, Variant::kD, Variant::kDH}) {
    RunConfig vc = cfg;
    vc.variant = v;
    vc.Sync();
    const fs::path dir = root / "models" / VariantName(v);
    TrainResult result = TrainVariant(vc, data, dir, inv.verbose);
    const std::vector<NamedReport> rows =
        EvaluateSplits(result.best, data, std::string(VariantName(v)) + " ");
    WriteRadarCsv(dir / "radar.csv", rows[0].metrics, rows[1].metrics);
    reports.insert(reports.end(), rows.begin(), rows.end());
    std::cerr << "repro: " << VariantName(v) << " val mIoU "
              << Percent(rows[0].metrics.miou) << " night mIoU "
              << Percent(rows[1].metrics.miou) << "\n";
    if (v == Variant::kD) d_model = std::move(result.best);
  }
  EmitReport(reports, root / "report");
  const AblationReport ablation =
      AblationSweep(*d_model, data.test, cfg.modalities);
  EmitAblation(ablation, root / "ablation");
  std::cout << "repro: baseline night mIoU " << Percent(reports[1].metrics.miou)
            << ", d night mIoU " << Percent(reports[5].metrics.miou)
            << "; report in " << (root / "report").string() << "\n";
  return kExitOk;
}

// Registers --config/--set and the config-key flags on a subcommand.
void AddConfigOptions(
    CLI::App* sub, Invocation& inv,
    const std::vector<std::pair<std::string, std::string>>& keys) {
  sub->add_option("--config", inv.config_path, "key = value config file");
  sub->add_option("--set", inv.sets, "override any config key (key=value)");
  for (const auto& [flag, key] : keys) {
    const std::string k = key;
    sub->add_option_function<std::string>(
        "--" + flag, [&inv, k](const std::string& v) { inv.flags[k] = v; },
        "config key '" + k + "'");
  }
}

void AddFileOption(CLI::App* sub, Invocation& inv, const std::string& name,
                   const std::string& help) {
  sub->add_option_function<std::string>(
      "--" + name, [&inv, name](const std::string& v) { inv.files[name] = v; },
      help);
}

}  // namespace

int Main(int argc, char** argv) {
  CLI::App app{"Multimodal maritime segmentation toolkit"};
  app.require_subcommand(1);
  Invocation inv;
  app.add_flag("-v,--verbose", inv.verbose, "per-epoch progress on stderr");

  using Keys = std::vector<std::pair<std::string, std::string>>;
  const Keys base = {{"seed", "seed"}, {"out", "out"}};
  auto with = [&](Keys extra) {
    Keys k = base;
    k.insert(k.end(), extra.begin(), extra.end());
    return k;
  };
  const Keys data_keys = {
      {"data", "data"}, {"split", "split"}, {"val-ratio", "val_ratio"}};
  const Keys train_keys = {
      {"variant", "variant"},  {"epochs", "epochs"},
      {"lr", "learning_rate"}, {"batch-size", "batch_size"},
      {"width", "width"},      {"height", "height"}};

  std::map<std::string, std::function<int(const Invocation&)>> handlers;
  auto add = [&](const std::string& name, const std::string& help,
                 const Keys& keys, std::function<int(const Invocation&)> fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    AddConfigOptions(sub, inv, keys);
    handlers[name] = std::move(fn);
    return sub;
  };

  add("synth", "render a synthetic day/night sequence into --out",
      with({{"frames", "day_frames"},
            {"night-frames", "night_frames"},
            {"width", "width"},
            {"height", "height"}}),
      RunSynth);
  add("splits", "write splits/<kind>/ lists under --data", with(data_keys),
      RunSplits);
  {
    Keys k = with(data_keys);
    k.insert(k.end(), train_keys.begin(), train_keys.end());
    add("train", "train one variant; writes checkpoint and epoch log", k,
        RunTrain);
  }
  add("eval", "val/test metrics of a checkpoint",
      with(
          {{"data", "data"}, {"split", "split"}, {"checkpoint", "checkpoint"}}),
      RunEval);
  add("ablate", "metrics over every input-modality subset on the test split",
      with({{"data", "data"},
            {"split", "split"},
            {"checkpoint", "checkpoint"},
            {"modalities", "modalities"}}),
      RunAblate);
  CLI::App* project =
      add("project", "project a point cloud to sparse depth", base, RunProject);
  AddFileOption(project, inv, "cloud", "point cloud .bin");
  AddFileOption(project, inv, "calib", "camera calibration file");
  CLI::App* densify =
      add("densify", "interpolate sparse depth to a 16-bit depth PNG",
          with({{"max-controls", "max_controls"}}), RunDensify);
  AddFileOption(densify, inv, "sparse", "sparse depth CSV (u,v,d)");
  AddFileOption(densify, inv, "calib", "camera calibration file");
  CLI::App* remap = add("remap", "warp an image or label map between cameras",
                        base, RunRemap);
  AddFileOption(remap, inv, "image", "source image");
  AddFileOption(remap, inv, "labels", "source label PNG");
  AddFileOption(remap, inv, "src-calib", "source camera calibration");
  AddFileOption(remap, inv, "dst-calib", "destination camera calibration");
  AddFileOption(remap, inv, "depth", "destination depth PNG (mm)");
  remap->add_flag("--nearest", inv.nearest, "nearest instead of bilinear");
  add("bundle", "match sensor streams of a sequence to camera frames",
      with({{"data", "data"}}), RunBundle);
  add("gradcheck", "compare backward with central differences",
      with({{"variant", "variant"},
            {"samples", "gradcheck_samples"},
            {"eps", "gradcheck_eps"},
            {"width", "width"},
            {"height", "height"}}),
      RunGradCheck);
  {
    Keys k = with({{"frames", "day_frames"},
                   {"night-frames", "night_frames"},
                   {"val-ratio", "val_ratio"},
                   {"modalities", "modalities"}});
    k.insert(k.end(), train_keys.begin() + 1, train_keys.end());
    add("repro", "synth, splits, all four variants, eval and ablation", k,
        RunRepro);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << app.help();
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    try {
      return handlers.at(sub->get_name())(inv);
    } catch (const std::exception& e) {
      std::cerr << "error: " << sub->get_name() << ": " << e.what() << "\n";
      return kExitFailure;
    }
  }
  return kExitUsage;
}

}  // namespace seafuse

int main(int argc, char** argv) { return seafuse::Main(argc, argv); }
