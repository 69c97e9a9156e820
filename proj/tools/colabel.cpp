// colabel: batch video segmentation with a fully-connected CRF.

#include "colabel/io.hpp"
#include "colabel/lattice.hpp"
#include "colabel/metrics.hpp"
#include "colabel/pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace colabel;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct SegmentArgs {
  std::string config, frames, unary, out;
  bool frame_level = false;
  std::optional<int> iterations, batch_size;
  std::optional<double> convergence_tol;
};

struct SuperpixelArgs {
  std::string config, frames, out;
};

struct EvalArgs {
  std::string pred, gt, video, csv;
  std::optional<int> labels, ignore;
  double color_eps = kDefaultColorEps;
};

struct SynthArgs {
  std::uint64_t seed = 0;
  Index t = 10, h = 64, w = 64;
  int l = 4;
  double noise = 0.5;
  std::string out;
};

struct BenchArgs {
  Index n = 100000;
  int d = 6, channels = 4;
  bool exact = false;
  std::uint64_t seed = 1;
};

RunConfig config_or_defaults(const std::string& path) {
  return path.empty() ? RunConfig::defaults() : load_config(path);
}

int run_segment(const SegmentArgs& a) {
  RunConfig cfg = config_or_defaults(a.config);
  if (a.iterations) cfg.inference.iterations = *a.iterations;
  if (a.batch_size) cfg.inference.batch_size = *a.batch_size;
  if (a.convergence_tol) cfg.inference.convergence_tol = *a.convergence_tol;
  if (a.frame_level) cfg.inference.batch_size = 1;
  cfg.inference.validate();

  const VideoVolume video = read_frames(a.frames);
  const UnaryField unary = read_unary(a.unary);
  const LabelSet labels = resolve_labels(cfg, unary.labels());
  const SegmentationResult result = segment(cfg, video, unary);

  fs::create_directories(a.out);
  write_labelmap(result.labels, fs::path(a.out) / "labels.lmap");
  write_color_map(result.labels, labels, a.out);
  std::cout << "frames=" << video.shape.frames << "\nheight=" << video.shape.height
            << "\nwidth=" << video.shape.width << "\nlabels=" << unary.labels()
            << "\nbatch_size=" << cfg.inference.batch_size << "\nwindows=" << result.window_seconds.size()
            << "\niterations=" << result.iterations_run << "\nwall_seconds=" << result.wall_time
            << "\nseconds_per_frame=" << result.wall_time / static_cast<double>(video.shape.frames) << "\n";
  return 0;
}

int run_superpixels(const SuperpixelArgs& a) {
  const RunConfig cfg = config_or_defaults(a.config);
  const VideoVolume video = read_frames(a.frames);
  std::vector<MeanShiftParams> params;
  for (const auto& layer : cfg.pn_potts.layers)
    if (layer.meanshift) params.push_back(*layer.meanshift);
  if (params.empty()) throw Error("config has no mean-shift layers");
  const CliqueLayerSet layers = build_clique_layers(video, params);

  fs::create_directories(a.out);
  const Index fp = video.shape.frame_pixels();
  for (int m = 0; m < layers.layers(); ++m) {
    LabelVolume regions(video.shape);
    for (Index t = 0; t < video.shape.frames; ++t) regions.labels.segment(t * fp, fp) = layers.map(m, t).labels;
    const fs::path file = fs::path(a.out) / ("layer" + std::to_string(m) + ".lmap");
    write_labelmap(regions, file);
    std::cout << "layer" << m << "_file=" << file.string() << "\nlayer" << m
              << "_regions=" << layers.layer_cliques(m) << "\n";
  }
  return 0;
}

int run_eval(const EvalArgs& a) {
  const LabelVolume pred = read_labelmap(a.pred);
  const LabelVolume gt = read_labelmap(a.gt);
  if (!(pred.shape == gt.shape))
    throw Error("prediction is " + to_string(pred.shape) + ", ground truth is " + to_string(gt.shape));
  const int labels = a.labels ? *a.labels : std::max(pred.labels.maxCoeff(), gt.labels.maxCoeff()) + 1;

  std::vector<std::pair<std::string, double>> report{
      {"global_accuracy", global_accuracy(pred, gt, a.ignore)},
      {"class_average_accuracy", class_average_accuracy(pred, gt, labels, a.ignore)},
      {"mean_iou", mean_iou(pred, gt, labels, a.ignore)},
  };
  if (!a.video.empty()) report.emplace_back("temporal_stability", temporal_stability(pred, read_frames(a.video), a.color_eps));

  std::cout << "pixels=" << gt.labels.size() << "\nlabels=" << labels << "\n";
  for (const auto& [key, value] : report) std::printf("%s=%.6f\n", key.c_str(), value);

  if (!a.csv.empty()) {
    const bool fresh = !fs::exists(a.csv) || fs::file_size(a.csv) == 0;
    std::ofstream csv(a.csv, std::ios::app);
    if (!csv) throw Error(a.csv + ": cannot open for writing");
    if (fresh) {
      csv << "pred,gt";
      for (const auto& entry : report) csv << "," << entry.first;
      csv << "\n";
    }
    csv << a.pred << "," << a.gt;
    for (const auto& entry : report) csv << "," << entry.second;
    csv << "\n";
  }
  return 0;
}

int run_synth(const SynthArgs& a) {
  const SyntheticScene scene = synthesize_scene(a.seed, a.t, a.h, a.w, a.l, a.noise);
  const fs::path out(a.out);
  fs::create_directories(out / "frames");
  write_frames(scene.video, out / "frames");
  write_labelmap(scene.gt, out / "gt.lmap");
  write_unary(scene.unary, out / "unary.unry");
  std::cout << "frames_dir=" << (out / "frames").string() << "\ngt=" << (out / "gt.lmap").string()
            << "\nunary=" << (out / "unary.unry").string() << "\n";
  return 0;
}

int run_bench(const BenchArgs& a) {
  using Clock = std::chrono::steady_clock;
  // Uniform points at unit density, the regime of pixel features.
  const double side = std::pow(static_cast<double>(a.n), 1.0 / a.d);
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> coord(0.0, side), value(0.0, 1.0);
  FeaturePoints features(a.n, a.d);
  for (Index i = 0; i < features.size(); ++i) features.data()[i] = coord(rng);
  RowMatrixXd values(a.n, a.channels);
  for (Index i = 0; i < values.size(); ++i) values.data()[i] = value(rng);

  std::cout << "N=" << a.n << "\nd=" << a.d << "\nchannels=" << a.channels << "\n";
  if (a.exact) {
    const auto t0 = Clock::now();
    const RowMatrixXd out = gaussian_filter_exact(features, values, a.n);
    std::cout << "mode=exact\nbuild_seconds=0\nfilter_seconds="
              << std::chrono::duration<double>(Clock::now() - t0).count() << "\n";
    return 0;
  }
  const auto t0 = Clock::now();
  const PermutohedralLattice lattice = build_lattice(features);
  const auto t1 = Clock::now();
  const RowMatrixXd out = lattice.filter(values);
  const auto t2 = Clock::now();
  std::cout << "mode=lattice\nvertices=" << lattice.num_vertices()
            << "\nbuild_seconds=" << std::chrono::duration<double>(t1 - t0).count()
            << "\nfilter_seconds=" << std::chrono::duration<double>(t2 - t1).count() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field CRF segmentation of video batches"};
  app.require_subcommand(1);

  SegmentArgs seg;
  auto* segment_cmd = app.add_subcommand("segment", "Segment a frame directory from per-pixel unaries");
  segment_cmd->add_option("--config", seg.config, "JSON run config (defaults when omitted)")->check(CLI::ExistingFile);
  segment_cmd->add_option("--frames", seg.frames, "Directory of PPM frames, ordered by file name")->required();
  segment_cmd->add_option("--unary", seg.unary, "UNRY unary file")->required();
  segment_cmd->add_option("--out", seg.out, "Output directory")->required();
  segment_cmd->add_flag("--frame-level", seg.frame_level, "Infer each frame alone (batch size 1)");
  segment_cmd->add_option("--iterations", seg.iterations, "Override inference.iterations");
  segment_cmd->add_option("--batch-size", seg.batch_size, "Override inference.batch_size");
  segment_cmd->add_option("--convergence-tol", seg.convergence_tol, "Override inference.convergence_tol");

  SuperpixelArgs sp;
  auto* superpixels_cmd = app.add_subcommand("superpixels", "Write mean-shift region maps, one file per layer");
  superpixels_cmd->add_option("--config", sp.config, "JSON run config")->check(CLI::ExistingFile);
  superpixels_cmd->add_option("--frames", sp.frames, "Directory of PPM frames")->required();
  superpixels_cmd->add_option("--out", sp.out, "Output directory")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score a predicted label map against ground truth");
  eval_cmd->add_option("--pred", ev.pred, "Predicted LMAP file")->required();
  eval_cmd->add_option("--gt", ev.gt, "Ground-truth LMAP file")->required();
  eval_cmd->add_option("--video", ev.video, "Frame directory, enables temporal stability");
  eval_cmd->add_option("--labels", ev.labels, "Number of classes (default: largest id + 1)");
  eval_cmd->add_option("--ignore", ev.ignore, "Ground-truth label excluded from scoring");
  eval_cmd->add_option("--color-eps", ev.color_eps, "Colour-static threshold for temporal stability");
  eval_cmd->add_option("--csv", ev.csv, "Append the scores as a CSV row");

  SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic scene");
  synth_cmd->set_help_flag("--help", "Print this help message and exit");
  synth_cmd->add_option("--seed", sy.seed)->required();
  synth_cmd->add_option("--t", sy.t, "Frames")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--h", sy.h, "Height")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--w", sy.w, "Width")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--l", sy.l, "Labels")->check(CLI::Range(2, 1 << 16));
  synth_cmd->add_option("--noise", sy.noise, "Unary noise in [0, 1]")->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--out", sy.out, "Output directory")->required();

  BenchArgs be;
  auto* bench_cmd = app.add_subcommand("bench-filter", "Time lattice construction and filtering");
  bench_cmd->add_option("--n", be.n, "Points")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--d", be.d, "Feature dimension")->check(CLI::Range(1, 16));
  bench_cmd->add_option("--channels", be.channels, "Value channels")->check(CLI::Range(1, 1024));
  bench_cmd->add_flag("--exact", be.exact, "Time the brute-force transform instead");
  bench_cmd->add_option("--seed", be.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*segment_cmd) return run_segment(seg);
    if (*superpixels_cmd) return run_superpixels(sp);
    if (*eval_cmd) return run_eval(ev);
    if (*synth_cmd) return run_synth(sy);
    if (*bench_cmd) return run_bench(be);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}
