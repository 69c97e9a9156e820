#include "colabel/inference.hpp"
#include "colabel/io.hpp"
#include "colabel/metrics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <sys/wait.h>

using namespace colabel;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::map<std::string, std::string> values;
  std::string output;

  std::string get(const std::string& key) const {
    const auto it = values.find(key);
    return it == values.end() ? std::string() : it->second;
  }
};

Run cli(const std::string& args, const testing::TempDir& dir) {
  const fs::path log = dir / "cli.log";
  const std::string command = std::string("\"") + COLABEL_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(command.c_str());
  Run run;
  run.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  run.output.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  std::istringstream lines(run.output);
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) run.values[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return run;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

const fs::path kDefaultConfig = fs::path(COLABEL_SOURCE_DIR) / "config" / "default.json";

Run synth(const testing::TempDir& dir, const std::string& name, int seed, int t, int h, int w, int l, double noise) {
  std::ostringstream args;
  args << "synth --seed " << seed << " --t " << t << " --h " << h << " --w " << w << " --l " << l << " --noise "
       << noise << " --out " << q(dir / name);
  return cli(args.str(), dir);
}

}  // namespace

TEST_CASE("exit codes") {
  testing::TempDir dir;
  CHECK(cli("--help", dir).code == 0);
  CHECK(cli("", dir).code == 1);
  CHECK(cli("frobnicate", dir).code == 1);
  CHECK(cli("segment --frames x", dir).code == 1);
  CHECK(cli("synth --seed 1 --t 1 --h 4 --w 4 --l 2 --noise abc --out " + q(dir / "s"), dir).code == 1);

  const Run missing = cli("eval --pred " + q(dir / "none.lmap") + " --gt " + q(dir / "none.lmap"), dir);
  CHECK(missing.code == 2);
  CHECK(missing.output.find("cannot open") != std::string::npos);

  REQUIRE(synth(dir, "s", 1, 2, 8, 8, 2, 0.2).code == 0);
  spit(dir / "bad.unry", "UNRYjunk");
  const Run bad = cli("segment --config " + q(kDefaultConfig) + " --frames " + q(dir / "s" / "frames") + " --unary " +
                          q(dir / "bad.unry") + " --out " + q(dir / "o"),
                      dir);
  CHECK(bad.code == 2);
  CHECK(bad.output.find("truncated header") != std::string::npos);

  spit(dir / "bad.json", R"({"kernels": [{"kind": "smoothness", "weight": -2}]})");
  const Run config = cli("segment --config " + q(dir / "bad.json") + " --frames " + q(dir / "s" / "frames") +
                             " --unary " + q(dir / "s" / "unary.unry") + " --out " + q(dir / "o"),
                         dir);
  CHECK(config.code == 2);
  CHECK(config.output.find("kernels[0].weight") != std::string::npos);

  const Run shape = cli("eval --pred " + q(dir / "s" / "gt.lmap") + " --gt " + q(dir / "s" / "gt.lmap") + " --video " +
                            q(dir / "s" / "frames") + " --labels 1",
                        dir);
  CHECK(shape.code == 2);
}

TEST_CASE("synth writes a scene that matches the library generator") {
  testing::TempDir dir;
  REQUIRE(synth(dir, "s", 11, 3, 12, 14, 3, 0.4).code == 0);
  const SyntheticScene scene = synthesize_scene(11, 3, 12, 14, 3, 0.4);
  CHECK(read_frames(dir / "s" / "frames").pixels == scene.video.pixels);
  CHECK(read_labelmap(dir / "s" / "gt.lmap").labels == scene.gt.labels);
  CHECK(read_unary(dir / "s" / "unary.unry").costs == scene.unary.costs.cast<float>().cast<double>());
}

TEST_CASE("zero-weight segment scores the unary argmax accuracy") {
  testing::TempDir dir;
  REQUIRE(synth(dir, "s", 5, 3, 20, 20, 3, 0.6).code == 0);
  spit(dir / "zero.json", R"({"kernels": [], "pn_potts": {"enabled": false}})");
  REQUIRE(cli("segment --config " + q(dir / "zero.json") + " --frames " + q(dir / "s" / "frames") + " --unary " +
                  q(dir / "s" / "unary.unry") + " --out " + q(dir / "o"),
              dir)
              .code == 0);
  const Run eval = cli("eval --pred " + q(dir / "o" / "labels.lmap") + " --gt " + q(dir / "s" / "gt.lmap"), dir);
  REQUIRE(eval.code == 0);
  const LabelVolume argmax = argmax_labels(init_q(read_unary(dir / "s" / "unary.unry")));
  const double expected = global_accuracy(argmax, read_labelmap(dir / "s" / "gt.lmap"));
  CHECK(std::stod(eval.get("global_accuracy")) == doctest::Approx(expected).epsilon(1e-6));
  CHECK(read_labelmap(dir / "o" / "labels.lmap").labels == argmax.labels);
  CHECK(fs::exists(dir / "o" / "frame_00002.ppm"));
}

TEST_CASE("co-labeled segmentation is at least as stable as frame-level") {
  testing::TempDir dir;
  for (int seed : {3, 4}) {
    CAPTURE(seed);
    const std::string s = "s" + std::to_string(seed);
    REQUIRE(synth(dir, s, seed, 6, 32, 32, 3, 0.5).code == 0);
    const std::string common = "segment --config " + q(kDefaultConfig) + " --frames " + q(dir / s / "frames") +
                               " --unary " + q(dir / s / "unary.unry");
    const Run video = cli(common + " --out " + q(dir / (s + "v")), dir);
    REQUIRE(video.code == 0);
    CHECK(video.get("batch_size") == "50");
    const Run frame = cli(common + " --frame-level --out " + q(dir / (s + "f")), dir);
    REQUIRE(frame.code == 0);
    CHECK(frame.get("batch_size") == "1");
    CHECK(frame.get("windows") == "6");
    const auto stability = [&](const std::string& out) {
      const Run r = cli("eval --pred " + q(dir / out / "labels.lmap") + " --gt " + q(dir / s / "gt.lmap") +
                            " --video " + q(dir / s / "frames"),
                        dir);
      REQUIRE(r.code == 0);
      return std::stod(r.get("temporal_stability"));
    };
    CHECK(stability(s + "v") >= stability(s + "f"));
  }
}

TEST_CASE("segment output is byte-identical across runs") {
  testing::TempDir dir;
  REQUIRE(synth(dir, "s", 8, 3, 24, 24, 4, 0.5).code == 0);
  const std::string common = "segment --config " + q(kDefaultConfig) + " --frames " + q(dir / "s" / "frames") +
                             " --unary " + q(dir / "s" / "unary.unry") + " --iterations 3 --batch-size 2";
  const Run a = cli(common + " --out " + q(dir / "a"), dir);
  const Run b = cli(common + " --out " + q(dir / "b"), dir);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.get("iterations") == "3");
  CHECK(a.get("windows") == "2");
  CHECK(slurp(dir / "a" / "labels.lmap") == slurp(dir / "b" / "labels.lmap"));
  CHECK(slurp(dir / "a" / "frame_00001.ppm") == slurp(dir / "b" / "frame_00001.ppm"));
}

TEST_CASE("eval appends CSV rows") {
  testing::TempDir dir;
  REQUIRE(synth(dir, "s", 2, 2, 8, 8, 2, 0.3).code == 0);
  const std::string args = "eval --pred " + q(dir / "s" / "gt.lmap") + " --gt " + q(dir / "s" / "gt.lmap") +
                           " --video " + q(dir / "s" / "frames") + " --csv " + q(dir / "m.csv");
  const Run first = cli(args, dir);
  REQUIRE(first.code == 0);
  CHECK(first.get("global_accuracy") == "1.000000");
  CHECK(first.get("mean_iou") == "1.000000");
  CHECK(first.get("pixels") == "128");
  REQUIRE(cli(args, dir).code == 0);
  std::istringstream csv(slurp(dir / "m.csv"));
  std::vector<std::string> lines;
  for (std::string line; std::getline(csv, line);) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].rfind("pred,gt,", 0) == 0);
  CHECK(lines[1] == lines[2]);
}

TEST_CASE("superpixels writes one region map per layer") {
  testing::TempDir dir;
  REQUIRE(synth(dir, "s", 6, 2, 16, 16, 3, 0.3).code == 0);
  const Run r = cli("superpixels --config " + q(kDefaultConfig) + " --frames " + q(dir / "s" / "frames") + " --out " +
                        q(dir / "sp"),
                    dir);
  REQUIRE(r.code == 0);
  for (int m = 0; m < 3; ++m) {
    const LabelVolume map = read_labelmap(dir / "sp" / ("layer" + std::to_string(m) + ".lmap"));
    CHECK(map.shape == Shape{2, 16, 16});
    CHECK(std::stoi(r.get("layer" + std::to_string(m) + "_regions")) >= 1);
  }
}

TEST_CASE("bench-filter report format") {
  testing::TempDir dir;
  const Run r = cli("bench-filter --n 100000 --d 6", dir);
  REQUIRE(r.code == 0);
  CHECK(r.get("N") == "100000");
  CHECK(r.get("d") == "6");
  CHECK(r.get("mode") == "lattice");
  CHECK(std::stod(r.get("build_seconds")) > 0.0);
  CHECK(std::stod(r.get("filter_seconds")) > 0.0);
  CHECK(std::stol(r.get("vertices")) > 0);

  const Run exact = cli("bench-filter --n 500 --d 3 --channels 2 --exact", dir);
  REQUIRE(exact.code == 0);
  CHECK(exact.get("mode") == "exact");
  CHECK(exact.get("channels") == "2");
  CHECK(cli("bench-filter --n 0 --d 3", dir).code != 0);
}
