#include "colabel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace colabel {
namespace {

void check_pair(const LabelVolume& pred, const LabelVolume& gt) {
  if (!(pred.shape == gt.shape) || pred.labels.size() != gt.labels.size())
    throw Error("prediction is " + to_string(pred.shape) + ", ground truth is " + to_string(gt.shape));
}

// rows: gt class, cols: predicted class; ignored pixels skipped
Eigen::MatrixXd confusion(const LabelVolume& pred, const LabelVolume& gt, int labels,
                          std::optional<int> ignore_label) {
  check_pair(pred, gt);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(labels, labels);
  for (Index i = 0; i < gt.labels.size(); ++i) {
    const int g = gt.labels(i), p = pred.labels(i);
    if (ignore_label && g == *ignore_label) continue;
    if (g < 0 || g >= labels || p < 0 || p >= labels)
      throw Error("label out of range for " + std::to_string(labels) + " classes at pixel " + std::to_string(i));
    counts(g, p) += 1.0;
  }
  if (counts.sum() == 0.0) throw Error("empty evaluation set");
  return counts;
}

}  // namespace

double global_accuracy(const LabelVolume& pred, const LabelVolume& gt, std::optional<int> ignore_label) {
  check_pair(pred, gt);
  Index total = 0, correct = 0;
  for (Index i = 0; i < gt.labels.size(); ++i) {
    if (ignore_label && gt.labels(i) == *ignore_label) continue;
    ++total;
    if (pred.labels(i) == gt.labels(i)) ++correct;
  }
  if (total == 0) throw Error("empty evaluation set");
  return static_cast<double>(correct) / static_cast<double>(total);
}

double class_average_accuracy(const LabelVolume& pred, const LabelVolume& gt, int labels,
                              std::optional<int> ignore_label) {
  const Eigen::MatrixXd c = confusion(pred, gt, labels, ignore_label);
  double sum = 0.0;
  int present = 0;
  for (int l = 0; l < labels; ++l) {
    const double support = c.row(l).sum();
    if (support == 0.0) continue;
    sum += c(l, l) / support;
    ++present;
  }
  return sum / present;
}

double mean_iou(const LabelVolume& pred, const LabelVolume& gt, int labels, std::optional<int> ignore_label) {
  const Eigen::MatrixXd c = confusion(pred, gt, labels, ignore_label);
  double sum = 0.0;
  int counted = 0;
  for (int l = 0; l < labels; ++l) {
    const double uni = c.row(l).sum() + c.col(l).sum() - c(l, l);
    if (uni == 0.0) continue;
    sum += c(l, l) / uni;
    ++counted;
  }
  return sum / counted;
}

double temporal_stability(const LabelVolume& pred, const VideoVolume& video, double color_eps) {
  if (!(pred.shape == video.shape))
    throw Error("prediction is " + to_string(pred.shape) + ", video is " + to_string(video.shape));
  if (pred.shape.frames < 2) throw Error("temporal stability needs at least 2 frames");
  const Index fp = pred.shape.frame_pixels();
  Index qualifying = 0, stable = 0;
  for (Index t = 1; t < pred.shape.frames; ++t)
    for (Index k = 0; k < fp; ++k) {
      const Index cur = t * fp + k, prev = cur - fp;
      const int change = (video.pixels.row(cur).cast<int>() - video.pixels.row(prev).cast<int>()).cwiseAbs().maxCoeff();
      if (change > color_eps) continue;
      ++qualifying;
      if (pred.labels(cur) == pred.labels(prev)) ++stable;
    }
  if (qualifying == 0) throw Error("temporal stability: no colour-static pixels");
  return static_cast<double>(stable) / static_cast<double>(qualifying);
}

SyntheticScene synthesize_scene(std::uint64_t seed, Index frames, Index height, Index width, int labels,
                                double unary_noise) {
  if (frames < 1 || height < 2 || width < 2) throw Error("synthetic scene needs T >= 1 and H, W >= 2");
  if (labels < 2) throw Error("synthetic scene needs at least 2 labels");
  if (!(unary_noise >= 0.0 && unary_noise <= 1.0)) throw Error("unary_noise must lie in [0, 1]");

  std::mt19937_64 rng(seed);
  const Shape shape{frames, height, width};
  const auto palette = LabelSet::numbered(labels).palette;

  struct Rect {
    Index x, y, w, h, vx, vy;
    int label;
  };
  std::vector<Rect> rects;
  const Index steps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int k = 0; k < labels; ++k) {
    Rect r{};
    r.w = std::uniform_int_distribution<Index>(std::max<Index>(1, width / 5), std::max<Index>(1, width / 2))(rng);
    r.h = std::uniform_int_distribution<Index>(std::max<Index>(1, height / 5), std::max<Index>(1, height / 2))(rng);
    r.x = std::uniform_int_distribution<Index>(0, width - r.w)(rng);
    r.y = std::uniform_int_distribution<Index>(0, height - r.h)(rng);
    const int dir = std::uniform_int_distribution<int>(0, 3)(rng);
    r.vx = steps[dir][0];
    r.vy = steps[dir][1];
    r.label = 1 + k % (labels - 1);
    rects.push_back(r);
  }

  SyntheticScene scene;
  scene.gt = LabelVolume(shape);
  for (Index t = 0; t < frames; ++t)
    for (const Rect& r : rects) {
      const Index x0 = r.x + r.vx * t, y0 = r.y + r.vy * t;
      for (Index y = std::max<Index>(0, y0); y < std::min<Index>(height, y0 + r.h); ++y)
        for (Index x = std::max<Index>(0, x0); x < std::min<Index>(width, x0 + r.w); ++x)
          scene.gt.labels(shape.index(t, y, x)) = r.label;
    }

  scene.video = VideoVolume(shape);
  std::normal_distribution<double> pixel_noise(0.0, 8.0);
  for (Index i = 0; i < shape.pixels(); ++i)
    for (int c = 0; c < 3; ++c) {
      const double v = palette[scene.gt.labels(i)][c] + pixel_noise(rng);
      scene.video.pixels(i, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }

  RowMatrixXd probs(shape.pixels(), labels);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::RowVectorXd g(labels);
  for (Index i = 0; i < shape.pixels(); ++i) {
    for (int l = 0; l < labels; ++l) g(l) = -std::log(1.0 - unit(rng));  // Exp(1) draws
    g /= g.sum();
    auto row = probs.row(i);
    row = unary_noise * labels * g;
    row(scene.gt.labels(i)) += 1.0 - unary_noise;
    row /= row.sum();
  }
  scene.unary = unary_from_probabilities(shape, probs, labels, 1e-6);
  return scene;
}

}  // namespace colabel
