#ifndef COLABEL_METRICS_HPP
#define COLABEL_METRICS_HPP

#include "colabel/core.hpp"

#include <cstdint>
#include <optional>

namespace colabel {

/// Fraction of non-ignored pixels where pred == gt.
double global_accuracy(const LabelVolume& pred, const LabelVolume& gt, std::optional<int> ignore_label = {});

/// Mean per-class recall over classes present in gt.
double class_average_accuracy(const LabelVolume& pred, const LabelVolume& gt, int labels,
                              std::optional<int> ignore_label = {});

/// Mean IoU over classes with a non-empty union.
double mean_iou(const LabelVolume& pred, const LabelVolume& gt, int labels, std::optional<int> ignore_label = {});

inline constexpr double kDefaultColorEps = 10.0;

/// Over consecutive frame pairs, among pixels whose max per-channel RGB change
/// is <= color_eps: the fraction whose predicted label did not change.
double temporal_stability(const LabelVolume& pred, const VideoVolume& video, double color_eps = kDefaultColorEps);

struct SyntheticScene {
  VideoVolume video;
  LabelVolume gt;
  UnaryField unary;
};

/// Seeded scene: background label 0 plus `labels` axis-aligned rectangles
/// (rectangle k carries label 1 + k mod (labels-1)) translating 1 px/frame,
/// palette colours with sigma-8 Gaussian noise, and unaries whose
/// probabilities are proportional to (1 - noise) [l = gt] + noise * L * g_l with
/// g ~ Dirichlet(1,...,1) per pixel.
SyntheticScene synthesize_scene(std::uint64_t seed, Index frames, Index height, Index width, int labels,
                                double unary_noise);

}  // namespace colabel

#endif  // COLABEL_METRICS_HPP
