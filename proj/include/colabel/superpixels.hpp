#ifndef COLABEL_SUPERPIXELS_HPP
#define COLABEL_SUPERPIXELS_HPP

#include "colabel/core.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace colabel {

struct MeanShiftParams {
  double spatial_bandwidth = 7.0;  // pixels
  double range_bandwidth = 6.5;    // intensity units, 0-255 scale
  int min_region_size = 20;        // pixels
  int max_iterations = 50;
  double convergence_eps = 0.1;  // displacement in scaled feature space

  void validate() const;
};

/// Three layers, fine to coarse.
std::vector<MeanShiftParams> default_meanshift_layers();

/// Region ids of one frame, contiguous 0..regions-1 in raster order of first
/// occurrence.
struct SegmentationMap {
  Index height = 0;
  Index width = 0;
  Eigen::VectorXi labels;  // raster order
  int regions = 0;

  /// Relabels arbitrary non-negative ids to the contiguous raster-order form.
  static SegmentationMap from_ids(Index height, Index width, const Eigen::Ref<const Eigen::VectorXi>& ids);

  Eigen::VectorXi region_sizes() const;
  friend bool operator==(const SegmentationMap&, const SegmentationMap&) = default;
};

/// Flat-window mean shift in (x/hs, y/hs, r/hr, g/hr, b/hr), mode grouping over
/// 4-connected pixels, then small-region merging.
SegmentationMap meanshift_segment(const Image& frame, const MeanShiftParams& params);

/// Per-frame superpixel layers over a batch. Global clique ids are laid out
/// layer-major, then frame, then region, so cliques never span frames.
class CliqueLayerSet {
 public:
  CliqueLayerSet() = default;

  /// maps[layer][frame]; every map must be shape.height x shape.width.
  static CliqueLayerSet from_maps(const Shape& shape, std::vector<std::vector<SegmentationMap>> maps);

  const Shape& shape() const { return shape_; }
  int layers() const { return static_cast<int>(maps_.size()); }
  Index num_cliques() const { return num_cliques_; }
  Index layer_cliques(int layer) const;
  const SegmentationMap& map(int layer, Index frame) const { return maps_[layer][frame]; }

  /// Global clique id of pixel i in `layer`.
  int clique(Index pixel, int layer) const { return clique_of_(pixel, layer); }
  const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& clique_ids() const {
    return clique_of_;
  }

  CliqueLayerSet slice_frames(Index first, Index count) const;

 private:
  Shape shape_;
  std::vector<std::vector<SegmentationMap>> maps_;
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> clique_of_;  // N x layers
  Index num_cliques_ = 0;
};

CliqueLayerSet build_clique_layers(const VideoVolume& video, std::span<const MeanShiftParams> params_list);

/// Reads a one-frame region map in the label-map format.
SegmentationMap load_segmentation_map(const std::filesystem::path& path);

/// Reads a region-map file with one map per frame; `expected` is checked when given.
std::vector<SegmentationMap> load_segmentation_maps(const std::filesystem::path& path,
                                                    const std::optional<Shape>& expected = std::nullopt);

}  // namespace colabel

#endif  // COLABEL_SUPERPIXELS_HPP
