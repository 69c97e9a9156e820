#include "colabel/superpixels.hpp"

#include "colabel/io.hpp"
#include "colabel/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace colabel {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(Index n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root survives, so results do not depend on call order.
  int unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return a;
  }

  // Attaches the set of `child` under the set of `root`.
  void attach(int child, int root) { parent_[find(child)] = find(root); }

 private:
  std::vector<int> parent_;
};

using Feature = Eigen::Matrix<double, 5, 1>;

Feature pixel_feature(const Image& img, Index y, Index x, double hs, double hr) {
  const Index i = y * img.width + x;
  Feature f;
  f << x / hs, y / hs, img.pixels(i, 0) / hr, img.pixels(i, 1) / hr, img.pixels(i, 2) / hr;
  return f;
}

// Iterates one pixel's feature to its mode under the unit flat window.
Feature seek_mode(const Image& img, const std::vector<Feature>& features, Index y0, Index x0,
                  const MeanShiftParams& p) {
  const double hs = p.spatial_bandwidth;
  Feature pos = features[static_cast<std::size_t>(y0 * img.width + x0)];
  for (int it = 0; it < p.max_iterations; ++it) {
    const double cx = pos(0) * hs, cy = pos(1) * hs;
    const Index xlo = std::max<Index>(0, static_cast<Index>(std::ceil(cx - hs)));
    const Index xhi = std::min<Index>(img.width - 1, static_cast<Index>(std::floor(cx + hs)));
    const Index ylo = std::max<Index>(0, static_cast<Index>(std::ceil(cy - hs)));
    const Index yhi = std::min<Index>(img.height - 1, static_cast<Index>(std::floor(cy + hs)));
    Feature sum = Feature::Zero();
    int count = 0;
    for (Index y = ylo; y <= yhi; ++y)
      for (Index x = xlo; x <= xhi; ++x) {
        const Feature& f = features[static_cast<std::size_t>(y * img.width + x)];
        if ((f - pos).squaredNorm() <= 1.0) {
          sum += f;
          ++count;
        }
      }
    if (count == 0) break;
    const Feature next = sum / count;
    const double shift = (next - pos).norm();
    pos = next;
    if (shift < p.convergence_eps) break;
  }
  return pos;
}

void merge_small_regions(const Image& img, int min_size, Eigen::VectorXi& ids, int regions) {
  const Index h = img.height, w = img.width;
  DisjointSets sets(regions);
  Eigen::VectorXd size = Eigen::VectorXd::Zero(regions);
  RowMatrixXd color_sum = RowMatrixXd::Zero(regions, 3);
  for (Index i = 0; i < h * w; ++i) {
    size(ids(i)) += 1;
    color_sum.row(ids(i)) += img.pixels.row(i).cast<double>();
  }

  for (bool changed = true; changed;) {
    changed = false;
    // adjacency between current roots
    std::vector<std::vector<int>> adjacent(static_cast<std::size_t>(regions));
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) {
        const int a = sets.find(ids(y * w + x));
        if (x + 1 < w) {
          const int b = sets.find(ids(y * w + x + 1));
          if (a != b) {
            adjacent[a].push_back(b);
            adjacent[b].push_back(a);
          }
        }
        if (y + 1 < h) {
          const int b = sets.find(ids((y + 1) * w + x));
          if (a != b) {
            adjacent[a].push_back(b);
            adjacent[b].push_back(a);
          }
        }
      }

    for (int r = 0; r < regions; ++r) {
      if (sets.find(r) != r || size(r) >= min_size) continue;
      int best = -1;
      double best_dist = 0.0;
      const Eigen::RowVector3d mean = color_sum.row(r) / size(r);
      std::vector<int> candidates;
      for (int n : adjacent[r]) candidates.push_back(sets.find(n));
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
      for (int n : candidates) {
        if (n == r) continue;
        const double dist = (color_sum.row(n) / size(n) - mean).squaredNorm();
        if (best < 0 || dist < best_dist) {  // ascending ids: ties keep the lower id
          best = n;
          best_dist = dist;
        }
      }
      if (best < 0) continue;
      sets.attach(r, best);
      size(best) += size(r);
      color_sum.row(best) += color_sum.row(r);
      // the absorbing region inherits the adjacency for later merges in this pass
      adjacent[best].insert(adjacent[best].end(), adjacent[r].begin(), adjacent[r].end());
      changed = true;
    }
  }
  for (Index i = 0; i < h * w; ++i) ids(i) = sets.find(ids(i));
}

}  // namespace

void MeanShiftParams::validate() const {
  if (!(spatial_bandwidth > 0.0)) throw Error("meanshift spatial_bandwidth must be positive");
  if (!(range_bandwidth > 0.0)) throw Error("meanshift range_bandwidth must be positive");
  if (min_region_size < 1) throw Error("meanshift min_region_size must be >= 1");
  if (max_iterations < 1) throw Error("meanshift max_iterations must be >= 1");
  if (!(convergence_eps > 0.0)) throw Error("meanshift convergence_eps must be positive");
}

std::vector<MeanShiftParams> default_meanshift_layers() {
  return {MeanShiftParams{7.0, 6.5, 20}, MeanShiftParams{7.0, 9.5, 50}, MeanShiftParams{7.0, 13.0, 100}};
}

SegmentationMap SegmentationMap::from_ids(Index height, Index width,
                                          const Eigen::Ref<const Eigen::VectorXi>& ids) {
  if (ids.size() != height * width)
    throw Error("region map has " + std::to_string(ids.size()) + " ids for a " + std::to_string(height) +
                "x" + std::to_string(width) + " frame");
  SegmentationMap map;
  map.height = height;
  map.width = width;
  map.labels.resize(ids.size());
  std::unordered_map<int, int> relabel;
  for (Index i = 0; i < ids.size(); ++i) {
    if (ids(i) < 0) throw Error("region ids must be non-negative");
    auto [it, inserted] = relabel.try_emplace(ids(i), static_cast<int>(relabel.size()));
    map.labels(i) = it->second;
  }
  map.regions = static_cast<int>(relabel.size());
  return map;
}

Eigen::VectorXi SegmentationMap::region_sizes() const {
  Eigen::VectorXi sizes = Eigen::VectorXi::Zero(regions);
  for (Index i = 0; i < labels.size(); ++i) ++sizes(labels(i));
  return sizes;
}

SegmentationMap meanshift_segment(const Image& frame, const MeanShiftParams& params) {
  params.validate();
  const Index h = frame.height, w = frame.width;
  if (h < 1 || w < 1) throw Error("meanshift needs a non-empty frame");

  std::vector<Feature> features(static_cast<std::size_t>(h * w));
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x)
      features[static_cast<std::size_t>(y * w + x)] =
          pixel_feature(frame, y, x, params.spatial_bandwidth, params.range_bandwidth);

  std::vector<Feature> modes(features.size());
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x)
      modes[static_cast<std::size_t>(y * w + x)] = seek_mode(frame, features, y, x, params);

  // group 4-connected pixels whose modes lie within one scaled unit
  DisjointSets sets(h * w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      const Index i = y * w + x;
      if (x + 1 < w && (modes[i] - modes[i + 1]).squaredNorm() <= 1.0)
        sets.unite(static_cast<int>(i), static_cast<int>(i + 1));
      if (y + 1 < h && (modes[i] - modes[i + w]).squaredNorm() <= 1.0)
        sets.unite(static_cast<int>(i), static_cast<int>(i + w));
    }
  Eigen::VectorXi roots(h * w);
  for (Index i = 0; i < h * w; ++i) roots(i) = sets.find(static_cast<int>(i));
  SegmentationMap grouped = SegmentationMap::from_ids(h, w, roots);

  if (params.min_region_size > 1) {
    merge_small_regions(frame, params.min_region_size, grouped.labels, grouped.regions);
    return SegmentationMap::from_ids(h, w, grouped.labels);
  }
  return grouped;
}

CliqueLayerSet CliqueLayerSet::from_maps(const Shape& shape, std::vector<std::vector<SegmentationMap>> maps) {
  if (maps.empty()) throw Error("clique layer set needs at least one layer");
  CliqueLayerSet set;
  set.shape_ = shape;
  const int layers = static_cast<int>(maps.size());
  set.clique_of_.resize(shape.pixels(), layers);
  int next = 0;
  for (int m = 0; m < layers; ++m) {
    if (static_cast<Index>(maps[m].size()) != shape.frames)
      throw Error("layer " + std::to_string(m) + " has " + std::to_string(maps[m].size()) +
                  " region maps, video has " + std::to_string(shape.frames) + " frames");
    for (Index t = 0; t < shape.frames; ++t) {
      const SegmentationMap& map = maps[m][t];
      if (map.height != shape.height || map.width != shape.width)
        throw Error("region map for layer " + std::to_string(m) + " frame " + std::to_string(t) + " is " +
                    std::to_string(map.height) + "x" + std::to_string(map.width) + ", expected " +
                    std::to_string(shape.height) + "x" + std::to_string(shape.width));
      for (Index i = 0; i < shape.frame_pixels(); ++i)
        set.clique_of_(t * shape.frame_pixels() + i, m) = next + map.labels(i);
      next += map.regions;
    }
  }
  set.num_cliques_ = next;
  set.maps_ = std::move(maps);
  return set;
}

Index CliqueLayerSet::layer_cliques(int layer) const {
  Index n = 0;
  for (const auto& map : maps_[layer]) n += map.regions;
  return n;
}

CliqueLayerSet CliqueLayerSet::slice_frames(Index first, Index count) const {
  std::vector<std::vector<SegmentationMap>> maps;
  for (const auto& layer : maps_) maps.emplace_back(layer.begin() + first, layer.begin() + first + count);
  return from_maps(Shape{count, shape_.height, shape_.width}, std::move(maps));
}

CliqueLayerSet build_clique_layers(const VideoVolume& video, std::span<const MeanShiftParams> params_list) {
  if (params_list.empty()) throw Error("need at least one mean-shift parameter set");
  for (const auto& p : params_list) p.validate();
  const Index frames = video.shape.frames;
  const long jobs = static_cast<long>(params_list.size()) * frames;
  std::vector<std::vector<SegmentationMap>> maps(params_list.size(),
                                                 std::vector<SegmentationMap>(static_cast<std::size_t>(frames)));
  parallel_for(jobs, [&](long job) {
    const auto m = static_cast<std::size_t>(job / frames);
    const Index t = job % frames;
    maps[m][static_cast<std::size_t>(t)] = meanshift_segment(video.frame(t), params_list[m]);
  });
  return CliqueLayerSet::from_maps(video.shape, std::move(maps));
}

std::vector<SegmentationMap> load_segmentation_maps(const std::filesystem::path& path,
                                                    const std::optional<Shape>& expected) {
  const LabelVolume volume = read_labelmap(path);
  if (expected && !(volume.shape == *expected))
    throw Error(path.string() + ": region map is " + to_string(volume.shape) + ", expected " +
                to_string(*expected));
  std::vector<SegmentationMap> maps;
  const Index fp = volume.shape.frame_pixels();
  for (Index t = 0; t < volume.shape.frames; ++t)
    maps.push_back(SegmentationMap::from_ids(volume.shape.height, volume.shape.width,
                                             volume.labels.segment(t * fp, fp)));
  return maps;
}

SegmentationMap load_segmentation_map(const std::filesystem::path& path) {
  auto maps = load_segmentation_maps(path);
  if (maps.size() != 1)
    throw Error(path.string() + ": expected a single-frame region map, found " + std::to_string(maps.size()) +
                " frames");
  return std::move(maps.front());
}

}  // namespace colabel
