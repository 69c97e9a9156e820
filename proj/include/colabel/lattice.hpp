#ifndef COLABEL_LATTICE_HPP
#define COLABEL_LATTICE_HPP

#include "colabel/core.hpp"

#include <cstdint>
#include <vector>

namespace colabel {

/// N x d feature matrix, already divided by the kernel bandwidths.
using FeaturePoints = RowMatrixXd;

/// Permutohedral lattice over a fixed point set. Filtering approximates the
/// unnormalized Gaussian transform
///
///   out_i = sum_j exp(-|f_i - f_j|^2 / 2) v_j
///
/// (self term included) in time linear in the number of points. Points are
/// splatted onto the d+1 vertices of their enclosing simplex, blurred with a
/// [1 2 1]/4 stencil along each lattice axis in order, then sliced back with
/// the same barycentric weights. Each point's own contribution is replaced by
/// the exact v_i, so only the cross terms are approximate.
///
/// Read-only after construction; concurrent filter() calls are safe.
class PermutohedralLattice {
 public:
  static PermutohedralLattice build(const Eigen::Ref<const FeaturePoints>& features);

  Index num_points() const { return num_points_; }
  int dimension() const { return dim_; }
  Index num_vertices() const { return num_vertices_; }

  /// Enclosing simplex of point i: d+1 vertex ids and barycentric weights.
  auto vertices(Index i) const { return vertex_ids_.row(i); }
  auto weights(Index i) const { return barycentric_.row(i); }

  /// Integer lattice key of a vertex (d+1 coordinates summing to zero).
  std::vector<int> key(Index vertex) const;

  /// Blur neighbours of a vertex along axis `axis` in [0, d]; -1 when the
  /// neighbour is not occupied.
  std::pair<int, int> neighbors(int axis, Index vertex) const {
    const auto& n = blur_neighbors_[static_cast<std::size_t>(vertex * (dim_ + 1) + axis)];
    return {n.first, n.second};
  }

  /// Scale that maps the lattice cross terms onto the Gaussian transform:
  /// the dense-limit constant refit on exact row sums of a fixed sample of
  /// kCalibrationSamples points.
  double normalization() const { return normalization_; }

  /// values: N x V. Returns N x V. Channels are filtered independently.
  RowMatrixXd filter(const Eigen::Ref<const RowMatrixXd>& values) const;

 private:
  // Unscaled splat-blur-slice response of each point to its own value.
  Eigen::VectorXd raw_self_response(const std::vector<std::uint8_t>& ranks) const;

  void filter_channels(const RowMatrixXd& values, Index first, Index count, RowMatrixXd& out) const;

  Index num_points_ = 0;
  int dim_ = 0;
  Index num_vertices_ = 0;
  double normalization_ = 1.0;
  Eigen::VectorXd self_;
  std::vector<std::int32_t> keys_;  // num_vertices x d (last coordinate implied)
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> vertex_ids_;
  RowMatrixXd barycentric_;
  std::vector<std::pair<std::int32_t, std::int32_t>> blur_neighbors_;  // num_vertices x (d+1)
};

/// Throws Error on non-finite features or an empty point set.
inline PermutohedralLattice build_lattice(const Eigen::Ref<const FeaturePoints>& features) {
  return PermutohedralLattice::build(features);
}

/// Lattice filter over any dense expression; the result has the input's scalar.
template <typename Derived>
RowMatrix<typename Derived::Scalar> filter(const PermutohedralLattice& lattice,
                                           const Eigen::MatrixBase<Derived>& values) {
  const RowMatrixXd in = values.template cast<double>();
  return lattice.filter(in).template cast<typename Derived::Scalar>();
}

/// Points whose exact row sums fix the lattice scale at build time.
inline constexpr Index kCalibrationSamples = 128;

/// Point cap for the brute-force transform.
inline constexpr Index kExactFilterCap = 5000;

/// Exact O(N^2) Gaussian transform in double precision. Throws when N exceeds `cap`.
RowMatrixXd gaussian_filter_exact(const Eigen::Ref<const FeaturePoints>& features,
                                  const Eigen::Ref<const RowMatrixXd>& values,
                                  Index cap = kExactFilterCap);

}  // namespace colabel

#endif  // COLABEL_LATTICE_HPP
