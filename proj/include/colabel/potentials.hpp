#ifndef COLABEL_POTENTIALS_HPP
#define COLABEL_POTENTIALS_HPP

#include "colabel/core.hpp"
#include "colabel/lattice.hpp"
#include "colabel/superpixels.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace colabel {

enum class KernelKind { smoothness, appearance, global_appearance };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Gaussian pairwise kernel with Potts compatibility. Feature recipes:
///   smoothness         (x/spatial, y/spatial, t/temporal)
///   appearance         (x/spatial, y/spatial, t/temporal, r/color, g/color, b/color)
///   global_appearance  (r/color, g/color, b/color), couples the whole batch
struct KernelSpec {
  KernelKind kind = KernelKind::smoothness;
  double weight = 0.0;
  double spatial = 0.0;   // pixels
  double color = 0.0;     // intensity units
  double temporal = 0.0;  // frames

  static KernelSpec smoothness(double weight, double spatial, double temporal);
  static KernelSpec appearance(double weight, double spatial, double color, double temporal);
  static KernelSpec global_appearance(double weight, double color);

  int dimension() const;
  void validate() const;
};

std::vector<KernelSpec> default_kernels();

/// N x dimension() features in [t][y][x] pixel order.
FeaturePoints build_feature_points(const VideoVolume& video, const KernelSpec& spec);

/// A kernel bound to one batch: its features and, optionally, its lattice.
struct PairwiseKernel {
  KernelSpec spec;
  FeaturePoints features;
  std::optional<PermutohedralLattice> lattice;
};

std::vector<PairwiseKernel> build_pairwise_kernels(const VideoVolume& video, std::span<const KernelSpec> specs,
                                                   bool with_lattices = true);

enum class FilterMode { lattice, exact };

/// M(i,l) = sum_m w_m ([filter_m Q(., l)]_i - Q_i(l)): Gaussian-weighted
/// sum of Q_j(l) over j != i. Zero-weight kernels are skipped.
RowMatrixXd pairwise_message(const QField& q, std::span<const PairwiseKernel> kernels,
                             FilterMode mode = FilterMode::lattice);

/// out(i,l) = sum_{l' != l} M(i,l').
template <typename Derived>
RowMatrix<typename Derived::Scalar> potts_transform(const Eigen::MatrixBase<Derived>& message) {
  RowMatrix<typename Derived::Scalar> out = -message.derived();
  out.colwise() += message.rowwise().sum();
  return out;
}

struct PnPottsParams {
  double gamma_low = 0.0;
  std::vector<double> gamma_max;  // one per layer

  /// Coarse to fine 0.5 / 0.4 / 0.3, stored in the layer order of
  /// default_meanshift_layers() (fine first).
  static PnPottsParams defaults();
  void validate(int layers) const;
};

/// Per pixel i, label l: sum over layers of
///   gamma_low * P + gamma_max(m) * (1 - P),  P = prod_{j in c(i,m), j != i} Q_j(l)
/// with leave-one-out products taken in log space under the q_floor clamp.
RowMatrixXd pn_potts_expectation(const QField& q, const CliqueLayerSet& cliques, const PnPottsParams& params,
                                 double q_floor = 1e-10);

struct CooccurrenceModel {
  RowMatrixXd cost;  // L x L, symmetric, zero diagonal, non-negative
  double weight = 1.0;

  void validate() const;
};

/// w * sum_{l' != l} C(l,l') * P_{-i}(l' present in the batch), presence under
/// the factorized Q.
RowMatrixXd cooccurrence_expectation(const QField& q, const CooccurrenceModel& model, double q_floor = 1e-10);

/// C(l,l') = max(0, -log((n(l,l') + 1) / (n + 1))), rescaled to a unit maximum.
/// Each entry of `maps` is one image's labels.
CooccurrenceModel estimate_cooccurrence(std::span<const Eigen::VectorXi> maps, int labels);

/// Treats every frame of every volume as one image.
CooccurrenceModel estimate_cooccurrence(const LabelVolume& gt, int labels);

}  // namespace colabel

#endif  // COLABEL_POTENTIALS_HPP
