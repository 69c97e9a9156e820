#include "colabel/potentials.hpp"

#include <algorithm>
#include <cmath>

namespace colabel {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::smoothness: return "smoothness";
    case KernelKind::appearance: return "appearance";
    case KernelKind::global_appearance: return "global_appearance";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "smoothness") return KernelKind::smoothness;
  if (name == "appearance") return KernelKind::appearance;
  if (name == "global_appearance") return KernelKind::global_appearance;
  throw Error("unknown kernel kind \"" + name + "\"");
}

KernelSpec KernelSpec::smoothness(double weight, double spatial, double temporal) {
  return {KernelKind::smoothness, weight, spatial, 0.0, temporal};
}

KernelSpec KernelSpec::appearance(double weight, double spatial, double color, double temporal) {
  return {KernelKind::appearance, weight, spatial, color, temporal};
}

KernelSpec KernelSpec::global_appearance(double weight, double color) {
  return {KernelKind::global_appearance, weight, 0.0, color, 0.0};
}

int KernelSpec::dimension() const {
  switch (kind) {
    case KernelKind::smoothness: return 3;
    case KernelKind::appearance: return 6;
    case KernelKind::global_appearance: return 3;
  }
  return 0;
}

void KernelSpec::validate() const {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw Error("kernel weight must be finite and >= 0");
  const bool uses_spatial = kind != KernelKind::global_appearance;
  const bool uses_color = kind != KernelKind::smoothness;
  if (uses_spatial && !(spatial > 0.0)) throw Error(to_string(kind) + " kernel needs a positive spatial bandwidth");
  if (uses_spatial && !(temporal > 0.0))
    throw Error(to_string(kind) + " kernel needs a positive temporal bandwidth");
  if (uses_color && !(color > 0.0)) throw Error(to_string(kind) + " kernel needs a positive color bandwidth");
}

std::vector<KernelSpec> default_kernels() {
  return {KernelSpec::smoothness(3.0, 3.0, 1.0), KernelSpec::appearance(10.0, 60.0, 20.0, 5.0),
          KernelSpec::global_appearance(1.0, 20.0)};
}

FeaturePoints build_feature_points(const VideoVolume& video, const KernelSpec& spec) {
  spec.validate();
  const Shape& s = video.shape;
  FeaturePoints f(s.pixels(), spec.dimension());
  for (Index t = 0; t < s.frames; ++t)
    for (Index y = 0; y < s.height; ++y)
      for (Index x = 0; x < s.width; ++x) {
        const Index i = s.index(t, y, x);
        const auto rgb = video.pixels.row(i).cast<double>();
        switch (spec.kind) {
          case KernelKind::smoothness:
            f.row(i) << x / spec.spatial, y / spec.spatial, t / spec.temporal;
            break;
          case KernelKind::appearance:
            f.row(i) << x / spec.spatial, y / spec.spatial, t / spec.temporal, rgb(0) / spec.color,
                rgb(1) / spec.color, rgb(2) / spec.color;
            break;
          case KernelKind::global_appearance:
            f.row(i) = rgb / spec.color;
            break;
        }
      }
  return f;
}

std::vector<PairwiseKernel> build_pairwise_kernels(const VideoVolume& video, std::span<const KernelSpec> specs,
                                                   bool with_lattices) {
  std::vector<PairwiseKernel> kernels;
  kernels.reserve(specs.size());
  for (const KernelSpec& spec : specs) {
    PairwiseKernel k{spec, build_feature_points(video, spec), std::nullopt};
    if (with_lattices && spec.weight > 0.0) k.lattice = build_lattice(k.features);
    kernels.push_back(std::move(k));
  }
  return kernels;
}

RowMatrixXd pairwise_message(const QField& q, std::span<const PairwiseKernel> kernels, FilterMode mode) {
  RowMatrixXd message = RowMatrixXd::Zero(q.q.rows(), q.q.cols());
  for (std::size_t m = 0; m < kernels.size(); ++m) {
    const PairwiseKernel& k = kernels[m];
    if (k.spec.weight == 0.0) continue;
    if (k.features.rows() != q.q.rows())
      throw Error("kernel " + std::to_string(m) + " covers " + std::to_string(k.features.rows()) +
                  " pixels, Q has " + std::to_string(q.q.rows()));
    if (mode == FilterMode::exact) {
      message += k.spec.weight * (gaussian_filter_exact(k.features, q.q) - q.q);
    } else {
      if (!k.lattice) throw Error("kernel " + std::to_string(m) + " has no lattice");
      message += k.spec.weight * (k.lattice->filter(q.q) - q.q);
    }
  }
  return message;
}

PnPottsParams PnPottsParams::defaults() { return {0.0, {0.3, 0.4, 0.5}}; }

void PnPottsParams::validate(int layers) const {
  if (static_cast<int>(gamma_max.size()) != layers)
    throw Error("pn_potts has " + std::to_string(gamma_max.size()) + " gamma_max values for " +
                std::to_string(layers) + " layers");
  if (!(gamma_low >= 0.0)) throw Error("pn_potts gamma_low must be >= 0");
  for (std::size_t m = 0; m < gamma_max.size(); ++m)
    if (!(gamma_max[m] > gamma_low))
      throw Error("pn_potts layers[" + std::to_string(m) + "].gamma_max must exceed gamma_low");
}

RowMatrixXd pn_potts_expectation(const QField& q, const CliqueLayerSet& cliques, const PnPottsParams& params,
                                 double q_floor) {
  params.validate(cliques.layers());
  if (!(cliques.shape() == q.shape))
    throw Error("clique layers cover " + to_string(cliques.shape()) + ", Q covers " + to_string(q.shape));
  const Index n = q.q.rows();
  const RowMatrixXd log_q = q.q.array().max(q_floor).log();
  RowMatrixXd out = RowMatrixXd::Zero(n, q.q.cols());
  RowMatrixXd clique_sum(cliques.num_cliques(), q.q.cols());
  for (int m = 0; m < cliques.layers(); ++m) {
    clique_sum.setZero();
    for (Index i = 0; i < n; ++i) clique_sum.row(cliques.clique(i, m)) += log_q.row(i);
    const double lo = params.gamma_low, hi = params.gamma_max[m];
    for (Index i = 0; i < n; ++i) {
      const Eigen::ArrayXd others = (clique_sum.row(cliques.clique(i, m)) - log_q.row(i)).array().exp();
      out.row(i).array() += lo * others + hi * (1.0 - others);
    }
  }
  return out;
}

void CooccurrenceModel::validate() const {
  if (cost.rows() != cost.cols()) throw Error("co-occurrence matrix must be square");
  if (!(weight >= 0.0)) throw Error("co-occurrence weight must be >= 0");
  if (!cost.allFinite()) throw Error("co-occurrence matrix must be finite");
  if (cost.size() > 0 && cost.minCoeff() < 0.0) throw Error("co-occurrence matrix must be non-negative");
  for (Index a = 0; a < cost.rows(); ++a) {
    if (cost(a, a) != 0.0) throw Error("co-occurrence matrix must have a zero diagonal");
    for (Index b = a + 1; b < cost.cols(); ++b)
      if (cost(a, b) != cost(b, a)) throw Error("co-occurrence matrix must be symmetric");
  }
}

RowMatrixXd cooccurrence_expectation(const QField& q, const CooccurrenceModel& model, double q_floor) {
  model.validate();
  if (model.cost.rows() != q.q.cols())
    throw Error("co-occurrence matrix is " + std::to_string(model.cost.rows()) + "x" +
                std::to_string(model.cost.cols()) + ", Q has " + std::to_string(q.q.cols()) + " labels");
  const RowMatrixXd log_absent = (1.0 - q.q.array()).max(q_floor).log();
  const Eigen::RowVectorXd total = log_absent.colwise().sum();
  // P(l' present among the other pixels) under the factorized Q
  const RowMatrixXd present = 1.0 - ((-log_absent).rowwise() + total).array().exp();
  return model.weight * present * model.cost;  // cost symmetric with zero diagonal
}

CooccurrenceModel estimate_cooccurrence(std::span<const Eigen::VectorXi> maps, int labels) {
  if (maps.empty()) throw Error("co-occurrence estimation needs at least one label map");
  if (labels < 1) throw Error("co-occurrence estimation needs at least one label");
  Eigen::MatrixXd together = Eigen::MatrixXd::Zero(labels, labels);
  for (const auto& map : maps) {
    Eigen::Array<bool, Eigen::Dynamic, 1> present = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(labels, false);
    for (Index i = 0; i < map.size(); ++i) {
      if (map(i) < 0 || map(i) >= labels)
        throw Error("label " + std::to_string(map(i)) + " out of range for " + std::to_string(labels) + " labels");
      present(map(i)) = true;
    }
    for (int a = 0; a < labels; ++a)
      for (int b = 0; b < labels; ++b)
        if (present(a) && present(b)) together(a, b) += 1.0;
  }
  const double n = static_cast<double>(maps.size());
  CooccurrenceModel model;
  model.cost = RowMatrixXd::Zero(labels, labels);
  for (int a = 0; a < labels; ++a)
    for (int b = 0; b < labels; ++b)
      if (a != b) model.cost(a, b) = std::max(0.0, -std::log((together(a, b) + 1.0) / (n + 1.0)));
  const double peak = model.cost.maxCoeff();
  if (peak > 0.0) model.cost /= peak;
  return model;
}

CooccurrenceModel estimate_cooccurrence(const LabelVolume& gt, int labels) {
  std::vector<Eigen::VectorXi> maps;
  const Index fp = gt.shape.frame_pixels();
  for (Index t = 0; t < gt.shape.frames; ++t) maps.emplace_back(gt.labels.segment(t * fp, fp));
  return estimate_cooccurrence(maps, labels);
}

}  // namespace colabel
