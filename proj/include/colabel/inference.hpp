#ifndef COLABEL_INFERENCE_HPP
#define COLABEL_INFERENCE_HPP

#include "colabel/core.hpp"
#include "colabel/potentials.hpp"
#include "colabel/superpixels.hpp"

#include <optional>
#include <vector>

namespace colabel {

/// Energy terms independent of any particular batch.
struct CrfModel {
  std::vector<KernelSpec> kernels;
  std::optional<PnPottsParams> pn_potts;
  std::optional<CooccurrenceModel> cooccurrence;
};

/// Everything a mean-field step needs for one co-labeled batch. Kernel
/// features and lattices are built once and shared by all iterations.
struct BatchTerms {
  std::vector<PairwiseKernel> kernels;
  std::optional<CliqueLayerSet> cliques;
  std::optional<PnPottsParams> pn_potts;
  std::optional<CooccurrenceModel> cooccurrence;

  /// `cliques` must cover `video` when the model has Pn-Potts terms.
  static BatchTerms build(const VideoVolume& video, const CrfModel& model,
                          std::optional<CliqueLayerSet> cliques = std::nullopt, bool with_lattices = true);
};

/// Q_i = softmax(-unary_i).
QField init_q(const UnaryField& unary);

/// One parallel update: Q'_i(l) ∝ exp(-A(i,l)) where A sums the unary, the
/// Potts-transformed pairwise message, and the Pn-Potts and co-occurrence
/// expectations, all evaluated at the input Q.
QField mean_field_step(const QField& q, const UnaryField& unary, const BatchTerms& terms,
                       const MeanFieldConfig& config);

/// Same update with brute-force Gaussian sums (N <= kExactFilterCap).
QField mean_field_step_exact(const QField& q, const UnaryField& unary, const BatchTerms& terms,
                             const MeanFieldConfig& config);

/// Max over pixels and labels of |b - a|.
double max_q_delta(const QField& a, const QField& b);

struct InferenceOptions {
  bool keep_q = false;  // store the final marginals in the result
};

/// Splits the video into consecutive windows of config.batch_size frames and
/// runs config.iterations mean-field steps per window, stopping early once
/// max |ΔQ| < convergence_tol when set. Windows share no state.
SegmentationResult run_inference(const VideoVolume& video, const UnaryField& unary,
                                 const std::optional<CliqueLayerSet>& cliques, const CrfModel& model,
                                 const MeanFieldConfig& config, const InferenceOptions& options = {});

}  // namespace colabel

#endif  // COLABEL_INFERENCE_HPP
