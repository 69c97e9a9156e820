#ifndef COLABEL_PIPELINE_HPP
#define COLABEL_PIPELINE_HPP

#include "colabel/inference.hpp"
#include "colabel/io.hpp"

#include <optional>

namespace colabel {

/// The configured label set, or a numbered one with `labels` entries. Throws
/// when the configured set has a different size.
LabelSet resolve_labels(const RunConfig& config, int labels);

/// Superpixel layers for the batch: mean shift per layer, or the precomputed
/// region maps named in the config. Empty when Pn-Potts is disabled.
std::optional<CliqueLayerSet> build_configured_cliques(const PnPottsConfig& config, const VideoVolume& video);

/// Energy terms for `labels` classes; loads or estimates the co-occurrence
/// matrix when enabled.
CrfModel build_model(const RunConfig& config, int labels);

/// Full segmentation run from a validated config.
SegmentationResult segment(const RunConfig& config, const VideoVolume& video, const UnaryField& unary,
                           const InferenceOptions& options = {});

}  // namespace colabel

#endif  // COLABEL_PIPELINE_HPP
