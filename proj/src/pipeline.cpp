#include "colabel/pipeline.hpp"

namespace colabel {

LabelSet resolve_labels(const RunConfig& config, int labels) {
  if (!config.labels) return LabelSet::numbered(labels);
  if (config.labels->size() != labels)
    throw Error("config names " + std::to_string(config.labels->size()) + " labels, unary has " +
                std::to_string(labels));
  return *config.labels;
}

std::optional<CliqueLayerSet> build_configured_cliques(const PnPottsConfig& config, const VideoVolume& video) {
  if (!config.enabled) return std::nullopt;
  std::vector<MeanShiftParams> computed;
  for (const auto& layer : config.layers)
    if (layer.meanshift) computed.push_back(*layer.meanshift);
  std::optional<CliqueLayerSet> segmented;
  if (!computed.empty()) segmented = build_clique_layers(video, computed);

  std::vector<std::vector<SegmentationMap>> maps;
  int next = 0;
  for (const auto& layer : config.layers) {
    if (layer.meanshift) {
      std::vector<SegmentationMap> frames;
      for (Index t = 0; t < video.shape.frames; ++t) frames.push_back(segmented->map(next, t));
      ++next;
      maps.push_back(std::move(frames));
    } else {
      maps.push_back(load_segmentation_maps(*layer.regions, video.shape));
    }
  }
  return CliqueLayerSet::from_maps(video.shape, std::move(maps));
}

CrfModel build_model(const RunConfig& config, int labels) {
  CrfModel model;
  model.kernels = config.kernels;
  if (config.pn_potts.enabled) model.pn_potts = config.pn_potts.params();
  const CooccurrenceConfig& co = config.cooccurrence;
  if (co.enabled) {
    CooccurrenceModel m;
    if (co.matrix) {
      m.cost = read_matrix(*co.matrix);
    } else {
      const LabelVolume gt = read_labelmap(*co.estimate_from);
      if (gt.labels.size() > 0 && gt.labels.maxCoeff() >= labels)
        throw Error(co.estimate_from->string() + ": label " + std::to_string(gt.labels.maxCoeff()) +
                    " out of range for " + std::to_string(labels) + " classes");
      m = estimate_cooccurrence(gt, labels);
    }
    if (m.cost.rows() != labels)
      throw Error("co-occurrence matrix is " + std::to_string(m.cost.rows()) + " x " +
                  std::to_string(m.cost.cols()) + ", expected " + std::to_string(labels) + " labels");
    m.weight = co.weight;
    m.validate();
    model.cooccurrence = std::move(m);
  }
  return model;
}

SegmentationResult segment(const RunConfig& config, const VideoVolume& video, const UnaryField& unary,
                           const InferenceOptions& options) {
  if (!(unary.shape == video.shape))
    throw Error("unary covers " + to_string(unary.shape) + ", frames are " + to_string(video.shape));
  resolve_labels(config, unary.labels());
  const CrfModel model = build_model(config, unary.labels());
  const auto cliques = build_configured_cliques(config.pn_potts, video);
  return run_inference(video, unary, cliques, model, config.inference, options);
}

}  // namespace colabel
