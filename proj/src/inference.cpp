#include "colabel/inference.hpp"

#include <chrono>

namespace colabel {
namespace {

void check_batch(const QField& q, const UnaryField& unary, const BatchTerms& terms) {
  if (!(q.shape == unary.shape) || q.q.rows() != unary.costs.rows())
    throw Error("Q covers " + to_string(q.shape) + ", unary covers " + to_string(unary.shape));
  if (q.q.cols() != unary.costs.cols())
    throw Error("Q has " + std::to_string(q.q.cols()) + " labels, unary has " +
                std::to_string(unary.costs.cols()));
  if (terms.pn_potts && !terms.cliques) throw Error("Pn-Potts terms need clique layers");
}

QField update(const QField& q, const UnaryField& unary, const BatchTerms& terms, const MeanFieldConfig& config,
              FilterMode mode) {
  check_batch(q, unary, terms);
  RowMatrixXd energy = unary.costs + potts_transform(pairwise_message(q, terms.kernels, mode));
  if (terms.pn_potts) energy += pn_potts_expectation(q, *terms.cliques, *terms.pn_potts, config.q_floor);
  if (terms.cooccurrence) energy += cooccurrence_expectation(q, *terms.cooccurrence, config.q_floor);
  return QField{q.shape, softmax_of_negative(energy)};
}

}  // namespace

BatchTerms BatchTerms::build(const VideoVolume& video, const CrfModel& model, std::optional<CliqueLayerSet> cliques,
                             bool with_lattices) {
  BatchTerms terms;
  terms.kernels = build_pairwise_kernels(video, model.kernels, with_lattices);
  if (model.pn_potts) {
    if (!cliques) throw Error("Pn-Potts terms need clique layers");
    if (!(cliques->shape() == video.shape))
      throw Error("clique layers cover " + to_string(cliques->shape()) + ", video is " + to_string(video.shape));
    model.pn_potts->validate(cliques->layers());
    terms.cliques = std::move(cliques);
    terms.pn_potts = model.pn_potts;
  }
  if (model.cooccurrence) {
    model.cooccurrence->validate();
    terms.cooccurrence = model.cooccurrence;
  }
  return terms;
}

QField init_q(const UnaryField& unary) { return QField{unary.shape, softmax_of_negative(unary.costs)}; }

QField mean_field_step(const QField& q, const UnaryField& unary, const BatchTerms& terms,
                       const MeanFieldConfig& config) {
  return update(q, unary, terms, config, FilterMode::lattice);
}

QField mean_field_step_exact(const QField& q, const UnaryField& unary, const BatchTerms& terms,
                             const MeanFieldConfig& config) {
  if (q.q.rows() > kExactFilterCap)
    throw Error("exact mean-field step: " + std::to_string(q.q.rows()) + " pixels exceeds cap " +
                std::to_string(kExactFilterCap));
  return update(q, unary, terms, config, FilterMode::exact);
}

double max_q_delta(const QField& a, const QField& b) {
  if (a.q.rows() != b.q.rows() || a.q.cols() != b.q.cols())
    throw Error("cannot compare Q fields of different shapes");
  if (a.q.size() == 0) return 0.0;
  return (a.q - b.q).cwiseAbs().maxCoeff();
}

SegmentationResult run_inference(const VideoVolume& video, const UnaryField& unary,
                                 const std::optional<CliqueLayerSet>& cliques, const CrfModel& model,
                                 const MeanFieldConfig& config, const InferenceOptions& options) {
  config.validate();
  unary.validate();
  if (!(unary.shape == video.shape))
    throw Error("unary covers " + to_string(unary.shape) + ", video is " + to_string(video.shape));
  if (model.pn_potts && !cliques) throw Error("Pn-Potts terms need clique layers");
  if (cliques && !(cliques->shape() == video.shape))
    throw Error("clique layers cover " + to_string(cliques->shape()) + ", video is " + to_string(video.shape));

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const Shape& shape = video.shape;
  SegmentationResult result;
  result.labels = LabelVolume(shape);
  if (options.keep_q) result.final_q = QField{shape, RowMatrixXd(shape.pixels(), unary.labels())};

  for (Index first = 0; first < shape.frames; first += config.batch_size) {
    const auto window_start = Clock::now();
    const Index count = std::min<Index>(config.batch_size, shape.frames - first);
    const Index offset = first * shape.frame_pixels();
    const VideoVolume window = video.slice_frames(first, count);
    const UnaryField window_unary = unary.slice_frames(first, count);
    std::optional<CliqueLayerSet> window_cliques;
    if (model.pn_potts) window_cliques = cliques->slice_frames(first, count);
    const BatchTerms terms = BatchTerms::build(window, model, std::move(window_cliques));

    QField q = init_q(window_unary);
    int iterations = 0;
    for (int it = 0; it < config.iterations; ++it) {
      QField next = mean_field_step(q, window_unary, terms, config);
      ++iterations;
      const double delta = max_q_delta(q, next);
      q = std::move(next);
      if (config.convergence_tol && delta < *config.convergence_tol) break;
    }
    result.iterations_run = std::max(result.iterations_run, iterations);
    result.labels.labels.segment(offset, q.q.rows()) = argmax_labels(q).labels;
    if (result.final_q) result.final_q->q.middleRows(offset, q.q.rows()) = q.q;
    result.window_seconds.push_back(std::chrono::duration<double>(Clock::now() - window_start).count());
  }
  result.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

}  // namespace colabel
