#include "colabel/core.hpp"

#include <cmath>
#include <limits>

namespace colabel {

std::string to_string(const Shape& shape) {
  return std::to_string(shape.frames) + "x" + std::to_string(shape.height) + "x" +
         std::to_string(shape.width);
}

Image::Image(Index h, Index w) : height(h), width(w), pixels(h * w, 3) { pixels.setZero(); }

Rgb Image::at(Index y, Index x) const {
  const Index i = y * width + x;
  return {pixels(i, 0), pixels(i, 1), pixels(i, 2)};
}

void Image::set(Index y, Index x, const Rgb& c) {
  const Index i = y * width + x;
  for (int k = 0; k < 3; ++k) pixels(i, k) = c[k];
}

VideoVolume::VideoVolume(const Shape& s) : shape(s), pixels(s.pixels(), 3) {
  if (s.frames < 1 || s.height < 1 || s.width < 1)
    throw Error("video shape must be positive, got " + to_string(s));
  pixels.setZero();
}

VideoVolume VideoVolume::from_frames(const std::vector<Image>& frames) {
  if (frames.empty()) throw Error("video needs at least one frame");
  const Index h = frames.front().height, w = frames.front().width;
  VideoVolume video(Shape{static_cast<Index>(frames.size()), h, w});
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].height != h || frames[t].width != w)
      throw Error("frame " + std::to_string(t) + " is " + std::to_string(frames[t].height) + "x" +
                  std::to_string(frames[t].width) + ", expected " + std::to_string(h) + "x" +
                  std::to_string(w));
    video.pixels.middleRows(static_cast<Index>(t) * h * w, h * w) = frames[t].pixels;
  }
  return video;
}

Image VideoVolume::frame(Index t) const {
  Image img(shape.height, shape.width);
  img.pixels = pixels.middleRows(t * shape.frame_pixels(), shape.frame_pixels());
  return img;
}

VideoVolume VideoVolume::slice_frames(Index first, Index count) const {
  VideoVolume out(Shape{count, shape.height, shape.width});
  out.pixels = pixels.middleRows(first * shape.frame_pixels(), count * shape.frame_pixels());
  return out;
}

void LabelSet::validate() const {
  if (names.size() < 2) throw Error("label set needs at least 2 labels");
  if (palette.size() != names.size())
    throw Error("palette has " + std::to_string(palette.size()) + " entries, expected " +
                std::to_string(names.size()));
  if (ignore_label && (*ignore_label < 0 || *ignore_label >= size()))
    throw Error("ignore_label " + std::to_string(*ignore_label) + " out of range");
}

LabelSet LabelSet::numbered(int count) {
  LabelSet set;
  for (int l = 0; l < count; ++l) {
    set.names.push_back("label" + std::to_string(l));
    // golden-angle hue walk, fixed saturation and value
    const double hue = std::fmod(l * 137.508, 360.0) / 60.0;
    const double x = 1.0 - std::abs(std::fmod(hue, 2.0) - 1.0);
    std::array<double, 3> rgb{};
    switch (static_cast<int>(hue)) {
      case 0: rgb = {1, x, 0}; break;
      case 1: rgb = {x, 1, 0}; break;
      case 2: rgb = {0, 1, x}; break;
      case 3: rgb = {0, x, 1}; break;
      case 4: rgb = {x, 0, 1}; break;
      default: rgb = {1, 0, x}; break;
    }
    Rgb c;
    for (int k = 0; k < 3; ++k) c[k] = static_cast<std::uint8_t>(std::lround(40 + 200 * rgb[k]));
    set.palette.push_back(c);
  }
  return set;
}

LabelVolume LabelVolume::slice_frames(Index first, Index count) const {
  LabelVolume out(Shape{count, shape.height, shape.width});
  out.labels = labels.segment(first * shape.frame_pixels(), count * shape.frame_pixels());
  return out;
}

void UnaryField::validate() const {
  if (costs.rows() != shape.pixels())
    throw Error("unary field has " + std::to_string(costs.rows()) + " rows, shape " +
                to_string(shape) + " needs " + std::to_string(shape.pixels()));
  if (costs.cols() < 2) throw Error("unary field needs at least 2 labels");
  if (!costs.allFinite()) throw Error("unary field contains non-finite costs");
}

UnaryField UnaryField::slice_frames(Index first, Index count) const {
  UnaryField out;
  out.shape = Shape{count, shape.height, shape.width};
  out.costs = costs.middleRows(first * shape.frame_pixels(), count * shape.frame_pixels());
  return out;
}

double QField::simplex_violation() const {
  if (!q.allFinite() || (q.size() > 0 && q.minCoeff() < 0.0))
    return std::numeric_limits<double>::infinity();
  if (q.rows() == 0) return 0.0;
  return (q.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

void MeanFieldConfig::validate() const {
  if (iterations < 1) throw Error("inference.iterations must be >= 1");
  if (batch_size < 1) throw Error("inference.batch_size must be >= 1");
  if (!(q_floor > 0.0 && q_floor < 1e-3)) throw Error("inference.q_floor must lie in (0, 1e-3)");
  if (convergence_tol && !(*convergence_tol > 0.0))
    throw Error("inference.convergence_tol must be positive");
}

UnaryField unary_from_probabilities(const Shape& shape, const Eigen::Ref<const RowMatrixXd>& probs,
                                    int labels, double floor) {
  if (!(floor > 0.0 && floor < 1.0)) throw Error("probability floor must lie in (0, 1)");
  if (probs.cols() != labels)
    throw Error("probabilities have " + std::to_string(probs.cols()) + " labels, expected " +
                std::to_string(labels));
  if (probs.rows() != shape.pixels())
    throw Error("probabilities have " + std::to_string(probs.rows()) + " rows, shape " +
                to_string(shape) + " needs " + std::to_string(shape.pixels()));
  if (probs.hasNaN()) throw Error("probabilities contain NaN");
  UnaryField out;
  out.shape = shape;
  out.costs = -(probs.array().max(floor).log());
  return out;
}

LabelVolume argmax_labels(const QField& q) {
  LabelVolume out(q.shape);
  for (Index i = 0; i < q.q.rows(); ++i) {
    int best = 0;
    for (int l = 1; l < q.q.cols(); ++l)
      if (q.q(i, l) > q.q(i, best)) best = l;
    out.labels(i) = best;
  }
  return out;
}

}  // namespace colabel
