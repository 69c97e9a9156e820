#ifndef COLABEL_CORE_HPP
#define COLABEL_CORE_HPP

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace colabel {

// Row-major dense storage; a field with one row per pixel and one column per
// label has the same memory layout as the on-disk [t][y][x][l] order.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using RowMatrixXd = RowMatrix<double>;
using Index = Eigen::Index;

/// Raised for invalid data: malformed files, dimension mismatches, invariant
/// violations in caller-supplied values.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Spatio-temporal extent of a frame batch.
struct Shape {
  Index frames = 0;
  Index height = 0;
  Index width = 0;

  Index frame_pixels() const { return height * width; }
  Index pixels() const { return frames * height * width; }
  Index index(Index t, Index y, Index x) const { return (t * height + y) * width + x; }

  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

using Rgb = std::array<std::uint8_t, 3>;

/// One H x W RGB frame, one row per pixel in raster order.
struct Image {
  Index height = 0;
  Index width = 0;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor> pixels;

  Image() = default;
  Image(Index h, Index w);

  Rgb at(Index y, Index x) const;
  void set(Index y, Index x, const Rgb& c);
};

/// RGB frame batch over which one joint inference runs.
struct VideoVolume {
  Shape shape;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor> pixels;  // N x 3, [t][y][x]

  VideoVolume() = default;
  explicit VideoVolume(const Shape& s);

  static VideoVolume from_frames(const std::vector<Image>& frames);
  Image frame(Index t) const;
  VideoVolume slice_frames(Index first, Index count) const;
};

struct LabelSet {
  std::vector<std::string> names;
  std::vector<Rgb> palette;
  std::optional<int> ignore_label;

  int size() const { return static_cast<int>(names.size()); }
  void validate() const;

  /// Generic class list "label0".."labelN" with a spread-out palette.
  static LabelSet numbered(int count);
};

/// Per-pixel label ids over a batch, [t][y][x].
struct LabelVolume {
  Shape shape;
  Eigen::VectorXi labels;

  LabelVolume() = default;
  explicit LabelVolume(const Shape& s) : shape(s), labels(Eigen::VectorXi::Zero(s.pixels())) {}

  LabelVolume slice_frames(Index first, Index count) const;
};

/// Per-pixel per-label costs in nats (negative log-probability).
struct UnaryField {
  Shape shape;
  RowMatrixXd costs;  // N x L

  int labels() const { return static_cast<int>(costs.cols()); }
  void validate() const;
  UnaryField slice_frames(Index first, Index count) const;
};

/// Mean-field marginals, one probability simplex per row.
struct QField {
  Shape shape;
  RowMatrixXd q;  // N x L

  int labels() const { return static_cast<int>(q.cols()); }

  /// Largest |sum_l Q_i(l) - 1| over pixels, or +inf when an entry is negative
  /// or non-finite.
  double simplex_violation() const;
};

struct MeanFieldConfig {
  int iterations = 5;
  int batch_size = 50;
  double q_floor = 1e-10;
  std::optional<double> convergence_tol;

  void validate() const;
};

struct SegmentationResult {
  LabelVolume labels;
  std::optional<QField> final_q;
  int iterations_run = 0;
  double wall_time = 0.0;  // seconds
  std::vector<double> window_seconds;
};

/// cost = -log(max(p, floor)). `probs` is N x L.
UnaryField unary_from_probabilities(const Shape& shape, const Eigen::Ref<const RowMatrixXd>& probs,
                                    int labels, double floor);

/// Row-wise argmax; ties go to the lowest label index.
LabelVolume argmax_labels(const QField& q);

/// Row-wise softmax of -energy with per-row max shift.
template <typename Derived>
RowMatrixXd softmax_of_negative(const Eigen::MatrixBase<Derived>& energy) {
  RowMatrixXd out = (-energy.derived()).template cast<double>();
  for (Index i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return out;
}

}  // namespace colabel

#endif  // COLABEL_CORE_HPP
