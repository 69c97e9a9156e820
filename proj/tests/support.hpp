#ifndef COLABEL_TESTS_SUPPORT_HPP
#define COLABEL_TESTS_SUPPORT_HPP

#include "colabel/core.hpp"

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

namespace testing {

using namespace colabel;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("colabel_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline RowMatrixXd random_matrix(Index rows, Index cols, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  RowMatrixXd m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

/// Rows drawn uniformly from the open simplex.
inline QField random_q(const Shape& shape, int labels, std::mt19937_64& rng) {
  RowMatrixXd q = random_matrix(shape.pixels(), labels, rng, 0.05, 1.0);
  for (Index i = 0; i < q.rows(); ++i) q.row(i) /= q.row(i).sum();
  return QField{shape, q};
}

inline UnaryField random_unary(const Shape& shape, int labels, std::mt19937_64& rng, double scale = 3.0) {
  return UnaryField{shape, random_matrix(shape.pixels(), labels, rng, 0.0, scale)};
}

inline Image uniform_image(Index h, Index w, const Rgb& c) {
  Image img(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) img.set(y, x, c);
  return img;
}

/// Left half black, right half white.
inline Image two_tone_image(Index h, Index w) {
  Image img(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) img.set(y, x, x < w / 2 ? Rgb{0, 0, 0} : Rgb{255, 255, 255});
  return img;
}

inline Image noise_image(Index h, Index w, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, 255);
  Image img(h, w);
  for (Index i = 0; i < img.pixels.size(); ++i) img.pixels.data()[i] = static_cast<std::uint8_t>(u(rng));
  return img;
}

inline VideoVolume random_video(const Shape& shape, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, 255);
  VideoVolume v(shape);
  for (Index i = 0; i < v.pixels.size(); ++i) v.pixels.data()[i] = static_cast<std::uint8_t>(u(rng));
  return v;
}

/// RMSE of each column of `approx` divided by the RMS of the matching column of `exact`.
inline Eigen::VectorXd normalized_rmse(const RowMatrixXd& approx, const RowMatrixXd& exact) {
  Eigen::VectorXd out(exact.cols());
  for (Index c = 0; c < exact.cols(); ++c)
    out(c) = std::sqrt((approx.col(c) - exact.col(c)).squaredNorm() / exact.col(c).squaredNorm());
  return out;
}

}  // namespace testing

#endif  // COLABEL_TESTS_SUPPORT_HPP
