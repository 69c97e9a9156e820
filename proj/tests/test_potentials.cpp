#include "colabel/potentials.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace colabel;
using doctest::Approx;
using testing::cooccurrence_by_enumeration;
using testing::layers_from_ids;
using testing::pn_potts_by_enumeration;
using testing::random_cooccurrence;

namespace {

VideoVolume video_1x2() {
  VideoVolume v(Shape{1, 1, 2});
  v.pixels.setZero();
  return v;
}

}  // namespace

TEST_CASE("kernel kinds round-trip through their names") {
  for (auto kind : {KernelKind::smoothness, KernelKind::appearance, KernelKind::global_appearance})
    CHECK(kernel_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(kernel_kind_from_string("bilateral"), Error);
}

TEST_CASE("kernel specs validate weights and bandwidths") {
  CHECK(KernelSpec::smoothness(3, 3, 1).dimension() == 3);
  CHECK(KernelSpec::appearance(10, 60, 20, 5).dimension() == 6);
  CHECK(KernelSpec::global_appearance(1, 20).dimension() == 3);
  CHECK_NOTHROW(KernelSpec::smoothness(0, 3, 1).validate());
  CHECK_THROWS_AS(KernelSpec::smoothness(-1, 3, 1).validate(), Error);
  CHECK_THROWS_AS(KernelSpec::smoothness(1, 0, 1).validate(), Error);
  CHECK_THROWS_AS(KernelSpec::appearance(1, 60, 0, 5).validate(), Error);
  CHECK_THROWS_AS(KernelSpec::appearance(1, 60, 20, 0).validate(), Error);
  CHECK_THROWS_AS(KernelSpec::global_appearance(1, 0).validate(), Error);
}

TEST_CASE("default kernels") {
  const auto k = default_kernels();
  REQUIRE(k.size() == 3);
  CHECK(k[0].kind == KernelKind::smoothness);
  CHECK(k[0].weight == 3.0);
  CHECK(k[0].spatial == 3.0);
  CHECK(k[0].temporal == 1.0);
  CHECK(k[1].kind == KernelKind::appearance);
  CHECK(k[1].weight == 10.0);
  CHECK(k[1].spatial == 60.0);
  CHECK(k[1].color == 20.0);
  CHECK(k[1].temporal == 5.0);
  CHECK(k[2].kind == KernelKind::global_appearance);
  CHECK(k[2].weight == 1.0);
  CHECK(k[2].color == 20.0);
}

TEST_CASE("feature recipes") {
  VideoVolume v(Shape{1, 1, 2});
  v.pixels << 10, 20, 30, 40, 50, 60;
  const FeaturePoints s = build_feature_points(v, KernelSpec::smoothness(1, 1, 1));
  CHECK(s == (FeaturePoints(2, 3) << 0, 0, 0, 1, 0, 0).finished());

  VideoVolume black(Shape{2, 3, 3});
  black.pixels.setZero();
  const FeaturePoints a = build_feature_points(black, KernelSpec::appearance(1, 2, 255, 4));
  CHECK((a.rightCols(3).array() == 0.0).all());
  CHECK(a(black.shape.index(1, 2, 1), 0) == 0.5);
  CHECK(a(black.shape.index(1, 2, 1), 1) == 1.0);
  CHECK(a(black.shape.index(1, 2, 1), 2) == 0.25);

  std::mt19937_64 rng(3);
  const Image img = testing::noise_image(3, 4, rng);
  const VideoVolume twice = VideoVolume::from_frames({img, img});
  const FeaturePoints g = build_feature_points(twice, KernelSpec::global_appearance(1, 20));
  CHECK(g.cols() == 3);
  CHECK(g.topRows(12) == g.bottomRows(12));
  CHECK(g(5, 1) == Approx(img.pixels(5, 1) / 20.0));
}

TEST_CASE("zero-weight kernels give a zero message") {
  std::mt19937_64 rng(1);
  const Shape shape{2, 4, 4};
  const VideoVolume video = testing::random_video(shape, rng);
  const std::vector<KernelSpec> specs{KernelSpec::smoothness(0, 3, 1), KernelSpec::appearance(0, 60, 20, 5)};
  const auto kernels = build_pairwise_kernels(video, specs);
  CHECK_FALSE(kernels[0].lattice.has_value());
  const QField q = testing::random_q(shape, 3, rng);
  CHECK(pairwise_message(q, kernels).isZero(0.0));
  CHECK(pairwise_message(q, kernels, FilterMode::exact).isZero(0.0));
}

TEST_CASE("two-pixel message closed form") {
  // smoothness features (x/2, 0, 0): distance 0.5 between the pixels
  const std::vector<KernelSpec> specs{KernelSpec::smoothness(1.0, 2.0, 1.0)};
  const auto kernels = build_pairwise_kernels(video_1x2(), specs);
  RowMatrixXd qm(2, 2);
  qm << 0.3, 0.7, 0.9, 0.1;
  const RowMatrixXd m = pairwise_message(QField{Shape{1, 1, 2}, qm}, kernels, FilterMode::exact);
  const double k = std::exp(-0.125);
  CHECK(m(0, 0) == Approx(k * 0.9).epsilon(1e-14));
  CHECK(m(0, 1) == Approx(k * 0.1).epsilon(1e-14));
  CHECK(m(1, 0) == Approx(k * 0.3).epsilon(1e-14));
  CHECK(m(1, 1) == Approx(k * 0.7).epsilon(1e-14));
}

TEST_CASE("uniform Q gives label-independent messages") {
  std::mt19937_64 rng(8);
  const Shape shape{1, 8, 8};
  const VideoVolume video = testing::random_video(shape, rng);
  const auto specs = default_kernels();
  const auto kernels = build_pairwise_kernels(video, specs);
  const QField q{shape, RowMatrixXd::Constant(64, 4, 0.25)};
  const RowMatrixXd m = pairwise_message(q, kernels);
  for (Index i = 0; i < 64; ++i) CHECK((m.row(i).array() - m(i, 0)).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("exact message equals the direct double sum") {
  std::mt19937_64 rng(44);
  const Shape shape{2, 10, 12};
  const VideoVolume video = testing::random_video(shape, rng);
  const std::vector<KernelSpec> specs{KernelSpec::smoothness(2.0, 3.0, 1.0), KernelSpec::appearance(5.0, 10.0, 40.0, 2.0),
                                      KernelSpec::global_appearance(0.5, 30.0)};
  const auto kernels = build_pairwise_kernels(video, specs, false);
  const QField q = testing::random_q(shape, 3, rng);
  const RowMatrixXd m = pairwise_message(q, kernels, FilterMode::exact);
  const Index n = shape.pixels();
  RowMatrixXd direct = RowMatrixXd::Zero(n, 3);
  for (const auto& k : kernels)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (j != i)
          direct.row(i) += k.spec.weight * std::exp(-0.5 * (k.features.row(i) - k.features.row(j)).squaredNorm()) *
                           q.q.row(j);
  CHECK((m - direct).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK_THROWS_AS(pairwise_message(q, kernels, FilterMode::lattice), Error);
}

TEST_CASE("potts transform is total minus self") {
  RowMatrixXd m(3, 3);
  m << 0.2, 0.5, 0.3, 0.0, 0.0, 0.0, 1.0, -2.0, 4.0;
  const RowMatrixXd out = potts_transform(m);
  CHECK(out(0, 0) == Approx(0.8));
  CHECK(out(0, 1) == Approx(0.5));
  CHECK(out(0, 2) == Approx(0.7));
  CHECK(out.row(1).isZero(0.0));
  RowMatrixXd two(1, 2);
  two << 0.25, 1.5;
  CHECK(potts_transform(two) == (RowMatrixXd(1, 2) << 1.5, 0.25).finished());

  std::mt19937_64 rng(2);
  const RowMatrixXd r = testing::random_matrix(50, 5, rng, -1.0, 1.0);
  const RowMatrixXd t = potts_transform(r);
  CHECK((t.rowwise().sum() - 4.0 * r.rowwise().sum()).cwiseAbs().maxCoeff() <= 1e-12);
  const RowMatrix<float> f = potts_transform(r.cast<float>());
  CHECK((f.cast<double>() - t).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("Pn-Potts two-pixel cliques") {
  const Shape shape{1, 1, 2};
  const CliqueLayerSet cl = layers_from_ids(shape, {{0, 0}});
  const PnPottsParams params{0.0, {1.0}};
  RowMatrixXd qm(2, 2);
  qm << 1.0, 0.0, 0.5, 0.5;
  const RowMatrixXd e = pn_potts_expectation(QField{shape, qm}, cl, params);
  // pixel 1 sees Q_0 = (1, 0): pure for label 0
  CHECK(e(1, 0) == Approx(0.0).epsilon(1e-12));
  CHECK(e(1, 1) == Approx(1.0).epsilon(1e-9));
  CHECK(e(0, 0) == Approx(0.5).epsilon(1e-12));
  CHECK(e(0, 1) == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("Pn-Potts singleton cliques cost gamma_low") {
  const Shape shape{1, 1, 3};
  const CliqueLayerSet cl = layers_from_ids(shape, {{0, 1, 2}, {0, 0, 1}});
  const PnPottsParams params{0.2, {0.9, 0.6}};
  std::mt19937_64 rng(3);
  const QField q = testing::random_q(shape, 2, rng);
  const RowMatrixXd e = pn_potts_expectation(q, cl, params);
  CHECK(e(2, 0) == Approx(0.4).epsilon(1e-12));
  CHECK(e(2, 1) == Approx(0.4).epsilon(1e-12));
}

TEST_CASE("Pn-Potts matches exhaustive enumeration") {
  std::mt19937_64 rng(77);
  struct Instance {
    Shape shape;
    int labels;
    std::vector<std::vector<int>> layers;
  };
  const std::vector<Instance> instances{
      {{1, 1, 3}, 2, {{0, 0, 0}}},
      {{1, 2, 3}, 3, {{0, 0, 0, 1, 1, 2}, {0, 1, 1, 1, 2, 2}}},
      {{1, 2, 4}, 2, {{0, 0, 1, 1, 0, 0, 1, 1}, {0, 1, 2, 3, 4, 4, 4, 4}, {0, 0, 0, 0, 1, 1, 1, 1}}},
      {{1, 3, 3}, 3, {{0, 0, 1, 2, 2, 1, 3, 3, 3}, {0, 1, 2, 3, 4, 5, 6, 7, 8}}},
  };
  for (const auto& inst : instances) {
    const CliqueLayerSet cl = layers_from_ids(inst.shape, inst.layers);
    PnPottsParams params{0.15, {}};
    for (int m = 0; m < cl.layers(); ++m) params.gamma_max.push_back(0.5 + 0.3 * m);
    for (int trial = 0; trial < 10; ++trial) {
      const QField q = testing::random_q(inst.shape, inst.labels, rng);
      Index max_labelings = 0;
      const RowMatrixXd oracle = pn_potts_by_enumeration(q, cl, params, max_labelings);
      CHECK(max_labelings <= 12);
      CHECK((pn_potts_expectation(q, cl, params) - oracle).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("Pn-Potts output stays within the gamma bounds") {
  std::mt19937_64 rng(13);
  const Shape shape{2, 9, 9};
  const VideoVolume video = testing::random_video(shape, rng);
  MeanShiftParams p;
  p.range_bandwidth = 60.0;
  p.min_region_size = 4;
  const std::vector<MeanShiftParams> layers{p, p, p};
  const CliqueLayerSet cl = build_clique_layers(video, layers);
  const PnPottsParams params{0.1, {0.3, 0.4, 0.5}};
  RowMatrixXd qm = testing::random_q(shape, 3, rng).q;
  qm.row(0) << 1.0, 0.0, 0.0;  // exercises the floor clamp
  const RowMatrixXd e = pn_potts_expectation(QField{shape, qm}, cl, params);
  CHECK(e.allFinite());
  CHECK(e.minCoeff() >= 3 * 0.1 - 1e-12);
  CHECK(e.maxCoeff() <= 1.2 + 1e-12);
}

TEST_CASE("Pn-Potts parameter validation") {
  CHECK_NOTHROW(PnPottsParams::defaults().validate(3));
  CHECK(PnPottsParams::defaults().gamma_max == std::vector<double>{0.3, 0.4, 0.5});
  CHECK_THROWS_AS(PnPottsParams::defaults().validate(2), Error);
  CHECK_THROWS_AS((PnPottsParams{0.5, {0.5}}.validate(1)), Error);
  CHECK_THROWS_AS((PnPottsParams{-0.1, {0.5}}.validate(1)), Error);
}

TEST_CASE("co-occurrence simple cases") {
  const Shape shape{1, 1, 2};
  std::mt19937_64 rng(4);
  const QField q = testing::random_q(shape, 3, rng);
  CooccurrenceModel zero{RowMatrixXd::Zero(3, 3), 1.0};
  CHECK(cooccurrence_expectation(q, zero).isZero(0.0));

  CooccurrenceModel m{RowMatrixXd::Zero(2, 2), 0.8};
  m.cost(0, 1) = m.cost(1, 0) = 1.5;
  RowMatrixXd qm(2, 2);
  qm << 0.4, 0.6, 1.0, 0.0;
  const RowMatrixXd e = cooccurrence_expectation(QField{shape, qm}, m);
  CHECK(e(0, 1) == Approx(0.8 * 1.5).epsilon(1e-9));
  CHECK(e(0, 0) == Approx(0.0).epsilon(1e-9));
}

TEST_CASE("co-occurrence matches exhaustive enumeration") {
  std::mt19937_64 rng(91);
  const std::vector<std::pair<Shape, int>> instances{
      {{1, 1, 2}, 3}, {{1, 1, 2}, 4}, {{1, 1, 3}, 2}, {{1, 1, 3}, 3}, {{1, 2, 2}, 2}, {{2, 1, 2}, 2}};
  for (const auto& [shape, labels] : instances) {
    for (int trial = 0; trial < 10; ++trial) {
      const QField q = testing::random_q(shape, labels, rng);
      const CooccurrenceModel model = random_cooccurrence(labels, rng);
      Index max_labelings = 0;
      const RowMatrixXd oracle = cooccurrence_by_enumeration(q, model, max_labelings);
      CHECK(max_labelings <= 12);
      CHECK((cooccurrence_expectation(q, model) - oracle).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("co-occurrence contributions are non-negative") {
  std::mt19937_64 rng(5);
  const QField q = testing::random_q(Shape{3, 5, 5}, 4, rng);
  const RowMatrixXd e = cooccurrence_expectation(q, random_cooccurrence(4, rng));
  CHECK(e.minCoeff() >= 0.0);
}

TEST_CASE("co-occurrence model validation") {
  CooccurrenceModel m{RowMatrixXd::Zero(3, 3), 1.0};
  CHECK_NOTHROW(m.validate());
  m.cost(0, 1) = 1.0;
  CHECK_THROWS_AS(m.validate(), Error);
  m.cost(1, 0) = 1.0;
  CHECK_NOTHROW(m.validate());
  m.cost(2, 2) = 0.1;
  CHECK_THROWS_AS(m.validate(), Error);
  m.cost(2, 2) = 0.0;
  m.cost(0, 2) = m.cost(2, 0) = -0.5;
  CHECK_THROWS_AS(m.validate(), Error);
  m.cost(0, 2) = m.cost(2, 0) = 0.5;
  m.weight = -1.0;
  CHECK_THROWS_AS(m.validate(), Error);
  CHECK_THROWS_AS((CooccurrenceModel{RowMatrixXd::Zero(2, 3), 1.0}.validate()), Error);
}

TEST_CASE("co-occurrence estimation") {
  std::vector<Eigen::VectorXi> all{Eigen::Vector3i(0, 1, 2), Eigen::Vector3i(2, 1, 0)};
  CHECK(estimate_cooccurrence(all, 3).cost.isZero(0.0));

  std::vector<Eigen::VectorXi> only_zero{Eigen::Vector2i(0, 0)};
  const CooccurrenceModel m = estimate_cooccurrence(only_zero, 2);
  CHECK(m.cost(0, 1) == 1.0);
  CHECK(m.cost(1, 0) == 1.0);
  CHECK(m.cost(0, 0) == 0.0);

  // raw costs -log(2/4) and -log(1/4) rescale to 1/2 and 1
  std::vector<Eigen::VectorXi> maps{Eigen::Vector2i(0, 1), Eigen::Vector2i(0, 0), Eigen::Vector2i(2, 2)};
  const CooccurrenceModel r = estimate_cooccurrence(maps, 3);
  CHECK(r.cost(0, 1) == Approx(0.5).epsilon(1e-12));
  CHECK(r.cost(0, 2) == Approx(1.0).epsilon(1e-12));
  CHECK(r.cost(1, 2) == Approx(1.0).epsilon(1e-12));

  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> u(0, 4);
  std::vector<Eigen::VectorXi> random_maps;
  for (int k = 0; k < 7; ++k) {
    Eigen::VectorXi v(6);
    for (Index i = 0; i < 6; ++i) v(i) = u(rng);
    random_maps.push_back(v);
  }
  const CooccurrenceModel s = estimate_cooccurrence(random_maps, 5);
  CHECK(s.cost == s.cost.transpose());
  CHECK_NOTHROW(s.validate());

  std::vector<Eigen::VectorXi> bad{Eigen::Vector2i(0, 3)};
  CHECK_THROWS_AS(estimate_cooccurrence(bad, 3), Error);
  CHECK_THROWS_AS(estimate_cooccurrence(std::vector<Eigen::VectorXi>{}, 3), Error);

  LabelVolume gt(Shape{2, 1, 2});
  gt.labels << 0, 0, 0, 1;
  const CooccurrenceModel g = estimate_cooccurrence(gt, 2);
  CHECK(g.cost(0, 1) == 1.0);
}
