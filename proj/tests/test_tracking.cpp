#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "mint/common.hpp"
#include "mint/tracking.hpp"

using namespace mint;

namespace {

FloorPlan square_plan() {
  FloorPlan plan;
  plan.walls = {
      {{0.0, 0.0}, {10.0, 0.0}, true},
      {{10.0, 0.0}, {10.0, 8.0}, true},
      {{10.0, 8.0}, {0.0, 8.0}, true},
      {{0.0, 8.0}, {0.0, 0.0}, true},
  };
  return plan;
}

}  // namespace

TEST_CASE("sigma_a_from_vmax") {
  CHECK(sigma_a_from_vmax(1.5, 0.1) == doctest::Approx(25.0));
  CHECK(sigma_a_from_vmax(0.0, 0.1) == doctest::Approx(0.0));
  CHECK(sigma_a_from_vmax(3.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sigma_a_from_vmax(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("motion model block structure") {
  MotionModel m = MotionModel::make(0.1, 25.0);
  CHECK(m.F(0, 2) == doctest::Approx(0.1));
  CHECK(m.F(1, 3) == doctest::Approx(0.1));
  CHECK(m.G(0, 0) == doctest::Approx(0.005));
  CHECK(m.G(2, 0) == doctest::Approx(0.1));
  Eigen::Matrix4d q = 25.0 * m.G * m.G.transpose();
  CHECK((m.Q - q).norm() == doctest::Approx(0.0));
}

TEST_CASE("predict moves with constant velocity") {
  MotionModel m = MotionModel::make(0.1, 25.0);
  TrackerState s;
  s.mean << 0.0, 0.0, 1.0, 0.0;
  TrackerState out = predict(s, m);
  CHECK(out.mean(0) == doctest::Approx(0.1));
  CHECK(out.mean(1) == doctest::Approx(0.0));

  MotionModel still = MotionModel::make(0.1, 0.0);
  TrackerState rest;
  rest.mean << 2.0, 3.0, 0.0, 0.0;
  TrackerState unchanged = predict(rest, still);
  CHECK((unchanged.mean - rest.mean).norm() == doctest::Approx(0.0));
  CHECK((unchanged.cov - (still.F * rest.cov * still.F.transpose())).norm() <
        1e-12);

  TrackerState zero_cov;
  zero_cov.cov.setZero();
  TrackerState after = predict(zero_cov, m);
  CHECK((after.cov - m.Q).norm() == doctest::Approx(0.0));
}

TEST_CASE("predict is exact for constant-velocity truth") {
  MotionModel m = MotionModel::make(0.1, 25.0);
  Eigen::Vector4d truth(1.0, 2.0, 0.7, -0.4);
  TrackerState s;
  s.mean = truth;
  for (int k = 0; k < 50; ++k) {
    s = predict(s, m);
    truth(0) += 0.1 * truth(2);
    truth(1) += 0.1 * truth(3);
    CHECK((s.mean - truth).norm() < 1e-12);
  }
}

TEST_CASE("update contracts the error on consistent measurements") {
  std::vector<Point2D> anchors = {{0.0, 0.0}, {10.0, 0.0}, {5.0, 8.0}};
  Point2D truth{4.0, 3.0};
  TrackerState prior;
  prior.mean << 4.3, 2.8, 0.0, 0.0;
  prior.cov = Eigen::Vector4d(0.25, 0.25, 0.1, 0.1).asDiagonal();

  ObservationBatch batch;
  batch.noise_var = 1e-4;
  for (const auto& a : anchors) {
    batch.anchors.push_back(a);
    batch.distances.push_back(distance(truth, a));
  }
  auto res = update(prior, batch);
  CHECK(res.rows_used == 3);
  double prior_err = distance(prior.position(), truth);
  double post_err = distance(res.state.position(), truth);
  CHECK(post_err < prior_err);
}

TEST_CASE("tiny measurement noise pins the position") {
  std::vector<Point2D> anchors = {{0.0, 0.0}, {10.0, 0.0}, {5.0, 8.0}};
  Point2D truth{4.0, 3.0};
  TrackerState prior;
  prior.mean << 4.001, 2.999, 0.0, 0.0;  // small offset keeps linearization exact
  prior.cov = Eigen::Vector4d(0.01, 0.01, 0.1, 0.1).asDiagonal();

  ObservationBatch batch;
  batch.noise_var = 1e-12;
  for (const auto& a : anchors) {
    batch.anchors.push_back(a);
    batch.distances.push_back(distance(truth, a));
  }
  auto res = update(prior, batch);
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    double h = distance(res.state.position(), anchors[j]);
    CHECK(std::abs(h - batch.distances[j]) < 1e-6);
  }
}

TEST_CASE("single anchor shrinks covariance only along the range direction") {
  Point2D anchor{0.0, 0.0};
  Point2D truth{3.0, 4.0};
  TrackerState prior;
  prior.mean << 3.0, 4.0, 0.0, 0.0;
  prior.cov = Eigen::Vector4d(0.5, 0.5, 0.1, 0.1).asDiagonal();

  ObservationBatch batch;
  batch.anchors = {anchor};
  batch.distances = {distance(truth, anchor)};
  batch.noise_var = 1e-6;
  auto res = update(prior, batch);

  Eigen::Matrix2d reduction =
      prior.cov.topLeftCorner<2, 2>() - res.state.cov.topLeftCorner<2, 2>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(reduction);
  CHECK(std::abs(es.eigenvalues()(0)) < 1e-9);  // untouched direction
  CHECK(es.eigenvalues()(1) > 0.4);             // range direction collapses
  Eigen::Vector2d range_dir(truth.x - anchor.x, truth.y - anchor.y);
  range_dir.normalize();
  Eigen::Vector2d principal = es.eigenvectors().col(1);
  CHECK(std::abs(std::abs(principal.dot(range_dir)) - 1.0) < 1e-9);
}

TEST_CASE("update skips anchors at the predicted position") {
  TrackerState prior;
  prior.mean << 2.0, 2.0, 0.0, 0.0;
  ObservationBatch batch;
  batch.anchors = {{2.0, 2.0}, {5.0, 2.0}};
  batch.distances = {0.0, 3.0};
  batch.noise_var = 0.01;
  auto res = update(prior, batch);
  CHECK(res.rows_used == 1);

  ObservationBatch all_bad;
  all_bad.anchors = {{2.0, 2.0}};
  all_bad.distances = {0.0};
  all_bad.noise_var = 0.01;
  auto skipped = update(prior, all_bad);
  CHECK(skipped.rows_used == 0);
  CHECK((skipped.state.mean - prior.mean).norm() == doctest::Approx(0.0));

  CHECK_THROWS_AS(update(prior, ObservationBatch{}), std::invalid_argument);
}

TEST_CASE("covariance stays symmetric positive semidefinite") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  MotionModel m = MotionModel::make(0.1, 25.0);
  TrackerState s;
  s.mean << 5.0, 4.0, 0.5, -0.2;
  s.cov = Eigen::Vector4d(0.01, 0.01, 0.25, 0.25).asDiagonal();

  for (int step = 0; step < 100; ++step) {
    s = predict(s, m);
    ObservationBatch batch;
    batch.noise_var = 0.01;
    for (int j = 0; j < 3; ++j) {
      Point2D a{coord(rng), coord(rng)};
      batch.anchors.push_back(a);
      batch.distances.push_back(distance(s.position(), a) + 0.05);
    }
    s = update(s, batch).state;
    CHECK((s.cov - s.cov.transpose()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(s.cov);
    CHECK(es.eigenvalues()(0) >= -1e-9);
  }
}

TEST_CASE("conventional step drops outage base stations") {
  MotionModel m = MotionModel::make(0.1, 25.0);
  std::vector<Point2D> bss = {{0.0, 0.0}, {10.0, 0.0}, {0.0, 8.0}, {10.0, 8.0}};
  TrackerState s;
  s.mean << 5.0, 4.0, 1.0, 0.0;
  s.cov = Eigen::Vector4d(0.04, 0.04, 0.25, 0.25).asDiagonal();

  Point2D propagated{5.1, 4.0};
  std::vector<std::optional<double>> ranges(4);
  for (int i = 0; i < 3; ++i) ranges[i] = distance(propagated, bss[i]);
  ranges[3] = std::nullopt;

  TrackerState with_drop = step_conventional_from_ranges(s, ranges, bss, 0.01, m);

  // Equivalent manual prediction + 3-row update.
  TrackerState pred = predict(s, m);
  ObservationBatch batch;
  batch.noise_var = 0.01;
  for (int i = 0; i < 3; ++i) {
    batch.anchors.push_back(bss[i]);
    batch.distances.push_back(*ranges[i]);
  }
  TrackerState manual = update(pred, batch).state;
  CHECK((with_drop.mean - manual.mean).norm() < 1e-12);

  std::vector<std::optional<double>> none(4);
  TrackerState all_outage = step_conventional_from_ranges(s, none, bss, 0.01, m);
  CHECK((all_outage.mean - pred.mean).norm() < 1e-12);
}

TEST_CASE("mint step with no associations is prediction only") {
  FloorPlan plan = square_plan();
  std::vector<Point2D> bss = {{1.0, 1.0}};
  auto vas = generate_vas(plan, bss[0], 0, 1);
  TrackingConfig cfg;
  cfg.motion = MotionModel::make(0.1, 25.0);
  cfg.sigma_z2 = 0.01;
  cfg.cutoff_dc = 0.3;

  TrackerState s;
  s.mean << 5.0, 4.0, 0.0, 0.0;
  std::vector<MpcEstimateSet> empty(1);
  auto res = step_mint_from_measurements(s, empty, {vas}, plan, cfg, DaMode::kDa);
  TrackerState pred = predict(s, cfg.motion);
  CHECK((res.state.mean - pred.mean).norm() < 1e-12);
  CHECK(res.per_bs.size() == 1);
}

TEST_CASE("gada mode requires the true position") {
  FloorPlan plan = square_plan();
  std::vector<Point2D> bss = {{1.0, 1.0}};
  auto vas = generate_vas(plan, bss[0], 0, 1);
  TrackingConfig cfg;
  cfg.motion = MotionModel::make(0.1, 25.0);
  std::vector<MpcEstimateSet> empty(1);
  TrackerState s;
  CHECK_THROWS_AS(
      step_mint_from_measurements(s, empty, {vas}, plan, cfg, DaMode::kGada),
      std::invalid_argument);
}

TEST_CASE("mint updates from reflections when the direct path is missing") {
  FloorPlan plan = square_plan();
  std::vector<Point2D> bss = {{1.0, 1.0}};
  auto vas = generate_vas(plan, bss[0], 0, 1);
  Point2D truth{6.0, 5.0};

  VisibleSet vs = expected_visible_set(truth, 0, vas, plan);
  MpcEstimateSet est;
  est.position_index = 0;
  est.bs_id = 0;
  for (std::size_t j = 0; j < vs.vas.size(); ++j) {
    if (vs.vas[j].order == 0) continue;  // direct path lost to an obstruction
    est.delays.push_back(vs.distances[j] / kSpeedOfLight);
    est.amplitudes.push_back({1.0, 0.0});
  }
  REQUIRE(!est.delays.empty());

  TrackingConfig cfg;
  cfg.motion = MotionModel::make(0.1, 25.0);
  cfg.sigma_z2 = 0.01;
  cfg.cutoff_dc = 0.3;

  TrackerState s;
  s.mean << 6.0, 5.0, 0.3, -0.2;  // prediction drifts off the truth
  s.cov = Eigen::Vector4d(0.04, 0.04, 0.25, 0.25).asDiagonal();
  auto res = step_mint_from_measurements(s, {est}, {vas}, plan, cfg, DaMode::kGada,
                                         Point2D{6.0, 5.0});
  std::size_t accepted = res.per_bs[0].assignments.size();
  CHECK(accepted == est.delays.size());
  CHECK(accepted <= vs.vas.size());
  TrackerState pred = predict(s, cfg.motion);
  CHECK((res.state.mean - pred.mean).norm() > 0.0);
  CHECK(distance(res.state.position(), truth) <
        distance(pred.position(), truth));
}

TEST_CASE("frame-level steps run the full front end") {
  FloorPlan plan = square_plan();
  std::vector<Point2D> bss = {{1.0, 1.0}, {9.0, 1.0}, {1.0, 7.0}, {9.0, 7.0}};
  Point2D truth{5.0, 4.0};

  TrackingConfig cfg;
  cfg.pulse = make_pulse(1e-9, 0.5, 7e9, 6.25e9, 1e-9 / 16.0);
  cfg.motion = MotionModel::make(0.1, 25.0);
  cfg.sigma_z2 = 0.01;
  cfg.cutoff_dc = 0.3;

  std::vector<std::vector<VirtualAnchor>> vas;
  std::vector<SignalFrame> frames;
  for (std::size_t b = 0; b < bss.size(); ++b) {
    vas.push_back(generate_vas(plan, bss[b], static_cast<int>(b), 1));
    VisibleSet vs = expected_visible_set(truth, 0, vas[b], plan);
    std::mt19937_64 rng(100 + b);
    auto mpcs = build_mpc_list(vs, {1.0, 0.5}, rng);
    auto frame = synthesize(mpcs, {}, 1e-9, cfg.pulse, 80e-9, rng);
    frame.bs_id = static_cast<int>(b);
    frames.push_back(std::move(frame));
  }

  TrackerState s;
  s.mean << 5.0, 4.0, 0.4, -0.3;
  s.cov = Eigen::Vector4d(0.04, 0.04, 0.25, 0.25).asDiagonal();

  for (RangingMethod m : {RangingMethod::kMl, RangingMethod::kJbsf}) {
    TrackerState out = step_conventional(s, frames, bss, m, cfg);
    CHECK(distance(out.position(), truth) < 0.3);
  }

  auto res = step_mint(s, frames, vas, plan, cfg, DaMode::kGada, truth);
  REQUIRE(res.per_bs.size() == 4);
  int accepted = 0;
  for (const auto& c : res.per_bs) accepted += static_cast<int>(c.assignments.size());
  CHECK(accepted >= 8);
  CHECK(distance(res.state.position(), truth) < 0.1);

  auto da = step_mint(s, frames, vas, plan, cfg, DaMode::kDa);
  for (std::size_t b = 0; b < bss.size(); ++b) {
    VisibleSet vs = expected_visible_set(truth, 0, vas[b], plan);
    CHECK(da.per_bs[b].assignments.size() <= vs.vas.size());
    CHECK(res.per_bs[b].assignments.size() <= vs.vas.size());
  }
}
