#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

#include "fixtures.hpp"
#include "semplan/oracles.hpp"
#include "semplan/semantic_map.hpp"
#include "semplan/sensing.hpp"

using namespace semplan;
using namespace semplan::testing;
using doctest::Approx;

namespace {

ConfusionMatrix paper_confusion() {
  ConfusionMatrix c(3, 3);
  c << 0.8, 0.23, 0.06, 0.18, 0.75, 0.04, 0.02, 0.02, 0.9;
  return c;
}

const Workspace kOpen({-20.0, -20.0, 20.0, 20.0}, {}, 0.5);

}  // namespace

TEST_CASE("predicted mean") {
  GaussianBelief b{{0.0, 0.0}, Eigen::Matrix2d::Identity()};
  TargetDynamics still;
  CHECK(predict_mean(b, still, 3).isApprox(Eigen::Vector2d::Zero()));
  TargetDynamics push;
  push.schedule.kind = ScheduleKind::ConstantVelocity;
  push.schedule.velocity = {1.0, 0.0};
  CHECK((predict_mean(b, push, 0) - Eigen::Vector2d(1.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("oscillation covers the segment in half a period") {
  ControlSchedule s;
  s.kind = ScheduleKind::Oscillation;
  s.start = {0.0, 0.0};
  s.end = {3.0, 4.0};
  s.speed = 1.0;
  s.dt = 1.0;
  CHECK((s.reference(5) - s.reference(0)).norm() == Approx(5.0));
  CHECK((s.reference(10) - s.reference(0)).norm() == Approx(0.0));
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (int t = 0; t < 5; ++t) sum += s.input(t);
  CHECK((sum - Eigen::Vector2d(3.0, 4.0)).norm() < 1e-12);
}

TEST_CASE("covariance without sensing is the prediction") {
  GaussianBelief b{{5.0, 5.0}, 2.0 * Eigen::Matrix2d::Identity()};
  TargetDynamics dyn;
  dyn.process_noise = 0.1 * Eigen::Matrix2d::Identity();
  const TeamState team = {{-10.0, -10.0, 0.0}};
  const std::vector<std::vector<SensorModel>> sensors = {{position_sensor(1.0, 1.0)}};
  const Eigen::Matrix2d got = propagate_covariance(b, dyn, 0, team, sensors, kOpen);
  CHECK((got - 2.1 * Eigen::Matrix2d::Identity()).norm() < 1e-12);
}

TEST_CASE("scalar filter analog") {
  GaussianBelief b{{0.0, 0.0}, Eigen::Matrix2d::Identity()};
  TargetDynamics dyn;
  const TeamState team = {{0.0, 0.0, 0.0}};
  const std::vector<std::vector<SensorModel>> sensors = {{position_sensor(2.0, 1.0)}};
  const Eigen::Matrix2d got = propagate_covariance(b, dyn, 0, team, sensors, kOpen);
  CHECK(got(0, 0) == Approx(oracle::scalar_kf(1.0, 1.0, 0.0, 1.0, 1.0)));
  CHECK(got(0, 0) == Approx(0.5));

  Measurement m;
  m.robot = 0;
  m.kind = SensorKind::Position;
  m.value = {1.0, 1.0};
  const GaussianBelief post = posterior_position_update(b, dyn, 0, std::span(&m, 1), team, sensors);
  CHECK(post.mean.x() == Approx(0.5));
  CHECK(post.mean.y() == Approx(0.5));
  CHECK(post.cov(0, 0) == Approx(0.5));
}

TEST_CASE("measurement at the predicted mean only shrinks the covariance") {
  GaussianBelief b{{1.0, 2.0}, Eigen::Matrix2d::Identity()};
  TargetDynamics dyn;
  const TeamState team = {{0.0, 0.0, 0.0}};
  const std::vector<std::vector<SensorModel>> sensors = {{range_sensor(5.0, 0.1, 0.0)}};
  Measurement m;
  m.robot = 0;
  m.kind = SensorKind::Range;
  m.value = {b.mean.norm(), 0.0};
  const GaussianBelief post = posterior_position_update(b, dyn, 0, std::span(&m, 1), team, sensors);
  CHECK((post.mean - b.mean).norm() < 1e-12);
  CHECK(post.cov.determinant() < b.cov.determinant());
}

TEST_CASE("determinant never grows for a static landmark") {
  GaussianBelief b{{2.0, 1.0}, Eigen::Matrix2d{{3.0, 1.0}, {1.0, 2.0}}};
  TargetDynamics dyn;
  const std::vector<std::vector<SensorModel>> sensors = {{range_sensor(5.0, 0.2, 0.1)}};
  double prev = b.cov.determinant();
  for (int t = 0; t < 20; ++t) {
    const TeamState team = {{std::cos(0.3 * t), std::sin(0.3 * t), 0.0}};
    b.cov = propagate_covariance(b, dyn, t, team, sensors, kOpen);
    CHECK(b.cov.determinant() < prev);
    prev = b.cov.determinant();
  }
}

TEST_CASE("two robots beat one") {
  GaussianBelief b{{0.0, 0.0}, Eigen::Matrix2d::Identity()};
  TargetDynamics dyn;
  const TeamState two = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  const std::vector<std::vector<SensorModel>> s2 = {{range_sensor(3.0, 0.3, 0.0)}, {range_sensor(3.0, 0.3, 0.0)}};
  const Eigen::Matrix2d both = propagate_covariance(b, dyn, 0, two, s2, kOpen);
  const TeamState one = {two[0]};
  const std::vector<std::vector<SensorModel>> s1 = {s2[0]};
  const Eigen::Matrix2d single = propagate_covariance(b, dyn, 0, one, s1, kOpen);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(single - both);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("Bayes update with the classifier matrix") {
  const auto u = class_belief_update({1.0 / 3, 1.0 / 3, 1.0 / 3}, 0, paper_confusion());
  CHECK_FALSE(u.degenerate);
  CHECK(u.belief[0] == Approx(0.8 / 1.09));
  CHECK(u.belief[0] == Approx(0.7339).epsilon(1e-4));
  CHECK(u.belief[1] == Approx(0.2110).epsilon(1e-3));
  CHECK(u.belief[2] == Approx(0.0550).epsilon(1e-3));

  const auto id = class_belief_update({0.2, 0.5, 0.3}, 2, Eigen::MatrixXd::Identity(3, 3));
  CHECK(id.belief[2] == Approx(1.0));

  const auto flat = class_belief_update({0.2, 0.5, 0.3}, 1, Eigen::MatrixXd::Constant(3, 3, 1.0 / 3));
  CHECK(flat.belief[1] == Approx(0.5));

  const auto dead = class_belief_update({0.0, 0.0, 1.0}, 0, Eigen::MatrixXd::Identity(3, 3));
  CHECK(dead.degenerate);
  CHECK(dead.belief[2] == Approx(1.0));
  CHECK_THROWS(class_belief_update({0.5, 0.5, 0.0}, 3, paper_confusion()));
}

TEST_CASE("ground truth motion") {
  Rng rng(1);
  TargetDynamics dyn;
  CHECK(ground_truth_step({1.0, 2.0}, dyn, 0, rng) == Eigen::Vector2d(1.0, 2.0));
  dyn.schedule.kind = ScheduleKind::ConstantVelocity;
  dyn.schedule.velocity = {0.5, 0.0};
  Eigen::Vector2d x(0.0, 0.0);
  for (int t = 0; t < 4; ++t) x = ground_truth_step(x, dyn, t, rng);
  CHECK((x - Eigen::Vector2d(2.0, 0.0)).norm() < 1e-12);

  TargetDynamics noisy;
  noisy.process_noise << 0.5, 0.1, 0.1, 0.2;
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector2d d = ground_truth_step({0.0, 0.0}, noisy, 0, rng);
    acc += d * d.transpose();
  }
  acc /= n;
  CHECK(acc(0, 0) == Approx(0.5).epsilon(0.05));
  CHECK(acc(1, 1) == Approx(0.2).epsilon(0.05));
  CHECK(acc(0, 1) == Approx(0.1).epsilon(0.05));
}

TEST_CASE("sensor gating") {
  const RobotPose at{0.0, 0.0, 0.0};
  const SensorModel s = range_sensor(1.0, 0.0, 0.5);
  CHECK(in_gate(s, at, {0.5, 0.0}, kOpen));
  CHECK_FALSE(in_gate(s, at, {1.5, 0.0}, kOpen));
  const Workspace wall({-5.0, -5.0, 5.0, 5.0}, {box(0.2, -1.0, 0.3, 1.0)}, 0.25);
  CHECK_FALSE(in_gate(s, at, {0.5, 0.0}, wall));
  SensorModel rect = position_sensor(5.0, 1.0);
  rect.fov = FovKind::Rectangle;
  rect.fov_width = 2.0;
  rect.fov_height = 1.0;
  CHECK(in_gate(rect, at, {0.9, 0.4}, kOpen));
  CHECK_FALSE(in_gate(rect, at, {0.4, 0.9}, kOpen));
  Rng rng(0);
  CHECK_FALSE(sense(s, at, {3.0, 0.0}, kOpen, rng).has_value());
}

TEST_CASE("range noise grows with distance") {
  Rng rng(2);
  const SensorModel s = range_sensor(5.0, 0.0, 0.5);
  const RobotPose at{0.0, 0.0, 0.0};
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < n; ++k) {
    const double v = sense(s, at, {1.0, 0.0}, kOpen, rng)->value.x();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  CHECK(mean == Approx(1.0).epsilon(0.01));
  CHECK(std::sqrt(sq / n - mean * mean) == Approx(0.5).epsilon(0.02));
}

TEST_CASE("position noise matches its covariance") {
  Rng rng(3);
  const SensorModel s = position_sensor(5.0, 2.0);
  const int n = 100000;
  double sx = 0.0, sy = 0.0;
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector2d v = sense(s, {0.0, 0.0, 0.0}, {1.0, 1.0}, kOpen, rng)->value - Eigen::Vector2d(1.0, 1.0);
    sx += v.x() * v.x();
    sy += v.y() * v.y();
  }
  CHECK(sx / n == Approx(2.0).epsilon(0.05));
  CHECK(sy / n == Approx(2.0).epsilon(0.05));
}

TEST_CASE("observation models") {
  const auto pos = observation_jacobian_and_noise(position_sensor(1.0, 0.3), {0.0, 0.0, 0.0}, {0.5, 0.5});
  CHECK(pos.jacobian.isApprox(Eigen::MatrixXd::Identity(2, 2)));
  const auto rng = observation_jacobian_and_noise(range_sensor(10.0, 0.0, 0.5), {0.0, 0.0, 0.0}, {3.0, 4.0});
  CHECK(rng.jacobian(0, 0) == Approx(0.6));
  CHECK(rng.jacobian(0, 1) == Approx(0.8));
  const auto two = observation_jacobian_and_noise(range_sensor(10.0, 0.0, 0.5), {0.0, 0.0, 0.0}, {2.0, 0.0});
  CHECK(two.noise(0, 0) == Approx(1.0));
  // noiseless sensors still get a floor
  const auto zero = observation_jacobian_and_noise(position_sensor(1.0, 0.0), {0.0, 0.0, 0.0}, {0.5, 0.5});
  CHECK(zero.noise(0, 0) >= kNoiseFloor);
  CHECK_THROWS_AS(observation_jacobian_and_noise(range_sensor(1.0, 0.0, 0.5), {1.0, 1.0, 0.0}, {1.0, 1.0}),
                  SensingError);
}

TEST_CASE("classifier draws from the true class column") {
  Rng rng(4);
  const int n = 100000;
  int person = 0;
  for (int k = 0; k < n; ++k) person += classify(0, paper_confusion(), rng) == 0;
  CHECK(person / double(n) == Approx(0.8).epsilon(0.015));
  for (int k = 0; k < 100; ++k) CHECK(classify(2, Eigen::MatrixXd::Identity(3, 3), rng) == 2);
  std::vector<int> counts(3, 0);
  for (int k = 0; k < 30000; ++k) ++counts[classify(1, Eigen::MatrixXd::Constant(3, 3, 1.0 / 3), rng)];
  for (int c : counts) CHECK(c / 30000.0 == Approx(1.0 / 3).epsilon(0.05));
}

TEST_CASE("confusion matrix validation") {
  CHECK_NOTHROW(validate_confusion(paper_confusion()));
  CHECK_THROWS(validate_confusion(paper_confusion().transpose()));
  CHECK_THROWS(validate_confusion(Eigen::MatrixXd::Identity(2, 3)));
}
