// Small builders shared by the unit tests and the acceptance runner.

#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "semplan/oracles.hpp"
#include "semplan/scenario.hpp"

namespace semplan::testing {

constexpr double kDeg = std::numbers::pi / 180.0;

inline Polygon box(double x0, double y0, double x1, double y1) {
  return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

inline SensorModel position_sensor(double range, double var) {
  SensorModel s;
  s.kind = SensorKind::Position;
  s.range_limit = range;
  s.position_noise = var * Eigen::Matrix2d::Identity();
  s.range_slope = 0.0;
  return s;
}

inline SensorModel range_sensor(double range, double base, double slope) {
  SensorModel s;
  s.kind = SensorKind::Range;
  s.range_limit = range;
  s.range_base_std = base;
  s.range_slope = slope;
  return s;
}

inline LandmarkSpec landmark_at(Eigen::Vector2d at, double var, int classes = 1, int cls = 0) {
  LandmarkSpec l;
  l.mean = at;
  l.true_position = at;
  l.cov = var * Eigen::Matrix2d::Identity();
  l.class_belief.assign(classes, 0.0);
  l.class_belief[cls] = 1.0;
  l.true_class = cls;
  return l;
}

inline PredicateDef proximity(std::string name, int robot, int landmark, double r, double delta) {
  PredicateDef d;
  d.name = std::move(name);
  d.robot = robot;
  d.landmark = landmark;
  d.radius = r;
  d.delta = delta;
  return d;
}

/// One robot, one class, no obstacles, 10x10 m.
inline Scenario open_scenario(const std::string& task) {
  Scenario s;
  s.name = "open";
  s.bounds = {0.0, 0.0, 10.0, 10.0};
  s.resolution = 0.25;
  s.time_step = 1.0;
  s.classes = {"thing"};
  s.confusion = Eigen::MatrixXd::Identity(1, 1);
  RobotSpec r;
  r.pose = {1.0, 1.0, 0.0};
  r.controls = ControlSet::default_set(1.0);
  r.sensors = {position_sensor(2.0, 0.01)};
  s.robots = {r};
  s.landmarks = {landmark_at({4.0, 1.0}, 0.01), landmark_at({8.0, 8.0}, 0.01)};
  s.predicates = {proximity("a", 0, 0, 0.5, 0.25), proximity("b", 0, 1, 0.5, 0.25)};
  s.task = task;
  s.planner.n_max = 3000;
  return s;
}

/// The same tiny problem as a scenario for the planner.
inline Scenario scenario_from_tiny(const oracle::TinyProblem& p, const std::string& task) {
  Scenario s;
  s.name = "tiny";
  s.bounds = {p.xmin, p.ymin, p.xmax, p.ymax};
  s.resolution = 0.25;
  for (const auto& b : p.boxes) s.obstacles.push_back(box(b.x0, b.y0, b.x1, b.y1));
  s.time_step = p.period;
  s.classes = {"thing"};
  s.confusion = Eigen::MatrixXd::Identity(1, 1);
  RobotSpec r;
  r.pose = {p.x, p.y, p.theta};
  // Controls enumerate as linear-major, so keep one linear speed.
  r.controls.linear = {p.controls.front().first};
  for (const auto& c : p.controls) r.controls.angular.push_back(c.second);
  r.controls.period = p.period;
  r.sensors = {position_sensor(p.sensor_range, p.sensor_var)};
  s.robots = {r};
  for (std::size_t i = 0; i < p.means.size(); ++i) {
    LandmarkSpec l = landmark_at(p.means[i], p.variances[i]);
    l.dynamics.process_noise = p.process_var * Eigen::Matrix2d::Identity();
    s.landmarks.push_back(l);
  }
  for (const auto& a : p.atoms) s.predicates.push_back(proximity(a.name, 0, a.landmark, a.radius, a.delta));
  s.task = task;
  return s;
}

}  // namespace semplan::testing
