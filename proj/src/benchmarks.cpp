#include <algorithm>
#include <cmath>
#include <numbers>

#include "semplan/scenario.hpp"

namespace semplan {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Polygon box(double x0, double y0, double x1, double y1) {
  return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

ControlSet fine_controls(double period) {
  ControlSet c;
  c.linear = {0.2, 1.0};
  c.angular = {0.0};
  for (int deg = 30; deg <= 180; deg += 30) {
    c.angular.push_back(deg * kDeg);
    c.angular.push_back(-deg * kDeg);
  }
  c.period = period;
  return c;
}

SensorModel position_sensor(double range, double var) {
  SensorModel s;
  s.kind = SensorKind::Position;
  s.range_limit = range;
  s.position_noise = var * Eigen::Matrix2d::Identity();
  s.range_slope = 0.0;
  return s;
}

LandmarkSpec static_landmark(Eigen::Vector2d at, double var, int num_classes, int cls) {
  LandmarkSpec l;
  l.mean = at;
  l.true_position = at;
  l.cov = var * Eigen::Matrix2d::Identity();
  l.class_belief.assign(num_classes, 0.0);
  l.class_belief[cls] = 1.0;
  l.true_class = cls;
  return l;
}

PredicateDef proximity(std::string name, int robot, int landmark, double r, double delta) {
  PredicateDef d;
  d.name = std::move(name);
  d.kind = PredicateKind::Proximity;
  d.robot = robot;
  d.landmark = landmark;
  d.radius = r;
  d.delta = delta;
  return d;
}

}  // namespace

Scenario feasibility_benchmark() {
  Scenario s;
  s.name = "feasibility";
  s.bounds = {0.0, 0.0, 10.0, 10.0};
  s.resolution = 0.25;
  s.obstacles = {box(3.0, 0.0, 3.3, 6.5), box(6.5, 3.5, 6.8, 10.0)};
  s.time_step = 1.0;
  s.classes = {"target"};
  s.confusion = Eigen::MatrixXd::Identity(1, 1);
  RobotSpec r;
  r.pose = {1.0, 1.0, 0.0};
  r.controls = fine_controls(s.time_step);
  r.sensors = {position_sensor(1.0, 0.01)};
  s.robots = {r};
  s.landmarks = {static_landmark({5.0, 8.0}, 0.02, 1, 0), static_landmark({8.5, 1.5}, 0.02, 1, 0)};
  s.predicates = {proximity("pi1", 0, 0, 0.2, 0.25), proximity("pi2", 0, 1, 0.2, 0.25)};
  s.task = "F pi1 & F pi2";
  s.planner.n_max = 5000;
  s.planner.stop_at_first_solution = true;
  s.executor.max_steps = 400;
  return s;
}

Scenario replanning_benchmark(double prior_offset, bool noisy) {
  Scenario s;
  s.name = "replanning_offset_" + std::to_string(static_cast<int>(std::lround(prior_offset)));
  s.bounds = {0.0, 0.0, 20.0, 20.0};
  s.resolution = 0.5;
  s.obstacles = {box(8.0, 8.0, 12.0, 12.0)};
  s.time_step = 1.0;
  s.classes = {"target"};
  s.confusion = Eigen::MatrixXd::Identity(1, 1);
  RobotSpec r;
  r.pose = {1.0, 1.0, 0.0};
  r.controls = ControlSet::default_set(s.time_step);
  SensorModel sensor;
  sensor.kind = SensorKind::Range;
  sensor.range_limit = 4.0;
  sensor.range_slope = noisy ? 0.05 : 0.0;
  r.sensors = {sensor, position_sensor(4.0, noisy ? 0.05 : 0.0)};
  s.robots = {r};
  // Priors sit beyond the true targets, as seen from the start pose.
  const Eigen::Vector2d start(1.0, 1.0), t0(8.0, 2.0), t1(3.0, 9.0);
  const Eigen::Vector2d d0 = (t0 - start).normalized(), d1 = (t1 - start).normalized();
  LandmarkSpec a = static_landmark(t0 + prior_offset * d0, 1.0, 1, 0);
  a.true_position = t0;
  LandmarkSpec b = static_landmark(t1 + prior_offset * d1, 1.0, 1, 0);
  b.true_position = t1;
  if (noisy) {
    a.dynamics.process_noise = 0.001 * Eigen::Matrix2d::Identity();
    b.dynamics.process_noise = 0.001 * Eigen::Matrix2d::Identity();
  }
  a.cov = (prior_offset > 0.0 ? prior_offset * prior_offset / 4.0 : 0.05) * Eigen::Matrix2d::Identity();
  b.cov = a.cov;
  s.landmarks = {a, b};
  s.predicates = {proximity("a", 0, 0, 1.0, 0.25), proximity("b", 0, 1, 1.0, 0.25)};
  s.task = "F a & F b";
  s.planner.n_max = 20000;
  s.planner.stop_at_first_solution = true;
  s.executor.max_steps = 300;
  s.executor.max_replans = 40;
  return s;
}

Scenario scalability_benchmark(const BenchmarkOptions& opt) {
  Scenario s;
  s.name = "scalability_N" + std::to_string(opt.robots) + "_M" + std::to_string(opt.landmarks);
  s.bounds = {0.0, 0.0, 20.0, 20.0};
  s.resolution = 0.5;
  s.obstacles = {box(5.0, 5.0, 7.0, 12.0), box(12.0, 9.0, 15.0, 11.0)};
  s.time_step = 1.0;
  s.classes = {"target"};
  s.confusion = Eigen::MatrixXd::Identity(1, 1);
  s.seed = opt.seed;
  Rng rng(opt.seed * 7919 + static_cast<std::uint64_t>(opt.robots * 100 + opt.landmarks));
  const Workspace ws(s.bounds, s.obstacles, s.resolution);
  std::vector<Eigen::Vector2d> starts;
  for (int j = 0; j < opt.robots; ++j) starts.emplace_back(1.0 + 4.0 * j, 1.0);
  auto free_point = [&] {
    for (;;) {
      const Eigen::Vector2d p(1.0 + 18.0 * uniform01(rng), 1.0 + 18.0 * uniform01(rng));
      bool clear = ws.is_free(p);
      // Nothing is satisfied at the start.
      for (const auto& st : starts)
        if ((p - st).norm() < 3.0) clear = false;
      for (const auto& o : s.obstacles) {
        for (double dx : {-0.8, 0.8})
          for (double dy : {-0.8, 0.8})
            if (o.contains(p + Eigen::Vector2d(dx, dy))) clear = false;
      }
      if (clear) return p;
    }
  };
  for (int j = 0; j < opt.robots; ++j) {
    RobotSpec r;
    r.pose = {starts[j].x(), starts[j].y(), 90.0 * kDeg};
    r.controls = ControlSet::default_set(s.time_step);
    r.sensors = {position_sensor(2.0, 0.05)};
    s.robots.push_back(r);
  }
  for (int i = 0; i < opt.landmarks; ++i) s.landmarks.push_back(static_landmark(free_point(), 0.1, 1, 0));
  // One reach task per robot, toward the closest landmark not yet taken.
  std::vector<bool> taken(opt.landmarks, false);
  std::string task;
  for (int k = 0; k < opt.robots; ++k) {
    const Eigen::Vector2d from(s.robots[k].pose.x, s.robots[k].pose.y);
    int best = -1;
    for (int i = 0; i < opt.landmarks; ++i) {
      if (taken[i]) continue;
      if (best < 0 || (s.landmarks[i].mean - from).norm() < (s.landmarks[best].mean - from).norm()) best = i;
    }
    if (best < 0) best = k % opt.landmarks;
    taken[best] = true;
    const std::string name = "v" + std::to_string(k);
    s.predicates.push_back(proximity(name, k, best, 1.0, 0.25));
    task += (k ? " & F " : "F ") + name;
  }
  s.task = task;
  s.planner.n_max = 200000;
  s.planner.stop_at_first_solution = true;
  return s;
}

}  // namespace semplan
