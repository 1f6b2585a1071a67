#include "semplan/robot_dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace semplan {

double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(theta, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  else if (r > std::numbers::pi) r -= two_pi;
  return r;
}

Control ControlSet::at(std::size_t index) const {
  if (index >= size()) throw std::out_of_range("control index out of range");
  return {linear[index / angular.size()], angular[index % angular.size()]};
}

ControlSet ControlSet::default_set(double period) {
  ControlSet s;
  s.linear = {0.0, 1.0};
  s.angular.push_back(0.0);
  for (int deg = 15; deg <= 180; deg += 15) {
    s.angular.push_back(deg * std::numbers::pi / 180.0);
    s.angular.push_back(-deg * std::numbers::pi / 180.0);
  }
  s.period = period;
  return s;
}

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

}  // namespace

RobotPose step_diff_drive(const RobotPose& pose, double linear, double angular, double period) {
  const double half = 0.5 * period * angular;
  const double chord = period * linear * sinc(half);
  const double mid = pose.theta + half;
  return {pose.x + chord * std::cos(mid), pose.y + chord * std::sin(mid),
          wrap_angle(pose.theta + period * angular)};
}

TeamState step_team(const TeamState& team, const JointControl& controls,
                    std::span<const ControlSet> sets) {
  if (controls.size() != team.size() || sets.size() != team.size())
    throw std::invalid_argument("joint control arity does not match team size");
  TeamState out;
  out.reserve(team.size());
  for (std::size_t j = 0; j < team.size(); ++j) {
    const Control c = sets[j].at(controls[j]);
    out.push_back(step_diff_drive(team[j], c.linear, c.angular, sets[j].period));
  }
  return out;
}

double team_displacement(const TeamState& from, const TeamState& to) {
  double total = 0.0;
  for (std::size_t j = 0; j < from.size(); ++j)
    total += std::hypot(to[j].x - from[j].x, to[j].y - from[j].y);
  return total;
}

}  // namespace semplan
