#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace semplan {

/// Planar pose; heading wrapped to (-pi, pi].
struct RobotPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Eigen::Vector2d position() const { return {x, y}; }
  bool operator==(const RobotPose&) const = default;
};

double wrap_angle(double theta);

struct Control {
  double linear = 0.0;   // m/s
  double angular = 0.0;  // rad/s
  bool operator==(const Control&) const = default;
};

/// Finite control set U_j = linear x angular speeds, applied for `period` seconds.
struct ControlSet {
  std::vector<double> linear;
  std::vector<double> angular;
  double period = 0.1;

  std::size_t size() const { return linear.size() * angular.size(); }
  Control at(std::size_t index) const;

  /// u in {0, 1} m/s and omega in {0, +-15, ..., +-180} deg/s.
  static ControlSet default_set(double period);
};

using TeamState = std::vector<RobotPose>;
/// Index into each robot's ControlSet.
using JointControl = std::vector<std::size_t>;

/// Exact unicycle step in sinc form; reduces to the straight-line update at omega = 0.
RobotPose step_diff_drive(const RobotPose& pose, double linear, double angular, double period);

TeamState step_team(const TeamState& team, const JointControl& controls,
                    std::span<const ControlSet> sets);

/// Sum of per-robot Euclidean displacements.
double team_displacement(const TeamState& from, const TeamState& to);

}  // namespace semplan
