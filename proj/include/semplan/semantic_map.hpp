// Uncertain semantic map: per-landmark Gaussian position beliefs, discrete
// class beliefs, linear target dynamics and Kalman-filter updates.

#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "semplan/random.hpp"
#include "semplan/robot_dynamics.hpp"
#include "semplan/sensing.hpp"
#include "semplan/workspace.hpp"

namespace semplan {

enum class ScheduleKind { Static, ConstantVelocity, Oscillation, Circular };

/// Open-loop input mu(t) driving a target. Inputs are per-step displacements
/// of a reference trajectory, so with A = B = I the target follows it.
struct ControlSchedule {
  ScheduleKind kind = ScheduleKind::Static;
  double dt = 1.0;                                   // seconds per step
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // constant velocity, m/s
  Eigen::Vector2d start = Eigen::Vector2d::Zero();     // oscillation endpoints
  Eigen::Vector2d end = Eigen::Vector2d::Zero();
  double speed = 0.0;                                // oscillation, m/s
  Eigen::Vector2d center = Eigen::Vector2d::Zero();  // circular orbit
  double radius = 0.0;
  double angular_speed = 0.0;  // rad/s
  double phase = 0.0;          // rad at t = 0

  /// Reference offset at step t, relative to the reference at t = 0.
  Eigen::Vector2d reference(int t) const;
  Eigen::Vector2d input(int t) const { return reference(t + 1) - reference(t); }
};

struct TargetDynamics {
  Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d B = Eigen::Matrix2d::Identity();
  ControlSchedule schedule;
  Eigen::Matrix2d process_noise = Eigen::Matrix2d::Zero();  // R_i

  void validate() const;
};

struct GaussianBelief {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

using ClassBelief = std::vector<double>;

struct LandmarkEstimate {
  GaussianBelief position;
  ClassBelief class_belief;
  TargetDynamics dynamics;
};

struct SemanticMapEstimate {
  std::vector<std::string> classes;
  std::vector<LandmarkEstimate> landmarks;

  std::size_t size() const { return landmarks.size(); }
  std::vector<GaussianBelief> positions() const;
  std::vector<ClassBelief> class_beliefs() const;
};

/// Sensors carried by each robot, indexed like the team.
using TeamSensors = std::span<const std::vector<SensorModel>>;

class KalmanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A-priori mean A x + B mu(t).
Eigen::Vector2d predict_mean(const LandmarkEstimate& lm, int t);
Eigen::Vector2d predict_mean(const GaussianBelief& belief, const TargetDynamics& dyn, int t);

/// Measurement-free Riccati step: predict, then fuse every sensor whose gate
/// admits the predicted mean from the team's new poses.
Eigen::Matrix2d propagate_covariance(const GaussianBelief& belief, const TargetDynamics& dyn, int t,
                                     const TeamState& team_next, TeamSensors sensors,
                                     const Workspace& ws);
Eigen::Matrix2d propagate_covariance(const LandmarkEstimate& lm, int t, const TeamState& team_next,
                                     TeamSensors sensors, const Workspace& ws);

/// Measured update at step t: predict, then fuse `measurements` (EKF for range
/// sensors, linearized at the predicted mean). `team` holds the poses that
/// produced the measurements.
GaussianBelief posterior_position_update(const GaussianBelief& belief, const TargetDynamics& dyn,
                                         int t, std::span<const Measurement> measurements,
                                         const TeamState& team, TeamSensors sensors);
LandmarkEstimate posterior_position_update(const LandmarkEstimate& lm, int t,
                                           std::span<const Measurement> measurements,
                                           const TeamState& team, TeamSensors sensors);

struct ClassUpdate {
  ClassBelief belief;
  bool degenerate = false;  // likelihood vanished; belief left unchanged
};

ClassUpdate class_belief_update(const ClassBelief& belief, int measured_label,
                                const ConfusionMatrix& confusion);

/// Ground-truth advance x' = A x + B mu(t) + nu, nu ~ N(0, R).
Eigen::Vector2d ground_truth_step(const Eigen::Vector2d& x, const TargetDynamics& dyn, int t,
                                  Rng& rng);

/// Symmetrize and clip negative eigenvalues.
Eigen::Matrix2d condition_covariance(const Eigen::Matrix2d& cov);

}  // namespace semplan
