// Simulated perception: gated range/position sensors and a confusion-matrix
// object classifier.

#pragma once

#include <Eigen/Core>
#include <optional>

#include "semplan/random.hpp"
#include "semplan/robot_dynamics.hpp"
#include "semplan/workspace.hpp"

namespace semplan {

enum class SensorKind { Range, Position };
enum class FovKind { Disk, Rectangle };

struct SensorModel {
  SensorKind kind = SensorKind::Range;
  double range_limit = 1.0;  // R_j, meters
  FovKind fov = FovKind::Disk;
  double fov_width = 0.0;   // rectangle footprint, centered on the robot
  double fov_height = 0.0;
  Eigen::Matrix2d position_noise = Eigen::Matrix2d::Identity();  // Q_j
  double range_base_std = 0.0;
  double range_slope = 0.5;  // std grows by this much per meter

  void validate() const;
};

/// Variance floor applied to every measurement model.
inline constexpr double kNoiseFloor = 1e-6;

struct Measurement {
  int robot = -1;
  int landmark = -1;
  SensorKind kind = SensorKind::Range;
  Eigen::Vector2d value = Eigen::Vector2d::Zero();  // range measurements use value.x()
  int step = 0;
};

/// Within range (and footprint) of the sensor, with clear line of sight.
bool in_gate(const SensorModel& sensor, const RobotPose& pose, const Eigen::Vector2d& landmark,
             const Workspace& ws);

std::optional<Measurement> sense(const SensorModel& sensor, const RobotPose& pose,
                                 const Eigen::Vector2d& true_landmark, const Workspace& ws,
                                 Rng& rng);

/// Jacobian (1x2 for range, 2x2 for position) and measurement covariance.
struct ObservationModel {
  Eigen::MatrixXd jacobian;
  Eigen::MatrixXd noise;
};

class SensingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ObservationModel observation_jacobian_and_noise(const SensorModel& sensor, const RobotPose& pose,
                                                const Eigen::Vector2d& linearization_point);

/// Rows indexed by predicted class, columns by actual class.
using ConfusionMatrix = Eigen::MatrixXd;

/// Every column must be a probability distribution.
void validate_confusion(const ConfusionMatrix& confusion);

/// Predicted label drawn from the column of the true class.
int classify(int true_class, const ConfusionMatrix& confusion, Rng& rng);

}  // namespace semplan
