#include "semplan/sensing.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace semplan {

void SensorModel::validate() const {
  if (!(range_limit > 0.0)) throw std::invalid_argument("sensor range must be positive");
  if (range_slope < 0.0 || range_base_std < 0.0)
    throw std::invalid_argument("range noise parameters must be non-negative");
  if (fov == FovKind::Rectangle && !(fov_width > 0.0 && fov_height > 0.0))
    throw std::invalid_argument("rectangular field of view needs positive width and height");
  if ((position_noise - position_noise.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("position noise covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(position_noise);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("position noise covariance must be positive semidefinite");
}

bool in_gate(const SensorModel& sensor, const RobotPose& pose, const Eigen::Vector2d& landmark,
             const Workspace& ws) {
  const Eigen::Vector2d d = landmark - pose.position();
  if (d.norm() > sensor.range_limit) return false;
  if (sensor.fov == FovKind::Rectangle &&
      (std::abs(d.x()) > 0.5 * sensor.fov_width || std::abs(d.y()) > 0.5 * sensor.fov_height))
    return false;
  return ws.line_of_sight(pose.position(), landmark);
}

std::optional<Measurement> sense(const SensorModel& sensor, const RobotPose& pose,
                                 const Eigen::Vector2d& true_landmark, const Workspace& ws,
                                 Rng& rng) {
  if (!in_gate(sensor, pose, true_landmark, ws)) return std::nullopt;
  Measurement m;
  m.kind = sensor.kind;
  std::normal_distribution<double> n01(0.0, 1.0);
  if (sensor.kind == SensorKind::Range) {
    const double range = (true_landmark - pose.position()).norm();
    const double sd = sensor.range_base_std + sensor.range_slope * range;
    m.value = Eigen::Vector2d(range + sd * n01(rng), 0.0);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sensor.position_noise);
    const Eigen::Vector2d sd = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const double z0 = n01(rng), z1 = n01(rng);
    m.value = true_landmark + es.eigenvectors() * Eigen::Vector2d(sd(0) * z0, sd(1) * z1);
  }
  return m;
}

ObservationModel observation_jacobian_and_noise(const SensorModel& sensor, const RobotPose& pose,
                                                const Eigen::Vector2d& linearization_point) {
  ObservationModel out;
  if (sensor.kind == SensorKind::Position) {
    out.jacobian = Eigen::Matrix2d::Identity();
    out.noise = sensor.position_noise;
    if (sensor.position_noise.determinant() < kNoiseFloor * kNoiseFloor)
      out.noise += kNoiseFloor * Eigen::Matrix2d::Identity();
    return out;
  }
  const Eigen::Vector2d d = linearization_point - pose.position();
  const double range = d.norm();
  if (range == 0.0) throw SensingError("range sensor linearized at the robot position");
  out.jacobian = (d / range).transpose();
  const double sd = sensor.range_base_std + sensor.range_slope * range;
  out.noise = Eigen::MatrixXd::Constant(1, 1, std::max(sd * sd, kNoiseFloor));
  return out;
}

void validate_confusion(const ConfusionMatrix& confusion) {
  if (confusion.rows() != confusion.cols() || confusion.rows() == 0)
    throw std::invalid_argument("confusion matrix must be square and non-empty");
  if (confusion.minCoeff() < 0.0) throw std::invalid_argument("confusion matrix has negative entries");
  for (Eigen::Index c = 0; c < confusion.cols(); ++c)
    if (std::abs(confusion.col(c).sum() - 1.0) > 1e-6)
      throw std::invalid_argument("confusion matrix column " + std::to_string(c) +
                                  " does not sum to 1");
}

int classify(int true_class, const ConfusionMatrix& confusion, Rng& rng) {
  if (true_class < 0 || true_class >= confusion.cols()) throw std::out_of_range("unknown class");
  double u = uniform01(rng);
  const Eigen::VectorXd col = confusion.col(true_class);
  for (Eigen::Index r = 0; r < col.size(); ++r) {
    u -= col(r);
    if (u < 0.0) return static_cast<int>(r);
  }
  // Rounding slack: fall back to the last label with positive mass.
  for (Eigen::Index r = col.size() - 1; r >= 0; --r)
    if (col(r) > 0.0) return static_cast<int>(r);
  return true_class;
}

}  // namespace semplan
