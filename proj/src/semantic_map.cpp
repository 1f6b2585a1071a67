#include "semplan/semantic_map.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace semplan {

Eigen::Vector2d ControlSchedule::reference(int t) const {
  const double time = dt * t;
  switch (kind) {
    case ScheduleKind::Static:
      return Eigen::Vector2d::Zero();
    case ScheduleKind::ConstantVelocity:
      return velocity * time;
    case ScheduleKind::Oscillation: {
      const Eigen::Vector2d seg = end - start;
      const double len = seg.norm();
      if (len == 0.0 || speed == 0.0) return start;
      double s = std::fmod(speed * time, 2.0 * len);
      if (s < 0.0) s += 2.0 * len;
      const double along = s <= len ? s : 2.0 * len - s;
      return start + seg * (along / len);
    }
    case ScheduleKind::Circular: {
      const double a = phase + angular_speed * time;
      return center + radius * Eigen::Vector2d(std::cos(a), std::sin(a));
    }
  }
  return Eigen::Vector2d::Zero();
}

void TargetDynamics::validate() const {
  if (!A.allFinite() || !B.allFinite()) throw std::invalid_argument("target dynamics must be finite");
  if ((process_noise - process_noise.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("process noise covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(process_noise);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("process noise covariance must be positive semidefinite");
  if (schedule.dt <= 0.0) throw std::invalid_argument("schedule time step must be positive");
}

std::vector<GaussianBelief> SemanticMapEstimate::positions() const {
  std::vector<GaussianBelief> out;
  out.reserve(landmarks.size());
  for (const auto& lm : landmarks) out.push_back(lm.position);
  return out;
}

std::vector<ClassBelief> SemanticMapEstimate::class_beliefs() const {
  std::vector<ClassBelief> out;
  out.reserve(landmarks.size());
  for (const auto& lm : landmarks) out.push_back(lm.class_belief);
  return out;
}

Eigen::Matrix2d condition_covariance(const Eigen::Matrix2d& cov) {
  const Eigen::Matrix2d sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sym);
  if (es.eigenvalues().minCoeff() >= 0.0) return sym;
  Eigen::Vector2d ev = es.eigenvalues();
  for (int k = 0; k < 2; ++k)
    if (ev(k) < 1e-12) ev(k) = std::max(ev(k), 0.0);
  Eigen::Matrix2d out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::Vector2d predict_mean(const GaussianBelief& belief, const TargetDynamics& dyn, int t) {
  return dyn.A * belief.mean + dyn.B * dyn.schedule.input(t);
}

Eigen::Vector2d predict_mean(const LandmarkEstimate& lm, int t) {
  return predict_mean(lm.position, lm.dynamics, t);
}

namespace {

Eigen::Matrix2d predict_cov(const Eigen::Matrix2d& cov, const TargetDynamics& dyn) {
  return dyn.A * cov * dyn.A.transpose() + dyn.process_noise;
}

// Joseph-form update; the residual is optional so the covariance path is
// shared by the offline and online filters.
void fuse(Eigen::Vector2d& mean, Eigen::Matrix2d& cov, const ObservationModel& obs,
          const Eigen::VectorXd* residual) {
  const Eigen::MatrixXd& H = obs.jacobian;
  const Eigen::MatrixXd S = H * cov * H.transpose() + obs.noise;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
  if (!lu.isInvertible() || !std::isfinite(S.determinant()))
    throw KalmanError("singular innovation covariance");
  const Eigen::MatrixXd K = cov * H.transpose() * lu.inverse();
  const Eigen::Matrix2d IKH = Eigen::Matrix2d::Identity() - K * H;
  cov = condition_covariance(IKH * cov * IKH.transpose() + K * obs.noise * K.transpose());
  if (residual) mean += K * *residual;
}

}  // namespace

Eigen::Matrix2d propagate_covariance(const GaussianBelief& belief, const TargetDynamics& dyn, int t,
                                     const TeamState& team_next, TeamSensors sensors,
                                     const Workspace& ws) {
  Eigen::Vector2d mean = predict_mean(belief, dyn, t);
  Eigen::Matrix2d cov = predict_cov(belief.cov, dyn);
  for (std::size_t j = 0; j < team_next.size() && j < sensors.size(); ++j)
    for (const auto& s : sensors[j]) {
      if (!in_gate(s, team_next[j], mean, ws)) continue;
      fuse(mean, cov, observation_jacobian_and_noise(s, team_next[j], mean), nullptr);
    }
  return condition_covariance(cov);
}

Eigen::Matrix2d propagate_covariance(const LandmarkEstimate& lm, int t, const TeamState& team_next,
                                     TeamSensors sensors, const Workspace& ws) {
  return propagate_covariance(lm.position, lm.dynamics, t, team_next, sensors, ws);
}

GaussianBelief posterior_position_update(const GaussianBelief& belief, const TargetDynamics& dyn,
                                         int t, std::span<const Measurement> measurements,
                                         const TeamState& team, TeamSensors sensors) {
  GaussianBelief out;
  const Eigen::Vector2d predicted = predict_mean(belief, dyn, t);
  out.mean = predicted;
  out.cov = predict_cov(belief.cov, dyn);
  for (const auto& m : measurements) {
    if (m.robot < 0 || static_cast<std::size_t>(m.robot) >= team.size() ||
        static_cast<std::size_t>(m.robot) >= sensors.size())
      throw std::out_of_range("measurement from unknown robot");
    const SensorModel* sensor = nullptr;
    for (const auto& s : sensors[m.robot])
      if (s.kind == m.kind) sensor = &s;
    if (!sensor) throw std::invalid_argument("measurement kind not carried by robot");
    const RobotPose& pose = team[m.robot];
    // Linearize at the predicted mean so the covariance matches the offline map.
    const ObservationModel obs = observation_jacobian_and_noise(*sensor, pose, predicted);
    Eigen::VectorXd residual;
    if (m.kind == SensorKind::Range) {
      residual.resize(1);
      // EKF residual evaluated at the running estimate, Jacobian fixed.
      residual(0) = m.value.x() - (out.mean - pose.position()).norm();
    } else {
      residual = m.value - out.mean;
    }
    fuse(out.mean, out.cov, obs, &residual);
  }
  out.cov = condition_covariance(out.cov);
  return out;
}

LandmarkEstimate posterior_position_update(const LandmarkEstimate& lm, int t,
                                           std::span<const Measurement> measurements,
                                           const TeamState& team, TeamSensors sensors) {
  LandmarkEstimate out = lm;
  out.position = posterior_position_update(lm.position, lm.dynamics, t, measurements, team, sensors);
  return out;
}

ClassUpdate class_belief_update(const ClassBelief& belief, int measured_label,
                                const ConfusionMatrix& confusion) {
  if (measured_label < 0 || measured_label >= confusion.rows())
    throw std::out_of_range("measured label not in class set");
  if (static_cast<Eigen::Index>(belief.size()) != confusion.cols())
    throw std::invalid_argument("class belief size does not match confusion matrix");
  ClassUpdate out;
  out.belief.resize(belief.size());
  for (std::size_t c = 0; c < belief.size(); ++c)
    out.belief[c] = confusion(measured_label, static_cast<Eigen::Index>(c)) * belief[c];
  const double z = std::accumulate(out.belief.begin(), out.belief.end(), 0.0);
  if (!(z > 0.0)) {
    out.belief = belief;
    out.degenerate = true;
    return out;
  }
  for (double& p : out.belief) p /= z;
  return out;
}

Eigen::Vector2d ground_truth_step(const Eigen::Vector2d& x, const TargetDynamics& dyn, int t,
                                  Rng& rng) {
  Eigen::Vector2d next = dyn.A * x + dyn.B * dyn.schedule.input(t);
  if (dyn.process_noise.isZero(0.0)) return next;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(dyn.process_noise);
  const Eigen::Vector2d sd = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::normal_distribution<double> n01(0.0, 1.0);
  const double z0 = n01(rng), z1 = n01(rng);
  return next + es.eigenvectors() * Eigen::Vector2d(sd(0) * z0, sd(1) * z1);
}

}  // namespace semplan
