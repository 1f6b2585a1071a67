// Scenario files: a versioned JSON document describing the workspace, team,
// prior map, ground truth, predicates, task and parameters.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semplan/executor.hpp"

namespace semplan {

inline constexpr int kScenarioSchemaVersion = 1;

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct RobotSpec {
  RobotPose pose;
  ControlSet controls;
  std::vector<SensorModel> sensors;
};

struct LandmarkSpec {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
  ClassBelief class_belief;
  TargetDynamics dynamics;
  Eigen::Vector2d true_position = Eigen::Vector2d::Zero();
  int true_class = 0;
};

struct Scenario {
  std::string name;
  Bounds bounds;
  double resolution = 0.25;
  std::vector<Polygon> obstacles;
  double time_step = 0.2;  // tau, seconds
  std::vector<std::string> classes;
  ConfusionMatrix confusion;
  std::vector<RobotSpec> robots;
  std::vector<LandmarkSpec> landmarks;
  std::vector<PredicateDef> predicates;
  std::string task;
  PlannerParams planner;
  ExecutorParams executor;
  std::uint64_t seed = 0;

  /// Cross-reference and invariant checks; throws ScenarioError.
  void validate() const;
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& s);

/// A scenario with its automaton, labeler and workspace built. Not copyable:
/// the planning problem points into it.
class CompiledScenario {
 public:
  explicit CompiledScenario(Scenario s);
  CompiledScenario(const CompiledScenario&) = delete;
  CompiledScenario& operator=(const CompiledScenario&) = delete;

  const Scenario& scenario() const { return sc_; }
  const Workspace& workspace() const { return ws_; }
  const Dfa& dfa() const { return dfa_; }
  const Labeler& labeler() const { return labeler_; }
  const PrunedDfaIndex& pruned() const { return pruned_; }
  const PrunedDfaIndex& unpruned() const { return unpruned_; }
  const Mission& mission() const { return mission_; }
  const PlanningProblem& problem() const { return mission_.problem; }
  const PlanStart& start() const { return mission_.start; }

 private:
  Scenario sc_;
  Workspace ws_;
  Dfa dfa_;
  Labeler labeler_;
  PrunedDfaIndex pruned_, unpruned_;
  Mission mission_;
};

/// Desk-scale benchmark generators.
struct BenchmarkOptions {
  int robots = 1;
  int landmarks = 2;
  std::uint64_t seed = 0;
};

/// 10x10 m, two walls, two static landmarks, task F pi1 & F pi2 with
/// r = 0.2 m and delta = 0.25.
Scenario feasibility_benchmark();

/// Oscillating and static targets with prior means offset from the truth.
Scenario replanning_benchmark(double prior_offset, bool noisy);

/// N robots, M landmarks, a conjunction of reachability tasks.
Scenario scalability_benchmark(const BenchmarkOptions& opt);

}  // namespace semplan
