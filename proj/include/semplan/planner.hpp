// Sampling-based planner over team poses x semantic map x DFA states, with
// biased bucket and control sampling toward the accepting state.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "semplan/dfa.hpp"
#include "semplan/predicates.hpp"
#include "semplan/random.hpp"
#include "semplan/robot_dynamics.hpp"
#include "semplan/semantic_map.hpp"
#include "semplan/sensing.hpp"
#include "semplan/workspace.hpp"

namespace semplan {

enum class SamplingMode { Biased, Uniform };

struct PlannerParams {
  std::size_t n_max = 5000;
  double p_rand = 0.9;
  double p_new = 0.9;
  double quant_xy = 0.5;                      // meters
  double quant_theta = 0.5235987755982988;    // 30 degrees
  std::size_t warmup = 100;                   // nodes that open their own bucket
  std::size_t bucket_subsample = 32;
  SamplingMode mode = SamplingMode::Biased;
  bool stop_at_first_solution = false;
  /// Skip children whose cost already reaches the best solution.
  bool bound_by_best_cost = true;
  std::size_t max_tree_nodes = 2'000'000;
  double obstacle_confidence = 0.9;  // virtual obstacle ellipse mass
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

/// Fixed inputs shared by every plan() call of a mission.
struct PlanningProblem {
  const Workspace* ws = nullptr;
  std::vector<ControlSet> controls;                // per robot
  std::vector<std::vector<SensorModel>> sensors;   // per robot
  std::vector<TargetDynamics> dynamics;            // per landmark
  const Dfa* dfa = nullptr;
  const Labeler* labeler = nullptr;
  const PrunedDfaIndex* pruned = nullptr;
  const PrunedDfaIndex* unpruned = nullptr;

  std::size_t num_robots() const { return controls.size(); }
  std::size_t num_landmarks() const { return dynamics.size(); }
  /// Largest sensing range of robot j (0 without sensors).
  double sensing_range(std::size_t j) const;
};

struct PlanStart {
  TeamState team;
  std::vector<Eigen::Vector2d> means;
  std::vector<Eigen::Matrix2d> covs;
  std::vector<ClassBelief> classes;  // frozen during planning
  int dfa_state = 0;
  int step = 0;  // absolute time of the root
};

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Solution {
  int horizon = 0;  // H, steps after the root
  double cost = 0.0;
  std::vector<JointControl> controls;  // H entries
  std::vector<TeamState> poses;        // H + 1 entries
  std::vector<int> dfa_states;         // DFA state held at each pose
  std::vector<Symbol> labels;          // label at each pose
  std::vector<std::vector<Eigen::Matrix2d>> covs;  // planned covariances
  std::vector<int> nodes;
};

struct PlanStats {
  std::size_t iterations = 0;
  std::optional<std::size_t> first_solution_iteration;  // 1-based
  std::size_t tree_size = 0;
  std::size_t buckets = 0;
  std::size_t goal_nodes = 0;
  std::size_t rejected_collision = 0;
  std::size_t rejected_violation = 0;
  std::size_t rejected_bound = 0;
  std::size_t uniform_fallbacks = 0;  // biased control sampling had no finite option
  std::size_t field_builds = 0;
  bool unpruned_fallback = false;
  bool truncated = false;  // hit max_tree_nodes
  double seconds = 0.0;
  int workers = 1;
  bool deterministic = true;
};

struct PlanResult {
  std::optional<Solution> solution;
  PlanStats stats;
  std::vector<double> best_cost_history;  // best cost after each iteration (inf if none)
};

/// Bucket selection law: with probability p_rand uniform over the buckets in
/// `kmin`, otherwise uniform over `others` (falls back to `kmin` when empty).
std::size_t sample_bucket_index(std::size_t kmin_count, std::size_t other_count, double p_rand,
                                SamplingMode mode, Rng& rng);

/// Landmark each robot should approach to make `sigma` true; -1 for none.
std::vector<int> assign_target_landmarks(const Labeler& labeler, Symbol sigma,
                                         std::span<const Eigen::Matrix2d> covs,
                                         std::span<const ClassBelief> classes,
                                         std::size_t num_robots);

struct ControlChoice {
  std::size_t index = 0;
  bool fallback = false;  // no successor had a finite distance
};

/// Geodesic distance toward an exact goal point: the cell field far away,
/// the straight-line distance within two cells of a visible goal.
struct Guidance {
  const GeodesicField* field = nullptr;
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();

  double distance(const Workspace& ws, const Eigen::Vector2d& p) const;
};

/// Control law for one robot. A null `guide.field` means no assignment.
ControlChoice sample_control(const Workspace& ws, const RobotPose& pose, const ControlSet& set,
                             const Guidance& guide, double sensing_range, double p_new,
                             SamplingMode mode, Rng& rng);

class Planner {
 public:
  Planner(const PlanningProblem& problem, PlannerParams params);

  PlanResult plan(const PlanStart& start);

  /// Most recent tree, for inspection by tests.
  struct NodeView {
    int parent;
    int dfa_state;
    int step;
    double cost;
    Symbol label;
  };
  std::size_t tree_size() const { return nodes_.size(); }
  NodeView node(int id) const;
  std::span<const RobotPose> node_team(int id) const;
  std::span<const Eigen::Matrix2d> node_covs(int id) const;
  std::span<const Eigen::Vector2d> node_means(int id) const;
  std::span<const std::size_t> node_controls(int id) const;  // control into the node
  std::size_t bucket_count() const { return buckets_.size(); }
  const std::vector<int>& bucket(std::size_t b) const { return buckets_[b].nodes; }

 private:
  struct Node {
    int parent;
    int dfa_state;
    int next_dfa;  // delta(dfa_state, label)
    int step;
    double cost;
    Symbol label;
  };
  struct Bucket {
    std::vector<int> nodes;
    int dist;        // pruned distance of its DFA state to acceptance
    int slot;        // position in kmin_ or others_
    bool in_kmin;
  };
  struct Candidate {
    int parent;
    JointControl controls;
    TeamState team;
    std::vector<Eigen::Vector2d> means;
    std::vector<Eigen::Matrix2d> covs;
    Symbol label = 0;
    bool valid = false;
  };

  void reset(const PlanStart& start);
  int add_node(const Node& n, const TeamState& team, const JointControl& ctrl,
               const std::vector<Eigen::Vector2d>& means, const std::vector<Eigen::Matrix2d>& covs);
  void place_in_bucket(int id);
  std::size_t pick_bucket();
  JointControl pick_controls(int node);
  void evaluate(Candidate& c) const;
  Symbol label_of(const TeamState& team, std::span<const Eigen::Vector2d> means,
                  std::span<const Eigen::Matrix2d> covs) const;
  int dist_of(int q) const;
  Solution extract(int goal) const;

  PlanningProblem problem_;
  PlannerParams params_;
  const PrunedDfaIndex* index_ = nullptr;
  Rng rng_;
  GeodesicFieldCache fields_;
  std::vector<ClassBelief> classes_;
  std::vector<AvoidanceCandidate> avoid_;
  std::size_t nr_ = 0, nm_ = 0;

  std::vector<Node> nodes_;
  std::vector<RobotPose> poses_;          // nodes_ x nr_
  std::vector<std::size_t> ctrls_;        // nodes_ x nr_
  std::vector<Eigen::Vector2d> means_;    // nodes_ x nm_
  std::vector<Eigen::Matrix2d> covs_;     // nodes_ x nm_
  std::vector<Bucket> buckets_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<std::vector<int>, int>>> bucket_keys_;
  std::vector<int> kmin_, others_;
  int dmin_ = 0;
  int best_goal_ = -1;
  std::size_t goal_count_ = 0;
  PlanStats stats_;
};

/// Motion cost of one step; zero displacement costs 1e-6 * period.
double step_cost(const TeamState& from, const TeamState& to, double period);

}  // namespace semplan
