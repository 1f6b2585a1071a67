// Closed-loop mission simulation: ground truth, sensing, online map updates,
// DFA monitoring and replanning.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "semplan/planner.hpp"

namespace semplan {

struct GroundTruth {
  std::vector<Eigen::Vector2d> positions;
  std::vector<int> classes;
};

/// Everything a mission needs; the problem's pointers must outlive it.
struct Mission {
  PlanningProblem problem;
  PlanStart start;
  GroundTruth truth;
  ConfusionMatrix confusion;
  std::vector<std::string> class_names;
};

struct ExecutorParams {
  int lookahead = 3;  // T
  int max_replans = 50;
  int max_steps = 1000;
  bool sensing = true;
};

enum class MissionStatus { Success, Violated, FailedReplanBudget, FailedStepBudget, NoPlan };

std::string to_string(MissionStatus s);

struct TraceRecord {
  int step = 0;
  TeamState team;
  std::vector<Eigen::Vector2d> truth;
  std::vector<Eigen::Vector2d> means;
  std::vector<Eigen::Matrix2d> covs;
  std::vector<ClassBelief> classes;
  int dfa_state = 0;
  bool replanned = false;
  Symbol label = 0;
  int measurements = 0;
};

struct MissionTrace {
  std::vector<TraceRecord> records;
  MissionStatus status = MissionStatus::NoPlan;
  int plan_calls = 0;
  int replans = 0;  // plan_calls - 1
  double initial_cost = 0.0;
  double plan_seconds = 0.0;
  double wall_seconds = 0.0;

  bool success() const { return status == MissionStatus::Success; }
  /// Fixed header; one row per record.
  std::string to_csv(const Dfa& dfa, const std::vector<std::string>& class_names) const;
  /// Every `stride`-th row plus the last one.
  std::string to_plot_csv(const Dfa& dfa, const std::vector<std::string>& class_names,
                          int stride) const;
};

/// Re-validates the next T planned transitions against the online map, which
/// is propagated along the planned poses without measurements. `k` is the
/// index of the current pose in `plan`, and `q` the DFA state held there.
bool lookahead_feasible(const PlanningProblem& problem, std::span<const Eigen::Vector2d> means,
                        std::span<const Eigen::Matrix2d> covs,
                        std::span<const ClassBelief> classes, int q, int t, const Solution& plan,
                        std::size_t k, int T);

MissionTrace execute(const Mission& mission, const ExecutorParams& exec,
                     const PlannerParams& planner, std::uint64_t seed);

struct VariantSummary {
  std::string name;
  std::vector<int> replans;  // per seed
  std::vector<bool> success;
  double mean_replans = 0.0;
  double success_rate = 0.0;
  double mean_plan_seconds = 0.0;
};

struct MissionVariant {
  std::string name;
  const Mission* mission = nullptr;
};

std::vector<VariantSummary> compare_replanning_frequency(std::span<const MissionVariant> variants,
                                                         std::span<const std::uint64_t> seeds,
                                                         const ExecutorParams& exec,
                                                         const PlannerParams& planner);

std::string replanning_report_csv(std::span<const VariantSummary> rows);

}  // namespace semplan
