// Perception-based atomic predicates and the labeling function.

#pragma once

#include <Eigen/Core>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "semplan/dfa.hpp"
#include "semplan/robot_dynamics.hpp"
#include "semplan/semantic_map.hpp"
#include "semplan/workspace.hpp"

namespace semplan {

enum class PredicateKind { Proximity, ClassProximity, Uncertainty, RelaxedClassProximity };

struct PredicateDef {
  std::string name;
  PredicateKind kind = PredicateKind::Proximity;
  int robot = 0;
  int landmark = -1;     // proximity, uncertainty
  double radius = 1.0;   // meters
  double delta = 0.25;
  int class_index = -1;  // class predicates

  void validate(std::size_t num_robots, std::size_t num_landmarks, std::size_t num_classes) const;
};

class PredicateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Landmark positions and class beliefs seen by the predicates.
struct MapView {
  std::span<const Eigen::Vector2d> means;
  std::span<const Eigen::Matrix2d> covs;
  std::span<const ClassBelief> classes;
};

/// Mass of N(mean, cov) inside the disk of radius r around `point`.
double prob_within_radius(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov,
                          const Eigen::Vector2d& point, double r);

bool eval_proximity(const PredicateDef& def, const TeamState& team, const MapView& map);
bool eval_class_proximity(const PredicateDef& def, const TeamState& team, const MapView& map);
bool eval_uncertainty(const PredicateDef& def, const TeamState& team, const MapView& map);
bool eval_relaxed_class_proximity(const PredicateDef& def, const TeamState& team,
                                  const MapView& map);
bool eval_predicate(const PredicateDef& def, const TeamState& team, const MapView& map);

/// Most likely class; ties go to the lowest class index.
int argmax_class(const ClassBelief& belief);

/// Names of the predicates that hold.
std::set<std::string> label(const TeamState& team, const MapView& map,
                            std::span<const PredicateDef> defs);

/// Binds predicate definitions to a DFA's atom order.
class Labeler {
 public:
  Labeler() = default;
  /// Every DFA atom must have a definition.
  Labeler(std::vector<PredicateDef> defs, const std::vector<std::string>& atoms);

  Symbol symbol(const TeamState& team, const MapView& map) const;
  const std::vector<AtomMeta>& meta() const { return meta_; }
  const PredicateDef& def(int atom) const { return defs_[atom]; }
  std::size_t size() const { return defs_.size(); }

  /// Landmarks each positional atom could be satisfied by.
  std::vector<AvoidanceCandidate> avoidance_candidates(const MapView& map) const;

 private:
  std::vector<PredicateDef> defs_;  // indexed like the DFA atoms
  std::vector<AtomMeta> meta_;
};

}  // namespace semplan
