#include "semplan/planner.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace semplan {

namespace {

constexpr int kNoPath = INT_MAX / 2;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

void PlannerParams::validate() const {
  if (!(p_rand > 0.5 && p_rand < 1.0)) throw std::invalid_argument("p_rand must lie in (0.5, 1)");
  if (!(p_new > 0.5 && p_new < 1.0)) throw std::invalid_argument("p_new must lie in (0.5, 1)");
  if (!(quant_xy > 0.0 && quant_theta > 0.0)) throw std::invalid_argument("quantization must be positive");
  if (bucket_subsample == 0) throw std::invalid_argument("bucket subsample must be positive");
  if (!(obstacle_confidence > 0.0 && obstacle_confidence < 1.0))
    throw std::invalid_argument("obstacle confidence must lie in (0, 1)");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
}

double PlanningProblem::sensing_range(std::size_t j) const {
  double r = 0.0;
  if (j < sensors.size())
    for (const auto& s : sensors[j]) r = std::max(r, s.range_limit);
  return r;
}

double step_cost(const TeamState& from, const TeamState& to, double period) {
  const double d = team_displacement(from, to);
  return d > 0.0 ? d : 1e-6 * period;
}

std::size_t sample_bucket_index(std::size_t kmin_count, std::size_t other_count, double p_rand,
                                SamplingMode mode, Rng& rng) {
  const std::size_t total = kmin_count + other_count;
  if (total == 0) throw std::invalid_argument("no buckets to sample");
  if (mode == SamplingMode::Uniform) return uniform_index(rng, total);
  const double u = uniform01(rng);
  if (other_count == 0 || kmin_count == 0) return uniform_index(rng, total);
  if (u < p_rand) return uniform_index(rng, kmin_count);
  return kmin_count + uniform_index(rng, other_count);
}

std::vector<int> assign_target_landmarks(const Labeler& labeler, Symbol sigma,
                                         std::span<const Eigen::Matrix2d> covs,
                                         std::span<const ClassBelief> classes,
                                         std::size_t num_robots) {
  std::vector<int> out(num_robots, -1);
  for (std::size_t a = 0; a < labeler.size(); ++a) {
    if (!(sigma & (Symbol{1} << a))) continue;
    const PredicateDef& d = labeler.def(static_cast<int>(a));
    if (d.robot < 0 || static_cast<std::size_t>(d.robot) >= num_robots || out[d.robot] >= 0) continue;
    switch (d.kind) {
      case PredicateKind::Proximity:
      case PredicateKind::Uncertainty:
        out[d.robot] = d.landmark;
        break;
      case PredicateKind::ClassProximity:
      case PredicateKind::RelaxedClassProximity: {
        int best = -1;
        double best_p = 0.0, best_ratio = 0.0;
        for (std::size_t i = 0; i < classes.size(); ++i) {
          const double p = classes[i][d.class_index];
          if (p <= 0.0) continue;
          const double det = covs[i].determinant();
          const double ratio = det > 0.0 ? p / det : std::numeric_limits<double>::infinity();
          if (best < 0 || p > best_p || (p == best_p && ratio > best_ratio)) {
            best = static_cast<int>(i);
            best_p = p;
            best_ratio = ratio;
          }
        }
        out[d.robot] = best;
        break;
      }
    }
  }
  return out;
}

double Guidance::distance(const Workspace& ws, const Eigen::Vector2d& p) const {
  const double straight = (p - goal).norm();
  if (straight <= 2.0 * ws.resolution() && ws.line_of_sight(p, goal)) return straight;
  return field->distance_from(p);
}

ControlChoice sample_control(const Workspace& ws, const RobotPose& pose, const ControlSet& set,
                             const Guidance& guide, double sensing_range, double p_new,
                             SamplingMode mode, Rng& rng) {
  const std::size_t n = set.size();
  if (n == 0) throw std::invalid_argument("empty control set");
  if (mode == SamplingMode::Uniform || !guide.field) return {uniform_index(rng, n), false};
  const double here = guide.distance(ws, pose.position());
  if (here < sensing_range) return {uniform_index(rng, n), false};
  std::size_t best = n;
  double best_d = kInfiniteDistance;
  for (std::size_t k = 0; k < n; ++k) {
    const Control c = set.at(k);
    const RobotPose next = step_diff_drive(pose, c.linear, c.angular, set.period);
    const double d = guide.distance(ws, next.position());
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  if (best == n) return {uniform_index(rng, n), true};
  if (n == 1 || uniform01(rng) < p_new) return {best, false};
  std::size_t k = uniform_index(rng, n - 1);
  if (k >= best) ++k;
  return {k, false};
}

Planner::Planner(const PlanningProblem& problem, PlannerParams params)
    : problem_(problem), params_(params) {
  params_.validate();
  if (!problem_.ws || !problem_.dfa || !problem_.labeler || !problem_.pruned || !problem_.unpruned)
    throw std::invalid_argument("planning problem is incomplete");
  if (problem_.sensors.size() != problem_.controls.size())
    throw std::invalid_argument("one sensor list per robot is required");
}

Planner::NodeView Planner::node(int id) const {
  const Node& n = nodes_.at(id);
  return {n.parent, n.dfa_state, n.step, n.cost, n.label};
}

std::span<const RobotPose> Planner::node_team(int id) const {
  return {poses_.data() + static_cast<std::size_t>(id) * nr_, nr_};
}
std::span<const Eigen::Matrix2d> Planner::node_covs(int id) const {
  return {covs_.data() + static_cast<std::size_t>(id) * nm_, nm_};
}
std::span<const Eigen::Vector2d> Planner::node_means(int id) const {
  return {means_.data() + static_cast<std::size_t>(id) * nm_, nm_};
}
std::span<const std::size_t> Planner::node_controls(int id) const {
  return {ctrls_.data() + static_cast<std::size_t>(id) * nr_, nr_};
}

int Planner::dist_of(int q) const {
  const auto d = index_->distance_to_accept(q);
  return d ? *d : kNoPath;
}

Symbol Planner::label_of(const TeamState& team, std::span<const Eigen::Vector2d> means,
                         std::span<const Eigen::Matrix2d> covs) const {
  return problem_.labeler->symbol(team, MapView{means, covs, classes_});
}

void Planner::reset(const PlanStart& start) {
  nr_ = problem_.num_robots();
  nm_ = problem_.num_landmarks();
  if (start.team.size() != nr_) throw PlanError("start team size does not match the problem");
  if (start.means.size() != nm_ || start.covs.size() != nm_ || start.classes.size() != nm_)
    throw PlanError("start map size does not match the problem");
  for (const auto& p : start.team)
    if (!problem_.ws->is_free(p.position())) throw PlanError("initial robot pose is not in free space");

  rng_.seed(params_.seed);
  classes_ = start.classes;
  avoid_ = problem_.labeler->avoidance_candidates(MapView{start.means, start.covs, classes_});
  nodes_.clear();
  poses_.clear();
  ctrls_.clear();
  means_.clear();
  covs_.clear();
  buckets_.clear();
  bucket_keys_.clear();
  kmin_.clear();
  others_.clear();
  dmin_ = INT_MAX;
  best_goal_ = -1;
  goal_count_ = 0;
  stats_ = PlanStats{};
  stats_.workers = params_.workers;

  index_ = problem_.pruned;
  if (!problem_.pruned->distance_to_accept(start.dfa_state) &&
      problem_.unpruned->distance_to_accept(start.dfa_state)) {
    index_ = problem_.unpruned;
    stats_.unpruned_fallback = true;
  }

  const Symbol l0 = label_of(start.team, start.means, start.covs);
  const auto q1 = next_state(*problem_.dfa, start.dfa_state, l0);
  if (!q1) throw PlanError("initial label already violates the task");
  Node root{-1, start.dfa_state, *q1, start.step, 0.0, l0};
  add_node(root, start.team, JointControl(nr_, 0), start.means, start.covs);
}

int Planner::add_node(const Node& n, const TeamState& team, const JointControl& ctrl,
                      const std::vector<Eigen::Vector2d>& means,
                      const std::vector<Eigen::Matrix2d>& covs) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(n);
  poses_.insert(poses_.end(), team.begin(), team.end());
  ctrls_.insert(ctrls_.end(), ctrl.begin(), ctrl.end());
  means_.insert(means_.end(), means.begin(), means.end());
  covs_.insert(covs_.end(), covs.begin(), covs.end());
  place_in_bucket(id);
  if (problem_.dfa->accepting && n.next_dfa == *problem_.dfa->accepting) {
    ++goal_count_;
    if (best_goal_ < 0 || n.cost < nodes_[best_goal_].cost) best_goal_ = id;
  }
  return id;
}

void Planner::place_in_bucket(int id) {
  const Node& n = nodes_[id];
  int b = -1;
  if (static_cast<std::size_t>(id) >= params_.warmup) {
    std::vector<int> key;
    key.reserve(3 * nr_ + 1);
    std::uint64_t h = static_cast<std::uint64_t>(n.dfa_state);
    for (const auto& p : node_team(id)) {
      const int kx = static_cast<int>(std::floor(p.x / params_.quant_xy));
      const int ky = static_cast<int>(std::floor(p.y / params_.quant_xy));
      const int kt = static_cast<int>(std::floor((wrap_angle(p.theta) + std::numbers::pi) / params_.quant_theta));
      for (int k : {kx, ky, kt}) {
        key.push_back(k);
        h = mix(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(k)));
      }
    }
    key.push_back(n.dfa_state);
    auto& slot = bucket_keys_[h];
    for (const auto& [k, bid] : slot)
      if (k == key) {
        b = bid;
        break;
      }
    if (b >= 0) {
      buckets_[b].nodes.push_back(id);
      return;
    }
    b = static_cast<int>(buckets_.size());
    slot.emplace_back(std::move(key), b);
  } else {
    b = static_cast<int>(buckets_.size());
  }
  const int d = dist_of(n.dfa_state);
  buckets_.push_back(Bucket{{id}, d, 0, false});
  if (d < dmin_) {
    for (int k : kmin_) {
      buckets_[k].in_kmin = false;
      buckets_[k].slot = static_cast<int>(others_.size());
      others_.push_back(k);
    }
    kmin_.clear();
    dmin_ = d;
  }
  Bucket& bk = buckets_[b];
  if (d == dmin_) {
    bk.in_kmin = true;
    bk.slot = static_cast<int>(kmin_.size());
    kmin_.push_back(b);
  } else {
    bk.slot = static_cast<int>(others_.size());
    others_.push_back(b);
  }
}

std::size_t Planner::pick_bucket() {
  const std::size_t k = sample_bucket_index(kmin_.size(), others_.size(), params_.p_rand,
                                            params_.mode, rng_);
  return k < kmin_.size() ? kmin_[k] : others_[k - kmin_.size()];
}

JointControl Planner::pick_controls(int id) {
  JointControl out(nr_, 0);
  if (params_.mode == SamplingMode::Uniform) {
    for (std::size_t j = 0; j < nr_; ++j) out[j] = uniform_index(rng_, problem_.controls[j].size());
    return out;
  }
  const Node& n = nodes_[id];
  std::vector<int> assign(nr_, -1);
  Symbol sigma = 0;
  const auto& dfa = *problem_.dfa;
  if (dfa.accepting) {
    const auto reach = reachable_min_set(*index_, n.next_dfa, *dfa.accepting);
    if (!reach.empty() && dist_of(reach.front()) < dist_of(n.next_dfa)) {
      // Ties resolve to the same state every time, so the tree commits to one word.
      const int q_min = reach.front();
      sigma = select_transition_symbol(*index_, n.next_dfa, q_min);
      assign = assign_target_landmarks(*problem_.labeler, sigma, node_covs(id), classes_, nr_);
    }
  }
  const auto means = node_means(id);
  const auto covs = node_covs(id);
  const auto team = node_team(id);
  const int q_next = n.next_dfa;
  const auto allowed = [&](Symbol s) {
    return next_state(dfa, q_next, s).has_value() && next_state(dfa, q_next, s & ~sigma).has_value();
  };
  for (std::size_t j = 0; j < nr_; ++j) {
    std::shared_ptr<const GeodesicField> field;
    Eigen::Vector2d goal = Eigen::Vector2d::Zero();
    if (assign[j] >= 0) {
      const int target = assign[j];
      std::vector<AvoidanceCandidate> cands;
      for (const auto& c : avoid_) {
        if (c.robot != static_cast<int>(j)) continue;
        AvoidanceCandidate copy = c;
        std::erase(copy.landmarks, target);
        if (!copy.landmarks.empty()) cands.push_back(std::move(copy));
      }
      CellSet obstacles;
      if (!cands.empty())
        obstacles = virtual_obstacles_for_transition(*problem_.ws, means, covs, allowed, sigma,
                                                     static_cast<int>(j), cands,
                                                     params_.obstacle_confidence);
      goal = means[target];
      std::optional<int> cell = problem_.ws->cell_of(goal);
      if (!cell || problem_.ws->cell_blocked(*cell) ||
          std::binary_search(obstacles.begin(), obstacles.end(), *cell)) {
        cell = nearest_free_cell(*problem_.ws, goal, obstacles);
        if (cell) goal = problem_.ws->cell_center(*cell);
      }
      if (cell) {
        try {
          field = fields_.get(*problem_.ws, *cell, obstacles);
        } catch (const GeodesicFieldError&) {
          field.reset();
        }
      }
    }
    const ControlChoice ch = sample_control(*problem_.ws, team[j], problem_.controls[j],
                                            Guidance{field.get(), goal},
                                            problem_.sensing_range(j), params_.p_new,
                                            params_.mode, rng_);
    if (ch.fallback) ++stats_.uniform_fallbacks;
    out[j] = ch.index;
  }
  return out;
}

void Planner::evaluate(Candidate& c) const {
  const auto parent_team = node_team(c.parent);
  const TeamState from(parent_team.begin(), parent_team.end());
  c.team = step_team(from, c.controls, problem_.controls);
  for (std::size_t j = 0; j < nr_; ++j)
    if (!problem_.ws->segment_free(from[j].position(), c.team[j].position())) return;
  const int t = nodes_[c.parent].step;
  const auto means = node_means(c.parent);
  const auto covs = node_covs(c.parent);
  c.means.resize(nm_);
  c.covs.resize(nm_);
  for (std::size_t i = 0; i < nm_; ++i) {
    const GaussianBelief b{means[i], covs[i]};
    const auto& dyn = problem_.dynamics[i];
    c.means[i] = predict_mean(b, dyn, t);
    c.covs[i] = propagate_covariance(b, dyn, t, c.team, problem_.sensors, *problem_.ws);
  }
  c.label = label_of(c.team, c.means, c.covs);
  c.valid = true;
}

Solution Planner::extract(int goal) const {
  std::vector<int> path;
  for (int v = goal; v >= 0; v = nodes_[v].parent) path.push_back(v);
  std::reverse(path.begin(), path.end());
  Solution s;
  s.nodes = path;
  s.cost = nodes_[goal].cost;
  s.horizon = nodes_[goal].step - nodes_[path.front()].step;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const int v = path[k];
    const auto team = node_team(v);
    s.poses.emplace_back(team.begin(), team.end());
    s.dfa_states.push_back(nodes_[v].dfa_state);
    s.labels.push_back(nodes_[v].label);
    const auto covs = node_covs(v);
    s.covs.emplace_back(covs.begin(), covs.end());
    if (k > 0) {
      const auto ctrl = node_controls(v);
      s.controls.emplace_back(ctrl.begin(), ctrl.end());
    }
  }
  return s;
}

PlanResult Planner::plan(const PlanStart& start) {
  const auto t0 = std::chrono::steady_clock::now();
  reset(start);
  PlanResult result;
  const auto& dfa = *problem_.dfa;
  const double period = problem_.controls.empty() ? 1.0 : problem_.controls.front().period;
  if (best_goal_ >= 0) stats_.first_solution_iteration = 0;

  std::vector<Candidate> batch;
  std::vector<int> members;
  for (std::size_t it = 1; it <= params_.n_max && !(best_goal_ >= 0 && nodes_[best_goal_].cost == 0.0);
       ++it) {
    if (nodes_.size() >= params_.max_tree_nodes) {
      stats_.truncated = true;
      break;
    }
    stats_.iterations = it;
    const std::size_t b = pick_bucket();
    members = buckets_[b].nodes;
    if (members.size() > params_.bucket_subsample) {
      for (std::size_t k = 0; k < params_.bucket_subsample; ++k)
        std::swap(members[k], members[k + uniform_index(rng_, members.size() - k)]);
      members.resize(params_.bucket_subsample);
    }
    const double bound =
        params_.bound_by_best_cost && best_goal_ >= 0 ? nodes_[best_goal_].cost : kInfiniteDistance;
    batch.clear();
    for (int m : members) {
      const Node& n = nodes_[m];
      if (dfa.accepting && n.next_dfa == *dfa.accepting) continue;
      if (n.cost >= bound) {
        ++stats_.rejected_bound;
        continue;
      }
      Candidate c;
      c.parent = m;
      c.controls = pick_controls(m);
      batch.push_back(std::move(c));
    }
    if (params_.workers > 1 && batch.size() > 1) {
      const std::size_t w = std::min<std::size_t>(params_.workers, batch.size());
      std::vector<std::jthread> pool;
      for (std::size_t k = 0; k < w; ++k)
        pool.emplace_back([&, k] {
          for (std::size_t i = k; i < batch.size(); i += w) evaluate(batch[i]);
        });
    } else {
      for (auto& c : batch) evaluate(c);
    }
    for (auto& c : batch) {
      if (!c.valid) {
        ++stats_.rejected_collision;
        continue;
      }
      const Node parent = nodes_[c.parent];
      const int q = parent.next_dfa;
      const auto next = next_state(dfa, q, c.label);
      if (!next) {
        ++stats_.rejected_violation;
        continue;
      }
      const auto from = node_team(c.parent);
      const double cost = parent.cost + step_cost(TeamState(from.begin(), from.end()), c.team, period);
      const double limit =
          params_.bound_by_best_cost && best_goal_ >= 0 ? nodes_[best_goal_].cost : kInfiniteDistance;
      if (cost >= limit) {
        ++stats_.rejected_bound;
        continue;
      }
      const bool had = best_goal_ >= 0;
      add_node(Node{c.parent, q, *next, parent.step + 1, cost, c.label}, c.team, c.controls, c.means,
               c.covs);
      if (!had && best_goal_ >= 0) stats_.first_solution_iteration = it;
    }
    result.best_cost_history.push_back(best_goal_ >= 0 ? nodes_[best_goal_].cost : kInfiniteDistance);
    if (params_.stop_at_first_solution && best_goal_ >= 0) break;
  }

  stats_.tree_size = nodes_.size();
  stats_.buckets = buckets_.size();
  stats_.goal_nodes = goal_count_;
  stats_.field_builds = fields_.builds();
  stats_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (best_goal_ >= 0) result.solution = extract(best_goal_);
  result.stats = stats_;
  return result;
}

}  // namespace semplan
