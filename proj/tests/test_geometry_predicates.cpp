#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "semplan/oracles.hpp"
#include "semplan/predicates.hpp"
#include "semplan/robot_dynamics.hpp"
#include "semplan/workspace.hpp"

using namespace semplan;
using namespace semplan::testing;
using doctest::Approx;

namespace {

struct Map {
  std::vector<Eigen::Vector2d> means;
  std::vector<Eigen::Matrix2d> covs;
  std::vector<ClassBelief> classes;
  MapView view() const { return {means, covs, classes}; }
};

PredicateDef def(PredicateKind kind, int landmark, double r, double delta, int cls = -1) {
  PredicateDef d;
  d.name = "p";
  d.kind = kind;
  d.landmark = landmark;
  d.radius = r;
  d.delta = delta;
  d.class_index = cls;
  return d;
}

}  // namespace

TEST_CASE("disk mass corner cases") {
  const Eigen::Matrix2d tight = 1e-8 * Eigen::Matrix2d::Identity();
  CHECK(prob_within_radius({0.0, 0.0}, tight, {0.5, 0.0}, 1.0) == Approx(1.0).epsilon(1e-6));
  CHECK(prob_within_radius({0.0, 0.0}, tight, {2.0, 0.0}, 1.0) == Approx(0.0).epsilon(1e-6));
  CHECK(prob_within_radius({0.0, 0.0}, Eigen::Matrix2d::Identity(), {0.0, 0.0}, 1.0) ==
        Approx(1.0 - std::exp(-0.5)).epsilon(1e-9));
  CHECK(prob_within_radius({0.0, 0.0}, Eigen::Matrix2d::Identity(), {0.0, 0.0}, 0.0) == 0.0);
  // singular covariance: a line of mass
  Eigen::Matrix2d line = Eigen::Matrix2d::Zero();
  line(0, 0) = 1.0;
  const double p = prob_within_radius({0.0, 0.0}, line, {0.0, 0.0}, 1.0);
  CHECK(p == Approx(std::erf(1.0 / std::sqrt(2.0))).epsilon(1e-4));
}

TEST_CASE("disk mass against Monte Carlo on an anisotropic case") {
  Rng rng(7);
  const Eigen::Matrix2d cov{{1.5, 0.6}, {0.6, 0.4}};
  const auto mc = oracle::mc_disk_mass({0.3, -0.2}, cov, {1.0, 0.5}, 1.2, 400000, rng);
  CHECK(std::abs(prob_within_radius({0.3, -0.2}, cov, {1.0, 0.5}, 1.2) - mc.p) < 5 * mc.stderr_ + 1e-3);
}

TEST_CASE("proximity predicate") {
  const TeamState team = {{0.0, 0.0, 0.0}};
  Map m{{{0.0, 0.0}, {10.0, 0.0}}, {1e-8 * Eigen::Matrix2d::Identity(), 1e-8 * Eigen::Matrix2d::Identity()}, {{1.0}, {1.0}}};
  CHECK(eval_proximity(def(PredicateKind::Proximity, 0, 0.5, 0.25), team, m.view()));
  CHECK_FALSE(eval_proximity(def(PredicateKind::Proximity, 1, 2.0, 0.25), team, m.view()));
  m.covs[0] = Eigen::Matrix2d::Identity();
  CHECK_FALSE(eval_proximity(def(PredicateKind::Proximity, 0, 1.0, 0.5), team, m.view()));
  CHECK(eval_proximity(def(PredicateKind::Proximity, 0, 1.0, 0.61), team, m.view()));
}

TEST_CASE("class proximity takes the best landmark") {
  const TeamState team = {{0.0, 0.0, 0.0}};
  const Eigen::Matrix2d c = 1e-8 * Eigen::Matrix2d::Identity();
  Map one{{{0.0, 0.0}}, {c}, {{1.0, 0.0}}};
  CHECK(eval_class_proximity(def(PredicateKind::ClassProximity, -1, 0.5, 0.25, 0), team, one.view()));
  CHECK_FALSE(eval_class_proximity(def(PredicateKind::ClassProximity, -1, 0.5, 0.9, 1), team, one.view()));
  Map two{{{0.0, 0.0}, {0.1, 0.0}}, {c, c}, {{0.3, 0.7}, {0.6, 0.4}}};
  CHECK(eval_class_proximity(def(PredicateKind::ClassProximity, -1, 0.5, 0.5, 0), team, two.view()));
  CHECK_FALSE(eval_class_proximity(def(PredicateKind::ClassProximity, -1, 0.5, 0.35, 0), team, two.view()));
}

TEST_CASE("uncertainty predicate uses the determinant") {
  const TeamState team = {{0.0, 0.0, 0.0}};
  Map m{{{0.0, 0.0}}, {0.05 * Eigen::Matrix2d::Identity()}, {{1.0}}};
  CHECK(eval_uncertainty(def(PredicateKind::Uncertainty, 0, 1.0, 0.01), team, m.view()));
  m.covs[0] = 0.5 * Eigen::Matrix2d::Identity();
  CHECK(eval_uncertainty(def(PredicateKind::Uncertainty, 0, 1.0, 0.25), team, m.view()));
  m.covs[0] = Eigen::Matrix2d::Identity();
  CHECK_FALSE(eval_uncertainty(def(PredicateKind::Uncertainty, 0, 1.0, 0.01), team, m.view()));
}

TEST_CASE("relaxed class proximity uses the most likely class") {
  const TeamState team = {{0.0, 0.0, 0.0}};
  const Eigen::Matrix2d c = 1e-8 * Eigen::Matrix2d::Identity();
  Map m{{{0.0, 0.0}}, {c}, {{0.3, 0.7}}};
  CHECK_FALSE(eval_relaxed_class_proximity(def(PredicateKind::RelaxedClassProximity, -1, 0.5, 0.25, 0), team, m.view()));
  CHECK(eval_relaxed_class_proximity(def(PredicateKind::RelaxedClassProximity, -1, 0.5, 0.25, 1), team, m.view()));
  CHECK(argmax_class({0.5, 0.5}) == 0);
  Map far{{{5.0, 0.0}}, {0.5 * Eigen::Matrix2d::Identity()}, {{0.0, 1.0}}};
  CHECK_FALSE(eval_relaxed_class_proximity(def(PredicateKind::RelaxedClassProximity, -1, 0.5, 0.25, 1), team, far.view()));
}

TEST_CASE("labels feed the automaton") {
  const TeamState team = {{0.0, 0.0, 0.0}};
  const Eigen::Matrix2d c = 1e-8 * Eigen::Matrix2d::Identity();
  Map m{{{0.0, 0.0}, {9.0, 9.0}}, {c, c}, {{1.0}, {1.0}}};
  CHECK(label(team, m.view(), {}).empty());
  std::vector<PredicateDef> defs = {proximity("a", 0, 0, 0.5, 0.25), proximity("b", 0, 1, 0.5, 0.25)};
  CHECK(label(team, m.view(), defs) == std::set<std::string>{"a"});
  const Dfa d = compile_to_dfa(parse_cosafe_ltl("F a"));
  const Labeler lab({defs[0]}, d.atoms);
  CHECK(next_state(d, d.initial, lab.symbol(team, m.view())) == d.accepting);
  CHECK_THROWS(Labeler({defs[1]}, d.atoms));
}

TEST_CASE("free space conventions") {
  const Workspace ws({0.0, 0.0, 10.0, 10.0}, {box(4.0, 4.0, 6.0, 6.0)}, 0.5);
  CHECK(ws.is_free({1.0, 1.0}));
  CHECK_FALSE(ws.is_free({5.0, 5.0}));
  CHECK_FALSE(ws.is_free({4.0, 5.0}));
  CHECK_FALSE(ws.is_free({0.0, 5.0}));
  CHECK(ws.segment_free({1.0, 1.0}, {9.0, 1.0}));
  CHECK_FALSE(ws.segment_free({1.0, 5.0}, {9.0, 5.0}));
  CHECK(ws.segment_free({2.0, 2.0}, {2.0, 2.0}));
  CHECK_FALSE(ws.line_of_sight({1.0, 5.0}, {9.0, 5.0}));
}

TEST_CASE("confidence ellipse cells") {
  const Workspace ws({0.0, 0.0, 20.0, 20.0}, {}, 0.1);
  const double sigma = 1.0;
  const CellSet cells = confidence_ellipse_cells(ws, {10.0, 10.0}, sigma * sigma * Eigen::Matrix2d::Identity(), 0.9);
  const double radius = sigma * std::sqrt(chi_square2_quantile(0.9));
  CHECK(radius == Approx(2.146).epsilon(1e-3));
  double far = 0.0;
  for (int c : cells) far = std::max(far, (ws.cell_center(c) - Eigen::Vector2d(10.0, 10.0)).norm());
  CHECK(far <= radius + 1e-9);
  CHECK(far >= radius - 0.15);
  const double area = cells.size() * 0.01;
  CHECK(area == Approx(std::numbers::pi * radius * radius).epsilon(0.05));
  const CellSet tiny = confidence_ellipse_cells(ws, {10.05, 10.05}, Eigen::Matrix2d::Identity(), 1e-9);
  CHECK(tiny.size() == 1);

  // anisotropic: extent along each axis scales with sqrt of the eigenvalue
  const Eigen::Matrix2d aniso{{4.0, 0.0}, {0.0, 0.25}};
  double ex = 0.0, ey = 0.0;
  for (int c : confidence_ellipse_cells(ws, {10.0, 10.0}, aniso, 0.9)) {
    const Eigen::Vector2d d = ws.cell_center(c) - Eigen::Vector2d(10.0, 10.0);
    ex = std::max(ex, std::abs(d.x()));
    ey = std::max(ey, std::abs(d.y()));
  }
  CHECK(ex / ey == Approx(4.0).epsilon(0.1));
}

TEST_CASE("geodesic field") {
  const Workspace open({0.0, 0.0, 10.0, 10.0}, {}, 0.25);
  const GeodesicField f = build_geodesic_field(open, {5.0, 5.0}, {});
  CHECK(f.at(f.goal_cell()) == 0.0);
  for (const Eigen::Vector2d& p : {Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(9.0, 5.0), Eigen::Vector2d(2.0, 8.0)}) {
    const int c = *open.cell_of(p);
    const double d = (open.cell_center(c) - open.cell_center(f.goal_cell())).norm();
    CHECK(f.at(c) >= d - 1e-9);
    CHECK(f.at(c) <= 1.083 * d + open.resolution());
  }
  const Workspace wall({0.0, 0.0, 10.0, 10.0}, {box(4.0, 0.0, 5.0, 8.0)}, 0.25);
  const GeodesicField g = build_geodesic_field(wall, {8.0, 2.0}, {});
  CHECK(g.distance_from({2.0, 2.0}) > 10.0);
  // enclose a cell with virtual obstacles
  const int target = *open.cell_of({2.0, 2.0});
  CellSet ring;
  for (const auto& [n, w] : open.neighbors(target)) ring.push_back(n);
  std::sort(ring.begin(), ring.end());
  const GeodesicField h = build_geodesic_field(open, {5.0, 5.0}, ring);
  CHECK(h.at(target) == kInfiniteDistance);
  CHECK_THROWS_AS(build_geodesic_field(wall, {4.5, 4.0}, {}), GeodesicFieldError);
}

TEST_CASE("virtual obstacles for forbidden atoms") {
  const Workspace ws({0.0, 0.0, 10.0, 10.0}, {}, 0.25);
  const std::vector<Eigen::Vector2d> means = {{3.0, 3.0}, {7.0, 7.0}};
  const std::vector<Eigen::Matrix2d> covs = {0.1 * Eigen::Matrix2d::Identity(), 0.1 * Eigen::Matrix2d::Identity()};
  const std::vector<AvoidanceCandidate> cands = {{0, 0, {0}}, {1, 0, {1}}};
  // atom 0 forbidden, atom 1 allowed
  const auto allowed = [](Symbol s) { return (s & 1u) == 0; };
  const CellSet cells = virtual_obstacles_for_transition(ws, means, covs, allowed, 0, 0, cands, 0.9);
  CHECK_FALSE(cells.empty());
  CHECK(std::binary_search(cells.begin(), cells.end(), *ws.cell_of(means[0])));
  CHECK_FALSE(std::binary_search(cells.begin(), cells.end(), *ws.cell_of(means[1])));
  const auto anything = [](Symbol) { return true; };
  CHECK(virtual_obstacles_for_transition(ws, means, covs, anything, 0, 0, cands, 0.9).empty());
  // only a joint two-robot conjunction is forbidden: no single atom is blocked
  const std::vector<AvoidanceCandidate> pair = {{0, 0, {0}}, {1, 1, {1}}};
  const auto not_both = [](Symbol s) { return (s & 3u) != 3u; };
  CHECK(virtual_obstacles_for_transition(ws, means, covs, not_both, 0, 0, pair, 0.9).empty());
}

TEST_CASE("unicycle step") {
  CHECK(step_diff_drive({1.0, 2.0, 0.3}, 0.0, 0.0, 1.0) == RobotPose{1.0, 2.0, 0.3});
  const RobotPose a = step_diff_drive({0.0, 0.0, 0.0}, 1.0, 0.0, 0.1);
  CHECK(a.x == Approx(0.1));
  const RobotPose b = step_diff_drive({0.0, 0.0, std::numbers::pi / 2}, 1.0, 0.0, 0.5);
  CHECK(b.y == Approx(0.5));
  CHECK(std::abs(b.x) < 1e-12);
  // quarter circle of radius 1
  const RobotPose c = step_diff_drive({0.0, 0.0, 0.0}, 1.0, std::numbers::pi / 2, 1.0);
  CHECK(c.x == Approx(2.0 / std::numbers::pi));
  CHECK(c.y == Approx(2.0 / std::numbers::pi));
  CHECK(c.theta == Approx(std::numbers::pi / 2));
  // tiny turn rates approach the straight line
  const RobotPose d = step_diff_drive({0.0, 0.0, 0.0}, 1.0, 1e-12, 1.0);
  CHECK(d.x == Approx(1.0));
  CHECK(wrap_angle(3.0 * std::numbers::pi) == Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == Approx(std::numbers::pi));
}

TEST_CASE("team step is componentwise") {
  const std::vector<ControlSet> sets = {ControlSet::default_set(0.5), ControlSet::default_set(0.5)};
  const TeamState team = {{0.0, 0.0, 0.0}, {3.0, 1.0, 1.0}};
  CHECK(step_team(team, {0, 0}, sets) == team);
  const JointControl u = {27, 40};
  const TeamState next = step_team(team, u, sets);
  for (int j = 0; j < 2; ++j) {
    const Control c = sets[j].at(u[j]);
    CHECK(next[j] == step_diff_drive(team[j], c.linear, c.angular, 0.5));
  }
  CHECK(team_displacement(team, next) ==
        Approx((next[0].position() - team[0].position()).norm() + (next[1].position() - team[1].position()).norm()));
  CHECK(ControlSet::default_set(0.1).size() == 50);
  CHECK_THROWS(sets[0].at(50));
}
