#include "doctest.h"

#include <cmath>

#include "semplan/oracles.hpp"

using namespace semplan;
using namespace semplan::oracle;
using doctest::Approx;

TEST_CASE("semantic evaluator") {
  CHECK(semantic_eval(parse_cosafe_ltl("F a"), {{}, {"a"}}));
  CHECK_FALSE(semantic_eval(parse_cosafe_ltl("!b U a"), {{"b"}}));
  CHECK_FALSE(semantic_eval(parse_cosafe_ltl("F a"), {}));
  CHECK(semantic_eval(parse_cosafe_ltl("true"), {}));
  CHECK(semantic_eval(parse_cosafe_ltl("a U b"), {{"a"}, {"a"}, {"b"}}));
  CHECK_FALSE(semantic_eval(parse_cosafe_ltl("a U b"), {{"a"}, {}, {"b"}}));
}

TEST_CASE("bfs") {
  const std::vector<std::vector<int>> g = {{1}, {2}, {}, {0}};
  CHECK(bfs_distances(g, 0) == std::vector<int>{0, 1, 2, -1});
}

TEST_CASE("monte carlo disk mass") {
  Rng rng(1);
  const double sigma = 0.7;
  const auto m = mc_disk_mass({0.0, 0.0}, sigma * sigma * Eigen::Matrix2d::Identity(), {0.0, 0.0}, 1.0, 200000, rng);
  CHECK(std::abs(m.p - rayleigh_disk_mass(sigma, 1.0)) < 0.005);
  CHECK(m.stderr_ > 0.0);
  CHECK(mc_disk_mass({0.0, 0.0}, Eigen::Matrix2d::Identity(), {0.0, 0.0}, 0.0, 100000, rng).p == 0.0);
  CHECK(mc_disk_mass({0.0, 0.0}, Eigen::Matrix2d::Identity(), {0.0, 0.0}, 1e3, 100000, rng).p == 1.0);
  CHECK_THROWS(mc_disk_mass({0.0, 0.0}, Eigen::Matrix2d::Identity(), {0.0, 0.0}, 1.0, 10, rng));
  CHECK(isotropic_disk_mass({0.0, 0.0}, 1.0, {0.0, 0.0}, 1.0) == Approx(1.0 - std::exp(-0.5)));
  CHECK(isotropic_disk_mass({3.0, 0.0}, 0.01, {0.0, 0.0}, 1.0) < 1e-12);
}

TEST_CASE("textbook filter") {
  CHECK(scalar_kf(1.0, 1.0, 0.0, 1.0, 1.0) == Approx(0.5));
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  const std::vector<KfObservation> obs = {position_observation(I)};
  CHECK((kf_covariance(I, I, Eigen::Matrix2d::Zero(), obs) - 0.5 * I).norm() < 1e-12);
  CHECK((kf_covariance(I, I, I, {}) - 2.0 * I).norm() < 1e-12);
  const auto r = range_observation({0.0, 0.0}, {3.0, 4.0}, 0.5);
  CHECK(r.H(0, 0) == Approx(0.6));
  CHECK(r.V(0, 0) == Approx(0.25));
}

TEST_CASE("exhaustive planner") {
  TinyProblem p;
  p.x = 1.0;
  p.y = 1.0;
  p.controls = {{1.0, 0.0}, {1.0, std::numbers::pi / 2}, {1.0, -std::numbers::pi / 2}};
  p.means = {{3.0, 1.0}};
  p.variances = {0.01};
  p.sensor_range = 1.0;
  p.atoms = {{"a", 0, 0.5, 0.25}};
  p.task = parse_cosafe_ltl("F a");
  const auto best = exhaustive_plan(p, 4);
  REQUIRE(best);
  CHECK(best->cost == Approx(2.0));
  CHECK(best->controls == std::vector<int>{0, 0});

  p.task = parse_cosafe_ltl("true");
  const auto root = exhaustive_plan(p, 0);
  REQUIRE(root);
  CHECK(root->cost == 0.0);

  p.task = parse_cosafe_ltl("F a");
  p.boxes = {{2.0, 0.0, 2.2, 10.0}};
  CHECK_FALSE(exhaustive_plan(p, 4));
  p.controls.resize(10, {1.0, 0.0});
  CHECK_THROWS_AS(exhaustive_plan(p, 8), OracleBudgetError);
}

TEST_CASE("report rows") {
  const auto ok = make_report("c1", 1.0, 1.005, 0.01);
  const auto bad = make_report("c2", 1.0, 1.5, 0.01);
  CHECK(ok.pass);
  CHECK_FALSE(bad.pass);
  const std::vector<OracleReport> rows = {ok, bad};
  const std::string csv = to_csv(rows);
  CHECK(csv.rfind("case_id,oracle,implementation,tolerance,pass\n", 0) == 0);
  CHECK(csv.find("c2,1,1.5,0.01,0") != std::string::npos);
}
