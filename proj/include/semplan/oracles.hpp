// Brute-force reference implementations for tests and `sweep --oracle`.
// Nothing here calls into the planning library; only plain data types
// (Formula, Rng) are shared.

#pragma once

#include <Eigen/Core>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "semplan/ltl.hpp"
#include "semplan/random.hpp"

namespace semplan::oracle {

using Word = std::vector<std::set<std::string>>;

/// Direct recursion on the finite-word semantics. Positions past the end of
/// the word satisfy `true` and nothing else.
bool semantic_eval(const Formula& f, const Word& word);

/// Breadth-first hop counts from `src`; -1 when unreachable.
std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adjacency, int src);

struct MonteCarloMass {
  double p = 0.0;
  double stderr_ = 0.0;
};

/// Fraction of `samples` draws of N(mean, cov) within r of `point`.
MonteCarloMass mc_disk_mass(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov,
                            const Eigen::Vector2d& point, double r, std::size_t samples, Rng& rng);

/// Centered isotropic case: 1 - exp(-r^2 / (2 sigma^2)).
double rayleigh_disk_mass(double sigma, double r);

/// Isotropic N(mean, var I) via the noncentral chi-square CDF.
double isotropic_disk_mass(const Eigen::Vector2d& mean, double var, const Eigen::Vector2d& point,
                           double r);

struct KfObservation {
  Eigen::MatrixXd H;
  Eigen::MatrixXd V;
};

KfObservation position_observation(const Eigen::Matrix2d& noise);
/// Range to `point` from `robot`, linearized at `point`.
KfObservation range_observation(const Eigen::Vector2d& robot, const Eigen::Vector2d& point,
                                double stddev);

/// Information-form update: (inv(A P A' + R) + sum H' inv(V) H)^-1.
Eigen::Matrix2d kf_covariance(const Eigen::Matrix2d& P, const Eigen::Matrix2d& A,
                              const Eigen::Matrix2d& R, std::span<const KfObservation> obs);

/// Scalar textbook update: 1 / (1 / (a^2 p + r) + h^2 / v).
double scalar_kf(double p, double a, double r, double h, double v);

struct TinyBox {
  double x0, y0, x1, y1;  // closed
};

struct TinyAtom {
  std::string name;
  int landmark = 0;
  double radius = 1.0;
  double delta = 0.25;
};

/// One robot, static landmarks with isotropic covariance, one isotropic
/// position sensor. Small enough to enumerate.
struct TinyProblem {
  double xmin = 0.0, ymin = 0.0, xmax = 10.0, ymax = 10.0;
  std::vector<TinyBox> boxes;
  double x = 0.0, y = 0.0, theta = 0.0;
  std::vector<std::pair<double, double>> controls;  // (linear, angular)
  double period = 1.0;
  std::vector<Eigen::Vector2d> means;
  std::vector<double> variances;
  double process_var = 0.0;
  double sensor_range = 1.0;
  double sensor_var = 0.01;
  std::vector<TinyAtom> atoms;
  Formula task;
};

struct TinyPlan {
  double cost = 0.0;
  std::vector<int> controls;
};

class OracleBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cheapest control sequence of length <= depth whose label word satisfies
/// the task. Throws when |U|^depth exceeds 1e7.
std::optional<TinyPlan> exhaustive_plan(const TinyProblem& p, int depth);

struct OracleReport {
  std::string case_id;
  double oracle = 0.0;
  double implementation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// pass iff |oracle - implementation| <= tolerance.
OracleReport make_report(std::string case_id, double oracle, double implementation,
                         double tolerance);
std::string to_csv(std::span<const OracleReport> rows);

}  // namespace semplan::oracle
