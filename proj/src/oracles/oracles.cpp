#include "semplan/oracles.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <limits>
#include <random>

namespace semplan::oracle {

namespace {

bool holds(const Formula& f, const Word& w, std::size_t t) {
  const std::size_t n = w.size();
  switch (f.kind) {
    case FormulaKind::True: return true;
    case FormulaKind::Atom: return t < n && w[t].count(f.atom) > 0;
    case FormulaKind::Not: return t < n && w[t].count(f.atom) == 0;
    case FormulaKind::And: return holds(f.children[0], w, t) && holds(f.children[1], w, t);
    case FormulaKind::Or: return holds(f.children[0], w, t) || holds(f.children[1], w, t);
    case FormulaKind::Until:
      for (std::size_t k = t; k <= n; ++k) {
        if (holds(f.children[1], w, k)) return true;
        if (!holds(f.children[0], w, k)) return false;
      }
      return false;
  }
  return false;
}

}  // namespace

bool semantic_eval(const Formula& f, const Word& word) { return holds(f, word, 0); }

std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adjacency, int src) {
  std::vector<int> d(adjacency.size(), -1);
  std::deque<int> q{src};
  d[src] = 0;
  while (!q.empty()) {
    const int u = q.front();
    q.pop_front();
    for (int v : adjacency[u])
      if (d[v] < 0) {
        d[v] = d[u] + 1;
        q.push_back(v);
      }
  }
  return d;
}

MonteCarloMass mc_disk_mass(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov,
                            const Eigen::Vector2d& point, double r, std::size_t samples, Rng& rng) {
  if (samples < 100000) throw std::invalid_argument("mc_disk_mass needs at least 1e5 samples");
  // Cholesky with a tiny jitter so singular covariances still sample.
  Eigen::LLT<Eigen::Matrix2d> llt(cov + 1e-15 * Eigen::Matrix2d::Identity());
  const Eigen::Matrix2d L = llt.matrixL();
  std::normal_distribution<double> n01(0.0, 1.0);
  std::size_t inside = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Eigen::Vector2d z(n01(rng), n01(rng));
    if ((mean + L * z - point).squaredNorm() <= r * r) ++inside;
  }
  MonteCarloMass m;
  m.p = static_cast<double>(inside) / samples;
  m.stderr_ = std::sqrt(m.p * (1.0 - m.p) / samples);
  return m;
}

double rayleigh_disk_mass(double sigma, double r) { return 1.0 - std::exp(-r * r / (2.0 * sigma * sigma)); }

double isotropic_disk_mass(const Eigen::Vector2d& mean, double var, const Eigen::Vector2d& point,
                           double r) {
  if (r <= 0.0) return 0.0;
  const double lambda = (mean - point).squaredNorm() / var;
  const double x = r * r / var;
  if (lambda == 0.0) return 1.0 - std::exp(-x / 2.0);
  boost::math::non_central_chi_squared dist(2.0, lambda);
  return boost::math::cdf(dist, x);
}

KfObservation position_observation(const Eigen::Matrix2d& noise) {
  return {Eigen::MatrixXd::Identity(2, 2), noise};
}

KfObservation range_observation(const Eigen::Vector2d& robot, const Eigen::Vector2d& point,
                                double stddev) {
  const Eigen::Vector2d d = point - robot;
  KfObservation o;
  o.H = d.transpose() / d.norm();
  o.V = Eigen::MatrixXd::Constant(1, 1, stddev * stddev);
  return o;
}

Eigen::Matrix2d kf_covariance(const Eigen::Matrix2d& P, const Eigen::Matrix2d& A,
                              const Eigen::Matrix2d& R, std::span<const KfObservation> obs) {
  const Eigen::Matrix2d prior = A * P * A.transpose() + R;
  if (obs.empty()) return prior;
  Eigen::Matrix2d info = prior.inverse();
  for (const auto& o : obs) info += o.H.transpose() * o.V.inverse() * o.H;
  return info.inverse();
}

double scalar_kf(double p, double a, double r, double h, double v) {
  return 1.0 / (1.0 / (a * a * p + r) + h * h / v);
}

namespace {

bool in_box(const TinyBox& b, double x, double y) {
  return x >= b.x0 && x <= b.x1 && y >= b.y0 && y <= b.y1;
}

// Liang-Barsky clip of segment a-b against a closed box.
bool segment_hits_box(const TinyBox& b, const Eigen::Vector2d& a, const Eigen::Vector2d& c) {
  double t0 = 0.0, t1 = 1.0;
  const Eigen::Vector2d d = c - a;
  const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
  const double q[4] = {a.x() - b.x0, b.x1 - a.x(), a.y() - b.y0, b.y1 - a.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0)
      t0 = std::max(t0, t);
    else
      t1 = std::min(t1, t);
    if (t0 > t1) return false;
  }
  return true;
}

struct Walker {
  const TinyProblem& p;
  std::size_t budget_depth;
  std::optional<TinyPlan> best;
  std::vector<int> seq;
  Word word;

  bool free_point(double x, double y) const {
    if (!(x > p.xmin && x < p.xmax && y > p.ymin && y < p.ymax)) return false;
    for (const auto& b : p.boxes)
      if (in_box(b, x, y)) return false;
    return true;
  }

  bool clear(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
    for (const auto& box : p.boxes)
      if (segment_hits_box(box, a, b)) return false;
    return true;
  }

  std::set<std::string> labels(const Eigen::Vector2d& at, const std::vector<double>& var) const {
    std::set<std::string> out;
    for (const auto& a : p.atoms)
      if (isotropic_disk_mass(p.means[a.landmark], var[a.landmark], at, a.radius) >= 1.0 - a.delta)
        out.insert(a.name);
    return out;
  }

  void walk(double x, double y, double th, std::vector<double> var, double cost) {
    if (best && cost >= best->cost) return;
    if (semantic_eval(p.task, word)) {
      best = TinyPlan{cost, seq};
      return;
    }
    if (seq.size() >= budget_depth) return;
    for (std::size_t u = 0; u < p.controls.size(); ++u) {
      const auto [v, w] = p.controls[u];
      double nx, ny;
      if (std::abs(w) < 1e-12) {
        nx = x + v * p.period * std::cos(th);
        ny = y + v * p.period * std::sin(th);
      } else {
        nx = x + v / w * (std::sin(th + w * p.period) - std::sin(th));
        ny = y + v / w * (std::cos(th) - std::cos(th + w * p.period));
      }
      const double nth = th + w * p.period;
      const Eigen::Vector2d a(x, y), b(nx, ny);
      if (!free_point(x, y) || !free_point(nx, ny) || !clear(a, b)) continue;
      std::vector<double> nvar(var.size());
      for (std::size_t i = 0; i < var.size(); ++i) {
        const double prior = var[i] + p.process_var;
        const bool seen = (p.means[i] - b).norm() <= p.sensor_range && clear(b, p.means[i]);
        nvar[i] = seen ? 1.0 / (1.0 / prior + 1.0 / p.sensor_var) : prior;
      }
      const double step = (b - a).norm();
      const double c = cost + (step > 0.0 ? step : 1e-6 * p.period);
      seq.push_back(static_cast<int>(u));
      word.push_back(labels(b, nvar));
      walk(nx, ny, nth, nvar, c);
      word.pop_back();
      seq.pop_back();
    }
  }
};

}  // namespace

std::optional<TinyPlan> exhaustive_plan(const TinyProblem& p, int depth) {
  if (depth < 0) throw std::invalid_argument("negative depth");
  double count = std::pow(static_cast<double>(p.controls.size()), depth);
  if (count > 1e7) throw OracleBudgetError("enumeration exceeds 1e7 sequences");
  Walker w{p, static_cast<std::size_t>(depth), std::nullopt, {}, {}};
  w.word.push_back(w.labels({p.x, p.y}, p.variances));
  w.walk(p.x, p.y, p.theta, p.variances, 0.0);
  return w.best;
}

OracleReport make_report(std::string case_id, double oracle, double implementation,
                         double tolerance) {
  OracleReport r{std::move(case_id), oracle, implementation, tolerance, false};
  r.pass = std::abs(oracle - implementation) <= tolerance;
  return r;
}

std::string to_csv(std::span<const OracleReport> rows) {
  std::string out = "case_id,oracle,implementation,tolerance,pass\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.12g,%.12g,%.3g,%d\n", r.oracle, r.implementation, r.tolerance,
                  r.pass ? 1 : 0);
    out += r.case_id + buf;
  }
  return out;
}

}  // namespace semplan::oracle
