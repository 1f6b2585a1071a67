#include "semplan/predicates.hpp"

#include <Eigen/LU>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

namespace semplan {

namespace {

constexpr int kNodes = 64;

struct GaussLegendre {
  std::array<double, kNodes> x{}, w{};
  GaussLegendre() {
    for (int i = 0; i < kNodes; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (kNodes + 0.5));
      double dp = 1.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= kNodes; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = kNodes * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre& gl() {
  static const GaussLegendre rule;
  return rule;
}

}  // namespace

// Whitened polar form: along each direction u of the standard normal, the disk
// is a radial interval found in closed form, and its chi(2) mass is exact. Only
// the angle is integrated numerically.
double prob_within_radius(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov,
                          const Eigen::Vector2d& point, double r) {
  if (!(r > 0.0)) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (cov + cov.transpose()));
  const Eigen::Vector2d lambda = es.eigenvalues().cwiseMax(1e-12);
  const Eigen::Matrix2d L = es.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
  const Eigen::Vector2d c = point - mean;
  const double k = c.squaredNorm() - r * r;
  const Eigen::Vector2d g = L.transpose() * c;
  const Eigen::Matrix2d LtL = L.transpose() * L;

  auto radial_mass = [&](double phi) {
    const Eigen::Vector2d u(std::cos(phi), std::sin(phi));
    const double a = u.dot(LtL * u);
    const double b = u.dot(g);
    const double disc = b * b - a * k;
    if (disc <= 0.0) return 0.0;
    const double sq = std::sqrt(disc);
    const double hi = std::max((b + sq) / a, 0.0);
    if (k <= 0.0) return -std::expm1(-0.5 * hi * hi);
    if (b <= 0.0) return 0.0;
    const double lo = std::max(k / (b + sq), 0.0);  // (b - sq) / a without cancellation
    return std::exp(-0.5 * lo * lo) - std::exp(-0.5 * hi * hi);
  };

  const auto& rule = gl();
  double total = 0.0;
  if (k <= 0.0) {
    constexpr int kPanels = 4;
    const double h = 2.0 * std::numbers::pi / kPanels;
    for (int p = 0; p < kPanels; ++p)
      for (int i = 0; i < kNodes; ++i)
        total += 0.5 * h * rule.w[i] * radial_mass(h * (p + 0.5 * (rule.x[i] + 1.0)));
    return std::clamp(total / (2.0 * std::numbers::pi), 0.0, 1.0);
  }

  // Mean outside the disk: directions that hit it form a cone around the
  // positive eigenvector of g g^T - k L^T L.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ms(g * g.transpose() - k * LtL);
  const double mu_neg = ms.eigenvalues()(0), mu_pos = ms.eigenvalues()(1);
  if (mu_pos <= 0.0) return 0.0;
  Eigen::Vector2d axis = ms.eigenvectors().col(1);
  if (axis.dot(g) < 0.0) axis = -axis;
  const double center = std::atan2(axis.y(), axis.x());
  const double half = mu_neg < 0.0 ? std::atan(std::sqrt(mu_pos / -mu_neg)) : 0.5 * std::numbers::pi;
  // psi = half * sin(s) smooths the square-root behavior at the cone edges.
  constexpr double kHalfPi = 0.5 * std::numbers::pi;
  for (int i = 0; i < kNodes; ++i) {
    const double s = kHalfPi * rule.x[i];
    total += kHalfPi * rule.w[i] * half * std::cos(s) * radial_mass(center + half * std::sin(s));
  }
  return std::clamp(total / (2.0 * std::numbers::pi), 0.0, 1.0);
}

void PredicateDef::validate(std::size_t num_robots, std::size_t num_landmarks,
                            std::size_t num_classes) const {
  auto fail = [&](const std::string& what) { throw PredicateError("predicate '" + name + "': " + what); };
  if (robot < 0 || static_cast<std::size_t>(robot) >= num_robots) fail("unknown robot");
  if (!(delta > 0.0 && delta < 1.0)) fail("threshold must lie in (0, 1)");
  switch (kind) {
    case PredicateKind::Proximity:
      if (!(radius > 0.0)) fail("radius must be positive");
      [[fallthrough]];
    case PredicateKind::Uncertainty:
      if (landmark < 0 || static_cast<std::size_t>(landmark) >= num_landmarks) fail("unknown landmark");
      break;
    case PredicateKind::ClassProximity:
    case PredicateKind::RelaxedClassProximity:
      if (!(radius > 0.0)) fail("radius must be positive");
      if (class_index < 0 || static_cast<std::size_t>(class_index) >= num_classes) fail("unknown class");
      break;
  }
}

namespace {

const Eigen::Vector2d& robot_position(const PredicateDef& def, const TeamState& team,
                                      Eigen::Vector2d& scratch) {
  if (def.robot < 0 || static_cast<std::size_t>(def.robot) >= team.size())
    throw PredicateError("predicate '" + def.name + "': unknown robot");
  scratch = team[def.robot].position();
  return scratch;
}

void check_landmark(const PredicateDef& def, const MapView& map) {
  if (def.landmark < 0 || static_cast<std::size_t>(def.landmark) >= map.means.size())
    throw PredicateError("predicate '" + def.name + "': unknown landmark");
}

}  // namespace

int argmax_class(const ClassBelief& belief) {
  int best = 0;
  for (std::size_t c = 1; c < belief.size(); ++c)
    if (belief[c] > belief[best]) best = static_cast<int>(c);
  return best;
}

bool eval_proximity(const PredicateDef& def, const TeamState& team, const MapView& map) {
  check_landmark(def, map);
  Eigen::Vector2d p;
  robot_position(def, team, p);
  return prob_within_radius(map.means[def.landmark], map.covs[def.landmark], p, def.radius) -
             (1.0 - def.delta) >=
         0.0;
}

bool eval_class_proximity(const PredicateDef& def, const TeamState& team, const MapView& map) {
  Eigen::Vector2d p;
  robot_position(def, team, p);
  const double need = 1.0 - def.delta;
  for (std::size_t i = 0; i < map.means.size(); ++i) {
    const auto& d = map.classes[i];
    if (def.class_index < 0 || static_cast<std::size_t>(def.class_index) >= d.size())
      throw PredicateError("predicate '" + def.name + "': unknown class");
    const double dc = d[def.class_index];
    if (dc < need) continue;  // the product cannot reach the threshold
    if (prob_within_radius(map.means[i], map.covs[i], p, def.radius) * dc >= need) return true;
  }
  return false;
}

bool eval_uncertainty(const PredicateDef& def, const TeamState&, const MapView& map) {
  check_landmark(def, map);
  return map.covs[def.landmark].determinant() <= def.delta;
}

bool eval_relaxed_class_proximity(const PredicateDef& def, const TeamState& team,
                                  const MapView& map) {
  Eigen::Vector2d p;
  robot_position(def, team, p);
  for (std::size_t i = 0; i < map.means.size(); ++i) {
    if (argmax_class(map.classes[i]) != def.class_index) continue;
    if (prob_within_radius(map.means[i], map.covs[i], p, def.radius) >= 1.0 - def.delta) return true;
  }
  return false;
}

bool eval_predicate(const PredicateDef& def, const TeamState& team, const MapView& map) {
  switch (def.kind) {
    case PredicateKind::Proximity: return eval_proximity(def, team, map);
    case PredicateKind::ClassProximity: return eval_class_proximity(def, team, map);
    case PredicateKind::Uncertainty: return eval_uncertainty(def, team, map);
    case PredicateKind::RelaxedClassProximity: return eval_relaxed_class_proximity(def, team, map);
  }
  return false;
}

std::set<std::string> label(const TeamState& team, const MapView& map,
                            std::span<const PredicateDef> defs) {
  std::set<std::string> out;
  for (const auto& d : defs)
    if (eval_predicate(d, team, map)) out.insert(d.name);
  return out;
}

Labeler::Labeler(std::vector<PredicateDef> defs, const std::vector<std::string>& atoms) {
  std::map<std::string, PredicateDef> by_name;
  for (auto& d : defs) by_name[d.name] = std::move(d);
  for (const auto& a : atoms) {
    auto it = by_name.find(a);
    if (it == by_name.end()) throw PredicateError("atom '" + a + "' has no predicate definition");
    const PredicateDef& d = it->second;
    defs_.push_back(d);
    AtomMeta m;
    m.robot = d.robot;
    switch (d.kind) {
      case PredicateKind::Proximity:
        m.binding = AtomBinding::Landmark;
        m.target = d.landmark;
        break;
      case PredicateKind::ClassProximity:
      case PredicateKind::RelaxedClassProximity:
        m.binding = AtomBinding::Class;
        m.target = d.class_index;
        break;
      case PredicateKind::Uncertainty:
        break;
    }
    meta_.push_back(m);
  }
}

Symbol Labeler::symbol(const TeamState& team, const MapView& map) const {
  Symbol s = 0;
  for (std::size_t a = 0; a < defs_.size(); ++a)
    if (eval_predicate(defs_[a], team, map)) s |= Symbol{1} << a;
  return s;
}

std::vector<AvoidanceCandidate> Labeler::avoidance_candidates(const MapView& map) const {
  std::vector<AvoidanceCandidate> out;
  for (std::size_t a = 0; a < defs_.size(); ++a) {
    const auto& d = defs_[a];
    AvoidanceCandidate cand{static_cast<int>(a), d.robot, {}};
    switch (d.kind) {
      case PredicateKind::Proximity:
        cand.landmarks.push_back(d.landmark);
        break;
      case PredicateKind::ClassProximity:
        for (std::size_t i = 0; i < map.classes.size(); ++i)
          if (map.classes[i][d.class_index] >= 1.0 - d.delta) cand.landmarks.push_back(static_cast<int>(i));
        break;
      case PredicateKind::RelaxedClassProximity:
        for (std::size_t i = 0; i < map.classes.size(); ++i)
          if (argmax_class(map.classes[i]) == d.class_index) cand.landmarks.push_back(static_cast<int>(i));
        break;
      case PredicateKind::Uncertainty:
        continue;
    }
    if (!cand.landmarks.empty()) out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace semplan
