#include "semplan/workspace.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <stdexcept>

namespace semplan {

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

int orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const double v = cross(b - a, c - a);
  constexpr double eps = 1e-12;
  return v > eps ? 1 : (v < -eps ? -1 : 0);
}

bool on_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  return std::min(a.x(), b.x()) - 1e-12 <= p.x() && p.x() <= std::max(a.x(), b.x()) + 1e-12 &&
         std::min(a.y(), b.y()) - 1e-12 <= p.y() && p.y() <= std::max(a.y(), b.y()) + 1e-12;
}

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                        const Eigen::Vector2d& q1, const Eigen::Vector2d& q2) {
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

bool Polygon::contains(const Eigen::Vector2d& p) const {
  const std::size_t n = vertices.size();
  if (n < 3) return false;
  int sign = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int o = orient(vertices[i], vertices[(i + 1) % n], p);
    if (o == 0) continue;
    if (sign == 0) sign = o;
    else if (o != sign) return false;
  }
  return true;
}

bool Polygon::intersects_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
  if (contains(a) || contains(b)) return true;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i)
    if (segments_intersect(a, b, vertices[i], vertices[(i + 1) % n])) return true;
  return false;
}

Workspace::Workspace(Bounds bounds, std::vector<Polygon> obstacles, double resolution)
    : bounds_(bounds), obstacles_(std::move(obstacles)), resolution_(resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  if (!(bounds.xmax > bounds.xmin && bounds.ymax > bounds.ymin))
    throw std::invalid_argument("workspace bounds are empty");
  nx_ = static_cast<int>(std::ceil((bounds.xmax - bounds.xmin) / resolution - 1e-9));
  ny_ = static_cast<int>(std::ceil((bounds.ymax - bounds.ymin) / resolution - 1e-9));
  blocked_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (int c = 0; c < cell_count(); ++c) blocked_[c] = is_free(cell_center(c)) ? 0 : 1;
}

bool Workspace::is_free(const Eigen::Vector2d& p) const {
  if (!(p.x() > bounds_.xmin && p.x() < bounds_.xmax && p.y() > bounds_.ymin && p.y() < bounds_.ymax))
    return false;
  return std::none_of(obstacles_.begin(), obstacles_.end(),
                      [&](const Polygon& o) { return o.contains(p); });
}

bool Workspace::segment_free(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
  if (!is_free(a) || !is_free(b)) return false;
  return line_of_sight(a, b);
}

bool Workspace::line_of_sight(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
  return std::none_of(obstacles_.begin(), obstacles_.end(),
                      [&](const Polygon& o) { return o.intersects_segment(a, b); });
}

std::optional<int> Workspace::cell_of(const Eigen::Vector2d& p) const {
  const int ix = static_cast<int>(std::floor((p.x() - bounds_.xmin) / resolution_));
  const int iy = static_cast<int>(std::floor((p.y() - bounds_.ymin) / resolution_));
  if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return std::nullopt;
  return iy * nx_ + ix;
}

Eigen::Vector2d Workspace::cell_center(int cell) const {
  const int ix = cell % nx_, iy = cell / nx_;
  return {bounds_.xmin + (ix + 0.5) * resolution_, bounds_.ymin + (iy + 0.5) * resolution_};
}

std::vector<std::pair<int, double>> Workspace::neighbors(int cell) const {
  std::vector<std::pair<int, double>> out;
  if (blocked_[cell]) return out;
  const int ix = cell % nx_, iy = cell / nx_;
  auto free_at = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < nx_ && y < ny_ && !blocked_[y * nx_ + x];
  };
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      if (!dx && !dy) continue;
      const int x = ix + dx, y = iy + dy;
      if (!free_at(x, y)) continue;
      if (dx && dy && (!free_at(ix + dx, iy) || !free_at(ix, iy + dy))) continue;
      out.emplace_back(y * nx_ + x, (dx && dy) ? std::sqrt(2.0) * resolution_ : resolution_);
    }
  return out;
}

double chi_square2_quantile(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("confidence must lie in [0, 1)");
  return -2.0 * std::log1p(-p);
}

CellSet confidence_ellipse_cells(const Workspace& ws, const Eigen::Vector2d& mean,
                                 const Eigen::Matrix2d& cov, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  CellSet out;
  const auto mean_cell = ws.cell_of(mean);
  if (mean_cell) out.push_back(*mean_cell);
  Eigen::LLT<Eigen::Matrix2d> llt(cov);
  if (llt.info() != Eigen::Success || cov.determinant() <= 1e-18) return out;
  const Eigen::Matrix2d info = cov.inverse();
  const double k = chi_square2_quantile(epsilon);
  const double hx = std::sqrt(k * cov(0, 0)), hy = std::sqrt(k * cov(1, 1));
  const double res = ws.resolution();
  const Bounds& b = ws.bounds();
  const int x0 = std::max(0, static_cast<int>(std::floor((mean.x() - hx - b.xmin) / res)));
  const int x1 = std::min(ws.nx() - 1, static_cast<int>(std::floor((mean.x() + hx - b.xmin) / res)));
  const int y0 = std::max(0, static_cast<int>(std::floor((mean.y() - hy - b.ymin) / res)));
  const int y1 = std::min(ws.ny() - 1, static_cast<int>(std::floor((mean.y() + hy - b.ymin) / res)));
  for (int iy = y0; iy <= y1; ++iy)
    for (int ix = x0; ix <= x1; ++ix) {
      const int c = iy * ws.nx() + ix;
      const Eigen::Vector2d d = ws.cell_center(c) - mean;
      if (d.dot(info * d) <= k) out.push_back(c);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double GeodesicField::distance_from(const Eigen::Vector2d& p) const {
  const auto c = ws_->cell_of(p);
  if (!c) return kInfiniteDistance;
  double best = kInfiniteDistance;
  auto consider = [&](int cell) {
    if (std::isfinite(dist_[cell])) best = std::min(best, dist_[cell] + (p - ws_->cell_center(cell)).norm());
  };
  if (!ws_->cell_blocked(*c)) {
    consider(*c);
    for (const auto& [n, w] : ws_->neighbors(*c)) consider(n);
    return best;
  }
  const int ix = *c % ws_->nx(), iy = *c / ws_->nx();
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int x = ix + dx, y = iy + dy;
      if (x < 0 || y < 0 || x >= ws_->nx() || y >= ws_->ny()) continue;
      const int n = y * ws_->nx() + x;
      if (!ws_->cell_blocked(n) && ws_->line_of_sight(p, ws_->cell_center(n))) consider(n);
    }
  return best;
}

GeodesicField build_geodesic_field(const Workspace& ws, const Eigen::Vector2d& goal,
                                   const CellSet& virtual_obstacles) {
  const auto goal_cell = ws.cell_of(goal);
  if (!goal_cell) throw GeodesicFieldError("goal outside the workspace grid");
  if (ws.cell_blocked(*goal_cell) ||
      std::binary_search(virtual_obstacles.begin(), virtual_obstacles.end(), *goal_cell))
    throw GeodesicFieldError("goal cell is blocked");
  std::vector<double> dist(ws.cell_count(), kInfiniteDistance);
  std::vector<std::uint8_t> excluded(ws.cell_count(), 0);
  for (int c : virtual_obstacles)
    if (c >= 0 && c < ws.cell_count()) excluded[c] = 1;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[*goal_cell] = 0.0;
  pq.emplace(0.0, *goal_cell);
  while (!pq.empty()) {
    const auto [d, c] = pq.top();
    pq.pop();
    if (d > dist[c]) continue;
    for (const auto& [n, w] : ws.neighbors(c)) {
      if (excluded[n]) continue;
      if (d + w < dist[n]) {
        dist[n] = d + w;
        pq.emplace(dist[n], n);
      }
    }
  }
  return GeodesicField(ws, *goal_cell, std::move(dist));
}

std::optional<int> nearest_free_cell(const Workspace& ws, const Eigen::Vector2d& p,
                                     const CellSet& excluded) {
  const Bounds& b = ws.bounds();
  const Eigen::Vector2d clamped(std::clamp(p.x(), b.xmin + 1e-9, b.xmax - 1e-9),
                                std::clamp(p.y(), b.ymin + 1e-9, b.ymax - 1e-9));
  const auto start = ws.cell_of(clamped);
  if (!start) return std::nullopt;
  auto usable = [&](int c) {
    return !ws.cell_blocked(c) && !std::binary_search(excluded.begin(), excluded.end(), c);
  };
  std::vector<std::uint8_t> seen(ws.cell_count(), 0);
  std::deque<int> queue{*start};
  seen[*start] = 1;
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    if (usable(c)) return c;
    const int ix = c % ws.nx(), iy = c / ws.nx();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = ix + dx, y = iy + dy;
        if (x < 0 || y < 0 || x >= ws.nx() || y >= ws.ny()) continue;
        const int n = y * ws.nx() + x;
        if (!seen[n]) {
          seen[n] = 1;
          queue.push_back(n);
        }
      }
  }
  return std::nullopt;
}

CellSet virtual_obstacles_for_transition(const Workspace& ws,
                                         std::span<const Eigen::Vector2d> means,
                                         std::span<const Eigen::Matrix2d> covs,
                                         const std::function<bool(Symbol)>& allowed,
                                         Symbol sigma, int robot,
                                         std::span<const AvoidanceCandidate> candidates,
                                         double epsilon) {
  CellSet out;
  for (const auto& cand : candidates) {
    if (cand.robot != robot || cand.atom < 0) continue;
    const Symbol bit = Symbol{1} << cand.atom;
    if (sigma & bit) continue;
    if (allowed(sigma | bit)) continue;
    for (int lm : cand.landmarks) {
      const auto cells = confidence_ellipse_cells(ws, means[lm], covs[lm], epsilon);
      out.insert(out.end(), cells.begin(), cells.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::shared_ptr<const GeodesicField> GeodesicFieldCache::get(const Workspace& ws, int goal_cell,
                                                             const CellSet& virtual_obstacles) {
  std::uint64_t key = mix(0, static_cast<std::uint64_t>(goal_cell));
  for (int c : virtual_obstacles) key = mix(key, static_cast<std::uint64_t>(c));
  key = mix(key, virtual_obstacles.size());
  {
    std::lock_guard lock(mu_);
    auto [lo, hi] = map_.equal_range(key);
    for (auto it = lo; it != hi; ++it)
      if (it->second.goal == goal_cell && it->second.obstacles == virtual_obstacles)
        return it->second.field;
  }
  auto field = std::make_shared<const GeodesicField>(
      build_geodesic_field(ws, ws.cell_center(goal_cell), virtual_obstacles));
  std::lock_guard lock(mu_);
  if (map_.size() >= capacity_) map_.clear();
  ++builds_;
  map_.emplace(key, Entry{goal_cell, virtual_obstacles, field});
  return field;
}

std::size_t GeodesicFieldCache::size() const {
  std::lock_guard lock(mu_);
  return map_.size();
}

}  // namespace semplan
