// Known geometry: bounds, convex obstacles, an occupancy grid, and geodesic
// distance fields on that grid.

#pragma once

#include <Eigen/Core>
#include <functional>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "semplan/dfa.hpp"

namespace semplan {

struct Bounds {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 10.0;
  double ymax = 10.0;
};

/// Convex polygon, vertices in either winding order.
struct Polygon {
  std::vector<Eigen::Vector2d> vertices;

  /// Closed containment: boundary points count as inside.
  bool contains(const Eigen::Vector2d& p) const;
  bool intersects_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;
};

/// Sorted linear cell indices.
using CellSet = std::vector<int>;

class Workspace {
 public:
  Workspace() : Workspace(Bounds{}, {}, 0.25) {}
  Workspace(Bounds bounds, std::vector<Polygon> obstacles, double resolution = 0.25);

  const Bounds& bounds() const { return bounds_; }
  const std::vector<Polygon>& obstacles() const { return obstacles_; }
  double resolution() const { return resolution_; }

  /// Strictly inside the bounds and outside every obstacle.
  bool is_free(const Eigen::Vector2d& p) const;
  bool segment_free(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;
  /// Line of sight ignores the bounds and only tests obstacles.
  bool line_of_sight(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int cell_count() const { return nx_ * ny_; }
  /// Cell containing p, nullopt outside the grid.
  std::optional<int> cell_of(const Eigen::Vector2d& p) const;
  Eigen::Vector2d cell_center(int cell) const;
  /// A cell is blocked when its center is not free.
  bool cell_blocked(int cell) const { return blocked_[cell] != 0; }
  /// Grid-graph neighbours of a free cell (8-connected, no corner cutting).
  std::vector<std::pair<int, double>> neighbors(int cell) const;

 private:
  Bounds bounds_;
  std::vector<Polygon> obstacles_;
  double resolution_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::uint8_t> blocked_;
};

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

/// Quantile of the chi-square distribution with two degrees of freedom.
double chi_square2_quantile(double p);

/// Cells whose centers lie in the epsilon-confidence ellipse of N(mean, cov);
/// the cell holding the mean is always included.
CellSet confidence_ellipse_cells(const Workspace& ws, const Eigen::Vector2d& mean,
                                 const Eigen::Matrix2d& cov, double epsilon);

class GeodesicField {
 public:
  GeodesicField(const Workspace& ws, int goal_cell, std::vector<double> dist)
      : ws_(&ws), goal_(goal_cell), dist_(std::move(dist)) {}

  int goal_cell() const { return goal_; }
  double at(int cell) const { return dist_[cell]; }
  const std::vector<double>& values() const { return dist_; }

  /// Distance from an arbitrary point: best of the point's cell and its grid
  /// neighbours, plus the straight offset to that cell's center.
  double distance_from(const Eigen::Vector2d& p) const;

 private:
  const Workspace* ws_;
  int goal_;
  std::vector<double> dist_;
};

class GeodesicFieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dijkstra on the free grid with virtual-obstacle cells removed. Throws when
/// the goal cell is blocked or outside the grid.
GeodesicField build_geodesic_field(const Workspace& ws, const Eigen::Vector2d& goal,
                                   const CellSet& virtual_obstacles);

/// Nearest free grid cell to p (breadth-first over the grid), or nullopt.
std::optional<int> nearest_free_cell(const Workspace& ws, const Eigen::Vector2d& p,
                                     const CellSet& excluded = {});

/// Atom that, if it became true for `robot`, is a candidate virtual obstacle
/// at each of `landmarks`.
struct AvoidanceCandidate {
  int atom = -1;
  int robot = -1;
  std::vector<int> landmarks;
};

/// Union of confidence ellipses of landmarks whose atom (for this robot)
/// turns `sigma` into a symbol that `allowed` rejects.
CellSet virtual_obstacles_for_transition(const Workspace& ws,
                                         std::span<const Eigen::Vector2d> means,
                                         std::span<const Eigen::Matrix2d> covs,
                                         const std::function<bool(Symbol)>& allowed,
                                         Symbol sigma, int robot,
                                         std::span<const AvoidanceCandidate> candidates,
                                         double epsilon);

/// Shares fields across planner extensions, keyed by goal cell and
/// obstacle set. Insertion is serialized.
class GeodesicFieldCache {
 public:
  explicit GeodesicFieldCache(std::size_t capacity = 4096) : capacity_(capacity) {}

  std::shared_ptr<const GeodesicField> get(const Workspace& ws, int goal_cell,
                                           const CellSet& virtual_obstacles);
  std::size_t size() const;
  std::size_t builds() const { return builds_; }

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  struct Entry {
    int goal;
    CellSet obstacles;
    std::shared_ptr<const GeodesicField> field;
  };
  std::unordered_multimap<std::uint64_t, Entry> map_;
  std::size_t builds_ = 0;
};

}  // namespace semplan
