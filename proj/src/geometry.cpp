#include "mint/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mint/common.hpp"

namespace mint {

namespace {

constexpr double kEdgeEps = 1e-9;  // m, endpoint tie-break for reflections/blockers

double dot(const Point2D& a, const Point2D& b) { return a.x * b.x + a.y * b.y; }

Point2D sub(const Point2D& a, const Point2D& b) { return {a.x - b.x, a.y - b.y}; }

double cross(const Point2D& a, const Point2D& b) { return a.x * b.y - a.y * b.x; }

// Intersection of segment [p, p+r] with the infinite line through [q, q+s].
// Returns parameter t on the first segment, u on the wall line; false when
// parallel.
bool line_params(const Point2D& p, const Point2D& r, const Point2D& q,
                 const Point2D& s, double& t, double& u) {
  double denom = cross(r, s);
  if (std::abs(denom) < 1e-15) return false;
  Point2D qp = sub(q, p);
  t = cross(qp, s) / denom;
  u = cross(qp, r) / denom;
  return true;
}

// True when the open interior of leg [a, b] crosses segment w. Contact within
// kEdgeEps of either leg endpoint or either wall endpoint does not block.
bool leg_blocked_by(const Point2D& a, const Point2D& b, const WallSegment& w) {
  Point2D r = sub(b, a);
  Point2D s = sub(w.b, w.a);
  double leg_len = std::hypot(r.x, r.y);
  double wall_len = std::hypot(s.x, s.y);
  if (leg_len < kEdgeEps || wall_len < kEdgeEps) return false;

  double t, u;
  if (!line_params(a, r, w.a, s, t, u)) {
    // Parallel. Blocked only when collinear and overlapping beyond endpoints.
    if (std::abs(cross(sub(w.a, a), r)) / leg_len > kEdgeEps) return false;
    double ta = dot(sub(w.a, a), r) / (leg_len * leg_len);
    double tb = dot(sub(w.b, a), r) / (leg_len * leg_len);
    double lo = std::min(ta, tb), hi = std::max(ta, tb);
    double eps_t = kEdgeEps / leg_len;
    return std::min(hi, 1.0 - eps_t) - std::max(lo, eps_t) > eps_t;
  }

  double eps_t = kEdgeEps / leg_len;
  double eps_u = kEdgeEps / wall_len;
  return t > eps_t && t < 1.0 - eps_t && u > eps_u && u < 1.0 - eps_u;
}

bool leg_blocked(const Point2D& a, const Point2D& b, const FloorPlan& plan) {
  for (const auto& w : plan.walls)
    if (leg_blocked_by(a, b, w)) return true;
  for (const auto& o : plan.obstructions)
    if (leg_blocked_by(a, b, o)) return true;
  return false;
}

bool near(const Point2D& a, const Point2D& b, double tol) {
  return std::hypot(a.x - b.x, a.y - b.y) < tol;
}

}  // namespace

double distance(const Point2D& a, const Point2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

FloorPlan FloorPlan::without_obstructions() const {
  FloorPlan copy;
  copy.walls = walls;
  return copy;
}

Point2D mirror_point(const Point2D& p, const WallSegment& w) {
  Point2D d = sub(w.b, w.a);
  double len2 = dot(d, d);
  if (len2 < 1e-24)
    throw std::invalid_argument("mirror_point: degenerate wall segment");
  double t = dot(sub(p, w.a), d) / len2;
  Point2D foot{w.a.x + t * d.x, w.a.y + t * d.y};
  return {2.0 * foot.x - p.x, 2.0 * foot.y - p.y};
}

std::vector<VirtualAnchor> generate_vas(const FloorPlan& plan, const Point2D& bs,
                                        int bs_id, int max_order) {
  if (max_order < 0) throw std::invalid_argument("generate_vas: max_order < 0");

  std::vector<VirtualAnchor> out;
  out.push_back({0, bs_id, bs, 0, {}});

  std::size_t level_begin = 0;
  for (int order = 1; order <= max_order; ++order) {
    std::size_t level_end = out.size();
    for (std::size_t parent = level_begin; parent < level_end; ++parent) {
      for (std::size_t wi = 0; wi < plan.walls.size(); ++wi) {
        const auto& wall = plan.walls[wi];
        if (!wall.reflective) continue;
        const auto& pv = out[parent];
        if (!pv.mirror_walls.empty() &&
            pv.mirror_walls.back() == static_cast<int>(wi))
          continue;  // immediate repeat regenerates the parent
        Point2D pos = mirror_point(pv.position, wall);
        bool duplicate = false;
        for (const auto& existing : out) {
          if (near(existing.position, pos, 1e-9)) {
            duplicate = true;
            break;
          }
        }
        if (duplicate) continue;
        VirtualAnchor va;
        va.bs_id = bs_id;
        va.position = pos;
        va.order = order;
        va.mirror_walls = pv.mirror_walls;
        va.mirror_walls.push_back(static_cast<int>(wi));
        out.push_back(std::move(va));
      }
    }
    level_begin = level_end;
  }

  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
  return out;
}

std::optional<std::vector<Point2D>> unfold_path(const VirtualAnchor& va,
                                                const Point2D& p,
                                                const FloorPlan& plan) {
  const int k = va.order;
  if (k != static_cast<int>(va.mirror_walls.size()))
    throw std::invalid_argument("unfold_path: order/mirror_walls mismatch");
  for (int wi : va.mirror_walls)
    if (wi < 0 || wi >= static_cast<int>(plan.walls.size()))
      throw std::invalid_argument("unfold_path: wall index out of range");

  // Rebuild the image chain: images[j] is the j-fold mirror of the base
  // station; mirroring is an involution, so walk back from the anchor.
  std::vector<Point2D> images(static_cast<std::size_t>(k) + 1);
  images[k] = va.position;
  for (int j = k; j >= 1; --j)
    images[j - 1] = mirror_point(images[j], plan.walls[va.mirror_walls[j - 1]]);

  // Reflection points, traced from the agent side.
  std::vector<Point2D> path(static_cast<std::size_t>(k) + 2);
  path[0] = images[0];
  path[k + 1] = p;
  for (int j = k; j >= 1; --j) {
    const WallSegment& wall = plan.walls[va.mirror_walls[j - 1]];
    Point2D seg_dir = sub(path[j + 1], images[j]);
    Point2D wall_dir = sub(wall.b, wall.a);
    double t, u;
    if (!line_params(images[j], seg_dir, wall.a, wall_dir, t, u))
      return std::nullopt;
    if (t <= 1e-12 || t >= 1.0 - 1e-12) return std::nullopt;
    Point2D x{images[j].x + t * seg_dir.x, images[j].y + t * seg_dir.y};
    // Strictly inside the finite segment; endpoint contact counts as blocked.
    if (near(x, wall.a, kEdgeEps) || near(x, wall.b, kEdgeEps)) return std::nullopt;
    if (u <= 0.0 || u >= 1.0) return std::nullopt;
    path[j] = x;
  }

  for (int j = 0; j <= k; ++j)
    if (leg_blocked(path[j], path[j + 1], plan)) return std::nullopt;

  return path;
}

bool is_visible(const VirtualAnchor& va, const Point2D& p, const FloorPlan& plan) {
  return unfold_path(va, p, plan).has_value();
}

bool segment_blocked(const Point2D& a, const Point2D& b,
                     const std::vector<WallSegment>& blockers) {
  for (const auto& w : blockers)
    if (leg_blocked_by(a, b, w)) return true;
  return false;
}

VisibleSet expected_visible_set(const Point2D& p, int position_index,
                                const std::vector<VirtualAnchor>& all_vas,
                                const FloorPlan& plan) {
  VisibleSet vs;
  vs.position_index = position_index;
  vs.bs_id = all_vas.empty() ? -1 : all_vas.front().bs_id;
  for (const auto& va : all_vas) {
    if (!is_visible(va, p, plan)) continue;
    double d = distance(va.position, p);
    double angle = d < 1e-12 ? 0.0 : std::atan2(p.y - va.position.y, p.x - va.position.x);
    if (angle >= kPi) angle -= 2.0 * kPi;  // atan2 returns +pi for the -x axis
    vs.vas.push_back(va);
    vs.distances.push_back(d);
    vs.angles.push_back(angle);
  }
  return vs;
}

PlanFile load_floor_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open floor plan file: " + path);

  PlanFile pf;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;

    auto fail = [&](const std::string& what) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
    };

    if (kind == "wall") {
      double x1, y1, x2, y2;
      int refl;
      if (!(ss >> x1 >> y1 >> x2 >> y2 >> refl)) fail("expected: wall x1 y1 x2 y2 reflective");
      pf.plan.walls.push_back({{x1, y1}, {x2, y2}, refl != 0});
    } else if (kind == "obstruction") {
      double x1, y1, x2, y2;
      if (!(ss >> x1 >> y1 >> x2 >> y2)) fail("expected: obstruction x1 y1 x2 y2");
      pf.plan.obstructions.push_back({{x1, y1}, {x2, y2}, false});
    } else if (kind == "bs") {
      double x, y;
      if (!(ss >> x >> y)) fail("expected: bs x y");
      pf.base_stations.push_back({x, y});
    } else {
      fail("unknown record '" + kind + "'");
    }
  }
  return pf;
}

}  // namespace mint
