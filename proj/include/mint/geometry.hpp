#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mint {

struct Point2D {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point2D& a, const Point2D& b);

// Finite wall segment. Non-reflective walls block paths but never spawn
// virtual anchors.
struct WallSegment {
  Point2D a;
  Point2D b;
  bool reflective = true;
};

struct FloorPlan {
  std::vector<WallSegment> walls;
  std::vector<WallSegment> obstructions;  // blocking-only, never mirrored

  FloorPlan without_obstructions() const;
};

// Mirror image of a base station across an ordered wall sequence.
// order == mirror_walls.size(); order 0 is the physical base station.
struct VirtualAnchor {
  int id = 0;
  int bs_id = 0;
  Point2D position;
  int order = 0;
  std::vector<int> mirror_walls;  // indices into FloorPlan::walls
};

// Visible anchors at one trajectory position with their expected path
// distances and arrival angles (angle of the vector position - anchor).
struct VisibleSet {
  int position_index = 0;
  int bs_id = 0;
  std::vector<VirtualAnchor> vas;
  std::vector<double> distances;  // m
  std::vector<double> angles;     // rad, in [-pi, pi)
};

// Reflects p across the infinite line through w. Throws std::invalid_argument
// for a degenerate (zero-length) wall.
Point2D mirror_point(const Point2D& p, const WallSegment& w);

// Image-source enumeration up to max_order. Order-k anchors mirror order-(k-1)
// anchors across every reflective wall except the one used in the immediately
// preceding step. Positions closer than 1e-9 m are deduplicated, keeping the
// lowest order. The order-0 physical base station is always element 0.
std::vector<VirtualAnchor> generate_vas(const FloorPlan& plan, const Point2D& bs,
                                        int bs_id, int max_order);

// Traces the geometric path base station -> reflection points -> p for the
// anchor's mirror-wall sequence. Returns the polyline [bs, x_1, ..., x_k, p]
// when every reflection point lies strictly inside its wall segment (1e-9 m
// from the endpoints) and no leg is blocked by another wall or obstruction;
// std::nullopt otherwise.
std::optional<std::vector<Point2D>> unfold_path(const VirtualAnchor& va,
                                                const Point2D& p,
                                                const FloorPlan& plan);

bool is_visible(const VirtualAnchor& va, const Point2D& p, const FloorPlan& plan);

// True when the open interior of segment [a, b] crosses any blocker; contact
// within 1e-9 m of a segment or blocker endpoint does not block.
bool segment_blocked(const Point2D& a, const Point2D& b,
                     const std::vector<WallSegment>& blockers);

// Filters all_vas by visibility at p and fills distances and angles.
// When p coincides with an anchor the distance is 0 and the angle 0 by
// convention.
VisibleSet expected_visible_set(const Point2D& p, int position_index,
                                const std::vector<VirtualAnchor>& all_vas,
                                const FloorPlan& plan);

// Plain-text floor plan file:
//   wall x1 y1 x2 y2 reflective(0|1)
//   obstruction x1 y1 x2 y2
//   bs x y
// '#' starts a comment, values in meters.
struct PlanFile {
  FloorPlan plan;
  std::vector<Point2D> base_stations;
};

PlanFile load_floor_plan(const std::string& path);

}  // namespace mint
