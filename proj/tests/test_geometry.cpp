#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "mint/geometry.hpp"
#include "test_util.hpp"

using namespace mint;

namespace {

FloorPlan square_room(double side = 5.0) {
  FloorPlan plan;
  plan.walls = {
      {{0.0, 0.0}, {side, 0.0}, true},
      {{side, 0.0}, {side, side}, true},
      {{side, side}, {0.0, side}, true},
      {{0.0, side}, {0.0, 0.0}, true},
  };
  return plan;
}

}  // namespace

TEST_CASE("mirror_point basic reflections") {
  WallSegment x_axis{{0.0, 0.0}, {5.0, 0.0}, true};
  Point2D m = mirror_point({1.0, 1.0}, x_axis);
  CHECK(m.x == doctest::Approx(1.0));
  CHECK(m.y == doctest::Approx(-1.0));

  Point2D on_line = mirror_point({3.0, 0.0}, x_axis);
  CHECK(on_line.x == doctest::Approx(3.0));
  CHECK(on_line.y == doctest::Approx(0.0).epsilon(1e-12));

  WallSegment diag{{0.0, 0.0}, {4.0, 4.0}, true};
  Point2D d = mirror_point({2.0, 3.0}, diag);
  Point2D oracle = testutil::reflect_line_oracle({2.0, 3.0}, diag.a, diag.b);
  CHECK(d.x == doctest::Approx(3.0));
  CHECK(d.y == doctest::Approx(2.0));
  CHECK(distance(d, oracle) < 1e-12);
}

TEST_CASE("mirror_point rejects degenerate walls") {
  WallSegment degenerate{{1.0, 1.0}, {1.0, 1.0}, true};
  CHECK_THROWS_AS(mirror_point({0.0, 0.0}, degenerate), std::invalid_argument);
}

TEST_CASE("mirror_point involution") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    Point2D p{coord(rng), coord(rng)};
    WallSegment w;
    do {
      w.a = {coord(rng), coord(rng)};
      w.b = {coord(rng), coord(rng)};
    } while (distance(w.a, w.b) < 1e-3);
    Point2D twice = mirror_point(mirror_point(p, w), w);
    CHECK(distance(twice, p) < 1e-12 * std::max(1.0, std::abs(p.x) + std::abs(p.y)));
  }
}

TEST_CASE("generate_vas square room first order") {
  FloorPlan plan = square_room();
  auto vas = generate_vas(plan, {1.0, 1.0}, 0, 1);
  std::vector<Point2D> positions;
  for (const auto& va : vas) positions.push_back(va.position);
  CHECK(testutil::same_positions(
      positions, {{1, 1}, {1, -1}, {9, 1}, {1, 9}, {-1, 1}}));
  CHECK(vas.front().order == 0);
  CHECK(vas.front().mirror_walls.empty());
}

TEST_CASE("generate_vas base cases") {
  FloorPlan plan = square_room();
  auto only_bs = generate_vas(plan, {2.0, 3.0}, 0, 0);
  REQUIRE(only_bs.size() == 1);
  CHECK(only_bs[0].order == 0);

  FloorPlan empty;
  auto no_walls = generate_vas(empty, {2.0, 3.0}, 0, 2);
  CHECK(no_walls.size() == 1);
}

TEST_CASE("generate_vas order two matches enumeration oracle") {
  FloorPlan plan = square_room();
  auto vas = generate_vas(plan, {1.0, 1.0}, 0, 2);
  std::vector<Point2D> positions;
  for (const auto& va : vas) positions.push_back(va.position);
  auto oracle = testutil::enumerate_va_positions_oracle(plan, {1.0, 1.0}, 2);
  CHECK(testutil::same_positions(positions, oracle));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(1.0, 9.0);
  for (int trial = 0; trial < 20; ++trial) {
    FloorPlan random = testutil::random_plan(rng);
    Point2D bs{coord(rng), coord(rng)};
    auto got = generate_vas(random, bs, 0, 2);
    std::vector<Point2D> got_pos;
    for (const auto& va : got) got_pos.push_back(va.position);
    auto want = testutil::enumerate_va_positions_oracle(random, bs, 2);
    CHECK(testutil::same_positions(got_pos, want));
  }
}

TEST_CASE("is_visible line of sight") {
  FloorPlan plan = square_room();
  auto vas = generate_vas(plan, {1.0, 1.0}, 0, 0);
  CHECK(is_visible(vas[0], {4.0, 4.0}, plan));

  FloorPlan blocked = plan;
  blocked.obstructions.push_back({{2.0, 3.0}, {3.0, 2.0}, false});
  CHECK_FALSE(is_visible(vas[0], {4.0, 4.0}, blocked));
}

TEST_CASE("is_visible first-order anchors in a convex room") {
  FloorPlan plan = square_room();
  auto vas = generate_vas(plan, {1.0, 1.0}, 0, 1);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(0.2, 4.8);
  for (int trial = 0; trial < 50; ++trial) {
    Point2D p{coord(rng), coord(rng)};
    for (const auto& va : vas) CHECK(is_visible(va, p, plan));
  }
}

TEST_CASE("reflection point at a wall endpoint is not visible") {
  FloorPlan plan;
  plan.walls = {{{0.0, 0.0}, {2.0, 0.0}, true}};
  auto vas = generate_vas(plan, {1.0, 1.0}, 0, 1);
  REQUIRE(vas.size() == 2);
  const auto& va = vas[1];
  // Reflection point of (3, 1) lands exactly on the endpoint (2, 0).
  CHECK_FALSE(is_visible(va, {3.0, 1.0}, plan));
  // Slightly inside the segment it is visible.
  CHECK(is_visible(va, {2.5, 1.0}, plan));
}

TEST_CASE("unfold_path preserves the mirror distance") {
  FloorPlan plan = square_room();
  auto vas = generate_vas(plan, {1.0, 1.0}, 0, 2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(0.3, 4.7);
  for (int trial = 0; trial < 30; ++trial) {
    Point2D p{coord(rng), coord(rng)};
    for (const auto& va : vas) {
      auto path = unfold_path(va, p, plan);
      if (!path) continue;
      double legs = 0.0;
      for (std::size_t j = 0; j + 1 < path->size(); ++j)
        legs += distance((*path)[j], (*path)[j + 1]);
      CHECK(std::abs(legs - distance(va.position, p)) < 1e-9);
    }
  }
}

TEST_CASE("adding an obstruction never reveals an anchor") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> coord(1.0, 9.0);
  for (int trial = 0; trial < 25; ++trial) {
    FloorPlan plan = testutil::random_plan(rng, 5);
    Point2D bs{coord(rng), coord(rng)};
    Point2D p{coord(rng), coord(rng)};
    auto vas = generate_vas(plan, bs, 0, 2);

    FloorPlan more = plan;
    more.obstructions.push_back(
        {{coord(rng), coord(rng)}, {coord(rng), coord(rng)}, false});
    for (const auto& va : vas) {
      bool before = is_visible(va, p, plan);
      bool after = is_visible(va, p, more);
      if (after) CHECK(before);
    }
  }
}

TEST_CASE("expected_visible_set in an empty square room") {
  FloorPlan plan = square_room();
  auto vas = generate_vas(plan, {1.0, 1.0}, 0, 1);
  VisibleSet vs = expected_visible_set({4.0, 4.0}, 17, vas, plan);
  CHECK(vs.position_index == 17);
  CHECK(vs.vas.size() == 5);
  REQUIRE(vs.distances.size() == vs.vas.size());
  REQUIRE(vs.angles.size() == vs.vas.size());
  for (std::size_t j = 0; j < vs.vas.size(); ++j) {
    CHECK(vs.distances[j] == doctest::Approx(distance(vs.vas[j].position, {4.0, 4.0})));
    CHECK(vs.angles[j] >= -3.1416);
    CHECK(vs.angles[j] < 3.1416);
  }
}

TEST_CASE("expected_visible_set degenerate position") {
  FloorPlan plan = square_room();
  auto vas = generate_vas(plan, {1.0, 1.0}, 0, 0);
  VisibleSet vs = expected_visible_set({1.0, 1.0}, 0, vas, plan);
  REQUIRE(vs.vas.size() == 1);
  CHECK(vs.distances[0] == doctest::Approx(0.0));
  CHECK(vs.angles[0] == doctest::Approx(0.0));
}

TEST_CASE("expected_visible_set excludes only the blocked direct path") {
  FloorPlan plan = square_room();
  // Tiny diagonal blocker across the midpoint of the (1,1)-(4,4) direct path.
  plan.obstructions.push_back({{2.4, 2.6}, {2.6, 2.4}, false});
  auto vas = generate_vas(plan, {1.0, 1.0}, 0, 1);
  VisibleSet vs = expected_visible_set({4.0, 4.0}, 0, vas, plan);
  CHECK(vs.vas.size() == 4);
  for (const auto& va : vs.vas) CHECK(va.order == 1);
}

TEST_CASE("floor plan file round trip") {
  std::string path = "test_plan_tmp.txt";
  {
    std::ofstream out(path);
    out << "# comment line\n";
    out << "wall 0 0 20 0 1\n";
    out << "wall 20 0 20 8 0\n";
    out << "obstruction 9 3 11 5\n";
    out << "bs 1.5 2.5\n";
  }
  PlanFile pf = load_floor_plan(path);
  REQUIRE(pf.plan.walls.size() == 2);
  CHECK(pf.plan.walls[0].reflective);
  CHECK_FALSE(pf.plan.walls[1].reflective);
  REQUIRE(pf.plan.obstructions.size() == 1);
  REQUIRE(pf.base_stations.size() == 1);
  CHECK(pf.base_stations[0].x == doctest::Approx(1.5));
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_floor_plan("does_not_exist.txt"), std::runtime_error);
}
