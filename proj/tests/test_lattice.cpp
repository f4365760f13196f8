#include "membrane/lattice.hpp"

#include <algorithm>

#include "doctest.h"
#include "membrane/rng.hpp"

using namespace membrane;

namespace {

// Independent oracle: enumerate the l1 ball by scanning the bounding cube.
int brute_ball_size(int d, int k) {
  int count = 0;
  std::vector<int> c(d, -k);
  for (;;) {
    int64_t norm = 0;
    for (int v : c) norm += std::abs(v);
    if (norm <= k) ++count;
    int axis = d - 1;
    while (axis >= 0 && c[axis] == k) c[axis--] = -k;
    if (axis < 0) break;
    ++c[axis];
  }
  return count;
}

Region random_subregion(const Region& base, double keep, RngStream& rng) {
  std::vector<Point> pts;
  for (const auto& p : base)
    if (rng.uniform() < keep) pts.push_back(p);
  return Region(base.dim(), std::move(pts));
}

}  // namespace

TEST_CASE("box_sites basics") {
  const Region r1 = box_sites(1, 2);
  REQUIRE(r1.size() == 3);
  CHECK(r1.site(0) == Point{-1});
  CHECK(r1.site(1) == Point{0});
  CHECK(r1.site(2) == Point{1});

  CHECK(box_sites(2, 2).size() == 9);
  CHECK(box_sites(4, 4).size() == 625);

  // Lexicographic order.
  const Region r2 = box_sites(2, 2);
  CHECK(r2.site(0) == Point{-1, -1});
  CHECK(r2.site(1) == Point{-1, 0});
  CHECK(r2.site(8) == Point{1, 1});

  CHECK_THROWS_AS(box_sites(2, 3), std::invalid_argument);
  CHECK_THROWS_AS(Box(2, -2), std::invalid_argument);
}

TEST_CASE("outer_boundary2") {
  const Region b1 = outer_boundary2(Box(1, 2));
  REQUIRE(b1.size() == 4);
  CHECK(b1.contains(Point{-3}));
  CHECK(b1.contains(Point{-2}));
  CHECK(b1.contains(Point{2}));
  CHECK(b1.contains(Point{3}));

  // d=2, N=0: l1 ball of radius 2 around the origin minus the origin.
  CHECK(outer_boundary2(Box(2, 0)).size() == 12);

  const Box box(2, 4);
  const Region v = box_sites(box);
  const Region bd = outer_boundary2(box);
  CHECK(bd.set_intersection(v).empty());
  for (const auto& p : bd) {
    int64_t best = 1000;
    for (const auto& q : v) best = std::min(best, p.l1_dist(q));
    CHECK(best <= 2);
  }
}

TEST_CASE("ball") {
  CHECK(ball(Point{0, 0}, 1).size() == 5);
  CHECK(ball(Point{0, 0}, 0).size() == 1);
  CHECK(ball(Point{0, 0, 0}, 2).size() == 25);
  for (int d = 1; d <= 4; ++d)
    for (int k = 0; k <= 3; ++k) CHECK(ball(Point::zero(d), k).size() == brute_ball_size(d, k));
  // Off-center ball is a translate.
  CHECK(ball(Point{3, -2}, 2).size() == ball(Point{0, 0}, 2).size());
}

TEST_CASE("annulus_D") {
  const Point c = Point::zero(2);
  // l = 0 is the outermost shell plus rim: B_{k+1} minus B_k.
  CHECK(annulus_D(c, 7, 0).size() == ball(c, 8).size() - ball(c, 7).size());
  // k multiple of 5, l = k/5 reaches B_0.
  CHECK(annulus_D(c, 5, 1).size() == ball(c, 6).size() - 1);
  // d=1, k=5, l=1: {-6..6} minus {0}.
  CHECK(annulus_D(Point{0}, 5, 1).size() == 12);
  CHECK_THROWS_AS(annulus_D(c, 7, 2), std::invalid_argument);
  CHECK_THROWS_AS(annulus_D(c, 7, -1), std::invalid_argument);
}

TEST_CASE("annulus decomposition (disjoint union)") {
  const Point c = Point::zero(2);
  const int k = 12;
  for (int l = 0; l + 1 <= k / 5; ++l) {
    const Region d_l = annulus_D(c, k, l);
    const Region d_l1 = annulus_D(c, k, l + 1);
    const Region shell = ball(c, k - 5 * l).set_difference(ball(c, k - 5 * (l + 1)));
    CHECK(d_l.set_intersection(shell).empty());
    const Region u = d_l.set_union(shell);
    CHECK(u.size() == d_l1.size());
    CHECK(u.set_difference(d_l1).empty());
    CHECK(d_l1.size() > d_l.size());
  }
}

TEST_CASE("cluster_interior") {
  CHECK(cluster_interior(Region(1, {Point{0}, Point{1}, Point{2}})).sites() ==
        std::vector<Point>{Point{1}});
  CHECK(cluster_interior(Region(2, {Point{0, 0}})).empty());

  std::vector<Point> square;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) square.push_back(Point{i, j});
  const Region inner = cluster_interior(Region(2, square));
  REQUIRE(inner.size() == 1);
  CHECK(inner.site(0) == Point{0, 0});
}

TEST_CASE("cluster_interior is monotone") {
  auto rng = RngStream::substream(7, "interior");
  const Region base = box_sites(2, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const Region a1 = random_subregion(base, 0.4, rng);
    const Region a2 = a1.set_union(random_subregion(base, 0.2, rng));
    CHECK(cluster_interior(a1).set_difference(cluster_interior(a2)).empty());
  }
}

TEST_CASE("graph_distance") {
  std::vector<Point> seg;
  for (int i = 0; i <= 9; ++i) seg.push_back(Point{i});
  const Region e(1, seg);
  CHECK(graph_distance(e, Point{0}, Region(1, {Point{5}})) == 5);
  CHECK(graph_distance(e, Point{5}, Region(1, {Point{5}})) == 0);

  // Two disjoint components.
  const Region split(1, {Point{0}, Point{1}, Point{5}, Point{6}});
  CHECK(!graph_distance(split, Point{0}, Region(1, {Point{5}})).has_value());

  CHECK_THROWS_AS(graph_distance(e, Point{77}, Region(1, {Point{5}})), std::invalid_argument);
}

TEST_CASE("graph_distance triangle inequality") {
  const Region e = box_sites(2, 6);
  auto rng = RngStream::substream(11, "triangle");
  for (int trial = 0; trial < 50; ++trial) {
    const Point a = e.site(static_cast<int>(rng.below(e.size())));
    const Point b = e.site(static_cast<int>(rng.below(e.size())));
    const Point c = e.site(static_cast<int>(rng.below(e.size())));
    const auto dab = graph_distance(e, a, Region(2, {b}));
    const auto dbc = graph_distance(e, b, Region(2, {c}));
    const auto dac = graph_distance(e, a, Region(2, {c}));
    REQUIRE(dab.has_value());
    REQUIRE(dbc.has_value());
    REQUIRE(dac.has_value());
    CHECK(*dac <= *dab + *dbc);
  }
}

TEST_CASE("max_distance_to_interior") {
  std::vector<Point> seg;
  for (int i = 0; i <= 4; ++i) seg.push_back(Point{i});
  const Region e(1, seg);
  const Region a(1, {Point{0}, Point{1}, Point{2}});
  CHECK(max_distance_to_interior(e, a) == 3);  // A-hat = {1}, farthest site is 4

  // A covering E with full neighborhoods: distance 0 everywhere.
  std::vector<Point> fat;
  for (int i = -1; i <= 5; ++i) fat.push_back(Point{i});
  CHECK(max_distance_to_interior(e, Region(1, fat)) == 0);

  CHECK(!max_distance_to_interior(e, Region(1, {})).has_value());
  // Singleton pinned cluster has empty interior.
  CHECK(!max_distance_to_interior(e, Region(1, {Point{2}})).has_value());
}

TEST_CASE("ball nesting") {
  for (int k = 0; k < 5; ++k) {
    const Region small = ball(Point::zero(3), k);
    const Region big = ball(Point::zero(3), k + 1);
    CHECK(small.set_difference(big).empty());
    CHECK(big.size() > small.size());
  }
}

TEST_CASE("region hashing and index map") {
  const Region r = box_sites(2, 4);
  for (int i = 0; i < r.size(); ++i) CHECK(r.index_of(r.site(i)) == i);
  CHECK(!r.index_of(Point{99, 99}).has_value());
  const Region r2 = box_sites(2, 4);
  CHECK(r.content_hash() == r2.content_hash());
  CHECK(r.content_hash() != box_sites(2, 6).content_hash());
}
