#include <doctest.h>

#include <cmath>

#include "zdtl/geometry.hpp"

using namespace zdtl;
using namespace zdtl::geom;

TEST_CASE("clip a box down to a triangle") {
  std::vector<Halfspace> hs{{RealVector{-1.0, 0.0}, 0.0},
                            {RealVector{0.0, -1.0}, 0.0},
                            {RealVector{1.0, 1.0}, 1.0}};
  bool touches = true;
  auto r = ConvexRegion::clip(2, hs, RealVector{0.0, 0.0}, 10.0, &touches);
  CHECK_FALSE(touches);
  CHECK(r.vertices().size() == 3);
  CHECK(r.volume() == doctest::Approx(0.5));
  CHECK(r.contains(RealVector{0.2, 0.2}));
  CHECK_FALSE(r.contains(RealVector{0.8, 0.8}));
  CHECK(r.dist_to_boundary(RealVector{0.25, 0.25}) == doctest::Approx(0.25));
  CHECK(r.support(RealVector{1.0, 0.0}) == doctest::Approx(1.0));

  auto open = ConvexRegion::clip(2, {hs[0]}, RealVector{0.0, 0.0}, 10.0, &touches);
  CHECK(touches);
  CHECK_FALSE(open.empty());
}

TEST_CASE("intervals") {
  std::vector<Halfspace> hs{{RealVector{1.0}, 8.0}, {RealVector{-2.0}, -4.0}};
  auto r = ConvexRegion::clip(1, hs, RealVector{5.0}, 100.0);
  CHECK(r.lo() == doctest::Approx(2.0));
  CHECK(r.hi() == doctest::Approx(8.0));
  CHECK(r.dist_to_boundary(RealVector{5.0}) == doctest::Approx(3.0));
  CHECK(r.dist_to_boundary(RealVector{9.5}) == doctest::Approx(1.5));
  CHECK(r.volume() == doctest::Approx(6.0));
}

TEST_CASE("hausdorff estimate via support functions") {
  auto a = ConvexRegion::interval(0, 5);
  auto b = ConvexRegion::interval(0.5, 5.5);
  CHECK(hausdorff_estimate(a, a, 8) == 0.0);
  CHECK(hausdorff_estimate(a, b, 8) == doctest::Approx(0.5));

  auto sq = ConvexRegion::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  RealVector v{0.3, -0.4};
  const int k = 64;
  double h = hausdorff_estimate(sq, sq.translated(v), k);
  CHECK(h <= 0.5 + 1e-12);
  CHECK(h >= 0.5 * (1.0 - 2.0 * M_PI / k));
}

TEST_CASE("convex hull and degenerate inputs") {
  auto hull = convex_hull({{0, 0}, {2, 0}, {1, 1}, {1, 0.2}, {2, 2}, {0, 2}});
  CHECK(hull.size() == 4);
  auto seg = convex_hull({{0, 0}, {1, 1}, {2, 2}});
  CHECK(seg.size() == 2);
  auto region = ConvexRegion::polygon(seg);
  CHECK(region.dist_to_boundary(RealVector{1.0, 0.0}) == doctest::Approx(std::sqrt(0.5)));
  CHECK_FALSE(region.has_interior());
}
