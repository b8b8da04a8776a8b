#pragma once

// Convex regions of R^1 and R^2 cut out by halfspaces: clipping, membership,
// boundary distance and support functions.

#include <array>
#include <vector>

#include "zdtl/core.hpp"

namespace zdtl::geom {

/// {a : normal . a <= offset}
struct Halfspace {
  RealVector normal;
  double offset = 0;
};

/// Signed distance from p to the bounding hyperplane, positive inside.
double slack(const Halfspace& h, const RealVector& p);

using Point2 = std::array<double, 2>;

/// A bounded convex set in dimension 1 (an interval) or 2 (a polygon with
/// counterclockwise vertices). Degenerate polygons keep their collinear or
/// coincident vertices and are treated as segments or points.
class ConvexRegion {
 public:
  ConvexRegion() = default;

  static ConvexRegion interval(double lo, double hi);
  static ConvexRegion polygon(std::vector<Point2> ccw_vertices);

  /// Clip the box of half-width `half_width` around `center` by every
  /// halfspace. `touches_box` reports that the result reaches the box, i.e.
  /// the halfspaces may not bound a region inside it.
  static ConvexRegion clip(std::size_t dim, const std::vector<Halfspace>& halfspaces,
                           const RealVector& center, double half_width, bool* touches_box = nullptr);

  std::size_t dim() const { return dim_; }
  bool empty() const { return empty_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<Point2>& vertices() const { return poly_; }

  /// Length (d=1) or area (d=2).
  double volume() const;
  bool contains(const RealVector& p, double tol = 0.0) const;
  /// Distance from p to the boundary, from inside or outside.
  double dist_to_boundary(const RealVector& p) const;
  /// Point of the boundary closest to p.
  RealVector nearest_boundary_point(const RealVector& p) const;
  /// Distance from p to the region (0 inside).
  double dist_to_region(const RealVector& p) const;
  /// max over the region of u . a
  double support(const RealVector& u) const;
  RealVector centroid() const;
  /// Largest |v - p| over vertices v.
  double max_distance_from(const RealVector& p) const;
  bool has_interior(double tol = kGeoTol) const;

  ConvexRegion translated(const RealVector& v) const;

 private:
  std::size_t dim_ = 0;
  bool empty_ = true;
  double lo_ = 0, hi_ = 0;
  std::vector<Point2> poly_;
};

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);

/// Andrew's monotone chain; collinear input returns the two extreme points.
std::vector<Point2> convex_hull(std::vector<Point2> pts);

/// Polygon clipped to {normal . a <= offset}.
std::vector<Point2> clip_polygon(const std::vector<Point2>& poly, const Point2& normal, double offset);

/// max over `count` evenly spread directions of |h_A(u) - h_B(u)|.
double hausdorff_estimate(const ConvexRegion& a, const ConvexRegion& b, int direction_count);

}  // namespace zdtl::geom
