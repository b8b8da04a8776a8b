#include "zdtl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zdtl::geom {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

Point2 to_point(const RealVector& p) {
  if (p.size() != 2) throw std::invalid_argument("expected a point of R^2");
  return {p[0], p[1]};
}

double signed_area(const std::vector<Point2>& poly) {
  double a = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

}  // namespace

double slack(const Halfspace& h, const RealVector& p) {
  return (h.offset - h.normal.dot(p)) / h.normal.norm();
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = 0;
  if (len2 > 0) t = std::clamp(((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2, 0.0, 1.0);
  const double ex = a[0] + t * dx - p[0], ey = a[1] + t * dy - p[1];
  return std::sqrt(ex * ex + ey * ey);
}

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<Point2> clip_polygon(const std::vector<Point2>& poly, const Point2& normal,
                                 double offset) {
  std::vector<Point2> out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  auto value = [&](const Point2& p) { return normal[0] * p[0] + normal[1] * p[1] - offset; };
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % n];
    const double vp = value(p), vq = value(q);
    if (vp <= 0) out.push_back(p);
    if ((vp < 0 && vq > 0) || (vp > 0 && vq < 0)) {
      const double t = vp / (vp - vq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  return out;
}

ConvexRegion ConvexRegion::interval(double lo, double hi) {
  ConvexRegion r;
  r.dim_ = 1;
  r.lo_ = lo;
  r.hi_ = hi;
  r.empty_ = !(lo <= hi);
  return r;
}

ConvexRegion ConvexRegion::polygon(std::vector<Point2> ccw_vertices) {
  ConvexRegion r;
  r.dim_ = 2;
  r.poly_ = std::move(ccw_vertices);
  r.empty_ = r.poly_.empty();
  return r;
}

ConvexRegion ConvexRegion::clip(std::size_t dim, const std::vector<Halfspace>& halfspaces,
                                const RealVector& center, double half_width, bool* touches_box) {
  if (center.size() != dim) throw std::invalid_argument("clip center dimension mismatch");
  const double edge_tol = 1e-9 * std::max(1.0, half_width);
  bool touches = false;
  ConvexRegion r;
  if (dim == 1) {
    double lo = -half_width, hi = half_width;
    for (const auto& h : halfspaces) {
      const double a = h.normal[0];
      const double off = h.offset - a * center[0];
      if (a > 0)
        hi = std::min(hi, off / a);
      else if (a < 0)
        lo = std::max(lo, off / a);
      else if (off < 0)
        lo = hi + 1;
    }
    r = interval(lo + center[0], hi + center[0]);
    if (!r.empty_) touches = lo <= -half_width + edge_tol || hi >= half_width - edge_tol;
  } else if (dim == 2) {
    std::vector<Point2> poly{{-half_width, -half_width},
                             {half_width, -half_width},
                             {half_width, half_width},
                             {-half_width, half_width}};
    for (const auto& h : halfspaces) {
      const double off = h.offset - h.normal.dot(center);
      poly = clip_polygon(poly, {h.normal[0], h.normal[1]}, off);
      if (poly.empty()) break;
    }
    for (auto& p : poly) {
      if (std::fabs(p[0]) >= half_width - edge_tol || std::fabs(p[1]) >= half_width - edge_tol)
        touches = true;
      p[0] += center[0];
      p[1] += center[1];
    }
    r = polygon(std::move(poly));
  } else {
    throw Error("convex regions support d <= 2");
  }
  if (touches_box) *touches_box = touches;
  return r;
}

double ConvexRegion::volume() const {
  if (empty_) return 0;
  if (dim_ == 1) return hi_ - lo_;
  return std::fabs(signed_area(poly_));
}

bool ConvexRegion::has_interior(double tol) const {
  if (empty_) return false;
  if (dim_ == 1) return hi_ - lo_ > tol;
  if (poly_.size() < 3) return false;
  double diam = 0;
  for (const auto& p : poly_)
    for (const auto& q : poly_) diam = std::max(diam, std::hypot(p[0] - q[0], p[1] - q[1]));
  return volume() > tol * std::max(diam, 1.0);
}

bool ConvexRegion::contains(const RealVector& p, double tol) const {
  if (empty_) return false;
  if (dim_ == 1) return p[0] >= lo_ - tol && p[0] <= hi_ + tol;
  return dist_to_region(p) <= tol;
}

double ConvexRegion::dist_to_region(const RealVector& p) const {
  if (empty_) return std::numeric_limits<double>::infinity();
  if (dim_ == 1) return std::max({lo_ - p[0], p[0] - hi_, 0.0});
  const Point2 q = to_point(p);
  if (poly_.size() >= 3) {
    bool inside = true;
    for (std::size_t i = 0; i < poly_.size() && inside; ++i)
      if (cross(poly_[i], poly_[(i + 1) % poly_.size()], q) < 0) inside = false;
    if (inside && signed_area(poly_) > 0) return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly_.size(); ++i)
    best = std::min(best, point_segment_distance(q, poly_[i], poly_[(i + 1) % poly_.size()]));
  return best;
}

double ConvexRegion::dist_to_boundary(const RealVector& p) const {
  if (empty_) return std::numeric_limits<double>::infinity();
  if (dim_ == 1) return std::min(std::fabs(p[0] - lo_), std::fabs(p[0] - hi_));
  const Point2 q = to_point(p);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly_.size(); ++i)
    best = std::min(best, point_segment_distance(q, poly_[i], poly_[(i + 1) % poly_.size()]));
  return best;
}

RealVector ConvexRegion::nearest_boundary_point(const RealVector& p) const {
  if (empty_) throw Error("boundary of an empty region");
  if (dim_ == 1) return RealVector{std::fabs(p[0] - lo_) <= std::fabs(p[0] - hi_) ? lo_ : hi_};
  const Point2 q = to_point(p);
  double best = std::numeric_limits<double>::infinity();
  RealVector out{poly_[0][0], poly_[0][1]};
  for (std::size_t i = 0; i < poly_.size(); ++i) {
    const Point2& a = poly_[i];
    const Point2& b = poly_[(i + 1) % poly_.size()];
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double t = 0;
    if (len2 > 0) t = std::clamp(((q[0] - a[0]) * dx + (q[1] - a[1]) * dy) / len2, 0.0, 1.0);
    const double cx = a[0] + t * dx, cy = a[1] + t * dy;
    const double dist = std::hypot(cx - q[0], cy - q[1]);
    if (dist < best) {
      best = dist;
      out = RealVector{cx, cy};
    }
  }
  return out;
}

double ConvexRegion::support(const RealVector& u) const {
  if (empty_) throw Error("support of an empty region");
  if (dim_ == 1) return std::max(u[0] * lo_, u[0] * hi_);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : poly_) best = std::max(best, u[0] * v[0] + u[1] * v[1]);
  return best;
}

RealVector ConvexRegion::centroid() const {
  if (empty_) throw Error("centroid of an empty region");
  if (dim_ == 1) return RealVector{0.5 * (lo_ + hi_)};
  const double a = signed_area(poly_);
  if (std::fabs(a) < 1e-300) {
    RealVector c{0.0, 0.0};
    for (const auto& v : poly_) {
      c[0] += v[0] / poly_.size();
      c[1] += v[1] / poly_.size();
    }
    return c;
  }
  double cx = 0, cy = 0;
  for (std::size_t i = 0; i < poly_.size(); ++i) {
    const Point2& p = poly_[i];
    const Point2& q = poly_[(i + 1) % poly_.size()];
    const double w = p[0] * q[1] - q[0] * p[1];
    cx += (p[0] + q[0]) * w;
    cy += (p[1] + q[1]) * w;
  }
  return RealVector{cx / (6 * a), cy / (6 * a)};
}

double ConvexRegion::max_distance_from(const RealVector& p) const {
  if (empty_) return 0;
  if (dim_ == 1) return std::max(std::fabs(lo_ - p[0]), std::fabs(hi_ - p[0]));
  double best = 0;
  for (const auto& v : poly_) best = std::max(best, std::hypot(v[0] - p[0], v[1] - p[1]));
  return best;
}

ConvexRegion ConvexRegion::translated(const RealVector& v) const {
  ConvexRegion r = *this;
  if (dim_ == 1) {
    r.lo_ += v[0];
    r.hi_ += v[0];
  } else {
    for (auto& p : r.poly_) {
      p[0] += v[0];
      p[1] += v[1];
    }
  }
  return r;
}

double hausdorff_estimate(const ConvexRegion& a, const ConvexRegion& b, int direction_count) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
  if (a.empty() || b.empty()) throw Error("empty cell");
  if (a.dim() == 1) return std::max(std::fabs(a.hi() - b.hi()), std::fabs(a.lo() - b.lo()));
  if (direction_count < 1) throw std::invalid_argument("direction_count must be positive");
  double worst = 0;
  for (int i = 0; i < direction_count; ++i) {
    const double th = 2.0 * M_PI * i / direction_count;
    RealVector u{std::cos(th), std::sin(th)};
    worst = std::max(worst, std::fabs(a.support(u) - b.support(u)));
  }
  return worst;
}

}  // namespace zdtl::geom
