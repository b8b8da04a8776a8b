#pragma once

// Marker data (U', U, phi, M, L) on a torus rotation: phi is a radial ramp,
// 1 on the closed ball of radius r_inner and 0 off the open ball of radius
// r_outer around the center.

#include <cstdint>
#include <vector>

#include "zdtl/dynsys.hpp"

namespace zdtl::marker {

using dynsys::RotationAction;
using dynsys::TorusPoint;

struct MarkerGeometry {
  TorusPoint center;
  double r_inner = 0;
  double r_outer = 0;

  void validate(const RotationAction& action) const;
};

struct MarkerFunction {
  MarkerGeometry geometry;
  std::int64_t M = 0;
  std::int64_t L = 0;

  const TorusPoint& center() const { return geometry.center; }
  double r_inner() const { return geometry.r_inner; }
  double r_outer() const { return geometry.r_outer; }
};

double phi_eval(const MarkerGeometry& g, const TorusPoint& x);
inline double phi_eval(const MarkerFunction& m, const TorusPoint& x) {
  return phi_eval(m.geometry, x);
}

/// Largest M with dist(n.A, 0) > 2 r_outer for every nonzero |n|_2 <= M.
std::int64_t compute_M(const RotationAction& action, const MarkerGeometry& g);

/// Smallest L (up to `cap`) whose r_inner-balls around {c - n.A : |n| <= L}
/// cover the torus. For m >= 2 grids too fine to scan fall back to a lattice
/// covering-radius certificate, which can overshoot the true minimum.
std::int64_t compute_L(const RotationAction& action, const MarkerGeometry& g,
                       std::int64_t cap = std::int64_t{1} << 26);

/// Exact/grid covering test behind compute_L, exposed for tests.
bool covers_torus(const RotationAction& action, const MarkerGeometry& g, std::int64_t L);

/// Geometry plus computed (M, L).
MarkerFunction make_marker(const RotationAction& action, const MarkerGeometry& g);

/// Hardcoded desk-scale marker for the default systems (center 0,
/// r_outer = 2 r_inner): d=1 r_inner = 0.04, d=2 r_inner = 0.1.
MarkerGeometry default_geometry(std::size_t d);

/// Smallest distance from n.A to 0 over nonzero |n|_2 <= radius.
double min_return_distance(const RotationAction& action, double radius);

/// Marker centered at `center` whose separation constant is at least
/// `M_required`: r_outer just under half the shortest return within that
/// radius, r_inner = r_outer / 2.
MarkerGeometry plan_geometry(const RotationAction& action, std::int64_t M_required,
                             const TorusPoint& center);

struct MarkerViolation {
  int condition = 0;  // 1 = separation, 2 = covering
  TorusPoint x;
  LatticeVector witness;  // offending n for (1); empty for (2)
};

struct MarkerReport {
  std::size_t samples = 0;
  std::size_t separation_violations = 0;
  std::size_t covering_violations = 0;
  std::vector<MarkerViolation> violations;  // first few of each kind
  bool pass() const { return separation_violations == 0 && covering_violations == 0; }
};

/// Condition (1) is checked at points drawn uniformly from the support ball
/// (elsewhere it is vacuous); condition (2) at uniform points of the torus.
MarkerReport verify_marker(const RotationAction& action, const MarkerFunction& marker,
                           std::uint64_t seed, std::size_t samples);

/// Uniform point of the ball B(center, radius) on the torus (radius < 1/2).
TorusPoint sample_in_ball(std::uint64_t seed, const TorusPoint& center, double radius);

}  // namespace zdtl::marker
