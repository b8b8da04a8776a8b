#pragma once

// Lattice points of the box I_N = [0, N]^d lying near the boundary of a convex
// body, the Steiner-formula volume of the box's outer parallel body, and the
// resulting choice of N_0.

#include <cstdint>
#include <string>
#include <vector>

#include "zdtl/geometry.hpp"

namespace zdtl::lattice {

using geom::ConvexRegion;
using geom::Point2;

/// A bounded convex body. Exact boundary distances need d <= 2; higher
/// dimensions carry only halfspaces.
class ConvexBody {
 public:
  static ConvexBody interval(double lo, double hi);
  /// Convex hull of the points (d = 2); collinear input gives a segment.
  static ConvexBody hull(const std::vector<Point2>& points);
  static ConvexBody box(std::size_t d, double lo, double hi);

  std::size_t dim() const { return dim_; }
  const std::vector<geom::Halfspace>& halfspaces() const { return halfspaces_; }
  /// Only for d <= 2.
  const ConvexRegion& region() const;

 private:
  std::size_t dim_ = 0;
  std::vector<geom::Halfspace> halfspaces_;
  ConvexRegion region_;
  bool has_region_ = false;
};

double dist_to_polygon_boundary(const ConvexBody& body, const RealVector& p);

struct BoundaryCountReport {
  std::int64_t N = 0;
  double r = 0;
  std::int64_t count = 0;
  double fraction = 0;       // count / N^d
  double steiner_bound = 0;  // 2 vol(boundary_{r + sqrt d}(I_N)) / N^d
  double epsilon = 1;
  bool pass = false;  // fraction < epsilon
};

/// Exhaustive count over the (N+1)^d points of I_N.
BoundaryCountReport count_near_boundary(const ConvexBody& body, double r, std::int64_t N,
                                        double epsilon = 1.0);

/// sum_k C(d,k) N^{d-k} kappa_k e^k, the volume of [0,N]^d + e B.
double steiner_outer_volume_box(double N, double e, std::size_t d);
double unit_ball_volume(std::size_t k);
/// Monte Carlo estimate of the same volume.
double steiner_monte_carlo(double N, double e, std::size_t d, std::uint64_t seed,
                           std::size_t samples);

/// 2 (steiner(N, E, d) - max(N - 2E, 0)^d) / N^d with E = r + sqrt d.
double boundary_ratio(std::int64_t N, double r, std::size_t d);
/// Smallest N with boundary_ratio(N, r, d) < epsilon.
std::int64_t find_N0(double epsilon, double r, std::size_t d);

/// Volumes along the proof's chain for one body K = V cap I_N and E = r + sqrt d.
struct BoundChain {
  double count = 0;
  double two_sided = 0;   // vol(boundary_E(K))
  double outer = 0;       // vol(K + E B) - vol(K)
  double box_outer = 0;   // vol(I_N + E B) - vol(I_N)
  bool link_count = true;     // count <= two_sided
  bool link_two_sided = true; // two_sided <= 2 outer
  bool link_outer = true;     // outer <= box_outer
};

BoundChain bound_chain(const ConvexBody& body, double r, std::int64_t N, std::int64_t count);

/// Monte Carlo volume of the two-sided E-neighbourhood of the boundary of K.
double two_sided_monte_carlo(const ConvexBody& body, std::int64_t N, double E, std::uint64_t seed,
                             std::size_t samples);

struct LemmaReport {
  std::size_t d = 0;
  double epsilon = 0;
  double r = 0;
  std::int64_t N0 = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;      // bodies with fraction >= epsilon
  double worst_fraction = 0;
  std::size_t link_count_failures = 0;
  std::size_t link_two_sided_failures = 0;
  std::size_t link_outer_failures = 0;
  std::vector<std::string> notes;  // first few failing bodies
  bool pass() const { return failures == 0; }
};

/// Random bodies overlapping I_{N0}: d=2 hulls of 3-12 points, d=1 intervals.
LemmaReport verify_lemma(std::uint64_t seed, std::size_t trials, double epsilon, double r,
                         std::size_t d);

/// The random body of trial `index` (shared with tests).
ConvexBody random_body(std::uint64_t seed, std::size_t index, std::int64_t N, std::size_t d);

}  // namespace zdtl::lattice
