#pragma once

// Horizontal cross-sections of the Voronoi diagram of the weighted centers
// {(n, 1/phi(T^n x))} in R^{d+1}. At height -H the cells form a power diagram
// in R^d; every tile is stored as halfspaces relative to its own label so
// translating x along its orbit reproduces the same numbers.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zdtl/geometry.hpp"
#include "zdtl/marker.hpp"
#include "zdtl/returns.hpp"

namespace zdtl::tiling {

using dynsys::RotationAction;
using dynsys::TorusPoint;
using geom::ConvexRegion;
using geom::Halfspace;
using marker::MarkerFunction;

struct TilingConfig {
  double H = 0;
  double s = 1.5;
  double truncation_radius = 0;
  /// Build every cell a second time with twice the competitor radius and
  /// insist both agree.
  bool debug_double_truncation = false;

  /// H = (L + sqrt d)^2 + 1, truncation 2 (L + sqrt d) + 1, s = 1.5.
  static TilingConfig defaults(const MarkerFunction& marker, std::size_t d);
  void validate(const MarkerFunction& marker, std::size_t d) const;
};

struct WeightedCenter {
  LatticeVector n;
  double t = 1;
};

struct CellCrossSection {
  LatticeVector label;
  double height = 0;  // the slice sits at -height
  double t = 0;       // weight of the label's center
  bool empty = true;  // the label is not an active center
  /// Absolute halfspaces normal . a <= offset.
  std::vector<Halfspace> halfspaces;
  /// The same halfspaces in the coordinate b = a - label.
  std::vector<Halfspace> relative;
  std::optional<RealVector> witness;

  /// Smallest slack over all halfspaces at p (negative outside). For a point
  /// of the cell this is its distance to the cell boundary.
  double depth(const RealVector& p) const;
  bool contains(const RealVector& p, double tol = kGeoTol) const;
};

/// One halfspace per competitor within `competitor_radius` of n0:
/// 2 (m - n0) . a <= |m|^2 - |n0|^2 + (height + t_m)^2 - (height + t_n0)^2.
/// Returns an empty cell when n0 is not among the centers.
CellCrossSection cross_section_halfspaces(std::span<const WeightedCenter> centers,
                                          const LatticeVector& n0, double height,
                                          double competitor_radius);

/// Bounded region of a cell (d <= 2); throws "unbounded cell" when the
/// halfspaces do not close up inside the box of half-width `box`.
ConvexRegion cell_region(const CellCrossSection& cell, double box);

/// a + ((s - 1) H / (s H + t)) (n - a)
RealVector h_projective_image(const RealVector& a, const LatticeVector& n, double t, double s,
                              double H);

/// Action, marker and tiling parameters plus cached orbit-return searches.
class Tiler {
 public:
  Tiler(const RotationAction& action, const MarkerFunction& marker, const TilingConfig& config);

  const RotationAction& action() const { return action_; }
  const MarkerFunction& marker() const { return marker_; }
  const TilingConfig& config() const { return config_; }
  std::size_t dim() const { return action_.rank(); }
  /// L + sqrt(d): every point of a cell lies closer than this to its label.
  double reach() const;
  double competitor_radius() const;

  /// Active centers n with |n - c| <= radius, labels in absolute coordinates.
  std::vector<WeightedCenter> active_centers(const TorusPoint& x, double radius,
                                             const LatticeVector& c) const;
  std::vector<WeightedCenter> active_centers(const TorusPoint& x, double radius) const;

 private:
  const dynsys::ReturnFinder& finder(double radius) const;

  RotationAction action_;
  MarkerFunction marker_;
  TilingConfig config_;
  mutable std::mutex mu_;
  mutable std::map<double, std::unique_ptr<dynsys::ReturnFinder>> finders_;
};

struct Location {
  bool on_boundary = false;
  LatticeVector label;
  double depth = 0;  // distance to the boundary of the containing tile
};

/// The tiles of the tiling of x at one height that can meet the ball
/// B(focus, radius), with their full competitor sets.
class LocalTiling {
 public:
  LocalTiling(const Tiler& tiler, const TorusPoint& x, double height, const RealVector& focus,
              double radius);

  double height() const { return height_; }
  const std::vector<WeightedCenter>& centers() const { return centers_; }
  /// Labels of active centers that may own points of the focus ball.
  const std::vector<LatticeVector>& labels() const { return labels_; }
  const CellCrossSection& cell(const LatticeVector& label) const;
  /// Bounded region of a label's tile (d <= 2).
  const ConvexRegion& region(const LatticeVector& label) const;

  /// Tile containing p, found by the smallest power distance.
  Location locate(const RealVector& p) const;

 private:
  const Tiler* tiler_;
  double height_;
  std::vector<WeightedCenter> centers_;
  std::vector<LatticeVector> labels_;
  std::map<LatticeVector, CellCrossSection> cells_;
  std::map<LatticeVector, ConvexRegion> regions_;
};

/// Label of the tile containing the origin at height `height` (H or sH) and
/// the distance from 0 to its boundary.
Location origin_cell(const Tiler& tiler, const TorusPoint& x, double height);

struct Viewport {
  double x0 = -10, y0 = -10, x1 = 10, y1 = 10;
  double overlay_radius = 0;  // R-ball drawn around the origin when > 0
  double stroke = 0.05;
};

/// SVG 1.1 drawing of the tiles of x at height H meeting the viewport (d = 2).
std::string render_svg(const Tiler& tiler, const TorusPoint& x, const Viewport& view);

}  // namespace zdtl::tiling
