#pragma once

// Rokhlin towers cut out of a tiling function, the shifted boundary cover
// between the tilings at heights sH and H, and the checks that go with them.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zdtl/tiling.hpp"
#include "zdtl/tiling_checks.hpp"

namespace zdtl::towers {

using dynsys::RotationAction;
using dynsys::TorusPoint;
using marker::MarkerFunction;
using tiling::Location;
using tiling::LocalTiling;
using tiling::PropertyCheck;
using tiling::Tiler;
using geom::ConvexRegion;

/// Base of the tower {x : dist(0, boundary) > N sqrt d and origin label = 0 mod N}
/// for the tiling at -height.
struct TowerSpec {
  double height = 0;
  std::int64_t N = 1;
  /// Negative controls: drop the distance threshold / the residue condition.
  bool skip_threshold = false;
  bool skip_residue = false;

  double threshold(std::size_t d) const;
};

/// The predicate on an already located origin.
bool omega_predicate(const Location& origin, const TowerSpec& spec, std::size_t d);
bool omega_membership(const Tiler& tiler, const TowerSpec& spec, const TorusPoint& x);

/// Componentwise residue in [0, N).
LatticeVector residue(const LatticeVector& n, std::int64_t N);

struct TowerViolation {
  std::vector<double> x;
  std::string witness;
};

struct TowerReport {
  std::string property;  // "disjoint" or "coverage"
  TowerSpec spec;
  std::size_t samples = 0;   // uniform samples
  std::size_t targeted = 0;  // coverage: extra samples drawn at tile centres
  std::size_t eligible = 0;  // coverage: samples with dist0 > 2 N sqrt d
  std::size_t violations = 0;
  std::size_t uncovered = 0;  // uniform samples in no floor T^-m(Omega)
  double uncovered_fraction = 0;
  std::vector<TowerViolation> examples;  // first 20, sorted
  bool pass() const { return violations == 0; }
};

/// Samples x and asks every floor m in {0..N-1}^d whether T^m x lies in the
/// base. Two floors at once is a violation, as is a floor m whose x does not
/// sit in a tile of label = m mod N.
TowerReport verify_tower_disjoint(const Tiler& tiler, const TowerSpec& spec, std::size_t samples,
                                  std::uint64_t seed);
/// Samples with dist0 > 2 N sqrt d must lie in some floor. Besides the
/// uniform samples, samples / 2 points are drawn at tile centres so the check
/// is not vacuous when tiles are small.
TowerReport verify_tower_coverage(const Tiler& tiler, const TowerSpec& spec, std::size_t samples,
                                  std::uint64_t seed);

/// Pieces U_n = {x : dist(0, boundary W_sH(x, n)) < 2 R0, W_sH(x, n) has
/// interior} for |n| < piece_radius, with shifts h(n) = nearest lattice point
/// to (1 - 1/s) n (ties toward -inf) and groups by n mod modulus. Pieces are
/// implicit: at proof scale there are far too many to list.
class BoundaryCover {
 public:
  BoundaryCover(std::size_t d, double s, double R0, double piece_radius);

  std::size_t dim() const { return d_; }
  double s() const { return s_; }
  double R0() const { return R0_; }
  double piece_radius() const { return piece_radius_; }
  /// floor(2 sqrt d) + 1
  std::int64_t modulus() const { return modulus_; }
  std::size_t group_bound() const;
  /// Negative control: put every piece in group 0.
  void merge_groups(bool on) { merged_ = on; }
  bool merged() const { return merged_; }

  bool is_piece(const LatticeVector& n) const;
  LatticeVector shift(const LatticeVector& n) const;
  std::size_t group(const LatticeVector& n) const;
  /// Pieces n with n - h(n) = v.
  std::vector<LatticeVector> preimages(const LatticeVector& v) const;
  /// Number of lattice points with |n| < piece_radius.
  std::uint64_t piece_count() const;
  /// Distinct groups met by the pieces.
  std::size_t group_count() const;
  /// Every piece; refuses when there are more than `cap`.
  std::vector<LatticeVector> pieces(std::uint64_t cap = 1'000'000) const;

 private:
  std::size_t d_;
  double s_, R0_, piece_radius_;
  std::int64_t modulus_;
  bool merged_ = false;
};

BoundaryCover build_boundary_cover(const Tiler& tiler, double R0, double R1);

/// A piece containing the point q of the local tiling at -sH: the point
/// T^q x lies in T^h(U_n).
struct PieceHit {
  LatticeVector n;
  LatticeVector tile;  // q + n - h(n), the tile of x whose boundary is near
  double dist = 0;     // dist(q - h(n), boundary of that tile)
};

/// All pieces whose shifted copy contains T^q x. `sH_tiling` is the tiling of
/// x at -sH and must hold every label within piece_radius / s + sqrt d of q.
std::vector<PieceHit> pieces_containing(const LocalTiling& sH_tiling, const BoundaryCover& cover,
                                        const LatticeVector& q);

/// Pieces U_n (unshifted) containing x itself.
std::vector<LatticeVector> unshifted_pieces(const LocalTiling& sH_tiling_at_origin,
                                            const BoundaryCover& cover);

/// A point of the base of `spec` on the orbit of x, drawn inside x's origin
/// tile at -spec.height; nullopt when that tile has no room for one.
std::optional<TorusPoint> base_point(const Tiler& tiler, const TowerSpec& spec,
                                     const TorusPoint& x, std::uint64_t seed);

/// |{m in {0..N-1}^d : T^-m z in the union of shifted pieces}|, optionally
/// restricted to the pieces of one group.
std::uint64_t cover_rank(const Tiler& tiler, const BoundaryCover& cover, const TorusPoint& z,
                         std::int64_t N, std::optional<std::size_t> group = std::nullopt);

struct TwoTowerParams {
  std::size_t d = 0;
  std::int64_t N = 0;
  double epsilon = 0;
  double s = 0;
  double R0 = 0;        // 2 N sqrt d
  double r3 = 0;        // 2 R0 + 4 + sqrt(d)/2
  std::int64_t N1 = 0;  // max(N0(epsilon, r3), N) + 1
  double R1 = 0;        // max(R0, 2 N1 sqrt d) + 1
  double rho = 0;       // R1 + 2 R0 + 1 + sqrt(d)/2, the cut-down ball needed
};

TwoTowerParams two_tower_params(std::size_t d, std::int64_t N, double epsilon, double s);

/// Marker and tiling config whose cut-down radius reaches params.rho.
struct TwoTowerPlan {
  MarkerFunction marker;
  tiling::TilingConfig config;
};
TwoTowerPlan plan_two_towers(const RotationAction& action, std::int64_t N, double epsilon,
                             double s = 1.5);

struct TwoTowerOptions {
  std::size_t samples = 1000;
  /// Omega_1 points for the visit fraction; 0 means samples / 10.
  std::size_t visit_samples = 0;
  bool merge_groups = false;
};

struct TwoTowersResult {
  TwoTowerParams params;
  TowerSpec tower0;  // height sH, N
  TowerSpec tower1;  // height H, N1
  std::uint64_t piece_count = 0;
  std::size_t group_count = 0;
  std::size_t group_bound = 0;
  double cut_down_radius = 0;
  /// cover, shifted_into_tower1, groups_disjoint, visit_fraction, image_nbhd
  std::vector<PropertyCheck> checks;
  double worst_visit_fraction = 0;
  bool pass() const;
  const PropertyCheck& get(const std::string& name) const;
};

/// Throws "increase M/H" when the cut-down radius of the tiler is below rho.
TwoTowersResult build_two_towers(const Tiler& tiler, std::int64_t N, double epsilon,
                                 std::uint64_t seed, const TwoTowerOptions& options = {});

/// Orbit frequency of {dist0 <= E} along lattice windows |m| < R against the
/// spatial density of the tile walls' neighbourhoods in B_R. A lattice point
/// within E of a wall has its unit cube within E + sqrt(d)/2, so the orbit
/// frequency is compared with the density at that inflated radius.
struct OcapControlReport {
  double E = 0;
  double R = 0;
  std::size_t points = 0;
  std::size_t window = 0;      // lattice points per orbit window
  double orbit_max = 0;        // max over x of the orbit frequency
  double spatial_max = 0;      // max over x of the density at E
  double inflated_max = 0;     // max over x of the density at E + sqrt(d)/2
  double tolerance = 0.02;
  bool pass() const { return orbit_max <= inflated_max + tolerance; }
};

OcapControlReport check_ocap_control(const Tiler& tiler, double height, double E, double R,
                                     std::size_t points, std::uint64_t seed,
                                     std::size_t spatial_samples = 20000);

/// Marker scale schedule for the single tower at height H: double M_required
/// until the uncovered fraction drops below epsilon.
struct UrpStep {
  std::int64_t M_required = 0;
  std::int64_t M = 0;
  std::int64_t L = 0;
  double H = 0;
  double uncovered_fraction = 0;
  std::size_t disjoint_violations = 0;
};

struct UrpResult {
  std::int64_t N = 0;
  double epsilon = 0;
  std::vector<UrpStep> steps;
  bool found = false;
  bool monotone = false;  // uncovered fraction nonincreasing along the schedule
};

UrpResult urp_search(const RotationAction& action, std::int64_t N, double epsilon,
                     std::uint64_t seed, std::size_t samples, std::size_t max_steps = 8);

}  // namespace zdtl::towers
