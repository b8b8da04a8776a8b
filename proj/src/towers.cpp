#include "zdtl/towers.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "zdtl/lattice.hpp"
#include "zdtl/parallel.hpp"

namespace zdtl::towers {

namespace {

constexpr std::size_t kMaxExamples = 20;

std::string fmt(const LatticeVector& n) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < n.size(); ++i) os << (i ? "," : "") << n[i];
  os << ")";
  return os.str();
}

std::vector<double> coords(const TorusPoint& x) {
  std::vector<double> c(x.dim());
  for (std::size_t j = 0; j < x.dim(); ++j) c[j] = x.coord(j);
  return c;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t N) {
  const std::int64_t r = a % N;
  return r < 0 ? r + N : r;
}

TorusPoint random_point(std::mt19937_64& rng, std::size_t m) {
  return dynsys::sample_points(rng(), 1, m).front();
}

RealVector unit_ball_point(std::size_t k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealVector v(k);
  while (true) {
    double r2 = 0;
    for (std::size_t i = 0; i < k; ++i) {
      v[i] = u(rng);
      r2 += v[i] * v[i];
    }
    if (r2 < 1.0) return v;
  }
}

RealVector random_boundary_point(const ConvexRegion& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (r.dim() == 1) return RealVector{u(rng) < 0.5 ? r.lo() : r.hi()};
  const auto& v = r.vertices();
  // Edge chosen proportionally to length.
  std::vector<double> cum;
  double total = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    total += std::hypot(b[0] - a[0], b[1] - a[1]);
    cum.push_back(total);
  }
  const double pick = u(rng) * total;
  const std::size_t i =
      std::min<std::size_t>(std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin(), v.size() - 1);
  const auto& a = v[i];
  const auto& b = v[(i + 1) % v.size()];
  const double t = u(rng);
  return RealVector{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
}

LatticeVector round_lattice(const RealVector& p) {
  LatticeVector n(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) n[i] = static_cast<std::int64_t>(std::llround(p[i]));
  return n;
}

// Which floors hold x, plus the residue certificate.
struct FloorScan {
  Location origin;
  std::vector<LatticeVector> members;
  std::string certificate_failure;
};

FloorScan scan_floors(const Tiler& tiler, const TowerSpec& spec, const TorusPoint& x) {
  FloorScan out;
  out.origin = tiling::origin_cell(tiler, x, spec.height);
  for (const auto& m : dynsys::lattice_box(tiler.dim(), spec.N))
    if (omega_membership(tiler, spec, act(tiler.action(), x, m))) out.members.push_back(m);
  for (const auto& m : out.members) {
    const bool ok = !out.origin.on_boundary && residue(out.origin.label, spec.N) == m;
    if (!ok && out.certificate_failure.empty())
      out.certificate_failure = "floor " + fmt(m) + " but origin label " + fmt(out.origin.label) +
                                (out.origin.on_boundary ? " on boundary" : "");
  }
  return out;
}

std::vector<FloorScan> scan_samples(const Tiler& tiler, const TowerSpec& spec, std::size_t samples,
                                    std::uint64_t seed, std::vector<TorusPoint>& points) {
  if (spec.N < 1) throw std::invalid_argument("tower N must be >= 1");
  points = dynsys::sample_points(seed, samples, tiler.action().torus_dim());
  std::vector<FloorScan> scans(samples);
  parallel_for(samples, [&](std::size_t i) { scans[i] = scan_floors(tiler, spec, points[i]); });
  return scans;
}

struct Tally {
  std::size_t trials = 0, violations = 0;
  double worst = 0;
  std::string first;
  void record(bool ok, double value, const std::string& what) {
    ++trials;
    worst = std::max(worst, value);
    if (!ok) {
      if (violations == 0) first = what;
      ++violations;
    }
  }
};

PropertyCheck merge(const std::string& name, const std::vector<Tally>& parts) {
  PropertyCheck pc;
  pc.name = name;
  for (const auto& t : parts) {
    pc.trials += t.trials;
    pc.worst = std::max(pc.worst, t.worst);
    if (t.violations && pc.violations == 0) pc.first_failure = t.first;
    pc.violations += t.violations;
  }
  return pc;
}

}  // namespace

double TowerSpec::threshold(std::size_t d) const {
  return skip_threshold ? 0.0 : static_cast<double>(N) * std::sqrt(static_cast<double>(d));
}

LatticeVector residue(const LatticeVector& n, std::int64_t N) {
  LatticeVector r(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) r[i] = floor_mod(n[i], N);
  return r;
}

bool omega_predicate(const Location& origin, const TowerSpec& spec, std::size_t d) {
  if (origin.on_boundary) return false;
  if (!(origin.depth > spec.threshold(d))) return false;
  if (spec.skip_residue) return true;
  for (std::size_t i = 0; i < origin.label.size(); ++i)
    if (floor_mod(origin.label[i], spec.N) != 0) return false;
  return true;
}

bool omega_membership(const Tiler& tiler, const TowerSpec& spec, const TorusPoint& x) {
  return omega_predicate(tiling::origin_cell(tiler, x, spec.height), spec, tiler.dim());
}

TowerReport verify_tower_disjoint(const Tiler& tiler, const TowerSpec& spec, std::size_t samples,
                                  std::uint64_t seed) {
  std::vector<TorusPoint> points;
  const auto scans = scan_samples(tiler, spec, samples, seed, points);
  TowerReport rep;
  rep.property = "disjoint";
  rep.spec = spec;
  rep.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto& sc = scans[i];
    if (sc.members.empty()) ++rep.uncovered;
    std::string witness;
    if (sc.members.size() >= 2)
      witness = "floors " + fmt(sc.members[0]) + " and " + fmt(sc.members[1]);
    else if (!sc.certificate_failure.empty())
      witness = sc.certificate_failure;
    if (witness.empty()) continue;
    ++rep.violations;
    if (rep.examples.size() < kMaxExamples) rep.examples.push_back({coords(points[i]), witness});
  }
  rep.uncovered_fraction = samples ? static_cast<double>(rep.uncovered) / samples : 0.0;
  return rep;
}

namespace {

// A point of the orbit of a random x whose origin sits at the lattice point
// of greatest depth near the centroid of x's origin tile.
TorusPoint deep_point(const Tiler& tiler, double height, std::mt19937_64& rng) {
  const std::size_t d = tiler.dim();
  const TorusPoint x = random_point(rng, tiler.action().torus_dim());
  const RealVector origin(d, 0.0);
  const LocalTiling local(tiler, x, height, origin, 0.0);
  const Location o = local.locate(origin);
  const LatticeVector c0 = round_lattice(local.region(o.label).centroid());
  const auto& cell = local.cell(o.label);
  LatticeVector best = c0;
  double best_depth = cell.depth(to_real(c0));
  for (const auto& off : dynsys::lattice_ball(d, 3.0)) {
    const double dep = cell.depth(to_real(c0 + off));
    if (dep > best_depth) {
      best_depth = dep;
      best = c0 + off;
    }
  }
  return act(tiler.action(), x, best);
}

}  // namespace

TowerReport verify_tower_coverage(const Tiler& tiler, const TowerSpec& spec, std::size_t samples,
                                  std::uint64_t seed) {
  std::vector<TorusPoint> points;
  auto scans = scan_samples(tiler, spec, samples, seed, points);
  TowerReport rep;
  rep.property = "coverage";
  rep.spec = spec;
  rep.samples = samples;
  for (const auto& sc : scans)
    if (sc.members.empty()) ++rep.uncovered;
  rep.uncovered_fraction = samples ? static_cast<double>(rep.uncovered) / samples : 0.0;

  // Uniform samples rarely sit deep inside small tiles, so half as many again
  // are drawn at tile centres.
  rep.targeted = samples / 2;
  std::vector<TorusPoint> deep(rep.targeted);
  std::vector<FloorScan> deep_scans(rep.targeted);
  parallel_for(rep.targeted, [&](std::size_t i) {
    std::mt19937_64 rng(dynsys::stream_seed(seed ^ 0x9e3779b97f4a7c15ULL, i));
    deep[i] = deep_point(tiler, spec.height, rng);
    deep_scans[i] = scan_floors(tiler, spec, deep[i]);
  });
  points.insert(points.end(), deep.begin(), deep.end());
  scans.insert(scans.end(), deep_scans.begin(), deep_scans.end());

  const double need = 2.0 * static_cast<double>(spec.N) * std::sqrt(static_cast<double>(tiler.dim()));
  for (std::size_t i = 0; i < scans.size(); ++i) {
    const auto& sc = scans[i];
    if (sc.origin.on_boundary || !(sc.origin.depth > need)) continue;
    ++rep.eligible;
    if (!sc.members.empty()) continue;
    ++rep.violations;
    if (rep.examples.size() < kMaxExamples) {
      std::ostringstream os;
      os.precision(17);
      os << "dist0 " << sc.origin.depth << " label " << fmt(sc.origin.label) << " in no floor";
      rep.examples.push_back({coords(points[i]), os.str()});
    }
  }
  return rep;
}

BoundaryCover::BoundaryCover(std::size_t d, double s, double R0, double piece_radius)
    : d_(d), s_(s), R0_(R0), piece_radius_(piece_radius) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("cover dimension out of range");
  if (!(s > 1.0 && s < 2.0)) throw std::invalid_argument("s must lie in (1, 2)");
  modulus_ = static_cast<std::int64_t>(std::floor(2.0 * std::sqrt(static_cast<double>(d)))) + 1;
}

std::size_t BoundaryCover::group_bound() const {
  std::size_t b = 1;
  for (std::size_t i = 0; i < d_; ++i) b *= static_cast<std::size_t>(modulus_);
  return b;
}

bool BoundaryCover::is_piece(const LatticeVector& n) const {
  return to_real(n).norm() < piece_radius_;
}

LatticeVector BoundaryCover::shift(const LatticeVector& n) const {
  const double c = 1.0 - 1.0 / s_;
  LatticeVector h(n.size());
  for (std::size_t i = 0; i < n.size(); ++i)
    h[i] = static_cast<std::int64_t>(std::ceil(c * static_cast<double>(n[i]) - 0.5));
  return h;
}

std::size_t BoundaryCover::group(const LatticeVector& n) const {
  if (merged_) return 0;
  std::size_t g = 0;
  for (std::size_t i = n.size(); i-- > 0;)
    g = g * static_cast<std::size_t>(modulus_) + static_cast<std::size_t>(floor_mod(n[i], modulus_));
  return g;
}

std::vector<LatticeVector> BoundaryCover::preimages(const LatticeVector& v) const {
  const double c = 1.0 - 1.0 / s_;
  // Per coordinate k - h(k) = v_i; |k - s v_i| <= s / 2.
  std::vector<std::vector<std::int64_t>> options(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto mid = static_cast<std::int64_t>(std::floor(s_ * static_cast<double>(v[i])));
    for (std::int64_t k = mid - 3; k <= mid + 3; ++k) {
      const auto h = static_cast<std::int64_t>(std::ceil(c * static_cast<double>(k) - 0.5));
      if (k - h == v[i]) options[i].push_back(k);
    }
    if (options[i].empty()) return {};
  }
  std::vector<LatticeVector> out;
  LatticeVector n(v.size());
  std::vector<std::size_t> idx(v.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < v.size(); ++i) n[i] = options[i][idx[i]];
    if (is_piece(n)) out.push_back(n);
    std::size_t i = 0;
    while (i < v.size() && ++idx[i] == options[i].size()) idx[i++] = 0;
    if (i == v.size()) break;
  }
  return out;
}

namespace {

// Lattice points of Z^k with |n|^2 < r2.
std::uint64_t count_strict_ball(std::size_t k, double r2) {
  if (r2 <= 0) return 0;
  auto top = static_cast<std::int64_t>(std::floor(std::sqrt(r2)));
  while (top > 0 && static_cast<double>(top) * static_cast<double>(top) >= r2) --top;
  while (static_cast<double>(top + 1) * static_cast<double>(top + 1) < r2) ++top;
  if (k == 1) return static_cast<std::uint64_t>(2 * top + 1);
  std::uint64_t total = 0;
  for (std::int64_t i = -top; i <= top; ++i)
    total += count_strict_ball(k - 1, r2 - static_cast<double>(i) * static_cast<double>(i));
  return total;
}

}  // namespace

std::uint64_t BoundaryCover::piece_count() const {
  return count_strict_ball(d_, piece_radius_ * piece_radius_);
}

std::size_t BoundaryCover::group_count() const {
  if (merged_) return piece_count() > 0 ? 1 : 0;
  // A residue class meets the ball iff its smallest representative does.
  std::size_t count = 0;
  for (const auto& r : dynsys::lattice_box(d_, modulus_)) {
    LatticeVector rep(d_);
    for (std::size_t i = 0; i < d_; ++i) rep[i] = std::abs(r[i] - modulus_) < r[i] ? r[i] - modulus_ : r[i];
    if (is_piece(rep)) ++count;
  }
  return count;
}

std::vector<LatticeVector> BoundaryCover::pieces(std::uint64_t cap) const {
  if (piece_count() > cap) throw Error("too many pieces to list");
  std::vector<LatticeVector> out;
  for (const auto& n : dynsys::lattice_ball(d_, piece_radius_))
    if (is_piece(n)) out.push_back(n);
  return out;
}

BoundaryCover build_boundary_cover(const Tiler& tiler, double R0, double R1) {
  if (!(R0 > 0) || !(R1 > R0)) throw std::invalid_argument("cover needs 0 < R0 < R1");
  return BoundaryCover(tiler.dim(), tiler.config().s, R0, tiler.reach() + 2.0 * R0);
}

std::vector<PieceHit> pieces_containing(const LocalTiling& sH_tiling, const BoundaryCover& cover,
                                        const LatticeVector& q) {
  const double s = cover.s();
  const double slack = s * std::sqrt(static_cast<double>(cover.dim())) / 2.0;
  std::vector<PieceHit> hits;
  for (const auto& j : sH_tiling.labels()) {
    const ConvexRegion& region = sH_tiling.region(j);
    if (!region.has_interior()) continue;
    const LatticeVector v = j - q;
    if (s * to_real(v).norm() - slack >= cover.piece_radius()) continue;
    for (const auto& n : cover.preimages(v)) {
      const RealVector p = to_real(j - n);
      const double dist = region.dist_to_boundary(p);
      if (dist < 2.0 * cover.R0()) hits.push_back({n, j, dist});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const PieceHit& a, const PieceHit& b) { return a.n < b.n; });
  return hits;
}

std::vector<LatticeVector> unshifted_pieces(const LocalTiling& sH_tiling_at_origin,
                                            const BoundaryCover& cover) {
  std::vector<LatticeVector> out;
  const RealVector origin(cover.dim(), 0.0);
  for (const auto& j : sH_tiling_at_origin.labels()) {
    if (!cover.is_piece(j)) continue;
    const ConvexRegion& region = sH_tiling_at_origin.region(j);
    if (region.has_interior() && region.dist_to_boundary(origin) < 2.0 * cover.R0())
      out.push_back(j);
  }
  return out;
}

TwoTowerParams two_tower_params(std::size_t d, std::int64_t N, double epsilon, double s) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  TwoTowerParams p;
  const double rd = std::sqrt(static_cast<double>(d));
  p.d = d;
  p.N = N;
  p.epsilon = epsilon;
  p.s = s;
  p.R0 = 2.0 * static_cast<double>(N) * rd;
  p.r3 = 2.0 * p.R0 + 4.0 + rd / 2.0;
  p.N1 = std::max(lattice::find_N0(epsilon, p.r3, d), N) + 1;
  p.R1 = std::max(p.R0, 2.0 * static_cast<double>(p.N1) * rd) + 1.0;
  p.rho = p.R1 + 2.0 * p.R0 + 1.0 + rd / 2.0;
  return p;
}

TwoTowerPlan plan_two_towers(const RotationAction& action, std::int64_t N, double epsilon, double s) {
  const std::size_t d = action.rank();
  const TwoTowerParams p = two_tower_params(d, N, epsilon, s);
  auto M_req = static_cast<std::int64_t>(std::ceil(2.0 * p.rho * s / (s - 1.0) * 1.02)) + 2;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const auto geometry = marker::plan_geometry(action, M_req, TorusPoint::zero(action.torus_dim()));
    TwoTowerPlan plan{marker::make_marker(action, geometry), {}};
    plan.config = tiling::TilingConfig::defaults(plan.marker, d);
    plan.config.s = s;
    plan.config.validate(plan.marker, d);
    Tiler tiler(action, plan.marker, plan.config);
    if (tiling::cut_down_radius(tiler) >= p.rho) return plan;
    M_req += M_req / 2;
  }
  throw Error("could not plan a marker large enough for the two towers");
}

namespace {

struct VisitTile {
  LatticeVector j;
  RealVector jr;
  const ConvexRegion* region;
};

// Lattice points q of the block [lo, hi] lying in some shifted piece (of one
// group, when given).
std::uint64_t count_visits(const BoundaryCover& cover, const std::vector<VisitTile>& tiles,
                           const LatticeVector& lo, const LatticeVector& hi,
                           std::optional<std::size_t> group) {
  const std::size_t d = lo.size();
  const double s = cover.s();
  const double slack = s * std::sqrt(static_cast<double>(d)) / 2.0;
  RealVector q0(d);
  double rb2 = 0;
  std::uint64_t points = 1;
  std::size_t widest = 0;
  for (std::size_t i = 0; i < d; ++i) {
    q0[i] = 0.5 * static_cast<double>(lo[i] + hi[i]);
    const double half = 0.5 * static_cast<double>(hi[i] - lo[i]);
    rb2 += half * half;
    points *= static_cast<std::uint64_t>(hi[i] - lo[i] + 1);
    if (hi[i] - lo[i] > hi[widest] - lo[widest]) widest = i;
  }
  const double rb = std::sqrt(rb2);

  // For q in the block and a piece n of tile j, q - h(n) = j - n lies within
  // slack + s rb of s q0 - (s - 1) j.
  std::vector<VisitTile> live;
  for (const auto& t : tiles) {
    if (s * ((t.jr - q0).norm() - rb) - slack >= cover.piece_radius()) continue;
    RealVector p0 = scaled(q0, s) - scaled(t.jr, s - 1.0);
    if (t.region->dist_to_boundary(p0) >= 2.0 * cover.R0() + slack + s * rb + 1e-9) continue;
    live.push_back(t);
  }
  if (live.empty()) return 0;

  if (points <= 64) {
    std::uint64_t count = 0;
    LatticeVector q = lo;
    while (true) {
      bool hit = false;
      for (const auto& t : live) {
        for (const auto& n : cover.preimages(t.j - q))
          if ((!group || cover.group(n) == *group) &&
              t.region->dist_to_boundary(to_real(t.j - n)) < 2.0 * cover.R0()) {
            hit = true;
            break;
          }
        if (hit) break;
      }
      count += hit;
      std::size_t i = 0;
      while (i < d && q[i] == hi[i]) q[i] = lo[i], ++i;
      if (i == d) break;
      ++q[i];
    }
    return count;
  }

  const std::int64_t mid = lo[widest] + (hi[widest] - lo[widest]) / 2;
  LatticeVector hi_a = hi, lo_b = lo;
  hi_a[widest] = mid;
  lo_b[widest] = mid + 1;
  return count_visits(cover, live, lo, hi_a, group) + count_visits(cover, live, lo_b, hi, group);
}

}  // namespace

std::optional<TorusPoint> base_point(const Tiler& tiler, const TowerSpec& spec,
                                     const TorusPoint& x, std::uint64_t seed) {
  const std::size_t d = tiler.dim();
  if (d > 2) throw Error("base points need d <= 2");
  std::mt19937_64 rng(seed);
  const RealVector origin(d, 0.0);
  const LocalTiling at(tiler, x, spec.height, origin, 0.0);
  const Location o = at.locate(origin);
  if (o.on_boundary) return std::nullopt;
  const auto& cell = at.cell(o.label);
  const ConvexRegion& tile = at.region(o.label);
  RealVector lo(d), hi(d);
  if (d == 1) {
    lo[0] = tile.lo();
    hi[0] = tile.hi();
  } else {
    lo = RealVector{1e300, 1e300};
    hi = RealVector{-1e300, -1e300};
    for (const auto& v : tile.vertices())
      for (std::size_t k = 0; k < 2; ++k) {
        lo[k] = std::min(lo[k], v[k]);
        hi[k] = std::max(hi[k], v[k]);
      }
  }
  // Points c with label - c = 0 mod N deep inside the tile: T^c x is in the base.
  const double need = spec.threshold(d);
  for (int attempt = 0; attempt < 400; ++attempt) {
    LatticeVector c(d);
    for (std::size_t k = 0; k < d; ++k) {
      const double w = std::uniform_real_distribution<double>(lo[k], hi[k])(rng);
      c[k] = o.label[k] + spec.N * static_cast<std::int64_t>(std::llround(
                                       (w - static_cast<double>(o.label[k])) /
                                       static_cast<double>(spec.N)));
    }
    if (cell.depth(to_real(c)) <= need) continue;
    const TorusPoint z = act(tiler.action(), x, c);
    if (omega_membership(tiler, spec, z)) return z;
  }
  return std::nullopt;
}

std::uint64_t cover_rank(const Tiler& tiler, const BoundaryCover& cover, const TorusPoint& z,
                         std::int64_t N, std::optional<std::size_t> group) {
  const std::size_t d = tiler.dim();
  const double s = tiler.config().s, H = tiler.config().H;
  const double rd = std::sqrt(static_cast<double>(d));
  // T^-m z for m in {0..N-1}^d is the point -m of the tiling of z.
  const double half = static_cast<double>(N - 1) / 2.0;
  const double reach = cover.piece_radius() / s + rd + 1.0;
  const LocalTiling sH_z(tiler, z, s * H, RealVector(d, -half), half * rd + reach);
  std::vector<VisitTile> tiles;
  for (const auto& j : sH_z.labels())
    if (sH_z.region(j).has_interior()) tiles.push_back({j, to_real(j), &sH_z.region(j)});
  return count_visits(cover, tiles, LatticeVector(d, 1 - N), LatticeVector(d, 0), group);
}

bool TwoTowersResult::pass() const {
  return group_count <= group_bound &&
         std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.pass(); });
}

const PropertyCheck& TwoTowersResult::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no check named " + name);
}

TwoTowersResult build_two_towers(const Tiler& tiler, std::int64_t N, double epsilon,
                                 std::uint64_t seed, const TwoTowerOptions& options) {
  const std::size_t d = tiler.dim();
  if (d > 2) throw Error("two towers support d <= 2");
  const double s = tiler.config().s, H = tiler.config().H;
  const double rd = std::sqrt(static_cast<double>(d));
  TwoTowersResult res;
  res.params = two_tower_params(d, N, epsilon, s);
  const TwoTowerParams& P = res.params;
  res.cut_down_radius = tiling::cut_down_radius(tiler);
  if (res.cut_down_radius < P.rho) {
    std::ostringstream os;
    os << "increase M/H: cut-down radius " << res.cut_down_radius << " is below the required "
       << P.rho;
    throw Error(os.str());
  }
  BoundaryCover cover = build_boundary_cover(tiler, P.R0, P.R1);
  cover.merge_groups(options.merge_groups);
  res.tower0 = TowerSpec{s * H, N};
  res.tower1 = TowerSpec{H, P.N1};
  res.piece_count = cover.piece_count();
  res.group_count = cover.group_count();
  res.group_bound = cover.group_bound();

  const std::size_t samples = options.samples;
  const std::size_t visit_samples =
      options.visit_samples ? options.visit_samples : std::max<std::size_t>(1, samples / 10);
  const std::size_t m = tiler.action().torus_dim();
  const RealVector origin(d, 0.0);
  const double cover_reach = cover.piece_radius() / s + rd + 1.0;

  enum { kCover, kShift, kGroups, kVisit, kImage, kCount };
  std::vector<std::array<Tally, kCount>> per(std::max(samples, visit_samples));
  std::vector<double> visit_fraction(visit_samples, 0.0);

  parallel_for(per.size(), [&](std::size_t i) {
    auto& t = per[i];
    std::mt19937_64 rng(dynsys::stream_seed(seed, i));
    const TorusPoint x = random_point(rng, m);
    const LocalTiling near_x(tiler, x, s * H, origin, 0.0);
    const Location o = near_x.locate(origin);

    if (i < samples) {
      const ConvexRegion& home = near_x.region(o.label);

      // (0) Points off the sH tower lie in some U_n. Odd samples are pushed
      // next to a tile wall, where the tower thins out.
      TorusPoint y0 = x;
      if (i % 2 == 1) {
        RealVector b = random_boundary_point(home, rng) + scaled(unit_ball_point(d, rng), P.R0);
        y0 = act(tiler.action(), x, round_lattice(b));
      }
      bool in_tower0 = false;
      for (const auto& f : dynsys::lattice_box(d, N))
        if (omega_membership(tiler, res.tower0, act(tiler.action(), y0, f))) {
          in_tower0 = true;
          break;
        }
      if (!in_tower0) {
        const LocalTiling at_y0(tiler, y0, s * H, origin, 0.0);
        const auto pieces = unshifted_pieces(at_y0, cover);
        const Location oy = at_y0.locate(origin);
        t[kCover].record(!pieces.empty(), oy.depth / (2.0 * P.R0),
                         "point off the tower in no piece, dist0 " + std::to_string(oy.depth));
      }

      // A point of T^h(U_n) built from a lattice point p near a wall of the
      // origin tile: n = j - p, q = p + h(n).
      LatticeVector n, q;
      bool found = false;
      for (int attempt = 0; attempt < 50 && !found; ++attempt) {
        RealVector b = random_boundary_point(home, rng) + scaled(unit_ball_point(d, rng), 2.0 * P.R0);
        const LatticeVector p = round_lattice(b);
        if (!(home.dist_to_boundary(to_real(p)) < 2.0 * P.R0)) continue;
        n = o.label - p;
        if (!cover.is_piece(n)) continue;
        q = p + cover.shift(n);
        found = true;
      }
      if (!found) {
        t[kGroups].record(false, 0, "no piece point found next to the origin tile");
        return;
      }
      const TorusPoint y = act(tiler.action(), x, q);
      const LocalTiling around(tiler, y, s * H, origin, cover_reach);
      const LatticeVector zero(d, 0);
      const auto hits = pieces_containing(around, cover, zero);
      const bool sampled_found =
          std::any_of(hits.begin(), hits.end(), [&](const PieceHit& h) { return h.n == n; });

      // (1) T^h(U_n) lies in iota_{R1}(W_H) and in the floors of Omega_1.
      {
        const Location oh = tiling::origin_cell(tiler, y, H);
        bool ok = !oh.on_boundary && oh.depth > P.R1;
        if (ok) {
          const LatticeVector f = residue(oh.label, P.N1);
          ok = omega_membership(tiler, res.tower1, act(tiler.action(), y, f));
        }
        t[kShift].record(ok, oh.on_boundary ? 0.0 : P.R1 / std::max(oh.depth, 1e-300),
                         "piece " + fmt(n) + " shifted by " + fmt(cover.shift(n)) +
                             " has dist0 " + std::to_string(oh.depth) + " at -H");
      }

      // (2) Within a group the shifted pieces are disjoint.
      {
        std::map<std::size_t, LatticeVector> seen;
        std::string clash;
        for (const auto& h : hits) {
          auto [it, fresh] = seen.emplace(cover.group(h.n), h.n);
          if (!fresh && clash.empty()) clash = "pieces " + fmt(it->second) + " and " + fmt(h.n);
        }
        if (!sampled_found) clash = "sampled piece " + fmt(n) + " not recovered";
        t[kGroups].record(clash.empty(), static_cast<double>(hits.size()), clash);
      }

      // h_n lies within r3 of the H-projective image of the wall of W_sH(T^-h y, n).
      for (const auto& h : hits) {
        const LatticeVector hn = cover.shift(h.n);
        const RealVector at = -to_real(hn);
        const RealVector b = around.region(h.tile).nearest_boundary_point(at);
        const RealVector a = b - at;
        const double tn = around.cell(h.tile).t;
        const RealVector img = tiling::h_projective_image(a, h.n, tn, s, H);
        const double dist = (to_real(hn) - img).norm();
        t[kImage].record(dist < P.r3 && a.norm() < 2.0 * P.R0 + kGeoTol, dist / P.r3,
                         "piece " + fmt(h.n) + " image distance " + std::to_string(dist));
      }
    }

    // (3) Visit fraction along the tower column over a point of Omega_1.
    if (i < visit_samples) {
      const auto z = base_point(tiler, res.tower1, x, rng());
      if (!z) {
        t[kVisit].record(false, 0, "origin tile at -H holds no point of Omega_1");
        return;
      }
      const double count = static_cast<double>(cover_rank(tiler, cover, *z, P.N1));
      const double frac = count / std::pow(static_cast<double>(P.N1), static_cast<double>(d));
      visit_fraction[i] = frac;
      std::ostringstream what;
      what << "visit fraction " << frac;
      t[kVisit].record(frac < epsilon, frac, what.str());
    }
  });

  const char* names[kCount] = {"cover", "shifted_into_tower1", "groups_disjoint", "visit_fraction",
                               "image_nbhd"};
  for (std::size_t k = 0; k < kCount; ++k) {
    std::vector<Tally> parts;
    for (const auto& p : per) parts.push_back(p[k]);
    res.checks.push_back(merge(names[k], parts));
  }
  for (double f : visit_fraction) res.worst_visit_fraction = std::max(res.worst_visit_fraction, f);
  return res;
}

OcapControlReport check_ocap_control(const Tiler& tiler, double height, double E, double R,
                                     std::size_t points, std::uint64_t seed,
                                     std::size_t spatial_samples) {
  const std::size_t d = tiler.dim();
  OcapControlReport rep;
  rep.E = E;
  rep.R = R;
  rep.points = points;
  std::vector<LatticeVector> window;
  for (const auto& m : dynsys::lattice_ball(d, R))
    if (to_real(m).norm() < R) window.push_back(m);
  rep.window = window.size();
  const auto xs = dynsys::sample_points(seed, points, tiler.action().torus_dim());
  const double inflate = std::sqrt(static_cast<double>(d)) / 2.0;
  std::vector<double> orbit(points), spatial(points), inflated(points);
  parallel_for(points, [&](std::size_t i) {
    std::size_t hits = 0;
    for (const auto& m : window) {
      const Location o = tiling::origin_cell(tiler, act(tiler.action(), xs[i], m), height);
      if (o.on_boundary || o.depth <= E) ++hits;
    }
    orbit[i] = static_cast<double>(hits) / static_cast<double>(window.size());

    std::mt19937_64 rng(dynsys::stream_seed(seed ^ 0x5bd1e995u, i));
    const LocalTiling local(tiler, xs[i], height, RealVector(d, 0.0), R);
    std::size_t near = 0, wide = 0;
    for (std::size_t k = 0; k < spatial_samples; ++k) {
      const Location o = local.locate(scaled(unit_ball_point(d, rng), R));
      if (o.on_boundary || o.depth <= E) ++near;
      if (o.on_boundary || o.depth <= E + inflate) ++wide;
    }
    spatial[i] = static_cast<double>(near) / static_cast<double>(spatial_samples);
    inflated[i] = static_cast<double>(wide) / static_cast<double>(spatial_samples);
  });
  rep.orbit_max = *std::max_element(orbit.begin(), orbit.end());
  rep.spatial_max = *std::max_element(spatial.begin(), spatial.end());
  rep.inflated_max = *std::max_element(inflated.begin(), inflated.end());
  return rep;
}

UrpResult urp_search(const RotationAction& action, std::int64_t N, double epsilon,
                     std::uint64_t seed, std::size_t samples, std::size_t max_steps) {
  const std::size_t d = action.rank();
  UrpResult res;
  res.N = N;
  res.epsilon = epsilon;
  auto M_req = std::max<std::int64_t>(4, static_cast<std::int64_t>(std::ceil(4.0 * N * std::sqrt(d))));
  for (std::size_t step = 0; step < max_steps; ++step, M_req *= 2) {
    const auto geometry = marker::plan_geometry(action, M_req, TorusPoint::zero(action.torus_dim()));
    const auto mk = marker::make_marker(action, geometry);
    const auto cfg = tiling::TilingConfig::defaults(mk, d);
    Tiler tiler(action, mk, cfg);
    const TowerSpec spec{cfg.H, N};
    UrpStep st;
    st.M_required = M_req;
    st.M = mk.M;
    st.L = mk.L;
    st.H = cfg.H;
    const auto disjoint = verify_tower_disjoint(tiler, spec, samples, seed);
    st.uncovered_fraction = disjoint.uncovered_fraction;
    st.disjoint_violations = disjoint.violations;
    res.steps.push_back(st);
    if (st.uncovered_fraction < epsilon) {
      res.found = true;
      break;
    }
  }
  res.monotone = true;
  for (std::size_t k = 1; k < res.steps.size(); ++k)
    if (res.steps[k].uncovered_fraction > res.steps[k - 1].uncovered_fraction) res.monotone = false;
  return res;
}

}  // namespace zdtl::towers
