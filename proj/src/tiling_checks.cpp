#include "zdtl/tiling_checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "zdtl/parallel.hpp"

namespace zdtl::tiling {

namespace {

const char* const kNames[] = {"equivariance",        "weight_bound",        "truncation_soundness",
                              "ball_containment",    "cut_down_containment", "projective_displacement",
                              "continuity"};
constexpr std::size_t kChecks = 7;

struct Tally {
  std::size_t trials = 0;
  std::size_t violations = 0;
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

std::string describe(const TorusPoint& x, const LatticeVector& n) {
  std::ostringstream os;
  os.precision(17);
  os << "x=(";
  for (std::size_t j = 0; j < x.dim(); ++j) os << (j ? "," : "") << x.coord(j);
  os << ") n=(";
  for (std::size_t i = 0; i < n.size(); ++i) os << (i ? "," : "") << n[i];
  os << ")";
  return os.str();
}

std::vector<RealVector> boundary_samples(const ConvexRegion& r, std::mt19937_64& rng) {
  std::vector<RealVector> out;
  if (r.dim() == 1) {
    out.push_back(RealVector{r.lo()});
    out.push_back(RealVector{r.hi()});
    return out;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& v = r.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    out.push_back(RealVector{p[0], p[1]});
    const double t = u(rng);
    out.push_back(RealVector{p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
  }
  return out;
}

// Uniform point of the unit ball in R^k.
std::vector<double> unit_ball_point(std::size_t k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(k);
  while (true) {
    double r2 = 0;
    for (auto& c : v) {
      c = u(rng);
      r2 += c * c;
    }
    if (r2 < 1.0) return v;
  }
}

TorusPoint nudge(const TorusPoint& x, double size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::array<std::uint64_t, kMaxDim> raw{};
  for (std::size_t j = 0; j < x.dim(); ++j) raw[j] = x.raw(j) + dynsys::to_fixed(size * u(rng));
  return TorusPoint::from_raw(std::span<const std::uint64_t>(raw.data(), x.dim()));
}

}  // namespace

bool TilingReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.pass(); });
}

const PropertyCheck& TilingReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no check named " + name);
}

double cut_down_radius(const Tiler& tiler) {
  const double s = tiler.config().s, H = tiler.config().H;
  const double M = static_cast<double>(tiler.marker().M);
  const double mu_min = (s - 1.0) * H / (s * H + 2.0);
  const double disp_max = (s - 1.0) * 2.0 * tiler.reach() / (s * (s * H + 2.0));
  return mu_min * M / 2.0 - disp_max;
}

TilingReport check_tiling_invariants(const Tiler& tiler, std::uint64_t seed, std::size_t trials,
                                     double nudge_size) {
  const std::size_t d = tiler.dim();
  const double H = tiler.config().H, s = tiler.config().s;
  const double reach = tiler.reach();
  const double comp = tiler.competitor_radius();
  const double half_M = static_cast<double>(tiler.marker().M) / 2.0;
  const double r_cut = cut_down_radius(tiler);
  const double disp_bound = 4.0 / reach;
  const RealVector origin(d, 0.0);

  std::vector<std::array<Tally, kChecks>> per(trials);
  parallel_for(trials, [&](std::size_t trial) {
    auto& t = per[trial];
    std::mt19937_64 rng(dynsys::stream_seed(seed, trial));
    const TorusPoint x =
        dynsys::sample_points(rng(), 1, tiler.action().torus_dim()).front();
    LocalTiling at_H(tiler, x, H, origin, reach);
    LocalTiling at_sH(tiler, x, s * H, origin, reach);

    std::vector<LatticeVector> tiles;
    for (const auto& n : at_H.labels())
      if (at_H.region(n).has_interior()) tiles.push_back(n);
    if (tiles.empty()) {
      t[0].record(false, 0, describe(x, LatticeVector(d, 0)) + ": no tile near the origin");
      return;
    }
    const LatticeVector n = tiles[rng() % tiles.size()];
    const std::string where = describe(x, n);
    const CellCrossSection& cell = at_H.cell(n);
    const ConvexRegion& region = at_H.region(n);

    // Equivariance: W_H(T^m x, n - m) = -m + W_H(x, n).
    {
      const auto span = static_cast<std::int64_t>(std::ceil(2.0 * reach));
      std::uniform_int_distribution<std::int64_t> step(-span, span);
      LatticeVector m(d);
      for (std::size_t i = 0; i < d; ++i) m[i] = step(rng);
      const TorusPoint y = act(tiler.action(), x, m);
      const LatticeVector label = n - m;
      auto centers = tiler.active_centers(y, label.norm() + comp + 1.0);
      CellCrossSection moved = cross_section_halfspaces(centers, label, H, comp);
      bool same = !moved.empty && moved.relative.size() == cell.relative.size();
      double gap = 0;
      for (std::size_t k = 0; same && k < moved.relative.size(); ++k) {
        const auto& a = moved.relative[k];
        const auto& b = cell.relative[k];
        if (!(a.normal == b.normal)) same = false;
        gap = std::max(gap, std::fabs(a.offset - b.offset) / std::max(1.0, std::fabs(b.offset)));
      }
      double haus = 0;
      if (same) {
        ConvexRegion r = cell_region(moved, reach + 1.0).translated(to_real(m));
        haus = geom::hausdorff_estimate(r, region, 64);
      }
      t[0].record(same && gap <= kGeoTol && haus < 1e-6, haus, where + " m shift");
    }

    // Weight bound and truncation soundness over every tile near the origin.
    for (const auto& k : tiles) {
      const double tk = at_H.cell(k).t;
      t[1].record(tk >= 1.0 && tk <= 2.0, tk, describe(x, k));
      const double far = at_H.region(k).max_distance_from(to_real(k));
      t[2].record(far < reach, far / reach, describe(x, k));
    }
    {
      std::uniform_real_distribution<double> u(-reach, reach);
      for (int k = 0; k < 8; ++k) {
        RealVector a(d);
        for (std::size_t i = 0; i < d; ++i) a[i] = u(rng);
        Location loc = at_H.locate(a);
        if (loc.on_boundary) continue;
        const double dist = (a - to_real(loc.label)).norm();
        t[2].record(dist < reach, dist / reach, describe(x, loc.label));
      }
    }

    // B_{M/2}(n, t_n) inside the full-dimensional Voronoi cell.
    {
      bool ok = true;
      double worst = 0;
      for (int k = 0; k < 16; ++k) {
        auto v = unit_ball_point(d + 1, rng);
        std::vector<double> xi(d + 1);
        for (std::size_t i = 0; i < d; ++i) xi[i] = static_cast<double>(n[i]) + half_M * v[i];
        xi[d] = cell.t + half_M * v[d];
        auto dist2 = [&](const WeightedCenter& c) {
          double s2 = 0;
          for (std::size_t i = 0; i < d; ++i) s2 += std::pow(xi[i] - static_cast<double>(c.n[i]), 2);
          return s2 + std::pow(xi[d] - c.t, 2);
        };
        double own = 0;
        for (const auto& c : at_H.centers())
          if (c.n == n) own = dist2(c);
        for (const auto& c : at_H.centers()) {
          if (c.n == n) continue;
          const double excess = own - dist2(c);
          worst = std::max(worst, excess);
          if (excess > kGeoTol * std::max(1.0, own)) ok = false;
        }
      }
      t[3].record(ok, worst, where);
    }

    // Cut-down ball and displacement to the projective image.
    if (std::find(at_sH.labels().begin(), at_sH.labels().end(), n) != at_sH.labels().end() &&
        at_sH.region(n).has_interior()) {
      const double tn = at_sH.cell(n).t;
      for (const auto& a : boundary_samples(at_sH.region(n), rng)) {
        RealVector q = scaled(a, 1.0 / s);
        for (std::size_t i = 0; i < d; ++i) q[i] += (1.0 - 1.0 / s) * static_cast<double>(n[i]);
        const double depth = cell.depth(q);
        t[4].record(depth >= r_cut - kGeoTol, r_cut - depth, where);
        const double disp = (q - h_projective_image(a, n, tn, s, H)).norm();
        t[5].record(disp <= disp_bound, disp / disp_bound, where);
      }
    }

    // Continuity: a nearby point gives nearby tiles.
    {
      const TorusPoint y = nudge(x, nudge_size, rng);
      LocalTiling near(tiler, y, H, origin, reach);
      for (const auto& k : tiles) {
        const bool there = std::find(near.labels().begin(), near.labels().end(), k) !=
                               near.labels().end() &&
                           near.region(k).has_interior();
        if (there) {
          const double haus = geom::hausdorff_estimate(near.region(k), at_H.region(k), 64);
          t[6].record(haus < 1e-3, haus, describe(x, k));
        } else {
          const ConvexRegion& r = at_H.region(k);
          const double size = r.max_distance_from(r.centroid());
          t[6].record(size < 1e-3, size, describe(x, k) + " tile vanished");
        }
      }
    }
  });

  TilingReport report;
  for (std::size_t c = 0; c < kChecks; ++c) {
    PropertyCheck pc;
    pc.name = kNames[c];
    for (const auto& p : per) {
      const Tally& tl = p[c];
      pc.trials += tl.trials;
      pc.worst = std::max(pc.worst, tl.worst);
      if (tl.violations && pc.violations == 0) pc.first_failure = tl.first;
      pc.violations += tl.violations;
    }
    report.checks.push_back(pc);
  }
  return report;
}

}  // namespace zdtl::tiling
