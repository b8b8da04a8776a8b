#include "zdtl/marker.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "zdtl/parallel.hpp"
#include "zdtl/returns.hpp"

namespace zdtl::marker {

namespace {

constexpr std::size_t kMaxReportedViolations = 20;
constexpr double kGridBudget = 1e6;
constexpr double kPointBudget = 2e7;

std::int64_t isqrt(std::int64_t v) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

double unit_ball_volume(std::size_t k) {
  return std::pow(M_PI, k / 2.0) / std::tgamma(k / 2.0 + 1.0);
}

double ball_count(std::size_t d, double radius) {
  return unit_ball_volume(d) * std::pow(radius + 1.0, static_cast<double>(d));
}

// Centers c - n.A for |n| <= L, as raw fixed-point coordinates.
std::vector<std::array<std::uint64_t, kMaxDim>> cover_centers(const RotationAction& action,
                                                                const TorusPoint& c,
                                                                std::int64_t L) {
  std::vector<std::array<std::uint64_t, kMaxDim>> out;
  for (const auto& n : dynsys::lattice_ball(action.rank(), static_cast<double>(L))) {
    TorusPoint p = act(action, c, -n);
    std::array<std::uint64_t, kMaxDim> raw{};
    for (std::size_t j = 0; j < p.dim(); ++j) raw[j] = p.raw(j);
    out.push_back(raw);
  }
  return out;
}

bool circle_covered(const RotationAction& action, const MarkerGeometry& g, std::int64_t L) {
  auto centers = cover_centers(action, g.center, L);
  std::vector<std::uint64_t> pts;
  pts.reserve(centers.size());
  for (const auto& c : centers) pts.push_back(c[0]);
  std::sort(pts.begin(), pts.end());
  std::uint64_t widest = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) widest = std::max(widest, pts[i + 1] - pts[i]);
  // wrap-around gap; a single point leaves a full turn uncovered-by-others
  std::uint64_t wrap = pts.front() - pts.back();
  double widest_turns = std::ldexp(static_cast<double>(widest), -64);
  double wrap_turns = pts.size() == 1 ? 1.0 : std::ldexp(static_cast<double>(wrap), -64);
  return std::max(widest_turns, wrap_turns) <= 2.0 * g.r_inner;
}

// Grid points at spacing h must lie within r_inner - inflation of a center,
// with inflation at least the half-diagonal of a grid cell.
bool grid_covered(const RotationAction& action, const MarkerGeometry& g, std::int64_t L) {
  const std::size_t m = action.torus_dim();
  const auto k = static_cast<std::int64_t>(std::ceil(4.0 / g.r_inner));
  const double h = 1.0 / static_cast<double>(k);
  const double inflation = std::max(g.r_inner / 4.0, h * std::sqrt(static_cast<double>(m)) / 2.0);
  const double reach = g.r_inner - inflation;
  if (reach <= 0) return false;

  auto centers = cover_centers(action, g.center, L);
  const auto buckets = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(1.0 / reach)));
  auto bucket_of = [&](double v) {
    return std::min<std::int64_t>(buckets - 1, static_cast<std::int64_t>(v * buckets));
  };
  auto key = [&](const std::array<std::int64_t, kMaxDim>& b) {
    std::int64_t kk = 0;
    for (std::size_t j = 0; j < m; ++j) kk = kk * buckets + b[j];
    return kk;
  };
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    std::array<std::int64_t, kMaxDim> b{};
    for (std::size_t j = 0; j < m; ++j) b[j] = bucket_of(dynsys::from_fixed(centers[i][j]));
    grid[key(b)].push_back(i);
  }

  std::int64_t total = 1;
  for (std::size_t j = 0; j < m; ++j) total *= k;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::array<double, kMaxDim> p{};
    std::array<std::int64_t, kMaxDim> home{};
    std::int64_t rest = idx;
    for (std::size_t j = 0; j < m; ++j) {
      p[j] = (static_cast<double>(rest % k) + 0.5) * h;
      rest /= k;
      home[j] = bucket_of(p[j]);
    }
    TorusPoint q = TorusPoint::from_coords(std::span<const double>(p.data(), m));
    auto near = [&](std::size_t ci) {
      TorusPoint c = TorusPoint::from_raw(std::span<const std::uint64_t>(centers[ci].data(), m));
      return dynsys::torus_distance(q, c) <= reach;
    };
    bool hit = false;
    if (buckets < 3) {
      // the bucket neighbourhood would wrap onto itself; check everything
      for (std::size_t ci = 0; ci < centers.size() && !hit; ++ci) hit = near(ci);
    } else {
      std::array<std::int64_t, kMaxDim> off{};
      for (std::size_t j = 0; j < m; ++j) off[j] = -1;
      while (!hit) {
        std::array<std::int64_t, kMaxDim> b{};
        for (std::size_t j = 0; j < m; ++j) b[j] = ((home[j] + off[j]) % buckets + buckets) % buckets;
        if (auto it = grid.find(key(b)); it != grid.end())
          for (std::size_t ci : it->second)
            if ((hit = near(ci))) break;
        std::size_t j = 0;
        while (j < m && off[j] == 1) off[j++] = -1;
        if (j == m) break;
        ++off[j];
      }
    }
    if (!hit) return false;
  }
  return true;
}

}  // namespace

void MarkerGeometry::validate(const RotationAction& action) const {
  if (center.dim() != action.torus_dim()) throw std::invalid_argument("marker center dimension mismatch");
  if (!(r_inner > 0)) throw std::invalid_argument("r_inner must be positive");
  if (!(r_outer > r_inner)) throw std::invalid_argument("r_outer must exceed r_inner");
}

double phi_eval(const MarkerGeometry& g, const TorusPoint& x) {
  const double v = (g.r_outer - dynsys::torus_distance(x, g.center)) / (g.r_outer - g.r_inner);
  return std::clamp(v, 0.0, 1.0);
}

std::int64_t compute_M(const RotationAction& action, const MarkerGeometry& g) {
  g.validate(action);
  const TorusPoint origin = TorusPoint::zero(action.torus_dim());
  for (double R = 8; R <= 1e12; R *= 4) {
    dynsys::ReturnFinder finder(action, R, 2.0 * g.r_outer);
    std::int64_t best = 0;
    for (const auto& n : finder.find(origin, origin, true)) {
      if (n.is_zero()) continue;
      if (best == 0 || n.norm2() < best) best = n.norm2();
    }
    if (best == 0) continue;
    const std::int64_t M = isqrt(best - 1);
    if (M < 1) throw Error("marker radius too large");
    return M;
  }
  throw Error("separation search cap exceeded");
}

bool covers_torus(const RotationAction& action, const MarkerGeometry& g, std::int64_t L) {
  const std::size_t m = action.torus_dim();
  const double points = ball_count(action.rank(), static_cast<double>(L));
  if (m == 1 && points <= kPointBudget) return circle_covered(action, g, L);
  const double grid = std::pow(std::ceil(4.0 / g.r_inner), static_cast<double>(m));
  if (grid <= kGridBudget && points <= kPointBudget) return grid_covered(action, g, L);
  if (L == 0) return false;
  return dynsys::covering_bound(action, static_cast<double>(L), g.r_inner) <= 1.0;
}

std::int64_t compute_L(const RotationAction& action, const MarkerGeometry& g, std::int64_t cap) {
  g.validate(action);
  if (covers_torus(action, g, 0)) return 0;
  std::int64_t lo = 0, hi = 1;
  while (!covers_torus(action, g, hi)) {
    lo = hi;
    hi *= 2;
    if (lo >= cap) throw Error("covering cap exceeded");
    hi = std::min(hi, cap);
  }
  while (hi - lo > 1) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (covers_torus(action, g, mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

MarkerFunction make_marker(const RotationAction& action, const MarkerGeometry& g) {
  MarkerFunction f;
  f.geometry = g;
  f.M = compute_M(action, g);
  f.L = compute_L(action, g);
  return f;
}

MarkerGeometry default_geometry(std::size_t d) {
  MarkerGeometry g;
  g.center = TorusPoint::zero(d);
  if (d == 1) {
    g.r_inner = 0.04;
  } else if (d == 2) {
    g.r_inner = 0.1;
  } else {
    throw std::invalid_argument("no default marker for d = " + std::to_string(d));
  }
  g.r_outer = 2.0 * g.r_inner;
  return g;
}

double min_return_distance(const RotationAction& action, double radius) {
  if (radius < 1) throw std::invalid_argument("return radius must be >= 1");
  const std::size_t m = action.torus_dim();
  const TorusPoint origin = TorusPoint::zero(m);
  double rho = 0.5 * std::pow(unit_ball_volume(m) * ball_count(action.rank(), radius), -1.0 / m);
  for (int round = 0; round < 200; ++round) {
    dynsys::ReturnFinder finder(action, radius, rho);
    double best = -1;
    for (const auto& n : finder.find(origin, origin, true)) {
      if (n.is_zero()) continue;
      double dist = dynsys::torus_distance(act(action, origin, n), origin);
      if (best < 0 || dist < best) best = dist;
    }
    if (best >= 0) return best;
    rho *= 2;
  }
  throw Error("no return found");
}

MarkerGeometry plan_geometry(const RotationAction& action, std::int64_t M_required,
                             const TorusPoint& center) {
  MarkerGeometry g;
  g.center = center;
  g.r_outer = std::min(0.49, 0.5 * min_return_distance(action, static_cast<double>(M_required)) *
                                 (1.0 - 1e-6));
  g.r_inner = 0.5 * g.r_outer;
  return g;
}

TorusPoint sample_in_ball(std::uint64_t seed, const TorusPoint& center, double radius) {
  const std::size_t m = center.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::array<double, kMaxDim> off{};
  while (true) {
    double r2 = 0;
    for (std::size_t j = 0; j < m; ++j) {
      off[j] = u(rng);
      r2 += off[j] * off[j];
    }
    if (r2 < 1.0) break;
  }
  std::array<std::uint64_t, kMaxDim> raw{};
  for (std::size_t j = 0; j < m; ++j) raw[j] = center.raw(j) + dynsys::to_fixed(off[j] * radius);
  return TorusPoint::from_raw(std::span<const std::uint64_t>(raw.data(), m));
}

MarkerReport verify_marker(const RotationAction& action, const MarkerFunction& marker,
                           std::uint64_t seed, std::size_t samples) {
  const MarkerGeometry& g = marker.geometry;
  g.validate(action);
  const double full_tol = g.r_inner + kGeoTol * (g.r_outer - g.r_inner);
  dynsys::ReturnFinder sep(action, static_cast<double>(marker.M), g.r_outer);
  dynsys::ReturnFinder cov(action, static_cast<double>(marker.L), full_tol);

  std::vector<std::vector<MarkerViolation>> found(samples);
  parallel_for(samples, [&](std::size_t i) {
    TorusPoint x = sample_in_ball(dynsys::stream_seed(seed, 2 * i), g.center, g.r_outer);
    if (phi_eval(g, x) > 0) {
      for (const auto& n : sep.find(x, g.center)) {
        if (n.is_zero() || phi_eval(g, act(action, x, n)) <= 0) continue;
        found[i].push_back({1, x, n});
        break;
      }
    }
    TorusPoint y = dynsys::sample_points(dynsys::stream_seed(seed, 2 * i + 1), 1,
                                         action.torus_dim())
                       .front();
    if (cov.find(y, g.center, true).empty()) found[i].push_back({2, y, LatticeVector{}});
  });

  MarkerReport report;
  report.samples = samples;
  for (auto& per : found) {
    for (auto& v : per) {
      std::size_t& counter = v.condition == 1 ? report.separation_violations
                                              : report.covering_violations;
      if (counter < kMaxReportedViolations) report.violations.push_back(v);
      ++counter;
    }
  }
  return report;
}

}  // namespace zdtl::marker
