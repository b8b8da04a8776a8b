#include "zdtl/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "zdtl/dynsys.hpp"
#include "zdtl/parallel.hpp"

namespace zdtl::lattice {

namespace {

constexpr double kChainTol = 1e-9;

double binomial(std::size_t n, std::size_t k) {
  double c = 1;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

// K = V cap I_N.
ConvexRegion clip_to_box(const ConvexBody& body, std::int64_t N) {
  const auto& r = body.region();
  const double n = static_cast<double>(N);
  if (body.dim() == 1) return ConvexRegion::interval(std::max(r.lo(), 0.0), std::min(r.hi(), n));
  std::vector<Point2> poly = r.vertices();
  poly = geom::clip_polygon(poly, {-1, 0}, 0);
  poly = geom::clip_polygon(poly, {1, 0}, n);
  poly = geom::clip_polygon(poly, {0, -1}, 0);
  poly = geom::clip_polygon(poly, {0, 1}, n);
  return ConvexRegion::polygon(std::move(poly));
}

double perimeter(const std::vector<Point2>& poly) {
  if (poly.size() < 2) return 0;
  double p = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    p += std::hypot(b[0] - a[0], b[1] - a[1]);
  }
  return p;
}

// Area of K minus E: each edge pushed inward by E.
double inner_parallel_area(const std::vector<Point2>& poly, double E) {
  std::vector<Point2> inner = poly;
  for (std::size_t i = 0; i < poly.size() && !inner.empty(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    if (len == 0) continue;
    const Point2 u{(b[1] - a[1]) / len, -(b[0] - a[0]) / len};  // outward for ccw
    inner = geom::clip_polygon(inner, u, u[0] * a[0] + u[1] * a[1] - E);
  }
  return ConvexRegion::polygon(inner).volume();
}

}  // namespace

ConvexBody ConvexBody::interval(double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("interval needs lo <= hi");
  ConvexBody b;
  b.dim_ = 1;
  b.halfspaces_ = {{RealVector{1.0}, hi}, {RealVector{-1.0}, -lo}};
  b.region_ = ConvexRegion::interval(lo, hi);
  b.has_region_ = true;
  return b;
}

ConvexBody ConvexBody::hull(const std::vector<Point2>& points) {
  if (points.empty()) throw std::invalid_argument("hull of no points");
  ConvexBody b;
  b.dim_ = 2;
  auto h = geom::convex_hull(points);
  if (h.size() >= 3) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      const auto& p = h[i];
      const auto& q = h[(i + 1) % h.size()];
      RealVector n{q[1] - p[1], -(q[0] - p[0])};
      b.halfspaces_.push_back({n, n[0] * p[0] + n[1] * p[1]});
    }
  }
  b.region_ = ConvexRegion::polygon(std::move(h));
  b.has_region_ = true;
  return b;
}

ConvexBody ConvexBody::box(std::size_t d, double lo, double hi) {
  if (d == 1) return interval(lo, hi);
  if (d == 2) return hull({{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}});
  ConvexBody b;
  b.dim_ = d;
  for (std::size_t i = 0; i < d; ++i) {
    RealVector e(d, 0.0);
    e[i] = 1.0;
    b.halfspaces_.push_back({e, hi});
    b.halfspaces_.push_back({-e, -lo});
  }
  return b;
}

const ConvexRegion& ConvexBody::region() const {
  if (!has_region_) throw Error("exact boundary distance supports d <= 2");
  return region_;
}

double dist_to_polygon_boundary(const ConvexBody& body, const RealVector& p) {
  if (body.dim() > 2) throw Error("exact boundary distance supports d <= 2");
  if (p.size() != body.dim()) throw std::invalid_argument("point dimension mismatch");
  return body.region().dist_to_boundary(p);
}

BoundaryCountReport count_near_boundary(const ConvexBody& body, double r, std::int64_t N,
                                        double epsilon) {
  if (N <= 0) throw std::invalid_argument("N must be positive");
  if (body.dim() > 2) throw Error("exact boundary distance supports d <= 2");
  const std::size_t d = body.dim();
  const auto rows = static_cast<std::size_t>(d == 1 ? 1 : N + 1);
  std::vector<std::int64_t> per_row(rows, 0);
  parallel_for(rows, [&](std::size_t row) {
    std::int64_t c = 0;
    for (std::int64_t i = 0; i <= N; ++i) {
      RealVector p = d == 1 ? RealVector{static_cast<double>(i)}
                            : RealVector{static_cast<double>(i), static_cast<double>(row)};
      if (body.region().dist_to_boundary(p) <= r) ++c;
    }
    per_row[row] = c;
  });
  BoundaryCountReport rep;
  rep.N = N;
  rep.r = r;
  for (auto c : per_row) rep.count += c;
  rep.fraction = static_cast<double>(rep.count) / std::pow(static_cast<double>(N), static_cast<double>(d));
  rep.steiner_bound = boundary_ratio(N, r, d);
  rep.epsilon = epsilon;
  rep.pass = rep.fraction < epsilon;
  return rep;
}

double unit_ball_volume(std::size_t k) {
  if (k == 0) return 1.0;
  if (k == 1) return 2.0;
  if (k == 2) return M_PI;
  return std::pow(M_PI, k / 2.0) / std::tgamma(k / 2.0 + 1.0);
}

double steiner_outer_volume_box(double N, double e, std::size_t d) {
  if (N < 0 || e < 0 || d < 1) throw std::invalid_argument("steiner volume needs N, e >= 0, d >= 1");
  double v = 0;
  for (std::size_t k = 0; k <= d; ++k)
    v += binomial(d, k) * std::pow(N, static_cast<double>(d - k)) * unit_ball_volume(k) *
         std::pow(e, static_cast<double>(k));
  return v;
}

double steiner_monte_carlo(double N, double e, std::size_t d, std::uint64_t seed,
                           std::size_t samples) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-e, N + e);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    double excess2 = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const double x = u(rng);
      const double out = x < 0 ? -x : (x > N ? x - N : 0.0);
      excess2 += out * out;
    }
    if (excess2 <= e * e) ++hits;
  }
  return std::pow(N + 2 * e, static_cast<double>(d)) * static_cast<double>(hits) /
         static_cast<double>(samples);
}

double boundary_ratio(std::int64_t N, double r, std::size_t d) {
  const double n = static_cast<double>(N);
  const double E = r + std::sqrt(static_cast<double>(d));
  const double core = std::pow(std::max(n - 2 * E, 0.0), static_cast<double>(d));
  return 2.0 * (steiner_outer_volume_box(n, E, d) - core) / std::pow(n, static_cast<double>(d));
}

std::int64_t find_N0(double epsilon, double r, std::size_t d) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (boundary_ratio(1, r, d) < epsilon) return 1;
  std::int64_t lo = 1, hi = 2;
  while (!(boundary_ratio(hi, r, d) < epsilon)) {
    lo = hi;
    hi *= 2;
    if (hi > (std::int64_t{1} << 50)) throw Error("N0 search overflow");
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (boundary_ratio(mid, r, d) < epsilon)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

BoundChain bound_chain(const ConvexBody& body, double r, std::int64_t N, std::int64_t count) {
  const std::size_t d = body.dim();
  const double E = r + std::sqrt(static_cast<double>(d));
  const ConvexRegion K = clip_to_box(body, N);
  BoundChain c;
  c.count = static_cast<double>(count);
  c.box_outer = steiner_outer_volume_box(static_cast<double>(N), E, d) -
                std::pow(static_cast<double>(N), static_cast<double>(d));
  if (!K.empty()) {
    if (d == 1) {
      c.outer = 2 * E;
      c.two_sided = c.outer + std::min(K.volume(), 2 * E);
    } else {
      c.outer = perimeter(K.vertices()) * E + M_PI * E * E;
      const double area = K.volume();
      const double inner = area > 0 ? area - inner_parallel_area(K.vertices(), E) : 0.0;
      c.two_sided = c.outer + inner;
    }
  }
  auto le = [](double a, double b) { return a <= b + kChainTol * std::max(1.0, std::fabs(b)); };
  c.link_count = le(c.count, c.two_sided);
  c.link_two_sided = le(c.two_sided, 2 * c.outer);
  c.link_outer = le(c.outer, c.box_outer);
  return c;
}

double two_sided_monte_carlo(const ConvexBody& body, std::int64_t N, double E, std::uint64_t seed,
                             std::size_t samples) {
  const ConvexRegion K = clip_to_box(body, N);
  if (K.empty() || samples == 0) return 0;
  const std::size_t d = body.dim();
  std::array<double, 2> lo{}, hi{};
  if (d == 1) {
    lo[0] = K.lo() - E;
    hi[0] = K.hi() + E;
  } else {
    lo = {1e300, 1e300};
    hi = {-1e300, -1e300};
    for (const auto& v : K.vertices())
      for (int i = 0; i < 2; ++i) {
        lo[i] = std::min(lo[i], v[i] - E);
        hi[i] = std::max(hi[i], v[i] + E);
      }
  }
  std::mt19937_64 rng(seed);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    RealVector p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
    if (K.dist_to_boundary(p) <= E) ++hits;
  }
  double vol = 1;
  for (std::size_t i = 0; i < d; ++i) vol *= hi[i] - lo[i];
  return vol * static_cast<double>(hits) / static_cast<double>(samples);
}

ConvexBody random_body(std::uint64_t seed, std::size_t index, std::int64_t N, std::size_t d) {
  if (d < 1 || d > 2) throw Error("random bodies support d <= 2");
  std::mt19937_64 rng(dynsys::stream_seed(seed, index));
  const double n = static_cast<double>(N);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Redraw until the body overlaps I_N in positive measure.
  while (true) {
    ConvexBody body;
    if (d == 1) {
      const double c = -0.2 * n + 1.4 * n * u(rng);
      const double len = 1.5 * n * u(rng);
      body = ConvexBody::interval(c - len / 2, c + len / 2);
    } else {
      const int k = 3 + static_cast<int>(rng() % 10);
      const double cx = n * u(rng), cy = n * u(rng);
      const double size = n * (0.02 + 1.48 * u(rng));
      std::vector<Point2> pts;
      for (int i = 0; i < k; ++i)
        pts.push_back({cx + size * (u(rng) - 0.5), cy + size * (u(rng) - 0.5)});
      body = ConvexBody::hull(pts);
    }
    if (clip_to_box(body, N).volume() > 0) return body;
  }
}

LemmaReport verify_lemma(std::uint64_t seed, std::size_t trials, double epsilon, double r,
                         std::size_t d) {
  if (d < 1 || d > 2) throw Error("exact boundary distance supports d <= 2");
  LemmaReport rep;
  rep.d = d;
  rep.epsilon = epsilon;
  rep.r = r;
  rep.N0 = find_N0(epsilon, r, d);
  rep.trials = trials;

  struct Outcome {
    BoundaryCountReport count;
    BoundChain chain;
  };
  std::vector<Outcome> out(trials);
  parallel_for(trials, [&](std::size_t i) {
    ConvexBody body = random_body(seed, i, rep.N0, d);
    out[i].count = count_near_boundary(body, r, rep.N0, epsilon);
    out[i].chain = bound_chain(body, r, rep.N0, out[i].count.count);
  });
  for (std::size_t i = 0; i < trials; ++i) {
    const auto& o = out[i];
    rep.worst_fraction = std::max(rep.worst_fraction, o.count.fraction);
    if (!o.count.pass) {
      ++rep.failures;
      if (rep.notes.size() < 10) {
        std::ostringstream os;
        os << "trial " << i << " fraction " << o.count.fraction;
        rep.notes.push_back(os.str());
      }
    }
    rep.link_count_failures += !o.chain.link_count;
    rep.link_two_sided_failures += !o.chain.link_two_sided;
    rep.link_outer_failures += !o.chain.link_outer;
  }
  return rep;
}

}  // namespace zdtl::lattice
