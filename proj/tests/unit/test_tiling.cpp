#include <doctest.h>

#include <cmath>
#include <random>

#include "zdtl/tiling.hpp"
#include "zdtl/tiling_checks.hpp"

using namespace zdtl;
using namespace zdtl::dynsys;
using namespace zdtl::tiling;

namespace {

struct Fixture {
  RotationAction action;
  MarkerFunction marker;
  TilingConfig config;
  Tiler tiler;

  explicit Fixture(std::size_t d)
      : action(RotationAction::default_for(d)),
        marker(marker::make_marker(action, marker::default_geometry(d))),
        config(TilingConfig::defaults(marker, d)),
        tiler(action, marker, config) {}
};

// Weighted power distance in R^{d+1}, straight from the definition.
double lifted_dist2(const RealVector& a, double height, const WeightedCenter& c) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(a[i] - static_cast<double>(c.n[i]), 2);
  return s + std::pow(-height - c.t, 2);
}

}  // namespace

TEST_CASE("cross-section halfspaces of two centers") {
  std::vector<WeightedCenter> equal{{LatticeVector{0}, 1.0}, {LatticeVector{10}, 1.0}};
  auto cell = cross_section_halfspaces(equal, LatticeVector{0}, 37.0, 100.0);
  REQUIRE(cell.halfspaces.size() == 1);
  CHECK(cell.halfspaces[0].offset / cell.halfspaces[0].normal[0] == doctest::Approx(5.0));

  std::vector<WeightedCenter> heavy{{LatticeVector{0}, 1.0}, {LatticeVector{10}, 2.0}};
  cell = cross_section_halfspaces(heavy, LatticeVector{0}, 100.0, 100.0);
  REQUIRE(cell.halfspaces.size() == 1);
  CHECK(cell.halfspaces[0].normal[0] == 20.0);
  CHECK(cell.halfspaces[0].offset == doctest::Approx(100.0 + 102.0 * 102.0 - 101.0 * 101.0));
  CHECK(cell.halfspaces[0].offset / 20.0 == doctest::Approx(15.15));

  // the far cell's halfspace is the mirror image
  auto other = cross_section_halfspaces(heavy, LatticeVector{10}, 100.0, 100.0);
  CHECK(other.halfspaces[0].normal[0] == -20.0);
  CHECK(other.halfspaces[0].offset / other.halfspaces[0].normal[0] == doctest::Approx(15.15));

  auto missing = cross_section_halfspaces(heavy, LatticeVector{3}, 100.0, 100.0);
  CHECK(missing.empty);
  CHECK(missing.halfspaces.empty());
}

TEST_CASE("halfspaces agree with the lifted Voronoi inequality") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> lab(-6, 6);
  std::uniform_real_distribution<double> wt(1.0, 2.0), pos(-8.0, 8.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<WeightedCenter> cs;
    for (int k = 0; k < 6; ++k) cs.push_back({LatticeVector{lab(rng), lab(rng)}, wt(rng)});
    std::sort(cs.begin(), cs.end(), [](auto& a, auto& b) { return a.n < b.n; });
    cs.erase(std::unique(cs.begin(), cs.end(), [](auto& a, auto& b) { return a.n == b.n; }), cs.end());
    const double height = 30.0;
    auto cell = cross_section_halfspaces(cs, cs[0].n, height, 1e9);
    for (int k = 0; k < 50; ++k) {
      RealVector a{pos(rng), pos(rng)};
      bool lifted = true;
      for (const auto& c : cs)
        if (lifted_dist2(a, height, cs[0]) > lifted_dist2(a, height, c) + 1e-9) lifted = false;
      if (std::fabs(cell.depth(a)) < 1e-6) continue;
      CHECK(cell.contains(a, 0.0) == lifted);
    }
  }
}

TEST_CASE("projective image") {
  RealVector n_fixed{3.0, -2.0};
  auto fixed = h_projective_image(n_fixed, LatticeVector{3, -2}, 1.5, 1.5, 50.0);
  CHECK(fixed[0] == doctest::Approx(3.0));
  CHECK(fixed[1] == doctest::Approx(-2.0));
  CHECK(h_projective_image(RealVector{0.0}, LatticeVector{10}, 1.0, 2.0, 100.0)[0] ==
        doctest::Approx(1000.0 / 201.0));
  CHECK(h_projective_image(RealVector{4.0}, LatticeVector{0}, 2.0, 2.0, 100.0)[0] ==
        doctest::Approx(4.0 * 102.0 / 202.0));
}

TEST_CASE("origin cell of a two-center configuration") {
  // Equal weights at 0 and 10: the origin sits 5 from the bisector.
  std::vector<WeightedCenter> cs{{LatticeVector{0}, 1.0}, {LatticeVector{10}, 1.0}};
  auto cell = cross_section_halfspaces(cs, LatticeVector{0}, 20.0, 100.0);
  CHECK(cell.depth(RealVector{0.0}) == doctest::Approx(5.0));
}

TEST_CASE("config validation") {
  Fixture f(1);
  auto bad = f.config;
  bad.H = 10;
  CHECK_THROWS_AS(Tiler(f.action, f.marker, bad), std::invalid_argument);
  bad = f.config;
  bad.s = 2.0;
  CHECK_THROWS_AS(Tiler(f.action, f.marker, bad), std::invalid_argument);
  bad = f.config;
  bad.truncation_radius = 5;
  CHECK_THROWS_AS(Tiler(f.action, f.marker, bad), std::invalid_argument);
}

TEST_CASE("active centers match a direct filter") {
  Fixture f(1);
  for (const auto& x : sample_points(8, 20, 1)) {
    auto got = f.tiler.active_centers(x, 12.0);
    std::vector<WeightedCenter> expect;
    for (std::int64_t n = -12; n <= 12; ++n) {
      double phi = marker::phi_eval(f.marker, act(f.action, x, LatticeVector{n}));
      if (phi > kGeoTol) expect.push_back({LatticeVector{n}, 1.0 / phi});
    }
    REQUIRE(got.size() == expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].n == expect[i].n);
      CHECK(got[i].t == doctest::Approx(expect[i].t));
      CHECK(got[i].t >= 1.0);
    }
  }
  auto at_center = f.tiler.active_centers(f.marker.center(), 12.0);
  bool has_origin = false;
  for (const auto& c : at_center)
    if (c.n.is_zero()) has_origin = c.t == 1.0;
  CHECK(has_origin);
}

TEST_CASE("origin cell is equivariant and its depth is a true boundary distance") {
  for (std::size_t d : {1u, 2u}) {
    Fixture f(d);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::int64_t> step(-30, 30);
    for (const auto& x : sample_points(9, 40, d)) {
      Location here = origin_cell(f.tiler, x, f.config.H);
      LatticeVector m(d);
      for (std::size_t i = 0; i < d; ++i) m[i] = step(rng);
      // The origin of T^m x is the point m of the tiling of x.
      Location there = origin_cell(f.tiler, act(f.action, x, m), f.config.H);
      Location ref = LocalTiling(f.tiler, x, f.config.H, to_real(m), 0.0).locate(to_real(m));
      CHECK(here.on_boundary == (here.depth <= kGeoTol));
      CHECK(there.on_boundary == ref.on_boundary);
      if (!ref.on_boundary) {
        CHECK(there.label == ref.label - m);
        CHECK(there.depth == doctest::Approx(ref.depth).epsilon(1e-9));
      }
      if (here.on_boundary) continue;
      // The tile is a polygon/interval: compare with its boundary distance.
      LocalTiling local(f.tiler, x, f.config.H, RealVector(d, 0.0), 0.0);
      CHECK(local.region(here.label).dist_to_boundary(RealVector(d, 0.0)) ==
            doctest::Approx(here.depth).epsilon(1e-9));
    }
  }
}

TEST_CASE("debug double truncation agrees") {
  Fixture f(2);
  auto cfg = f.config;
  cfg.debug_double_truncation = true;
  Tiler debug(f.action, f.marker, cfg);
  for (const auto& x : sample_points(4, 10, 2)) {
    Location a = origin_cell(debug, x, cfg.H);
    Location b = origin_cell(f.tiler, x, cfg.H);
    CHECK(a.label == b.label);
  }
}

TEST_CASE("tiling invariants on the defaults") {
  for (std::size_t d : {1u, 2u}) {
    Fixture f(d);
    CHECK(cut_down_radius(f.tiler) > 0);
    auto report = check_tiling_invariants(f.tiler, 100 + d, 60);
    for (const auto& c : report.checks) {
      INFO(d, " ", c.name, " ", c.first_failure);
      CHECK(c.trials > 0);
      if (c.name != "continuity" || d == 1) CHECK(c.pass());
    }
    // d = 2 tiles move about 5e3 times faster than x; shrink the nudge.
    auto fine = check_tiling_invariants(f.tiler, 100 + d, 60, 1e-8);
    CHECK(fine.get("continuity").pass());
    CHECK(fine.get("continuity").worst < report.get("continuity").worst);
  }
}

TEST_CASE("svg rendering") {
  Fixture f(2);
  const TorusPoint x = sample_points(12, 1, 2).front();
  Viewport view;
  view.overlay_radius = 3;
  std::string a = render_svg(f.tiler, x, view);
  CHECK(a == render_svg(f.tiler, x, view));
  CHECK(a.find("<polygon") != std::string::npos);

  // Every viewport point lies in a drawn tile; points in two tiles hug an edge.
  const RealVector focus{0.0, 0.0};
  LocalTiling local(f.tiler, x, f.config.H, focus, std::hypot(10.0, 10.0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 500; ++k) {
    RealVector p{u(rng), u(rng)};
    int hits = 0;
    double edge = 1e9;
    for (const auto& n : local.labels()) {
      const auto& r = local.region(n);
      if (!r.has_interior()) continue;
      if (r.contains(p, kGeoTol)) {
        ++hits;
        edge = std::min(edge, r.dist_to_boundary(p));
      }
    }
    CHECK(hits >= 1);
    if (hits >= 2) CHECK(edge <= 1e-6);
  }

  Fixture g(1);
  CHECK_THROWS_WITH_AS(render_svg(g.tiler, sample_points(1, 1, 1).front(), view),
                       "render supports d=2 only", Error);
}
