#include <doctest.h>

#include <cmath>
#include <set>

#include "zdtl/towers.hpp"

using namespace zdtl;
using namespace zdtl::towers;
using dynsys::RotationAction;
using tiling::TilingConfig;

namespace {

struct System {
  RotationAction action;
  marker::MarkerFunction marker;
  TilingConfig config;
};

System default_system(std::size_t d) {
  auto a = RotationAction::default_for(d);
  auto m = marker::make_marker(a, marker::default_geometry(d));
  return {a, m, TilingConfig::defaults(m, d)};
}

}  // namespace

TEST_CASE("omega predicate") {
  TowerSpec spec{100.0, 3};
  Location o;
  o.label = LatticeVector{0, 0};
  o.depth = 10;
  CHECK(omega_predicate(o, spec, 2));  // 10 > 3 sqrt 2
  o.label = LatticeVector{1, 0};
  CHECK_FALSE(omega_predicate(o, spec, 2));
  o.label = LatticeVector{3, 0};
  o.depth = 2;
  CHECK_FALSE(omega_predicate(o, spec, 2));
  o.depth = 4.25;
  CHECK(omega_predicate(o, spec, 2));
  o.label = LatticeVector{-3, 6};
  CHECK(omega_predicate(o, spec, 2));
  o.on_boundary = true;
  CHECK_FALSE(omega_predicate(o, spec, 2));

  Location weak;
  weak.label = LatticeVector{1, 2};
  weak.depth = 0.5;
  TowerSpec loose = spec;
  loose.skip_threshold = loose.skip_residue = true;
  CHECK(omega_predicate(weak, loose, 2));
  CHECK(residue(LatticeVector{-1, 7}, 3) == LatticeVector{2, 1});
}

TEST_CASE("boundary cover arithmetic") {
  BoundaryCover c1(1, 1.5, 2.0, 20.0);
  CHECK(c1.modulus() == 3);
  CHECK(c1.group_bound() == 3);
  CHECK(c1.group(LatticeVector{0}) == c1.group(LatticeVector{3}));
  CHECK(c1.group(LatticeVector{0}) != c1.group(LatticeVector{1}));
  CHECK(c1.group(LatticeVector{-2}) == c1.group(LatticeVector{1}));
  BoundaryCover c2(2, 1.5, 2.0, 20.0);
  CHECK(c2.group_bound() == 9);
  CHECK(c2.group_count() == 9);

  // Tie toward -inf: (1 - 1/2) 7 = 3.5 -> 3.
  BoundaryCover half(1, 1.999999999, 1.0, 50.0);
  BoundaryCover exact_half(1, 1.5, 1.0, 50.0);
  CHECK(exact_half.shift(LatticeVector{3}) == LatticeVector{1});
  CHECK(exact_half.shift(LatticeVector{-3}) == LatticeVector{-1});
  CHECK_THROWS(BoundaryCover(1, 2.0, 1.0, 5.0));

  // Shift within sqrt(d)/2 of (1 - 1/s) n, and preimages invert n - h(n).
  for (double s : {1.25, 1.5, 1.8}) {
    BoundaryCover c(2, s, 1.0, 15.0);
    std::map<LatticeVector, std::set<LatticeVector>> inverse;
    std::uint64_t count = 0;
    for (const auto& n : dynsys::lattice_ball(2, 16.0)) {
      if (!c.is_piece(n)) continue;
      ++count;
      const LatticeVector h = c.shift(n);
      const RealVector target = scaled(to_real(n), 1.0 - 1.0 / s);
      CHECK((target - to_real(h)).norm() <= std::sqrt(2.0) / 2.0 + 1e-12);
      inverse[n - h].insert(n);
    }
    CHECK(c.piece_count() == count);
    CHECK(c.pieces().size() == count);
    for (const auto& [v, ns] : inverse) {
      auto pre = c.preimages(v);
      CHECK(std::set<LatticeVector>(pre.begin(), pre.end()) == ns);
    }
    CHECK(c.preimages(LatticeVector{100, 0}).empty());
  }
  // Pieces sharing n - h(n) are close, so they sit in different groups.
  BoundaryCover c(2, 1.5, 1.0, 30.0);
  std::map<LatticeVector, std::vector<LatticeVector>> by_image;
  for (const auto& n : c.pieces()) by_image[n - c.shift(n)].push_back(n);
  for (const auto& [v, ns] : by_image)
    for (std::size_t i = 0; i < ns.size(); ++i)
      for (std::size_t j = i + 1; j < ns.size(); ++j) {
        CHECK((to_real(ns[i]) - to_real(ns[j])).norm() < 2.0 * std::sqrt(2.0));
        CHECK(c.group(ns[i]) != c.group(ns[j]));
      }
  BoundaryCover big(2, 1.5, 1.0, 188350.0);
  CHECK(big.piece_count() > 100000000000ULL);
  CHECK_THROWS_AS(big.pieces(), Error);
}

TEST_CASE("pieces containing a point agree with the definition") {
  for (std::size_t d : {1u, 2u}) {
    const auto sys = default_system(d);
    tiling::Tiler tiler(sys.action, sys.marker, sys.config);
    const double sH = sys.config.s * sys.config.H;
    const double R0 = 1.5;
    const BoundaryCover cover = build_boundary_cover(tiler, R0, 10.0);
    const auto all = cover.pieces();
    const auto xs = dynsys::sample_points(31 + d, d == 1 ? 6 : 2, sys.action.torus_dim());
    for (const auto& x : xs) {
      const std::vector<LatticeVector> qs =
          d == 1 ? std::vector<LatticeVector>{LatticeVector{0}, LatticeVector{7}, LatticeVector{-13}}
                 : std::vector<LatticeVector>{LatticeVector{0, 0}, LatticeVector{5, -4}};
      for (const auto& q : qs) {
        const tiling::LocalTiling local(tiler, x, sH, to_real(q),
                                        cover.piece_radius() / cover.s() + std::sqrt(double(d)) + 1.0);
        std::set<LatticeVector> fast;
        for (const auto& h : pieces_containing(local, cover, q)) fast.insert(h.n);
        // Direct: T^q x in T^h(U_n) iff T^(q - h) x in U_n.
        std::set<LatticeVector> slow;
        for (const auto& n : all) {
          const auto xp = act(sys.action, x, q - cover.shift(n));
          const tiling::LocalTiling at(tiler, xp, sH, RealVector(d, 0.0), 2.0 * R0);
          const auto& labels = at.labels();
          if (std::find(labels.begin(), labels.end(), n) == labels.end()) continue;
          const auto& r = at.region(n);
          if (r.has_interior() && r.dist_to_boundary(RealVector(d, 0.0)) < 2.0 * R0) slow.insert(n);
        }
        CHECK(fast == slow);
      }
    }
  }
}

TEST_CASE("towers on the default systems") {
  for (std::size_t d : {1u, 2u}) {
    const auto sys = default_system(d);
    tiling::Tiler tiler(sys.action, sys.marker, sys.config);
    for (std::int64_t N : {1, 2, 3}) {
      TowerSpec spec{sys.config.H, N};
      auto dj = verify_tower_disjoint(tiler, spec, 150, 5);
      CHECK(dj.pass());
      auto cv = verify_tower_coverage(tiler, spec, 150, 5);
      CHECK(cv.pass());
      CHECK(cv.targeted == 75);
      if (N == 1) CHECK(dj.uncovered_fraction == doctest::Approx(cv.uncovered_fraction));
    }
    TowerSpec bad{sys.config.H, 3};
    bad.skip_threshold = bad.skip_residue = true;
    auto neg = verify_tower_disjoint(tiler, bad, 50, 5);
    CHECK(neg.violations > 0);
    CHECK_FALSE(neg.examples.empty());
  }
  // N = 1: one floor, never two at once; every interior point is covered.
  const auto sys = default_system(1);
  tiling::Tiler tiler(sys.action, sys.marker, sys.config);
  auto one = verify_tower_coverage(tiler, TowerSpec{sys.config.H, 1}, 200, 9);
  CHECK(one.eligible > 0);
  CHECK(one.pass());
}

TEST_CASE("tower coverage on larger tiles") {
  auto a = RotationAction::default_for(2);
  auto m = marker::make_marker(a, marker::plan_geometry(a, 40, dynsys::TorusPoint::zero(2)));
  auto cfg = TilingConfig::defaults(m, 2);
  tiling::Tiler tiler(a, m, cfg);
  for (std::int64_t N : {2, 3}) {
    auto cv = verify_tower_coverage(tiler, TowerSpec{cfg.H, N}, 200, 3);
    CHECK(cv.eligible > 10);
    CHECK(cv.pass());
    CHECK(verify_tower_disjoint(tiler, TowerSpec{cfg.H, N}, 200, 3).pass());
  }
}

TEST_CASE("two towers") {
  auto a1 = RotationAction::default_for(1);
  auto p = two_tower_params(1, 3, 0.2, 1.5);
  CHECK(p.R0 == doctest::Approx(6.0));
  CHECK(p.r3 == doctest::Approx(16.5));
  // d = 1: N0 = floor(8 (r3 + 1) / eps) + 1 = 701.
  CHECK(p.N1 == 702);
  CHECK(p.R1 == doctest::Approx(1405.0));

  const auto sys = default_system(1);
  tiling::Tiler small(sys.action, sys.marker, sys.config);
  CHECK_THROWS_WITH_AS(build_two_towers(small, 3, 0.2, 1), doctest::Contains("increase M/H"), Error);

  auto plan = plan_two_towers(a1, 3, 0.2);
  tiling::Tiler t1(a1, plan.marker, plan.config);
  TwoTowerOptions opt;
  opt.samples = 300;
  auto r = build_two_towers(t1, 3, 0.2, 17, opt);
  CHECK(r.pass());
  CHECK(r.group_count == 3);
  CHECK(r.tower0.N == 3);
  CHECK(r.tower1.N == 702);
  CHECK(r.get("visit_fraction").trials == 30);
  CHECK(r.worst_visit_fraction < 0.2);
  CHECK(r.get("image_nbhd").trials > 0);

  opt.merge_groups = true;
  auto merged = build_two_towers(t1, 3, 0.2, 17, opt);
  CHECK(merged.get("groups_disjoint").violations > 0);

  auto a2 = RotationAction::default_for(2);
  auto plan2 = plan_two_towers(a2, 2, 0.3);
  tiling::Tiler t2(a2, plan2.marker, plan2.config);
  TwoTowerOptions opt2;
  opt2.samples = 60;
  auto r2 = build_two_towers(t2, 2, 0.3, 5, opt2);
  CHECK(r2.pass());
  CHECK(r2.group_count == 9);
}

TEST_CASE("orbit frequency against spatial density") {
  const auto sys = default_system(1);
  tiling::Tiler tiler(sys.action, sys.marker, sys.config);
  auto rep = check_ocap_control(tiler, sys.config.H, 2.0, 2000.0, 4, 3);
  CHECK(rep.window == 3999);
  CHECK(rep.orbit_max > 0);
  CHECK(rep.inflated_max >= rep.spatial_max);
  CHECK(rep.pass());
  // d = 2 on a short window.
  const auto sys2 = default_system(2);
  tiling::Tiler tiler2(sys2.action, sys2.marker, sys2.config);
  auto rep2 = check_ocap_control(tiler2, sys2.config.H, 1.0, 15.0, 2, 3);
  CHECK(rep2.pass());
}

TEST_CASE("uniform Rokhlin parameter search") {
  auto a = RotationAction::default_for(1);
  auto res = urp_search(a, 2, 0.05, 4, 300);
  REQUIRE(res.found);
  CHECK(res.steps.size() >= 2);
  CHECK(res.monotone);
  CHECK(res.steps.back().uncovered_fraction < 0.05);
  CHECK(res.steps.front().uncovered_fraction > res.steps.back().uncovered_fraction);
  for (const auto& st : res.steps) CHECK(st.disjoint_violations == 0);
}
