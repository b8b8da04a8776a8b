#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "zdtl/comparison.hpp"

using namespace zdtl;
using namespace zdtl::comparison;
using dynsys::RotationAction;
using dynsys::TorusPoint;

namespace {

TorusPoint pt(std::vector<double> c) { return TorusPoint::from_coords(c); }

// Orbit count by applying the action to every window point separately.
std::uint64_t brute_count(const RotationAction& a, const Predicate& pred, const TorusPoint& x,
                          std::int64_t M) {
  std::uint64_t c = 0;
  for (const auto& m : dynsys::lattice_box(a.rank(), M)) c += pred(act(a, x, -m));
  return c;
}

tiling::Tiler default_tiler(const RotationAction& a) {
  auto mk = marker::make_marker(a, marker::default_geometry(a.rank()));
  return tiling::Tiler(a, mk, tiling::TilingConfig::defaults(mk, a.rank()));
}

}  // namespace

TEST_CASE("eps cut") {
  CHECK(eps_cut(0.7, 0.2) == doctest::Approx(0.5));
  CHECK(eps_cut(0.1, 0.2) == 0.0);
  CHECK(eps_cut(0.3, 0.0) == 0.3);
}

TEST_CASE("open sets and their measure") {
  auto one = OpenSet::ball(pt({0.5, 0.5}), 0.1);
  auto m1 = measure_estimate(one, 1, 1000);
  REQUIRE(m1.exact);
  CHECK(*m1.exact == doctest::Approx(M_PI * 0.01).epsilon(1e-12));

  auto none = measure_estimate(OpenSet(2), 1, 1000);
  CHECK(*none.exact == 0.0);
  CHECK(none.estimate == 0.0);

  OpenSet two(2);
  two.add(pt({0.2, 0.2}), 0.1).add(pt({0.7, 0.6}), 0.15);
  CHECK(two.pairwise_disjoint());
  auto m2 = measure_estimate(two, 7, 100000);
  REQUIRE(m2.exact);
  CHECK(*m2.exact == doctest::Approx(M_PI * (0.01 + 0.0225)));
  const double sigma = std::sqrt(*m2.exact * (1 - *m2.exact) / 100000.0);
  CHECK(std::abs(m2.estimate - *m2.exact) < 3 * sigma);

  OpenSet overlap(1);
  overlap.add(pt({0.2}), 0.1).add(pt({0.25}), 0.1);
  CHECK_FALSE(overlap.pairwise_disjoint());
  CHECK_FALSE(measure_estimate(overlap, 1, 10).exact);

  // The interval wraps across 0.
  auto arc = OpenSet::interval(0.9, 0.2);
  CHECK(arc.contains(pt({0.95})));
  CHECK(arc.contains(pt({0.05})));
  CHECK_FALSE(arc.contains(pt({0.15})));
  CHECK(arc.phi(pt({0.0})) == doctest::Approx(0.1));
  CHECK(arc.phi(pt({0.5})) == 0.0);

  CHECK_THROWS_AS(OpenSet(2).add(pt({0.1, 0.1}), 0.0), std::invalid_argument);
}

TEST_CASE("orbit counts") {
  for (std::size_t d : {1u, 2u}) {
    auto a = RotationAction::default_for(d);
    const auto xs = dynsys::sample_points(3, 4, a.torus_dim());
    const OpenSet everything = OpenSet::ball(TorusPoint::zero(a.torus_dim()), 2.0);
    const OpenSet nothing(a.torus_dim());
    const OpenSet some = OpenSet::ball(TorusPoint::zero(a.torus_dim()), 0.3);
    const Predicate in_all = [&](const TorusPoint& y) { return everything.contains(y); };
    const Predicate in_none = [&](const TorusPoint& y) { return nothing.contains(y); };
    const Predicate in_some = [&](const TorusPoint& y) { return some.contains(y); };
    for (const auto& x : xs) {
      CHECK(orbit_density(a, in_all, x, 7) == 1.0);
      CHECK(orbit_density(a, in_none, x, 7) == 0.0);
      for (std::int64_t M : {1, 2, 5, 13})
        CHECK(orbit_count(a, in_some, x, M) == brute_count(a, in_some, x, M));
    }
  }

  auto a1 = RotationAction::default_1d();
  const auto quarter = OpenSet::interval(0.3, 0.25);
  const Predicate in_q = [&](const TorusPoint& y) { return quarter.contains(y); };
  for (const auto& x : dynsys::sample_points(5, 5, 1))
    CHECK(std::abs(orbit_density(a1, in_q, x, 10000) - 0.25) < 0.02);

  auto rp = rank_profile(a1, in_q, pt({0.1}), 40);
  CHECK(rp.N == 40);
  CHECK(rp.count == brute_count(a1, in_q, pt({0.1}), 40));
}

TEST_CASE("orbit capacity estimates") {
  auto a = RotationAction::default_1d();
  CHECK(ocap_estimate(a, OpenSet(1), 100, 1, 10).value == 0.0);
  CHECK(ocap_estimate(a, OpenSet::ball(pt({0.0}), 1.0), 100, 1, 10).value == 1.0);
  auto est = ocap_estimate(a, OpenSet::interval(0.4, 0.2), 1000, 11, 100);
  CHECK(est.value >= 0.18);
  CHECK(est.value <= 0.22);
  CHECK(est.N == 1000);
  CHECK(est.samples == 100);
  // A lower bound for the sup: never below the density of any sampled window.
  const auto E = OpenSet::interval(0.4, 0.2);
  for (const auto& x : dynsys::sample_points(11, 100, 1)) {
    std::uint64_t c = 0;
    for (std::int64_t n = 0; n < 1000; ++n) c += E.contains(act(a, x, LatticeVector{n}));
    CHECK(static_cast<double>(c) / 1000.0 <= est.value);
  }
}

TEST_CASE("density threshold search") {
  auto a = RotationAction::default_1d();
  const auto F = OpenSet::interval(0.5, 0.4);

  // E' of measure 0.05 against F of measure 0.4.
  const auto Ec = OpenSet::interval(0.1, 0.05);
  const Predicate small = [&](const TorusPoint& y) { return Ec.contains(y); };
  auto res = find_density_N(a, small, F, 0.25, 5, 60);
  CHECK(res.N >= 1);
  CHECK(res.records.size() == 180);
  const Predicate in_F = [&](const TorusPoint& y) { return F.contains(y); };
  for (const auto& r : res.records) {
    const auto x = pt(r.x);
    CHECK(r.count_E == brute_count(a, small, x, r.M));
    CHECK(r.count_F == brute_count(a, in_F, x, r.M));
    CHECK(4 * r.count_E < r.count_F);
  }
  // The search ends next to a failing N.
  if (res.N > 1) {
    CHECK(std::find(res.tried.begin(), res.tried.end(), res.N - 1) != res.tried.end());
    bool fails = false;
    for (const auto& x : dynsys::sample_points(5, 60, 1))
      for (std::int64_t M : {res.N, 2 * (res.N - 1), 4 * (res.N - 1)})
        if (!(4 * brute_count(a, small, x, M) < brute_count(a, in_F, x, M))) fails = true;
    CHECK(fails);
  }

  const auto big = OpenSet::interval(0.55, 0.12);
  const Predicate too_big = [&](const TorusPoint& y) { return big.contains(y); };
  CHECK_THROWS_WITH_AS(find_density_N(a, too_big, F, 0.25, 5, 30, 512),
                       "density inequality not certified", Error);

  const Predicate none = [](const TorusPoint&) { return false; };
  CHECK(find_density_N(a, none, OpenSet::ball(pt({0.0}), 1.0), 0.25, 5, 10).N == 1);
  CHECK_THROWS_AS(find_density_N(a, none, F, 1.0, 5, 10), std::invalid_argument);
}

TEST_CASE("lower density stays positive") {
  for (std::size_t d : {1u, 2u}) {
    auto a = RotationAction::default_for(d);
    const auto c = TorusPoint::from_coords(std::vector<double>(a.torus_dim(), 0.5));
    const auto F = OpenSet::ball(c, d == 1 ? 0.2 : 0.3);
    const auto E = OpenSet::ball(TorusPoint::zero(a.torus_dim()), d == 1 ? 0.02 : 0.05);
    const Predicate Ep = [&](const TorusPoint& y) { return E.phi(y) >= 0.005; };
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      auto res = find_density_N(a, Ep, F, 0.25, seed, 40);
      double lowest = INFINITY;
      for (const auto& r : res.records)
        lowest = std::min(lowest, r.count_F / (4.0 * std::pow(r.M, static_cast<double>(d))));
      CHECK(0.5 * lowest > 0);
    }
  }
}

TEST_CASE("rank domination") {
  CHECK(check_rank_domination(1, 5));
  CHECK_FALSE(check_rank_domination(2, 5));
  CHECK_FALSE(check_rank_domination(0, 4));
  CHECK(check_rank_domination(0, 5));
  CHECK(check_rank_domination(3, 12));
  CHECK_THROWS_AS(check_rank_domination(-1, 5), std::invalid_argument);
}

TEST_CASE("tower ranks by two counting paths") {
  auto a = RotationAction::default_1d();
  auto tiler = default_tiler(a);
  const towers::TowerSpec spec{tiler.config().H, 2};
  const auto F = OpenSet::interval(0.2, 0.5);
  const Predicate in_F = [&](const TorusPoint& y) { return F.contains(y); };
  std::size_t found = 0;
  for (std::uint64_t k = 0; k < 40 && found < 5; ++k) {
    const auto x = dynsys::sample_points(100 + k, 1, 1).front();
    const auto z = towers::base_point(tiler, spec, x, k);
    if (!z) continue;
    ++found;
    // Per floor: y = T^-m z must sit in floor m and nowhere else.
    std::uint64_t per_floor = 0;
    for (const auto& m : dynsys::lattice_box(1, spec.N)) {
      const auto y = act(a, *z, -m);
      std::vector<LatticeVector> floors;
      for (const auto& f : dynsys::lattice_box(1, spec.N))
        if (towers::omega_membership(tiler, spec, act(a, y, f))) floors.push_back(f);
      REQUIRE(floors.size() == 1);
      CHECK(floors[0] == m);
      per_floor += F.contains(y);
    }
    CHECK(per_floor == rank_profile(a, in_F, *z, spec.N).count);
  }
  CHECK(found > 0);
}

TEST_CASE("cover rank and the grouping bound") {
  auto a = RotationAction::default_1d();
  auto plan = towers::plan_two_towers(a, 3, 0.2);
  tiling::Tiler tiler(a, plan.marker, plan.config);
  const auto P = towers::two_tower_params(1, 3, 0.2, plan.config.s);
  const auto cover = towers::build_boundary_cover(tiler, P.R0, P.R1);
  const towers::TowerSpec spec1{plan.config.H, P.N1};
  const double s = plan.config.s;

  std::size_t found = 0, nonzero = 0;
  for (std::uint64_t k = 0; k < 400 && (found < 4 || nonzero < 2); ++k) {
    const auto x = dynsys::sample_points(200 + k, 1, 1).front();
    const auto z = towers::base_point(tiler, spec1, x, k);
    if (!z) continue;
    ++found;
    const auto union_rank = towers::cover_rank(tiler, cover, *z, P.N1);

    // Oracle: walk the column point by point.
    const double half = (P.N1 - 1) / 2.0;
    const tiling::LocalTiling local(tiler, *z, s * plan.config.H, RealVector{-half},
                                    half + cover.piece_radius() / s + 2.0);
    std::uint64_t direct = 0;
    for (std::int64_t m = 0; m < P.N1; ++m)
      direct += !towers::pieces_containing(local, cover, LatticeVector{-m}).empty();
    CHECK(union_rank == direct);
    nonzero += union_rank > 0;

    std::uint64_t sum = 0, biggest = 0;
    for (std::size_t g = 0; g < static_cast<std::size_t>(cover.modulus()); ++g) {
      const auto r = towers::cover_rank(tiler, cover, *z, P.N1, g);
      sum += r;
      biggest = std::max(biggest, r);
    }
    CHECK(union_rank <= sum);
    CHECK(sum <= cover.group_bound() * biggest);
  }
  CHECK(found > 0);
  CHECK(nonzero > 0);
}

TEST_CASE("comparison certificate") {
  auto a = RotationAction::default_1d();
  auto tiler = default_tiler(a);
  CertifyOptions opt;
  opt.samples = 60;

  SUBCASE("small E against large F") {
    auto cert = certify_comparison(tiler, OpenSet::interval(0.1, 0.05), OpenSet::interval(0.5, 0.4),
                                   0.01, 3, opt);
    CHECK(cert.overall);
    CHECK(cert.failed_stage().empty());
    CHECK(cert.replanned);
    CHECK(cert.N0 > cert.N_density);
    CHECK(std::pow(cert.N0, 1.0) * cert.delta > 1.0);
    CHECK(replay(cert));
    CHECK(cert.two_towers->group_count <= 3);
    for (const auto& r : cert.tower0) CHECK(check_rank_domination(r.rank_a, r.rank_b));

    // Tampering with one stored rank breaks the replay.
    auto bad = cert;
    bad.tower1.front().rank_a = static_cast<std::uint64_t>(cert.N1);
    CHECK_FALSE(replay(bad));
  }
  SUBCASE("E equal to F") {
    const auto F = OpenSet::interval(0.5, 0.4);
    auto cert = certify_comparison(tiler, F, F, 0.01, 3, opt);
    CHECK_FALSE(cert.overall);
    CHECK(cert.failed_stage() == "density");
    CHECK_FALSE(cert.stage("delta").ran);
    CHECK_FALSE(replay(cert));
  }
  SUBCASE("empty E") {
    auto cert = certify_comparison(tiler, OpenSet(1), OpenSet::interval(0.5, 0.4), 0.01, 3, opt);
    CHECK(cert.overall);
    REQUIRE_FALSE(cert.tower0.empty());
    for (const auto& r : cert.tower0) CHECK(r.rank_a == 0);
    CHECK(replay(cert));
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(certify_comparison(tiler, OpenSet(1), OpenSet(1), 0.0, 3, opt),
                    std::invalid_argument);
    CHECK_THROWS_AS(certify_comparison(tiler, OpenSet(2), OpenSet(1), 0.1, 3, opt),
                    std::invalid_argument);
  }
}
