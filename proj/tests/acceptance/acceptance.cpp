// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "zdtl/comparison.hpp"
#include "zdtl/lattice.hpp"
#include "zdtl/tiling_checks.hpp"
#include "zdtl/towers.hpp"

#ifndef ZDTL_CLI_PATH
#define ZDTL_CLI_PATH "zdtl"
#endif

using namespace zdtl;
using dynsys::RotationAction;
using dynsys::TorusPoint;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Log {
  std::ostringstream os;
  bool first = true;
  template <class T>
  Log& operator<<(const T& v) {
    os << v;
    return *this;
  }
  void sep() {
    if (!first) os << "; ";
    first = false;
  }
};

tiling::Tiler default_tiler(std::size_t d) {
  auto a = RotationAction::default_for(d);
  auto m = marker::make_marker(a, marker::default_geometry(d));
  return tiling::Tiler(a, m, tiling::TilingConfig::defaults(m, d));
}

const char* kTilingProperties[] = {"equivariance", "weight_bound", "truncation_soundness", "ball_containment",
                                   "cut_down_containment", "projective_displacement"};

Outcome tiling_suite() {
  Outcome o;
  Log log;
  for (std::size_t d : {1u, 2u}) {
    const auto tiler = default_tiler(d);
    const auto rep = tiling::check_tiling_invariants(tiler, 2024 + d, 100);
    std::size_t bad = 0;
    for (const char* p : kTilingProperties) {
      const auto& c = rep.get(p);
      if (c.trials == 0 || !c.pass()) {
        ++bad;
        o.pass = false;
        log.sep();
        log << "d=" << d << " " << p << " violations=" << c.violations << " " << c.first_failure;
      }
    }
    log.sep();
    log << "d=" << d << " six properties " << (bad ? "fail" : "ok") << " equivariance worst "
        << rep.get("equivariance").worst;
  }
  o.detail = log.os.str();
  return o;
}

Outcome lattice_lemma() {
  Outcome o;
  Log log;
  std::size_t runs = 0;
  double worst = 0;
  for (std::size_t d : {1u, 2u})
    for (double eps : {0.2, 0.5})
      for (double r : {1.0, 2.0}) {
        const auto rep = lattice::verify_lemma(7 + runs, 200, eps, r, d);
        ++runs;
        worst = std::max(worst, rep.worst_fraction / eps);
        if (!rep.pass() || rep.trials != 200) {
          o.pass = false;
          log.sep();
          log << "d=" << d << " eps=" << eps << " r=" << r << " failures=" << rep.failures;
        }
        if (d == 1) {
          // Interval: 2 (steiner - (N - 2E)) / N = 8E / N < eps.
          const double E = r + 1;
          const auto closed = static_cast<std::int64_t>(std::floor(8 * E / eps)) + 1;
          if (rep.N0 != closed) {
            o.pass = false;
            log.sep();
            log << "d=1 eps=" << eps << " r=" << r << " N0=" << rep.N0 << " closed form " << closed;
          }
        }
      }
  const auto n33 = lattice::find_N0(0.5, 1, 1);
  if (n33 != 33) o.pass = false;
  log.sep();
  log << runs << " configurations x 200 bodies, worst fraction/eps " << worst << ", N0(1,0.5,d=1)="
      << n33;
  o.detail = log.os.str();
  return o;
}

Outcome steiner() {
  Outcome o;
  const double v = lattice::steiner_outer_volume_box(10, 1, 2);
  const double exact = 140 + std::numbers::pi;
  const double mc = lattice::steiner_monte_carlo(10, 1, 2, 99, 1'000'000);
  const double rel = std::abs(mc - exact) / exact;
  o.pass = std::abs(v - exact) <= 1e-10 && rel <= 0.01;
  std::ostringstream os;
  os.precision(15);
  os << "closed form " << v << " error " << std::abs(v - exact) << "; MC " << mc << " rel "
     << rel;
  o.detail = os.str();
  return o;
}

Outcome tower_suite() {
  Outcome o;
  Log log;
  for (std::size_t d : {1u, 2u}) {
    const auto tiler = default_tiler(d);
    const double H = tiler.config().H;
    // Tiles of the default markers are small, so for larger N few or no samples
    // have dist0 > 2 N sqrt d; a marker with M = 40 N gives the coverage check teeth.
    for (std::int64_t N : {2, 3, 4}) {
      towers::TowerSpec spec{H, N};
      const auto dj = towers::verify_tower_disjoint(tiler, spec, 1000, 31 + N);
      const auto cv = towers::verify_tower_coverage(tiler, spec, 1000, 37 + N);
      log.sep();
      log << "d=" << d << " N=" << N << " disjoint " << dj.violations << " coverage "
          << cv.violations << "/" << cv.eligible << " eligible";
      if (!dj.pass() || !cv.pass()) o.pass = false;

      towers::TowerSpec loose = spec;
      loose.skip_threshold = loose.skip_residue = true;
      const auto neg = towers::verify_tower_disjoint(tiler, loose, 1000, 41 + N);
      log << ", control " << neg.violations;
      if (neg.violations == 0) o.pass = false;

      const auto a = RotationAction::default_for(d);
      const auto m = marker::make_marker(a, marker::plan_geometry(a, 40 * N, TorusPoint::zero(d)));
      const auto cfg = tiling::TilingConfig::defaults(m, d);
      const tiling::Tiler big(a, m, cfg);
      const auto cv2 = towers::verify_tower_coverage(big, {cfg.H, N}, 1000, 47 + N);
      const auto dj2 = towers::verify_tower_disjoint(big, {cfg.H, N}, 1000, 53 + N);
      log << ", large tiles coverage " << cv2.violations << "/" << cv2.eligible << " disjoint "
          << dj2.violations;
      if (!cv2.pass() || !dj2.pass() || cv2.eligible == 0) o.pass = false;
    }
  }
  o.detail = log.os.str();
  return o;
}

Outcome two_towers() {
  Outcome o;
  Log log;
  struct Case {
    std::size_t d;
    std::int64_t N;
    double eps;
    std::size_t max_groups;
  };
  for (const Case c : {Case{1, 3, 0.2, 3}, Case{2, 2, 0.3, 9}}) {
    const auto a = RotationAction::default_for(c.d);
    const auto plan = towers::plan_two_towers(a, c.N, c.eps);
    const tiling::Tiler tiler(a, plan.marker, plan.config);
    const auto res = towers::build_two_towers(tiler, c.N, c.eps, 17);
    log.sep();
    log << "d=" << c.d << " N=" << c.N << " eps=" << c.eps << " groups " << res.group_count;
    for (const auto& ch : res.checks) {
      log << " " << ch.name << "=" << (ch.pass() ? "ok" : "FAIL");
      if (!ch.pass()) o.pass = false;
    }
    log << " visit " << res.worst_visit_fraction;
    if (res.group_count > c.max_groups || res.checks.empty()) o.pass = false;
  }
  o.detail = log.os.str();
  return o;
}

Outcome certificate() {
  using comparison::OpenSet;
  Outcome o;
  Log log;
  const auto tiler = default_tiler(1);
  // mu(E) = 0.05 <= 0.25 * 0.4 * 0.8 = 0.08
  const auto E = OpenSet::interval(0.1, 0.05);
  const auto F = OpenSet::interval(0.5, 0.4);
  comparison::CertifyOptions opt;
  opt.samples = 100;
  const auto good = comparison::certify_comparison(tiler, E, F, 0.01, 5, opt);
  const bool good_ok = good.overall && comparison::replay(good);
  log.sep();
  log << "mu(E)=0.05 mu(F)=0.4 overall=" << good.overall << " N=" << good.N_density
      << " delta=" << good.delta << " N0=" << good.N0 << " N1=" << good.N1;
  if (!good_ok) {
    o.pass = false;
    log << " failed at " << good.failed_stage();
  }

  const auto same = OpenSet::interval(0.3, 0.2);
  const auto bad = comparison::certify_comparison(tiler, same, same, 0.01, 5, opt);
  log.sep();
  log << "E=F overall=" << bad.overall << " failed at " << bad.failed_stage();
  if (bad.overall || bad.failed_stage() != "density") o.pass = false;

  const bool r1 = comparison::check_rank_domination(1, 5);
  const bool r2 = comparison::check_rank_domination(2, 5);
  const bool r3 = comparison::check_rank_domination(0, 4);
  log.sep();
  log << "rank domination (1,5)=" << r1 << " (2,5)=" << r2 << " (0,4)=" << r3;
  if (!r1 || r2 || r3) o.pass = false;
  o.detail = log.os.str();
  return o;
}

Outcome ocap() {
  Outcome o;
  const auto est = comparison::ocap_estimate(RotationAction::default_1d(),
                                             comparison::OpenSet::interval(0.4, 0.2), 1000, 3, 100);
  o.pass = est.value >= 0.18 && est.value <= 0.22;
  std::ostringstream os;
  os << "ocap " << est.value << " (N=" << est.N << ", " << est.samples << " samples)";
  o.detail = os.str();
  return o;
}

struct Captured {
  int status = -1;
  std::string out;
};

Captured run_cli(const std::string& args) {
  Captured c;
  const std::string cmd = std::string(ZDTL_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return c;
  std::array<char, 65536> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) c.out.append(buf.data(), n);
  c.status = pclose(p);
  return c;
}

Outcome determinism() {
  Outcome o;
  Log log;
  const std::vector<std::string> runs = {
      "marker --d 2",
      "tiling --d 1 --trials 30",
      "tiling --d 2 --format svg --x 0.3,0.6",
      "tower --d 2 --N 3 --samples 300",
      "two-towers --d 1 --N 3 --epsilon 0.2 --samples 300",
      "lattice --d 2 --epsilon 0.3 --r 2 --trials 50",
      "ocap --set 0.4:0.1 --N 1000 --samples 100",
      "certify --E 0.125:0.025 --F 0.7:0.2 --epsilon 0.01 --samples 100",
  };
  for (const auto& args : runs) {
    const auto a = run_cli(args + " --seed 7");
    const auto b = run_cli(args + " --seed 7");
    const bool same = a.status == b.status && a.out == b.out && !a.out.empty();
    if (!same) {
      o.pass = false;
      log.sep();
      log << "'" << args << "' differs (" << a.out.size() << " vs " << b.out.size() << " bytes)";
    }
  }
  log.sep();
  log << runs.size() << " commands run twice";
  o.detail = log.os.str();
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "tiling invariant suite", 60, tiling_suite},
      {2, "lattice lemma", 120, lattice_lemma},
      {3, "steiner volume", 0, steiner},
      {4, "tower suite", 0, tower_suite},
      {5, "two towers", 0, two_towers},
      {6, "comparison certificate", 0, certificate},
      {7, "ocap sanity", 0, ocap},
      {8, "cli determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + std::to_string(static_cast<int>(c.budget_s)) + " s budget";
    }
    std::printf("[%s] %d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
