#include "zdtl/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "zdtl/lattice.hpp"
#include "zdtl/parallel.hpp"
#include "zdtl/tiling_checks.hpp"

namespace zdtl::comparison {

namespace {

std::vector<double> coords(const TorusPoint& x) { return x.coords(); }

double ipow(double b, std::size_t e) {
  double r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= b;
  return r;
}

// Calls fn(m, y) with y = T^(sign m) x for m over {0..M-1}^d, stepping the
// fixed-point coordinates instead of recomputing every product.
template <class F>
void walk_box(const RotationAction& action, const TorusPoint& x, std::int64_t M, int sign, F&& fn) {
  const std::size_t d = action.rank(), m = action.torus_dim();
  if (M < 1) throw std::invalid_argument("window size must be >= 1");
  std::array<std::array<std::uint64_t, kMaxDim>, kMaxDim> step{};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < m; ++j)
      step[i][j] = sign > 0 ? action.increment_raw(i, j) : 0 - action.increment_raw(i, j);
  std::array<std::uint64_t, kMaxDim> raw{};
  for (std::size_t j = 0; j < m; ++j) raw[j] = x.raw(j);
  LatticeVector idx(d, 0);
  const auto wrap = static_cast<std::uint64_t>(M - 1);
  while (true) {
    fn(idx, TorusPoint::from_raw(std::span<const std::uint64_t>(raw.data(), m)));
    std::size_t i = 0;
    while (i < d && idx[i] == M - 1) {
      idx[i] = 0;
      for (std::size_t j = 0; j < m; ++j) raw[j] -= wrap * step[i][j];
      ++i;
    }
    if (i == d) return;
    ++idx[i];
    for (std::size_t j = 0; j < m; ++j) raw[j] += step[i][j];
  }
}

void check_dims(const RotationAction& action, const OpenSet& set, const char* what) {
  if (set.torus_dim() != action.torus_dim())
    throw std::invalid_argument(std::string(what) + " lives in the wrong torus dimension");
}

}  // namespace

double eps_cut(double value, double epsilon) { return std::max(value - epsilon, 0.0); }

OpenSet OpenSet::ball(const TorusPoint& center, double radius) {
  OpenSet s(center.dim());
  s.add(center, radius);
  return s;
}

OpenSet OpenSet::interval(double a, double length) {
  const double c = a + length / 2.0;
  return ball(TorusPoint::from_coords(std::vector<double>{c}), length / 2.0);
}

OpenSet& OpenSet::add(const TorusPoint& center, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("ball radius must be positive");
  if (center.dim() != m_) throw std::invalid_argument("ball center has the wrong dimension");
  balls_.push_back({center, radius});
  return *this;
}

bool OpenSet::contains(const TorusPoint& x) const {
  for (const auto& b : balls_)
    if (dynsys::torus_distance(x, b.center) < b.radius) return true;
  return false;
}

double OpenSet::phi(const TorusPoint& x) const {
  double best = 0;
  for (const auto& b : balls_) best = std::max(best, b.radius - dynsys::torus_distance(x, b.center));
  return best;
}

bool OpenSet::embeddable() const {
  return std::all_of(balls_.begin(), balls_.end(), [](const Ball& b) { return b.radius < 0.5; });
}

bool OpenSet::pairwise_disjoint() const {
  for (std::size_t i = 0; i < balls_.size(); ++i)
    for (std::size_t j = i + 1; j < balls_.size(); ++j)
      if (dynsys::torus_distance(balls_[i].center, balls_[j].center) <
          balls_[i].radius + balls_[j].radius)
        return false;
  return true;
}

MeasureEstimate measure_estimate(const OpenSet& set, std::uint64_t seed, std::size_t samples) {
  MeasureEstimate out;
  out.samples = samples;
  const std::size_t m = set.torus_dim();
  if (set.embeddable() && set.pairwise_disjoint()) {
    double v = 0;
    for (const auto& b : set.balls()) v += lattice::unit_ball_volume(m) * ipow(b.radius, m);
    out.exact = v;
  }
  if (samples == 0) return out;
  const auto pts = dynsys::sample_points(seed, samples, m);
  std::size_t hits = 0;
  for (const auto& p : pts) hits += set.contains(p);
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  out.estimate = p;
  out.std_error = std::sqrt(p * (1 - p) / static_cast<double>(samples));
  return out;
}

std::uint64_t orbit_count(const RotationAction& action, const Predicate& pred, const TorusPoint& x,
                          std::int64_t M) {
  std::uint64_t count = 0;
  walk_box(action, x, M, -1, [&](const LatticeVector&, const TorusPoint& y) { count += pred(y); });
  return count;
}

double orbit_density(const RotationAction& action, const Predicate& pred, const TorusPoint& x,
                     std::int64_t M) {
  return static_cast<double>(orbit_count(action, pred, x, M)) /
         ipow(static_cast<double>(M), action.rank());
}

RankProfile rank_profile(const RotationAction& action, const Predicate& support,
                         const TorusPoint& x, std::int64_t N) {
  return {coords(x), N, orbit_count(action, support, x, N)};
}

OcapEstimate ocap_estimate(const RotationAction& action, const OpenSet& set, std::int64_t N,
                           std::uint64_t seed, std::size_t samples) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  check_dims(action, set, "set");
  const auto pts = dynsys::sample_points(seed, samples, action.torus_dim());
  std::vector<std::uint64_t> counts(samples, 0);
  parallel_for(samples, [&](std::size_t i) {
    std::uint64_t c = 0;
    walk_box(action, pts[i], N, +1,
             [&](const LatticeVector&, const TorusPoint& y) { c += set.contains(y); });
    counts[i] = c;
  });
  OcapEstimate out;
  out.N = N;
  out.samples = samples;
  out.seed = seed;
  const std::uint64_t best = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  out.value = static_cast<double>(best) / ipow(static_cast<double>(N), action.rank());
  return out;
}

DensityResult find_density_N(const RotationAction& action, const Predicate& E_closed,
                             const OpenSet& F, double ratio, std::uint64_t seed,
                             std::size_t samples, std::int64_t M_cap) {
  if (!(ratio > 0 && ratio < 1)) throw std::invalid_argument("ratio must lie in (0, 1)");
  if (samples == 0) throw std::invalid_argument("samples must be positive");
  check_dims(action, F, "F");
  const auto pts = dynsys::sample_points(seed, samples, action.torus_dim());
  DensityResult res;

  // Records for the windows N+1, 2N, 4N of every point, all read off one walk
  // of the 4N box: a point m lies in window M iff max_i m_i < M.
  auto evaluate = [&](std::int64_t N, std::vector<DensityRecord>& out) {
    const std::int64_t windows[3] = {N + 1, 2 * N, 4 * N};
    out.assign(samples * 3, {});
    parallel_for(samples, [&](std::size_t i) {
      std::uint64_t cE[3] = {0, 0, 0}, cF[3] = {0, 0, 0};
      walk_box(action, pts[i], 4 * N, -1, [&](const LatticeVector& m, const TorusPoint& y) {
        const bool e = E_closed(y), f = F.contains(y);
        if (!e && !f) return;
        std::int64_t mx = 0;
        for (auto v : m) mx = std::max(mx, v);
        for (int k = 0; k < 3; ++k)
          if (mx < windows[k]) cE[k] += e, cF[k] += f;
      });
      for (int k = 0; k < 3; ++k) out[3 * i + k] = {coords(pts[i]), windows[k], cE[k], cF[k]};
    });
    return std::all_of(out.begin(), out.end(), [&](const DensityRecord& r) {
      return static_cast<double>(r.count_E) < ratio * static_cast<double>(r.count_F);
    });
  };

  std::vector<DensityRecord> recs;
  std::int64_t lo = 0, hi = 1;  // lo fails (0 stands for "none tested"), hi is the candidate
  while (true) {
    if (hi > M_cap) throw Error("density inequality not certified");
    res.tried.push_back(hi);
    if (evaluate(hi, recs)) break;
    lo = hi;
    hi *= 2;
  }
  res.records = recs;
  while (hi - lo > 1 && lo > 0) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    res.tried.push_back(mid);
    if (evaluate(mid, recs)) {
      hi = mid;
      res.records = recs;
    } else {
      lo = mid;
    }
  }
  res.N = hi;
  for (const auto& r : res.records)
    res.worst_ratio = std::max(res.worst_ratio, r.count_F ? static_cast<double>(r.count_E) /
                                                               static_cast<double>(r.count_F)
                                                         : (r.count_E ? INFINITY : 0.0));
  return res;
}

bool check_rank_domination(std::int64_t rank_a, std::int64_t rank_b) {
  if (rank_a < 0 || rank_b < 0) throw std::invalid_argument("ranks must be nonnegative");
  return 4 * rank_a <= rank_b && rank_b > 4;
}

const ComparisonStage& ComparisonCertificate::stage(const std::string& name) const {
  for (const auto& s : stages)
    if (s.name == name) return s;
  throw std::out_of_range("no stage named " + name);
}

std::string ComparisonCertificate::failed_stage() const {
  for (const auto& s : stages)
    if (!s.ran || !s.pass) return s.name;
  return "";
}

namespace {

const char* kStages[] = {"E_prime",      "density",     "delta",       "two_towers",
                         "cut_function", "first_tower", "second_tower"};

double min_F_density(const std::vector<DensityRecord>& recs, std::size_t d) {
  double best = INFINITY;
  for (const auto& r : recs)
    best = std::min(best, static_cast<double>(r.count_F) /
                              (4.0 * ipow(static_cast<double>(r.M), d)));
  return recs.empty() ? 0.0 : best;
}

bool first_tower_ok(const RankRecord& r, double delta, std::int64_t N0, std::size_t d) {
  const double vol = ipow(static_cast<double>(N0), d);
  return check_rank_domination(static_cast<std::int64_t>(r.rank_a),
                               static_cast<std::int64_t>(r.rank_b)) &&
         static_cast<double>(r.rank_b) / (4.0 * vol) > delta && delta > 1.0 / vol;
}

bool second_tower_ok(const RankRecord& r, double delta, std::int64_t N1, std::size_t d) {
  const double vol = ipow(static_cast<double>(N1), d);
  return static_cast<double>(r.rank_a) < vol * delta &&
         vol * delta < static_cast<double>(r.rank_b) / 4.0 && delta > 1.0 / vol;
}

// A base point of `spec` on the orbit of a fresh random point; a few draws
// are allowed since a random origin tile can be too thin to hold one.
std::optional<TorusPoint> draw_base_point(const Tiler& tiler, const towers::TowerSpec& spec,
                                          std::uint64_t seed) {
  for (std::uint64_t k = 0; k < 20; ++k) {
    const std::uint64_t s = dynsys::stream_seed(seed, k);
    const TorusPoint x = dynsys::sample_points(s, 1, tiler.action().torus_dim()).front();
    if (auto z = towers::base_point(tiler, spec, x, s ^ 0x9e3779b97f4a7c15ULL)) return z;
  }
  return std::nullopt;
}

}  // namespace

ComparisonCertificate certify_comparison(const Tiler& tiler, const OpenSet& E, const OpenSet& F,
                                         double epsilon, std::uint64_t seed,
                                         const CertifyOptions& options) {
  const RotationAction& action = tiler.action();
  check_dims(action, E, "E");
  check_dims(action, F, "F");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (options.samples == 0) throw std::invalid_argument("samples must be positive");
  const std::size_t d = action.rank();
  const std::size_t samples = options.samples;

  ComparisonCertificate cert;
  cert.E = E;
  cert.F = F;
  cert.epsilon = epsilon;
  cert.seed = seed;
  cert.samples = samples;
  cert.d = d;
  for (const char* n : kStages) {
    ComparisonStage st;
    st.name = n;
    cert.stages.push_back(st);
  }
  auto stage = [&](const char* n) -> ComparisonStage& {
    for (auto& s : cert.stages)
      if (s.name == n) return s;
    throw std::logic_error("unknown stage");
  };
  auto finish = [&] {
    cert.overall = std::all_of(cert.stages.begin(), cert.stages.end(),
                               [](const ComparisonStage& s) { return s.ran && s.pass; });
    return cert;
  };

  // (i) E' = {phi_E >= epsilon}, closed and inside E.
  {
    auto& st = stage("E_prime");
    std::ostringstream os;
    os << "{x : phi_E(x) >= " << epsilon << "}";
    cert.E_prime = os.str();
    const auto mE = measure_estimate(E, dynsys::stream_seed(seed, 1), 20000);
    const auto mF = measure_estimate(F, dynsys::stream_seed(seed, 2), 20000);
    st.parameters = {{"mu_E", mE.exact.value_or(mE.estimate)},
                     {"mu_F", mF.exact.value_or(mF.estimate)}};
    // phi_E peaks at a ball center with value r, so E' has interior iff some r > epsilon.
    const bool trivial = std::none_of(E.balls().begin(), E.balls().end(),
                                      [&](const Ball& b) { return b.radius > epsilon; });
    if (trivial) st.detail = "E' has empty interior at this epsilon; the comparison is trivial";
    st.ran = st.pass = true;
  }

  const Predicate E_closed = [&](const TorusPoint& y) { return E.phi(y) >= epsilon; };

  // (ii) N with count_E' < count_F / 4 on every tested window.
  {
    auto& st = stage("density");
    st.ran = true;
    try {
      const auto res = find_density_N(action, E_closed, F, 0.25, dynsys::stream_seed(seed, 3),
                                      samples, options.M_cap);
      cert.N_density = res.N;
      cert.density_records = res.records;
      st.pass = true;
      st.worst_case = res.worst_ratio;
      st.parameters = {{"N", static_cast<double>(res.N)}, {"ratio", 0.25},
                       {"M_cap", static_cast<double>(options.M_cap)}};
    } catch (const Error& e) {
      st.pass = false;
      st.detail = e.what();
      return finish();
    }
  }

  // (iii) delta: half the smallest F density (over 4) on the same windows.
  {
    auto& st = stage("delta");
    st.ran = true;
    cert.delta = 0.5 * min_F_density(cert.density_records, d);
    st.worst_case = cert.delta;
    st.pass = cert.delta > 0;
    if (!st.pass) {
      st.detail = "some sampled window of length > N misses F";
      return finish();
    }
    // N0 must exceed N and delta^(-1/d) strictly.
    cert.N0 = std::max<std::int64_t>(
        cert.N_density + 1,
        static_cast<std::int64_t>(std::floor(std::pow(1.0 / cert.delta, 1.0 / d))) + 1);
    st.parameters = {{"delta", cert.delta}, {"N0", static_cast<double>(cert.N0)}};
  }

  // (iv) the two towers for (N0, delta).
  std::optional<Tiler> planned;
  const Tiler* active = &tiler;
  std::optional<towers::BoundaryCover> cover;
  {
    auto& st = stage("two_towers");
    st.ran = true;
    try {
      const auto params = towers::two_tower_params(d, cert.N0, cert.delta, tiler.config().s);
      cert.N1 = params.N1;
      if (tiling::cut_down_radius(tiler) < params.rho && options.replan_marker) {
        const auto plan = towers::plan_two_towers(action, cert.N0, cert.delta, tiler.config().s);
        planned.emplace(action, plan.marker, plan.config);
        active = &*planned;
        cert.replanned = true;
      }
      cert.marker_M = active->marker().M;
      cert.marker_L = active->marker().L;
      cert.H = active->config().H;
      towers::TwoTowerOptions to;
      to.samples = samples;
      cert.two_towers = towers::build_two_towers(*active, cert.N0, cert.delta,
                                                 dynsys::stream_seed(seed, 4), to);
      cover.emplace(towers::build_boundary_cover(*active, params.R0, params.R1));
      st.pass = cert.two_towers->pass();
      st.worst_case = cert.two_towers->worst_visit_fraction;
      if (!st.pass)
        for (const auto& c : cert.two_towers->checks)
          if (!c.pass()) {
            st.detail = c.name + ": " + c.first_failure;
            break;
          }
      st.parameters = {{"N0", static_cast<double>(cert.N0)},
                       {"N1", static_cast<double>(cert.N1)},
                       {"epsilon", cert.delta},
                       {"M", static_cast<double>(cert.marker_M)},
                       {"L", static_cast<double>(cert.marker_L)},
                       {"H", cert.H},
                       {"groups", static_cast<double>(cert.two_towers->group_count)},
                       {"group_bound", static_cast<double>(cert.two_towers->group_bound)}};
    } catch (const Error& e) {
      st.pass = false;
      st.detail = e.what();
    }
    if (!st.pass) return finish();
  }

  // chi_0 = 1 off the union of the U_k: points off tower 0 lie in some U_k.
  {
    auto& st = stage("cut_function");
    const auto& c = cert.two_towers->get("cover");
    st.ran = true;
    st.pass = c.pass();
    st.worst_case = c.worst;
    st.detail = c.first_failure;
    st.parameters = {{"trials", static_cast<double>(c.trials)}};
    if (!st.pass) return finish();
  }

  const Predicate in_F = [&](const TorusPoint& y) { return F.contains(y); };
  const Predicate cut_E = [&](const TorusPoint& y) { return eps_cut(E.phi(y), epsilon) > 0; };

  // (v) Over a point of Omega_0 every floor carries chi_0 > 0, so the ranks of
  // (phi_E - eps)_+ chi_0 and phi_F chi_0 are plain orbit counts.
  auto run_tower = [&](const char* name, const towers::TowerSpec& spec, std::int64_t N,
                       std::uint64_t sseed, bool second, std::vector<RankRecord>& out) {
    auto& st = stage(name);
    st.ran = true;
    std::vector<std::optional<RankRecord>> recs(samples);
    parallel_for(samples, [&](std::size_t i) {
      const auto z = draw_base_point(*active, spec, dynsys::stream_seed(sseed, i));
      if (!z) return;
      RankRecord r;
      r.x = coords(*z);
      r.rank_a = second ? towers::cover_rank(*active, *cover, *z, N) : orbit_count(action, cut_E, *z, N);
      r.rank_b = orbit_count(action, in_F, *z, N);
      r.pass = second ? second_tower_ok(r, cert.delta, N, d) : first_tower_ok(r, cert.delta, N, d);
      recs[i] = r;
    });
    std::size_t missing = 0, bad = 0;
    for (const auto& r : recs) {
      if (!r) {
        ++missing;
        continue;
      }
      out.push_back(*r);
      bad += !r->pass;
      const double limit = second ? ipow(static_cast<double>(N), d) * cert.delta
                                  : static_cast<double>(r->rank_b) / 4.0;
      st.worst_case = std::max(st.worst_case, limit > 0 ? static_cast<double>(r->rank_a) / limit : INFINITY);
    }
    st.pass = bad == 0 && missing == 0;
    std::ostringstream os;
    if (missing) os << missing << " samples found no base point";
    if (bad) os << (missing ? "; " : "") << bad << " samples break the rank inequalities";
    st.detail = os.str();
    st.parameters = {{"N", static_cast<double>(N)},
                     {"points", static_cast<double>(out.size())},
                     {"height", spec.height}};
    return st.pass;
  };

  if (!run_tower("first_tower", cert.two_towers->tower0, cert.N0, dynsys::stream_seed(seed, 5),
                 false, cert.tower0))
    return finish();
  run_tower("second_tower", cert.two_towers->tower1, cert.N1, dynsys::stream_seed(seed, 6), true,
            cert.tower1);
  return finish();
}

bool replay(const ComparisonCertificate& c) {
  const std::size_t d = c.d;
  if (d == 0 || c.density_records.empty()) return false;
  for (const auto& r : c.density_records)
    if (!(static_cast<double>(r.count_E) < 0.25 * static_cast<double>(r.count_F))) return false;
  for (const auto& r : c.density_records)
    if (r.M <= c.N_density) return false;
  const double delta = 0.5 * min_F_density(c.density_records, d);
  if (!(delta > 0) || delta != c.delta) return false;
  if (!(c.N0 > c.N_density) || !(ipow(static_cast<double>(c.N0), d) * delta > 1.0)) return false;
  if (!c.two_towers || !c.two_towers->pass()) return false;
  if (c.tower0.empty() || c.tower1.empty()) return false;
  for (const auto& r : c.tower0)
    if (!first_tower_ok(r, delta, c.N0, d)) return false;
  for (const auto& r : c.tower1)
    if (!second_tower_ok(r, delta, c.N1, d)) return false;
  return true;
}

}  // namespace zdtl::comparison
