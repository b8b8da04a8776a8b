#include "zdtl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "zdtl/lattice.hpp"
#include "zdtl/tiling_checks.hpp"

namespace zdtl::experiment {

using nlohmann::json;
using dynsys::TorusPoint;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string k) {
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return n;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

void write_json(std::string& out, const json& j, int depth) {
  const std::string pad(2 * (depth + 1), ' '), close(2 * depth, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        write_json(out, it.value(), depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write_json(out, j[i], depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

json point_json(const TorusPoint& x) { return x.coords(); }

json lattice_json(const LatticeVector& n) {
  json a = json::array();
  for (auto v : n) a.push_back(v);
  return a;
}

json check_json(const tiling::PropertyCheck& c) {
  return {{"name", c.name},
          {"trials", c.trials},
          {"violations", c.violations},
          {"worst", c.worst},
          {"first_failure", c.first_failure},
          {"pass", c.pass()}};
}

json set_json(const comparison::OpenSet& s) {
  json balls = json::array();
  for (const auto& b : s.balls()) balls.push_back({{"center", point_json(b.center)}, {"radius", b.radius}});
  return {{"torus_dim", s.torus_dim()}, {"balls", balls}};
}

json marker_json(const marker::MarkerFunction& mk) {
  return {{"center", point_json(mk.center())},
          {"r_inner", mk.r_inner()},
          {"r_outer", mk.r_outer()},
          {"M", mk.M},
          {"L", mk.L}};
}

json tiling_config_json(const tiling::TilingConfig& c) {
  return {{"H", c.H}, {"s", c.s}, {"truncation_radius", c.truncation_radius}};
}

json config_json(const ExperimentConfig& cfg, const dynsys::RotationAction& action) {
  json alpha = json::array();
  for (const auto& row : action.matrix()) alpha.push_back(row);
  return {{"d", cfg.d},
          {"m", action.torus_dim()},
          {"alpha", alpha},
          {"N", cfg.N},
          {"epsilon", cfg.epsilon},
          {"seed", cfg.seed},
          {"samples", cfg.samples},
          {"trials", cfg.trials}};
}

struct System {
  dynsys::RotationAction action;
  marker::MarkerFunction marker;
  tiling::TilingConfig tiling;
};

marker::MarkerGeometry marker_geometry(const ExperimentConfig& cfg,
                                       const dynsys::RotationAction& action) {
  marker::MarkerGeometry g = marker::default_geometry(cfg.d);
  if (!cfg.center.empty()) {
    if (cfg.center.size() != action.torus_dim())
      throw ConfigError("center: expected " + std::to_string(action.torus_dim()) + " coordinates");
    g.center = TorusPoint::from_coords(cfg.center);
  } else {
    g.center = TorusPoint::zero(action.torus_dim());
  }
  if (cfg.r_inner) g.r_inner = *cfg.r_inner;
  if (cfg.r_outer) g.r_outer = *cfg.r_outer;
  if (cfg.r_inner && !cfg.r_outer) g.r_outer = 2.0 * g.r_inner;
  if (cfg.r_outer && !cfg.r_inner) g.r_inner = g.r_outer / 2.0;
  try {
    g.validate(action);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("marker: ") + e.what());
  }
  return g;
}

tiling::TilingConfig tiling_config(const ExperimentConfig& cfg, const marker::MarkerFunction& mk) {
  auto tc = tiling::TilingConfig::defaults(mk, cfg.d);
  if (cfg.H) tc.H = *cfg.H;
  if (cfg.s) tc.s = *cfg.s;
  try {
    tc.validate(mk, cfg.d);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("tiling: ") + e.what());
  }
  return tc;
}

System make_system(const ExperimentConfig& cfg) {
  auto action = make_action(cfg);
  auto mk = marker::make_marker(action, marker_geometry(cfg, action));
  auto tc = tiling_config(cfg, mk);
  return {action, mk, tc};
}

TorusPoint base_point(const ExperimentConfig& cfg, std::size_t m) {
  if (cfg.x.empty()) return dynsys::sample_points(cfg.seed, 1, m).front();
  if (cfg.x.size() != m) throw ConfigError("x: expected " + std::to_string(m) + " coordinates");
  return TorusPoint::from_coords(cfg.x);
}

json tower_json(const towers::TowerReport& r) {
  json v = json::array();
  for (const auto& e : r.examples) v.push_back({{"x", e.x}, {"witness", e.witness}});
  return {{"property_id", r.property},
          {"parameters",
           {{"height", r.spec.height},
            {"N", r.spec.N},
            {"skip_threshold", r.spec.skip_threshold},
            {"skip_residue", r.spec.skip_residue}}},
          {"samples", r.samples},
          {"targeted", r.targeted},
          {"eligible", r.eligible},
          {"violation_count", r.violations},
          {"uncovered", r.uncovered},
          {"uncovered_fraction", r.uncovered_fraction},
          {"violations", v},
          {"pass", r.pass()}};
}

json two_towers_json(const towers::TwoTowersResult& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(check_json(c));
  const auto& p = r.params;
  return {{"parameters",
           {{"d", p.d},
            {"N", p.N},
            {"epsilon", p.epsilon},
            {"s", p.s},
            {"R0", p.R0},
            {"r3", p.r3},
            {"N1", p.N1},
            {"R1", p.R1},
            {"rho", p.rho}}},
          {"tower0", {{"height", r.tower0.height}, {"N", r.tower0.N}}},
          {"tower1", {{"height", r.tower1.height}, {"N", r.tower1.N}}},
          {"piece_count", r.piece_count},
          {"group_count", r.group_count},
          {"group_bound", r.group_bound},
          {"cut_down_radius", r.cut_down_radius},
          {"worst_visit_fraction", r.worst_visit_fraction},
          {"checks", checks},
          {"pass", r.pass()}};
}

json certificate_json(const comparison::ComparisonCertificate& c) {
  json stages = json::array();
  for (const auto& s : c.stages) {
    json params = json::object();
    for (const auto& [k, v] : s.parameters) params[k] = v;
    stages.push_back({{"name", s.name},
                      {"ran", s.ran},
                      {"pass", s.pass},
                      {"worst_case", s.worst_case},
                      {"detail", s.detail},
                      {"parameters", params}});
  }
  json density = json::array();
  for (const auto& r : c.density_records)
    density.push_back({{"x", r.x}, {"M", r.M}, {"count_E", r.count_E}, {"count_F", r.count_F}});
  auto ranks = [](const std::vector<comparison::RankRecord>& rs) {
    json a = json::array();
    for (const auto& r : rs)
      a.push_back({{"x", r.x}, {"rank_a", r.rank_a}, {"rank_b", r.rank_b}, {"pass", r.pass}});
    return a;
  };
  json out = {{"inputs",
               {{"E", set_json(c.E)},
                {"F", set_json(c.F)},
                {"epsilon", c.epsilon},
                {"seed", c.seed},
                {"samples", c.samples},
                {"E_prime", c.E_prime}}},
              {"N_density", c.N_density},
              {"delta", c.delta},
              {"N0", c.N0},
              {"N1", c.N1},
              {"marker", {{"M", c.marker_M}, {"L", c.marker_L}, {"H", c.H}, {"replanned", c.replanned}}},
              {"stages", stages},
              {"records", {{"density", density}, {"tower0", ranks(c.tower0)}, {"tower1", ranks(c.tower1)}}},
              {"failed_stage", c.failed_stage()},
              {"replay", comparison::replay(c)},
              {"overall", c.overall}};
  out["two_towers"] = c.two_towers ? two_towers_json(*c.two_towers) : json(nullptr);
  return out;
}

RunResult finish(json report, bool pass) {
  report["pass"] = pass;
  return {pass ? 0 : 1, canonical_json(report)};
}

RunResult run_marker(const ExperimentConfig& cfg) {
  const System sys = make_system(cfg);
  const auto rep = marker::verify_marker(sys.action, sys.marker, cfg.seed, cfg.samples);
  json v = json::array();
  for (const auto& e : rep.violations)
    v.push_back({{"condition", e.condition}, {"x", point_json(e.x)}, {"witness", lattice_json(e.witness)}});
  json out = {{"command", "marker"},
              {"config", config_json(cfg, sys.action)},
              {"marker", marker_json(sys.marker)},
              {"report",
               {{"samples", rep.samples},
                {"separation_violations", rep.separation_violations},
                {"covering_violations", rep.covering_violations},
                {"violations", v}}}};
  return finish(out, rep.pass());
}

RunResult run_tiling(const ExperimentConfig& cfg) {
  const System sys = make_system(cfg);
  tiling::Tiler tiler(sys.action, sys.marker, sys.tiling);
  const TorusPoint x = base_point(cfg, sys.action.torus_dim());
  if (cfg.format == "svg") {
    tiling::Viewport view;
    if (!cfg.viewport.empty()) {
      if (cfg.viewport.size() != 4) throw ConfigError("viewport: expected x0,y0,x1,y1");
      view.x0 = cfg.viewport[0];
      view.y0 = cfg.viewport[1];
      view.x1 = cfg.viewport[2];
      view.y1 = cfg.viewport[3];
    }
    view.stroke = cfg.stroke;
    view.overlay_radius = cfg.radius;
    return {0, tiling::render_svg(tiler, x, view)};
  }
  auto cell = [&](double height) {
    const auto loc = tiling::origin_cell(tiler, x, height);
    return json{{"height", height},
                {"label", lattice_json(loc.label)},
                {"depth", loc.depth},
                {"on_boundary", loc.on_boundary}};
  };
  const auto rep = tiling::check_tiling_invariants(tiler, cfg.seed, cfg.trials, cfg.nudge);
  json checks = json::array();
  for (const auto& c : rep.checks) checks.push_back(check_json(c));
  json out = {{"command", "tiling"},
              {"config", config_json(cfg, sys.action)},
              {"marker", marker_json(sys.marker)},
              {"tiling", tiling_config_json(sys.tiling)},
              {"x", point_json(x)},
              {"origin_cells", {cell(sys.tiling.H), cell(sys.tiling.s * sys.tiling.H)}},
              {"cut_down_radius", tiling::cut_down_radius(tiler)},
              {"checks", checks}};
  return finish(out, rep.pass());
}

RunResult run_tower(const ExperimentConfig& cfg) {
  const System sys = make_system(cfg);
  tiling::Tiler tiler(sys.action, sys.marker, sys.tiling);
  const towers::TowerSpec spec{sys.tiling.H, cfg.N};
  const auto dis = towers::verify_tower_disjoint(tiler, spec, cfg.samples, cfg.seed);
  const auto cov = towers::verify_tower_coverage(tiler, spec, cfg.samples, cfg.seed);
  json out = {{"command", "tower"},
              {"config", config_json(cfg, sys.action)},
              {"marker", marker_json(sys.marker)},
              {"tiling", tiling_config_json(sys.tiling)},
              {"reports", {tower_json(dis), tower_json(cov)}}};
  return finish(out, dis.pass() && cov.pass());
}

RunResult run_two_towers(const ExperimentConfig& cfg) {
  const auto action = make_action(cfg);
  const bool given = cfg.has("r_inner") || cfg.has("r_outer") || cfg.has("center");
  marker::MarkerFunction mk;
  tiling::TilingConfig tc;
  if (given) {
    mk = marker::make_marker(action, marker_geometry(cfg, action));
    tc = tiling_config(cfg, mk);
  } else {
    auto plan = towers::plan_two_towers(action, cfg.N, cfg.epsilon, cfg.s.value_or(1.5));
    mk = plan.marker;
    tc = plan.config;
  }
  tiling::Tiler tiler(action, mk, tc);
  towers::TwoTowerOptions opt;
  opt.samples = cfg.samples;
  const auto res = towers::build_two_towers(tiler, cfg.N, cfg.epsilon, cfg.seed, opt);
  json out = {{"command", "two-towers"},
              {"config", config_json(cfg, action)},
              {"marker", marker_json(mk)},
              {"planned", !given},
              {"tiling", tiling_config_json(tc)},
              {"result", two_towers_json(res)}};
  return finish(out, res.pass());
}

RunResult run_lattice(const ExperimentConfig& cfg) {
  if (cfg.d > 2) throw ConfigError("lattice: d must be 1 or 2");
  if (!(cfg.r >= 0)) throw ConfigError("r must be nonnegative");
  const auto N0 = lattice::find_N0(cfg.epsilon, cfg.r, cfg.d);
  const auto rep = lattice::verify_lemma(cfg.seed, cfg.trials, cfg.epsilon, cfg.r, cfg.d);
  json out = {{"command", "lattice"},
              {"config",
               {{"d", cfg.d}, {"r", cfg.r}, {"epsilon", cfg.epsilon}, {"seed", cfg.seed}, {"trials", cfg.trials}}},
              {"N0", N0},
              {"boundary_ratio", lattice::boundary_ratio(N0, cfg.r, cfg.d)},
              {"report",
               {{"trials", rep.trials},
                {"failures", rep.failures},
                {"worst_fraction", rep.worst_fraction},
                {"link_count_failures", rep.link_count_failures},
                {"link_two_sided_failures", rep.link_two_sided_failures},
                {"link_outer_failures", rep.link_outer_failures},
                {"notes", rep.notes}}}};
  return finish(out, rep.pass());
}

RunResult run_ocap(const ExperimentConfig& cfg) {
  const auto action = make_action(cfg);
  if (!cfg.has("set")) throw ConfigError("ocap needs set=c1,..:r;...");
  const auto set = parse_set(cfg.set, action.torus_dim());
  const auto est = comparison::ocap_estimate(action, set, cfg.N, cfg.seed, cfg.samples);
  const auto mu = comparison::measure_estimate(set, cfg.seed, cfg.samples);
  json out = {{"command", "ocap"},
              {"config", config_json(cfg, action)},
              {"set", set_json(set)},
              {"estimate",
               {{"value", est.value}, {"N", est.N}, {"samples", est.samples}, {"seed", est.seed},
                {"kind", "lower bound for the supremum over x"}}},
              {"measure", {{"estimate", mu.estimate}, {"std_error", mu.std_error}}}};
  out["measure"]["exact"] = mu.exact ? json(*mu.exact) : json(nullptr);
  return finish(out, true);
}

RunResult run_certify(const ExperimentConfig& cfg) {
  if (!cfg.has("E") || !cfg.has("F")) throw ConfigError("certify needs E and F");
  const System sys = make_system(cfg);
  tiling::Tiler tiler(sys.action, sys.marker, sys.tiling);
  const auto E = parse_set(cfg.E, sys.action.torus_dim());
  const auto F = parse_set(cfg.F, sys.action.torus_dim());
  comparison::CertifyOptions opt;
  opt.samples = cfg.samples;
  opt.M_cap = cfg.M_cap;
  const auto cert = comparison::certify_comparison(tiler, E, F, cfg.epsilon, cfg.seed, opt);
  json out = {{"command", "certify"},
              {"config", config_json(cfg, sys.action)},
              {"certificate", certificate_json(cert)}};
  return finish(out, cert.overall);
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "d",       "m",       "alpha", "center", "r_inner", "r_outer", "H",      "s",
      "N",       "epsilon", "seed",  "samples", "trials", "r",       "M_cap",  "x",
      "nudge",    "viewport", "stroke", "radius", "set",    "E",       "F",       "out",    "format"};
  return keys;
}

Settings parse_config_text(const std::string& text) {
  Settings out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = normalize_key(trim(line.substr(0, eq)));
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError("unknown key '" + key + "'");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second)
      throw ConfigError("key '" + key + "' given twice");
  }
  return out;
}

bool ExperimentConfig::has(const std::string& key) const {
  return std::find(given.begin(), given.end(), key) != given.end();
}

ExperimentConfig load_config(const Settings& settings) {
  ExperimentConfig c;
  const auto& keys = known_keys();
  for (const auto& [raw, v] : settings) {
    const std::string k = normalize_key(raw);
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw ConfigError("unknown key '" + raw + "'");
    c.given.push_back(k);
    if (k == "d") c.d = static_cast<std::size_t>(to_int(k, v));
    else if (k == "m") c.m = static_cast<std::size_t>(to_int(k, v));
    else if (k == "alpha") c.alpha = to_list(k, v);
    else if (k == "center") c.center = to_list(k, v);
    else if (k == "r_inner") c.r_inner = to_double(k, v);
    else if (k == "r_outer") c.r_outer = to_double(k, v);
    else if (k == "H") c.H = to_double(k, v);
    else if (k == "s") c.s = to_double(k, v);
    else if (k == "N") c.N = to_int(k, v);
    else if (k == "epsilon") c.epsilon = to_double(k, v);
    else if (k == "seed") {
      const auto n = to_int(k, v);
      if (n < 0) throw ConfigError("seed must be nonnegative");
      c.seed = static_cast<std::uint64_t>(n);
    } else if (k == "samples" || k == "trials") {
      const auto n = to_int(k, v);
      if (n < 1) throw ConfigError(k + " must be positive");
      (k == "samples" ? c.samples : c.trials) = static_cast<std::size_t>(n);
    } else if (k == "r") c.r = to_double(k, v);
    else if (k == "M_cap") c.M_cap = to_int(k, v);
    else if (k == "x") c.x = to_list(k, v);
    else if (k == "viewport") c.viewport = to_list(k, v);
    else if (k == "nudge") c.nudge = to_double(k, v);
    else if (k == "stroke") c.stroke = to_double(k, v);
    else if (k == "radius") c.radius = to_double(k, v);
    else if (k == "set") c.set = v;
    else if (k == "E") c.E = v;
    else if (k == "F") c.F = v;
    else if (k == "out") c.out = v;
    else if (k == "format") c.format = v;
  }
  if (c.d < 1 || c.d > 2) throw ConfigError("d must be 1 or 2");
  if (c.N < 1) throw ConfigError("N must be >= 1");
  if (!(c.epsilon > 0)) throw ConfigError("epsilon must be positive");
  if (c.M_cap < 1) throw ConfigError("M_cap must be >= 1");
  if (c.format != "json" && c.format != "svg") throw ConfigError("format must be json or svg");
  if (c.s && !(*c.s > 1)) throw ConfigError("s must exceed 1");
  if (!(c.nudge > 0)) throw ConfigError("nudge must be positive");
  // Builds the action (freeness desk-check) and parses the sets up front.
  const auto action = make_action(c);
  if (c.has("set")) parse_set(c.set, action.torus_dim());
  if (c.has("E")) parse_set(c.E, action.torus_dim());
  if (c.has("F")) parse_set(c.F, action.torus_dim());
  if (c.has("r_inner") || c.has("r_outer") || c.has("center")) marker_geometry(c, action);
  return c;
}

dynsys::RotationAction make_action(const ExperimentConfig& cfg) {
  if (cfg.alpha.empty()) {
    auto a = dynsys::RotationAction::default_for(cfg.d);
    if (cfg.m && cfg.m != a.torus_dim())
      throw ConfigError("m differs from the default system; give alpha as well");
    return a;
  }
  const std::size_t m = cfg.m ? cfg.m : cfg.alpha.size() / cfg.d;
  if (m == 0 || cfg.alpha.size() != cfg.d * m)
    throw ConfigError("alpha: expected d*m = " + std::to_string(cfg.d * m) + " entries");
  std::vector<std::vector<double>> rows(cfg.d);
  for (std::size_t i = 0; i < cfg.d; ++i)
    rows[i].assign(cfg.alpha.begin() + i * m, cfg.alpha.begin() + (i + 1) * m);
  try {
    return dynsys::RotationAction(rows);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("alpha: ") + e.what());
  }
}

comparison::OpenSet parse_set(const std::string& text, std::size_t m) {
  comparison::OpenSet set(m);
  const std::string t = trim(text);
  if (t.empty() || t == "empty") return set;
  std::stringstream ss(t);
  std::string ball;
  while (std::getline(ss, ball, ';')) {
    ball = trim(ball);
    if (ball.empty()) continue;
    const auto colon = ball.find(':');
    if (colon == std::string::npos) throw ConfigError("set: expected center:radius in '" + ball + "'");
    const auto c = to_list("set", ball.substr(0, colon));
    if (c.size() != m) throw ConfigError("set: center needs " + std::to_string(m) + " coordinates");
    const double r = to_double("set", trim(ball.substr(colon + 1)));
    if (!(r > 0)) throw ConfigError("set: radius must be positive");
    set.add(TorusPoint::from_coords(c), r);
  }
  return set;
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"marker", "tiling", "tower", "two-towers",
                                             "lattice", "ocap", "certify"};
  return c;
}

RunResult run(const std::string& command, const ExperimentConfig& cfg) {
  if (cfg.format == "svg" && command != "tiling") throw ConfigError("svg output is only for tiling");
  if (command == "marker") return run_marker(cfg);
  if (command == "tiling") return run_tiling(cfg);
  if (command == "tower") return run_tower(cfg);
  if (command == "two-towers") return run_two_towers(cfg);
  if (command == "lattice") return run_lattice(cfg);
  if (command == "ocap") return run_ocap(cfg);
  if (command == "certify") return run_certify(cfg);
  throw ConfigError("unknown command '" + command + "'");
}

std::string canonical_json(const nlohmann::json& j) {
  std::string out;
  write_json(out, j, 0);
  out += "\n";
  return out;
}

}  // namespace zdtl::experiment
