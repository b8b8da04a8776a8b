#include "zdtl/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace zdtl::tiling {

TilingConfig TilingConfig::defaults(const MarkerFunction& marker, std::size_t d) {
  const double reach = static_cast<double>(marker.L) + std::sqrt(static_cast<double>(d));
  TilingConfig c;
  c.H = reach * reach + 1.0;
  c.s = 1.5;
  c.truncation_radius = 2.0 * reach + 1.0;
  return c;
}

void TilingConfig::validate(const MarkerFunction& marker, std::size_t d) const {
  const double reach = static_cast<double>(marker.L) + std::sqrt(static_cast<double>(d));
  if (!(H > reach * reach)) throw std::invalid_argument("H must exceed (L + sqrt(d))^2");
  if (!(s > 1.0 && s < 2.0)) throw std::invalid_argument("s must lie in (1, 2)");
  if (!(truncation_radius >= 2.0 * reach + 1.0))
    throw std::invalid_argument("truncation radius must be at least 2 (L + sqrt(d)) + 1");
}

double CellCrossSection::depth(const RealVector& p) const {
  if (empty) return -std::numeric_limits<double>::infinity();
  const RealVector b = p - to_real(label);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& h : relative) best = std::min(best, geom::slack(h, b));
  return best;
}

bool CellCrossSection::contains(const RealVector& p, double tol) const {
  return !empty && depth(p) >= -tol;
}

CellCrossSection cross_section_halfspaces(std::span<const WeightedCenter> centers,
                                          const LatticeVector& n0, double height,
                                          double competitor_radius) {
  CellCrossSection cell;
  cell.label = n0;
  cell.height = height;
  auto self = std::find_if(centers.begin(), centers.end(),
                           [&](const WeightedCenter& c) { return c.n == n0; });
  if (self == centers.end()) return cell;
  cell.empty = false;
  cell.t = self->t;
  const RealVector base = to_real(n0);
  const double r2 = competitor_radius * competitor_radius;
  for (const auto& c : centers) {
    if (c.n == n0) continue;
    const LatticeVector diff = c.n - n0;
    const auto dist2 = static_cast<double>(diff.norm2());
    if (dist2 > r2) continue;
    Halfspace rel;
    rel.normal = scaled(to_real(diff), 2.0);
    rel.offset = dist2 + (c.t - self->t) * (2.0 * height + c.t + self->t);
    Halfspace abs = rel;
    abs.offset += rel.normal.dot(base);
    cell.relative.push_back(rel);
    cell.halfspaces.push_back(abs);
  }
  return cell;
}

ConvexRegion cell_region(const CellCrossSection& cell, double box) {
  const std::size_t d = cell.label.size();
  if (cell.empty) return d == 1 ? ConvexRegion::interval(1, 0) : ConvexRegion::polygon({});
  bool touches = false;
  ConvexRegion r = ConvexRegion::clip(d, cell.relative, RealVector(d, 0.0), box, &touches);
  if (touches) throw Error("unbounded cell");
  return r.translated(to_real(cell.label));
}

RealVector h_projective_image(const RealVector& a, const LatticeVector& n, double t, double s,
                              double H) {
  if (!(s > 1) || !(H > 0) || !(t >= 1))
    throw std::invalid_argument("projective image needs s > 1, H > 0, t >= 1");
  const double mu = (s - 1.0) * H / (s * H + t);
  RealVector out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += mu * (static_cast<double>(n[i]) - a[i]);
  return out;
}

Tiler::Tiler(const RotationAction& action, const MarkerFunction& marker, const TilingConfig& config)
    : action_(action), marker_(marker), config_(config) {
  marker.geometry.validate(action);
  if (marker.M < 1 || marker.L < 0) throw std::invalid_argument("marker constants not computed");
  config.validate(marker, action.rank());
}

double Tiler::reach() const {
  return static_cast<double>(marker_.L) + std::sqrt(static_cast<double>(dim()));
}

double Tiler::competitor_radius() const { return config_.truncation_radius; }

const dynsys::ReturnFinder& Tiler::finder(double radius) const {
  const double key = std::ceil(radius);
  std::lock_guard lock(mu_);
  auto it = finders_.find(key);
  if (it == finders_.end())
    it = finders_
             .emplace(key, std::make_unique<dynsys::ReturnFinder>(action_, key,
                                                                  marker_.r_outer()))
             .first;
  return *it->second;
}

std::vector<WeightedCenter> Tiler::active_centers(const TorusPoint& x, double radius,
                                                  const LatticeVector& c) const {
  std::vector<WeightedCenter> out;
  if (radius < 0) return out;
  const TorusPoint y = act(action_, x, c);
  const double r2 = radius * radius;
  for (const auto& n : finder(radius).find(y, marker_.center())) {
    if (static_cast<double>(n.norm2()) > r2) continue;
    const double phi = marker::phi_eval(marker_, act(action_, y, n));
    if (phi > kGeoTol) out.push_back({n + c, 1.0 / phi});
  }
  return out;
}

std::vector<WeightedCenter> Tiler::active_centers(const TorusPoint& x, double radius) const {
  return active_centers(x, radius, LatticeVector(dim(), 0));
}

LocalTiling::LocalTiling(const Tiler& tiler, const TorusPoint& x, double height,
                         const RealVector& focus, double radius)
    : tiler_(&tiler), height_(height) {
  const std::size_t d = tiler.dim();
  if (focus.size() != d) throw std::invalid_argument("focus dimension mismatch");
  LatticeVector c(d);
  for (std::size_t i = 0; i < d; ++i) c[i] = static_cast<std::int64_t>(std::llround(focus[i]));
  const bool debug = tiler.config().debug_double_truncation;
  const double comp = tiler.competitor_radius();
  const double slop = std::sqrt(static_cast<double>(d)) / 2.0 + 1.0;
  const double fetch = radius + tiler.reach() + (debug ? 2.0 : 1.0) * comp + slop;
  centers_ = tiler.active_centers(x, fetch, c);

  const double own = radius + tiler.reach();
  for (const auto& wc : centers_)
    if ((to_real(wc.n) - focus).norm() < own) labels_.push_back(wc.n);

  for (const auto& n : labels_) {
    CellCrossSection cell = cross_section_halfspaces(centers_, n, height, comp);
    if (d <= 2) {
      ConvexRegion region;
      try {
        region = cell_region(cell, tiler.reach() + 1.0);
      } catch (const Error&) {
        throw Error("marker/tiling inconsistency: tile reaches past L + sqrt(d)");
      }
      if (debug) {
        CellCrossSection wide = cross_section_halfspaces(centers_, n, height, 2.0 * comp);
        ConvexRegion other = cell_region(wide, tiler.reach() + 1.0);
        const bool same = region.empty() == other.empty() &&
                          (region.empty() || geom::hausdorff_estimate(region, other, 64) <=
                                                 1e-7 * std::max(1.0, tiler.reach()));
        if (!same) throw Error("truncation radius too small: doubled radius changes a tile");
      }
      if (region.has_interior()) {
        RealVector w = region.centroid();
        if (cell.depth(w) > 0) cell.witness = w;
      }
      regions_.emplace(n, std::move(region));
    }
    cells_.emplace(n, std::move(cell));
  }
}

const CellCrossSection& LocalTiling::cell(const LatticeVector& label) const {
  auto it = cells_.find(label);
  if (it == cells_.end()) throw std::out_of_range("label outside the local tiling");
  return it->second;
}

const ConvexRegion& LocalTiling::region(const LatticeVector& label) const {
  auto it = regions_.find(label);
  if (it == regions_.end()) throw std::out_of_range("no region for label");
  return it->second;
}

Location LocalTiling::locate(const RealVector& p) const {
  const WeightedCenter* best = nullptr;
  double best_power = std::numeric_limits<double>::infinity();
  for (const auto& wc : centers_) {
    const RealVector diff = to_real(wc.n) - p;
    const double power = diff.norm2() + (wc.t - 1.0) * (2.0 * height_ + wc.t + 1.0);
    if (power < best_power) {
      best_power = power;
      best = &wc;
    }
  }
  if (!best || !cells_.count(best->n)) throw Error("marker/tiling inconsistency");
  Location loc;
  loc.label = best->n;
  loc.depth = cell(best->n).depth(p);
  loc.on_boundary = loc.depth <= kGeoTol;
  return loc;
}

Location origin_cell(const Tiler& tiler, const TorusPoint& x, double height) {
  const std::size_t d = tiler.dim();
  const RealVector origin(d, 0.0);
  if (tiler.config().debug_double_truncation)
    return LocalTiling(tiler, x, height, origin, 0.0).locate(origin);
  // Only the cell holding the origin is built.
  const double comp = tiler.competitor_radius();
  const double fetch = tiler.reach() + comp + std::sqrt(static_cast<double>(d)) / 2.0 + 1.0;
  const auto centers = tiler.active_centers(x, fetch, LatticeVector(d, 0));
  const WeightedCenter* best = nullptr;
  double best_power = std::numeric_limits<double>::infinity();
  for (const auto& wc : centers) {
    const double power = to_real(wc.n).norm2() + (wc.t - 1.0) * (2.0 * height + wc.t + 1.0);
    if (power < best_power) {
      best_power = power;
      best = &wc;
    }
  }
  if (!best || !(to_real(best->n).norm() < tiler.reach())) throw Error("marker/tiling inconsistency");
  const CellCrossSection cell = cross_section_halfspaces(centers, best->n, height, comp);
  Location loc;
  loc.label = best->n;
  loc.depth = cell.depth(origin);
  loc.on_boundary = loc.depth <= kGeoTol;
  return loc;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string render_svg(const Tiler& tiler, const TorusPoint& x, const Viewport& view) {
  if (tiler.dim() != 2) throw Error("render supports d=2 only");
  if (!(view.x1 > view.x0) || !(view.y1 > view.y0)) throw std::invalid_argument("empty viewport");
  const RealVector focus{0.5 * (view.x0 + view.x1), 0.5 * (view.y0 + view.y1)};
  const double radius = 0.5 * std::hypot(view.x1 - view.x0, view.y1 - view.y0);
  LocalTiling local(tiler, x, tiler.config().H, focus, radius);

  const double w = view.x1 - view.x0, h = view.y1 - view.y0;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\""
      << num(800.0 * h / w) << "\" viewBox=\"" << num(view.x0) << ' ' << num(-view.y1) << ' '
      << num(w) << ' ' << num(h) << "\">\n"
      << "<g transform=\"scale(1,-1)\" fill=\"none\" stroke=\"black\" stroke-width=\""
      << num(view.stroke) << "\">\n";
  for (const auto& n : local.labels()) {
    const ConvexRegion& r = local.region(n);
    if (!r.has_interior()) continue;
    const double t = local.cell(n).t;
    const int shade = static_cast<int>(std::lround(255.0 - 80.0 * (t - 1.0)));
    out << "<polygon fill=\"rgb(" << shade << ',' << shade << ",255)\" points=\"";
    for (std::size_t i = 0; i < r.vertices().size(); ++i) {
      if (i) out << ' ';
      out << num(r.vertices()[i][0]) << ',' << num(r.vertices()[i][1]);
    }
    out << "\"/>\n";
  }
  if (view.overlay_radius > 0)
    out << "<circle cx=\"0\" cy=\"0\" r=\"" << num(view.overlay_radius)
        << "\" stroke=\"red\" stroke-dasharray=\"" << num(4 * view.stroke) << "\"/>\n";
  out << "<circle cx=\"0\" cy=\"0\" r=\"" << num(3 * view.stroke) << "\" fill=\"red\"/>\n";
  out << "</g>\n<g font-size=\"" << num(std::max(w, h) / 60.0) << "\" fill=\"black\">\n";
  for (const auto& n : local.labels()) {
    const ConvexRegion& r = local.region(n);
    if (!r.has_interior()) continue;
    RealVector c = r.centroid();
    out << "<text x=\"" << num(c[0]) << "\" y=\"" << num(-c[1]) << "\">(" << n[0] << ',' << n[1]
        << ")</text>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace zdtl::tiling
