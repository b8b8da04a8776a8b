#include "zdtl/dynsys.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace zdtl::dynsys {

std::uint64_t to_fixed(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite torus coordinate");
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;
  // r < 1 has at most 53 significant bits, so the scaled value is exact.
  long double scaled = std::ldexp(static_cast<long double>(r), 64);
  if (scaled >= 18446744073709551616.0L) return 0;
  return static_cast<std::uint64_t>(scaled);
}

double from_fixed(std::uint64_t u) {
  // Keep 53 bits so the result is strictly below 1.
  return std::ldexp(static_cast<double>(u >> 11), -53);
}

double wrapped_gap(std::uint64_t a, std::uint64_t b) {
  std::uint64_t diff = a - b;
  std::uint64_t neg = b - a;
  std::uint64_t w = diff < neg ? diff : neg;
  return std::ldexp(static_cast<double>(w), -64);
}

TorusPoint TorusPoint::from_coords(std::span<const double> coords) {
  if (coords.size() > kMaxDim) throw std::invalid_argument("torus dimension too large");
  TorusPoint p;
  p.size_ = coords.size();
  for (std::size_t i = 0; i < coords.size(); ++i) p.raw_[i] = to_fixed(coords[i]);
  return p;
}

TorusPoint TorusPoint::from_raw(std::span<const std::uint64_t> raw) {
  if (raw.size() > kMaxDim) throw std::invalid_argument("torus dimension too large");
  TorusPoint p;
  p.size_ = raw.size();
  for (std::size_t i = 0; i < raw.size(); ++i) p.raw_[i] = raw[i];
  return p;
}

TorusPoint TorusPoint::zero(std::size_t m) {
  std::vector<std::uint64_t> raw(m, 0);
  return from_raw(raw);
}

double TorusPoint::coord(std::size_t i) const { return from_fixed(raw_[i]); }

std::vector<double> TorusPoint::coords() const {
  std::vector<double> out(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = coord(i);
  return out;
}

RotationAction::RotationAction(std::vector<std::vector<double>> rows, int independence_window)
    : d_(rows.size()), window_(independence_window), rows_(std::move(rows)) {
  if (d_ < 1 || d_ > kMaxDim) throw std::invalid_argument("action rank must be in [1, 4]");
  m_ = rows_.front().size();
  if (m_ < 1 || m_ > kMaxDim) throw std::invalid_argument("torus dimension must be in [1, 4]");
  for (std::size_t i = 0; i < d_; ++i) {
    if (rows_[i].size() != m_) throw std::invalid_argument("ragged rotation matrix");
    for (std::size_t j = 0; j < m_; ++j) inc_[i][j] = to_fixed(rows_[i][j]);
  }
  if (window_ < 0) throw std::invalid_argument("independence window must be >= 0");
  check_freeness();
}

RotationAction RotationAction::default_2d() {
  return RotationAction({{std::sqrt(2.0), std::sqrt(3.0)}, {std::sqrt(5.0), std::sqrt(7.0)}});
}

RotationAction RotationAction::default_1d() { return RotationAction(std::vector<std::vector<double>>{{std::sqrt(2.0) - 1.0}}); }

RotationAction RotationAction::default_for(std::size_t d) {
  if (d == 1) return default_1d();
  if (d == 2) return default_2d();
  throw std::invalid_argument("no default system for d = " + std::to_string(d));
}

void RotationAction::check_freeness() const {
  if (window_ == 0) return;
  const std::int64_t w = window_;
  LatticeVector n(d_, -w);
  TorusPoint origin = TorusPoint::zero(m_);
  while (true) {
    if (!n.is_zero() && torus_distance(act(*this, origin, n), origin) <= 1e-9) {
      throw std::invalid_argument("rotation matrix fails the freeness desk-check");
    }
    std::size_t i = 0;
    while (i < d_ && n[i] == w) n[i++] = -w;
    if (i == d_) break;
    ++n[i];
  }
}

TorusPoint act(const RotationAction& action, const TorusPoint& x, const LatticeVector& n) {
  if (x.dim() != action.torus_dim()) throw std::invalid_argument("torus point dimension mismatch");
  if (n.size() != action.rank()) throw std::invalid_argument("lattice vector dimension mismatch");
  std::array<std::uint64_t, kMaxDim> raw{};
  for (std::size_t j = 0; j < action.torus_dim(); ++j) {
    std::uint64_t acc = x.raw(j);
    for (std::size_t i = 0; i < action.rank(); ++i)
      acc += static_cast<std::uint64_t>(n[i]) * action.increment_raw(i, j);
    raw[j] = acc;
  }
  return TorusPoint::from_raw(std::span<const std::uint64_t>(raw.data(), action.torus_dim()));
}

double torus_distance(const TorusPoint& x, const TorusPoint& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("torus point dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < x.dim(); ++j) {
    double g = wrapped_gap(x.raw(j), y.raw(j));
    s += g * g;
  }
  return std::sqrt(s);
}

std::map<LatticeVector, TorusPoint> orbit_window(const RotationAction& action, const TorusPoint& x,
                                                 std::span<const LatticeVector> window) {
  std::map<LatticeVector, TorusPoint> out;
  for (const auto& n : window) out.emplace(n, act(action, x, n));
  return out;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<TorusPoint> sample_points(std::uint64_t seed, std::size_t count, std::size_t m) {
  std::mt19937_64 rng(seed);
  std::vector<TorusPoint> out;
  out.reserve(count);
  std::vector<std::uint64_t> raw(m);
  for (std::size_t k = 0; k < count; ++k) {
    for (auto& r : raw) r = rng();
    out.push_back(TorusPoint::from_raw(raw));
  }
  return out;
}

std::vector<LatticeVector> lattice_ball(std::size_t d, double radius) {
  std::vector<LatticeVector> out;
  if (radius < 0) return out;
  const auto r = static_cast<std::int64_t>(std::floor(radius));
  const double r2 = radius * radius * (1.0 + 1e-15);
  LatticeVector n(d, -r);
  while (true) {
    if (static_cast<double>(n.norm2()) <= r2) out.push_back(n);
    std::size_t i = d;
    while (i > 0 && n[i - 1] == r) n[--i] = -r;
    if (i == 0) break;
    ++n[i - 1];
  }
  return out;
}

std::vector<LatticeVector> lattice_box(std::size_t d, std::int64_t N) {
  std::vector<LatticeVector> out;
  if (N <= 0) return out;
  LatticeVector n(d, 0);
  while (true) {
    out.push_back(n);
    std::size_t i = d;
    while (i > 0 && n[i - 1] == N - 1) n[--i] = 0;
    if (i == 0) break;
    ++n[i - 1];
  }
  return out;
}

}  // namespace zdtl::dynsys
