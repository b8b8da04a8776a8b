#pragma once

// Torus rotations as concrete free minimal Z^d actions.
//
// Torus coordinates are stored as 64-bit fixed-point fractions of a turn, so
// the action x -> x + n.A (mod 1) is exact integer arithmetic. Composition,
// inverses and translates of the same orbit agree bit for bit.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "zdtl/core.hpp"

namespace zdtl::dynsys {

class TorusPoint {
 public:
  TorusPoint() = default;
  /// Canonicalizes every coordinate into [0, 1).
  static TorusPoint from_coords(std::span<const double> coords);
  static TorusPoint from_raw(std::span<const std::uint64_t> raw);
  static TorusPoint zero(std::size_t m);

  std::size_t dim() const { return size_; }
  double coord(std::size_t i) const;
  std::vector<double> coords() const;
  std::uint64_t raw(std::size_t i) const { return raw_[i]; }

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;

 private:
  std::array<std::uint64_t, kMaxDim> raw_{};
  std::size_t size_ = 0;
};

/// Fixed-point image of a real number mod 1.
std::uint64_t to_fixed(double v);
/// Exact value in [0, 1) of a fixed-point fraction.
double from_fixed(std::uint64_t u);
/// Length in turns of the shorter arc between two fixed-point coordinates.
double wrapped_gap(std::uint64_t a, std::uint64_t b);

/// (X = T^m, T^n x = x + n.A mod 1).
class RotationAction {
 public:
  /// `rows` is the d x m matrix A, one row per generator. The freeness
  /// desk-check runs over 0 < |n|_inf <= independence_window; pass 0 to skip
  /// it (test-only rational rotations).
  RotationAction(std::vector<std::vector<double>> rows, int independence_window = 50);

  /// d = 2, m = 2, A = [[sqrt2, sqrt3], [sqrt5, sqrt7]] mod 1.
  static RotationAction default_2d();
  /// d = m = 1, A = [sqrt2 - 1].
  static RotationAction default_1d();
  static RotationAction default_for(std::size_t d);

  std::size_t rank() const { return d_; }
  std::size_t torus_dim() const { return m_; }
  int independence_window() const { return window_; }
  /// Entry A[i][j] reduced mod 1.
  double increment(std::size_t i, std::size_t j) const { return from_fixed(inc_[i][j]); }
  std::uint64_t increment_raw(std::size_t i, std::size_t j) const { return inc_[i][j]; }
  const std::vector<std::vector<double>>& matrix() const { return rows_; }

 private:
  void check_freeness() const;

  std::size_t d_ = 0;
  std::size_t m_ = 0;
  int window_ = 0;
  std::vector<std::vector<double>> rows_;
  std::array<std::array<std::uint64_t, kMaxDim>, kMaxDim> inc_{};
};

TorusPoint act(const RotationAction& action, const TorusPoint& x, const LatticeVector& n);
double torus_distance(const TorusPoint& x, const TorusPoint& y);
std::map<LatticeVector, TorusPoint> orbit_window(const RotationAction& action, const TorusPoint& x,
                                                 std::span<const LatticeVector> window);
std::vector<TorusPoint> sample_points(std::uint64_t seed, std::size_t count, std::size_t m);

/// Per-index stream seed so sampled loops stay reproducible in any order.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

/// Lattice points with |n|_2 <= radius, lexicographic order.
std::vector<LatticeVector> lattice_ball(std::size_t d, double radius);
/// The box {0, ..., N-1}^d, lexicographic order.
std::vector<LatticeVector> lattice_box(std::size_t d, std::int64_t N);

}  // namespace zdtl::dynsys
