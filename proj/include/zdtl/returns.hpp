#pragma once

// Orbit returns: lattice vectors n with |n| <= R whose translate T^n x lands
// within rho of a target point.
//
// Small windows are scanned directly. Large windows are solved as a
// close-vector enumeration in the (d + m)-dimensional lattice
// {(n / R, (n.A + k) / rho) : n in Z^d, k in Z^m}, LLL-reduced once per
// (R, rho). Candidates from the enumeration are confirmed with the exact
// fixed-point action, so the floating-point reduction only has to avoid
// false negatives, which a widened search radius takes care of.

#include <vector>

#include "zdtl/dynsys.hpp"

namespace zdtl::dynsys {

class ReturnFinder {
 public:
  ReturnFinder(const RotationAction& action, double lattice_radius, double torus_radius,
               bool force_enumeration = false);

  /// Sorted lexicographically. `closed` selects <= rho instead of < rho.
  std::vector<LatticeVector> find(const TorusPoint& x, const TorusPoint& target,
                                  bool closed = false) const;

  bool uses_enumeration() const { return enumerate_; }
  double lattice_radius() const { return radius_; }
  double torus_radius() const { return rho_; }

 private:
  void reduce();

  const RotationAction* action_;
  double radius_;
  double rho_;
  bool enumerate_ = false;
  std::size_t dim_ = 0;
  // Integer basis (columns) and its Gram-Schmidt data.
  std::vector<std::vector<std::int64_t>> basis_;
  std::vector<std::vector<long double>> chol_;  // upper-triangular R of the QR split
  std::vector<std::vector<long double>> gs_dirs_;  // unit Gram-Schmidt directions
};

/// Reference scan over every lattice point of the window.
std::vector<LatticeVector> scan_returns(const RotationAction& action, const TorusPoint& x,
                                        const TorusPoint& target, double lattice_radius,
                                        double torus_radius, bool closed = false);

/// Smallest |n| over nonzero n with |n| <= lattice_radius and dist(n.A, 0) <= torus_radius.
/// Returns 0 if there is none.
double shortest_return(const RotationAction& action, double lattice_radius, double torus_radius);

/// Upper bound on the covering radius of the scaled lattice
/// {(n / R, (n.A + k) / rho)}; a value <= 1 certifies that the balls of
/// radius rho around {c - n.A : |n| <= R} cover the torus.
double covering_bound(const RotationAction& action, double lattice_radius, double torus_radius);

}  // namespace zdtl::dynsys
