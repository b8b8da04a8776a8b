#pragma once

// Seeded property checks of the cross-section tilings.

#include <string>
#include <vector>

#include "zdtl/tiling.hpp"

namespace zdtl::tiling {

struct PropertyCheck {
  std::string name;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst = 0;  // worst observed margin-relevant quantity, see check
  std::string first_failure;
  bool pass() const { return violations == 0; }
};

struct TilingReport {
  std::vector<PropertyCheck> checks;
  bool pass() const;
  const PropertyCheck& get(const std::string& name) const;
};

/// Radius r such that B_r(a/s + (1 - 1/s) n) lies in W_H(x, n) for every a
/// in W_sH(x, n): the cone over B_{M/2}(n, t) from (a, -sH) meets height -H
/// in a ball of radius mu M / 2 around the projective image, mu >= (s-1)H/(sH+2),
/// and the lemma's center is at most (s-1) 2 (L+sqrt d) / (s (sH+2)) away.
double cut_down_radius(const Tiler& tiler);

/// Runs `trials` random (x, m, n) draws. Checks, in order: equivariance,
/// weight bound, truncation soundness, (d+1)-ball containment, cut-down ball
/// containment, projective-image displacement, continuity in x. Continuity
/// compares tiles of x and of a point within `nudge_size` of x (Hausdorff
/// below 1e-3); tile motion scales like H / (r_outer - r_inner), so large
/// markers need a smaller nudge.
TilingReport check_tiling_invariants(const Tiler& tiler, std::uint64_t seed, std::size_t trials,
                                     double nudge_size = 1e-6);

}  // namespace zdtl::tiling
