#pragma once

// Counting layer of the open-set comparison: epsilon-cuts, unions of balls,
// orbit densities and capacities, tower ranks, and the sampled certificate
// that runs the comparison argument stage by stage.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zdtl/towers.hpp"

namespace zdtl::comparison {

using dynsys::RotationAction;
using dynsys::TorusPoint;
using tiling::Tiler;
using towers::TwoTowersResult;

/// max(value - epsilon, 0)
double eps_cut(double value, double epsilon);

struct Ball {
  TorusPoint center;
  double radius = 0;
};

/// A finite union of open balls in the torus.
class OpenSet {
 public:
  OpenSet() = default;
  /// The empty set in T^m.
  explicit OpenSet(std::size_t m) : m_(m) {}
  static OpenSet ball(const TorusPoint& center, double radius);
  /// The arc (a, a + length) of the circle.
  static OpenSet interval(double a, double length);

  OpenSet& add(const TorusPoint& center, double radius);

  std::size_t torus_dim() const { return m_; }
  const std::vector<Ball>& balls() const { return balls_; }
  bool empty() const { return balls_.empty(); }

  bool contains(const TorusPoint& x) const;
  /// max over balls of (r - |x - c|)_+. This is d(x, X \ E) when the balls
  /// are pairwise disjoint and embeddable; otherwise a lower bound for it
  /// with the same support.
  double phi(const TorusPoint& x) const;
  /// Every radius below 1/2, so no ball wraps onto itself.
  bool embeddable() const;
  bool pairwise_disjoint() const;

 private:
  std::size_t m_ = 0;
  std::vector<Ball> balls_;
};

struct MeasureEstimate {
  double estimate = 0;
  double std_error = 0;
  std::size_t samples = 0;
  std::optional<double> exact;  // sum of ball volumes when disjoint and embeddable
};

MeasureEstimate measure_estimate(const OpenSet& set, std::uint64_t seed, std::size_t samples);

using Predicate = std::function<bool(const TorusPoint&)>;

/// |{m in {0..M-1}^d : T^-m x satisfies pred}|
std::uint64_t orbit_count(const RotationAction& action, const Predicate& pred, const TorusPoint& x,
                          std::int64_t M);
/// orbit_count / M^d
double orbit_density(const RotationAction& action, const Predicate& pred, const TorusPoint& x,
                     std::int64_t M);

struct RankProfile {
  std::vector<double> x;
  std::int64_t N = 0;
  std::uint64_t count = 0;
};

RankProfile rank_profile(const RotationAction& action, const Predicate& support,
                         const TorusPoint& x, std::int64_t N);

/// Lower bound for ocap(E): the largest window density
/// N^-d sum_{n in {0..N-1}^d} chi_E(T^n x) over the sampled x.
struct OcapEstimate {
  double value = 0;
  std::int64_t N = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

OcapEstimate ocap_estimate(const RotationAction& action, const OpenSet& set, std::int64_t N,
                           std::uint64_t seed, std::size_t samples);

/// Counts of E' and F along one window of one sampled point.
struct DensityRecord {
  std::vector<double> x;
  std::int64_t M = 0;
  std::uint64_t count_E = 0;
  std::uint64_t count_F = 0;
};

struct DensityResult {
  std::int64_t N = 0;
  std::vector<std::int64_t> tried;     // every N tested, in order
  std::vector<DensityRecord> records;  // windows N+1, 2N, 4N at the returned N
  double worst_ratio = 0;              // max count_E / count_F over the records
};

/// Smallest N on a doubling-then-bisecting search such that
/// count_E < ratio * count_F on every window M in {N+1, 2N, 4N} of every
/// sampled x. Throws "density inequality not certified" past M_cap.
DensityResult find_density_N(const RotationAction& action, const Predicate& E_closed,
                             const OpenSet& F, double ratio, std::uint64_t seed,
                             std::size_t samples, std::int64_t M_cap = 4096);

/// 4 rank_a <= rank_b and rank_b > 4.
bool check_rank_domination(std::int64_t rank_a, std::int64_t rank_b);

/// One point of a tower base with the two ranks compared over its column.
struct RankRecord {
  std::vector<double> x;
  std::uint64_t rank_a = 0;  // first tower: (phi_E - eps)_+; second: cover union
  std::uint64_t rank_b = 0;  // phi_F
  bool pass = false;
};

struct ComparisonStage {
  std::string name;
  bool ran = false;
  bool pass = false;
  double worst_case = 0;
  std::string detail;
  std::vector<std::pair<std::string, double>> parameters;
};

struct CertifyOptions {
  /// Windows and points per sampled stage.
  std::size_t samples = 100;
  std::int64_t M_cap = 4096;
  /// Plan a larger marker when the given tiler cannot hold the towers.
  bool replan_marker = true;
};

struct ComparisonCertificate {
  OpenSet E, F;
  double epsilon = 0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::string E_prime;  // description of the closed set {phi_E >= epsilon}

  std::int64_t N_density = 0;
  double delta = 0;
  std::int64_t N0 = 0;  // tower 0 size, max(N + 1, floor(delta^(-1/d)) + 1)
  std::int64_t N1 = 0;
  std::size_t d = 0;
  std::int64_t marker_M = 0, marker_L = 0;
  double H = 0;
  bool replanned = false;

  std::vector<DensityRecord> density_records;
  std::optional<TwoTowersResult> two_towers;
  std::vector<RankRecord> tower0;
  std::vector<RankRecord> tower1;
  std::vector<ComparisonStage> stages;
  bool overall = false;

  const ComparisonStage& stage(const std::string& name) const;
  /// Name of the first stage that failed or did not run; empty when none.
  std::string failed_stage() const;
};

/// Stages: E_prime, density, delta, two_towers, cut_function, first_tower,
/// second_tower. A failing stage stops the pipeline.
ComparisonCertificate certify_comparison(const Tiler& tiler, const OpenSet& E, const OpenSet& F,
                                         double epsilon, std::uint64_t seed,
                                         const CertifyOptions& options = {});

/// Re-checks every stored inequality of a certificate from its records alone.
bool replay(const ComparisonCertificate& cert);

}  // namespace zdtl::comparison
