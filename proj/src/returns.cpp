#include "zdtl/returns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace zdtl::dynsys {

namespace {

using Int128 = __int128;
using LVec = std::vector<long double>;

constexpr std::size_t kScanLimit = 4096;
constexpr long double kTwo64 = 18446744073709551616.0L;
constexpr std::uint64_t kNodeCap = 200'000'000ULL;

long double dot(const LVec& a, const LVec& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool accept(const RotationAction& action, const TorusPoint& x, const TorusPoint& target,
            const LatticeVector& n, double radius, double rho, bool closed) {
  if (static_cast<double>(n.norm2()) > radius * radius) return false;
  const double dist = torus_distance(act(action, x, n), target);
  return closed ? dist <= rho : dist < rho;
}

std::size_t window_count(std::size_t d, double radius) {
  double side = 2.0 * std::floor(std::max(radius, 0.0)) + 1.0;
  return static_cast<std::size_t>(std::min(std::pow(side, static_cast<double>(d)), 1e18));
}

// Real coordinates of the integer combination `u` of the generator basis.
LVec embed(const RotationAction& action, const std::vector<std::int64_t>& u, double radius,
           double rho) {
  const std::size_t d = action.rank(), m = action.torus_dim();
  LVec v(d + m);
  for (std::size_t i = 0; i < d; ++i) v[i] = static_cast<long double>(u[i]) / radius;
  for (std::size_t j = 0; j < m; ++j) {
    Int128 num = static_cast<Int128>(u[d + j]) * (static_cast<Int128>(1) << 64);
    for (std::size_t i = 0; i < d; ++i)
      num += static_cast<Int128>(u[i]) * static_cast<Int128>(action.increment_raw(i, j));
    v[d + j] = static_cast<long double>(num) / kTwo64 / rho;
  }
  return v;
}

struct Reduced {
  std::vector<std::vector<std::int64_t>> basis;
  std::vector<LVec> vecs;
  std::vector<LVec> ortho;  // Gram-Schmidt vectors b*_j
  std::vector<long double> norms2;
};

void gram_schmidt(Reduced& r, std::vector<LVec>& mu) {
  const std::size_t D = r.vecs.size();
  r.ortho = r.vecs;
  r.norms2.assign(D, 0);
  mu.assign(D, LVec(D, 0));
  for (std::size_t k = 0; k < D; ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      mu[k][j] = dot(r.vecs[k], r.ortho[j]) / r.norms2[j];
      for (std::size_t i = 0; i < D; ++i) r.ortho[k][i] -= mu[k][j] * r.ortho[j][i];
    }
    r.norms2[k] = dot(r.ortho[k], r.ortho[k]);
  }
}

Reduced lll(const RotationAction& action, double radius, double rho) {
  const std::size_t d = action.rank(), m = action.torus_dim(), D = d + m;
  Reduced r;
  r.basis.assign(D, std::vector<std::int64_t>(D, 0));
  for (std::size_t i = 0; i < D; ++i) r.basis[i][i] = 1;
  r.vecs.resize(D);
  for (std::size_t i = 0; i < D; ++i) r.vecs[i] = embed(action, r.basis[i], radius, rho);

  std::vector<LVec> mu;
  gram_schmidt(r, mu);
  const long double delta = 0.99L;
  std::size_t k = 1;
  std::size_t guard = 0;
  while (k < D) {
    if (++guard > 100000) throw std::runtime_error("lattice reduction did not converge");
    for (std::size_t jj = k; jj-- > 0;) {
      long double q = std::nearbyint(mu[k][jj]);
      if (q == 0) continue;
      auto qi = static_cast<std::int64_t>(q);
      for (std::size_t i = 0; i < D; ++i) r.basis[k][i] -= qi * r.basis[jj][i];
      r.vecs[k] = embed(action, r.basis[k], radius, rho);
      gram_schmidt(r, mu);
    }
    if (r.norms2[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * r.norms2[k - 1]) {
      ++k;
    } else {
      std::swap(r.basis[k], r.basis[k - 1]);
      std::swap(r.vecs[k], r.vecs[k - 1]);
      gram_schmidt(r, mu);
      k = std::max<std::size_t>(k - 1, 1);
    }
  }
  return r;
}

}  // namespace

ReturnFinder::ReturnFinder(const RotationAction& action, double lattice_radius,
                           double torus_radius, bool force_enumeration)
    : action_(&action), radius_(lattice_radius), rho_(torus_radius) {
  if (!(lattice_radius >= 0) || !(torus_radius > 0))
    throw std::invalid_argument("return search needs radius >= 0 and rho > 0");
  dim_ = action.rank() + action.torus_dim();
  enumerate_ = lattice_radius >= 1.0 &&
               (force_enumeration || window_count(action.rank(), lattice_radius) > kScanLimit);
  if (enumerate_) reduce();
}

void ReturnFinder::reduce() {
  Reduced r = lll(*action_, radius_, rho_);
  basis_ = r.basis;
  const std::size_t D = dim_;
  chol_.assign(D, std::vector<long double>(D, 0));
  gs_dirs_.assign(D, LVec(D, 0));
  for (std::size_t j = 0; j < D; ++j) {
    long double nrm = std::sqrt(r.norms2[j]);
    for (std::size_t i = 0; i < D; ++i) gs_dirs_[j][i] = r.ortho[j][i] / nrm;
    for (std::size_t i = j; i < D; ++i) chol_[j][i] = dot(r.vecs[i], gs_dirs_[j]);
  }
}

std::vector<LatticeVector> ReturnFinder::find(const TorusPoint& x, const TorusPoint& target,
                                              bool closed) const {
  if (x.dim() != action_->torus_dim() || target.dim() != action_->torus_dim())
    throw std::invalid_argument("torus point dimension mismatch");
  if (!enumerate_) return scan_returns(*action_, x, target, radius_, rho_, closed);

  const std::size_t d = action_->rank(), m = action_->torus_dim(), D = dim_;
  LVec t(D, 0);
  for (std::size_t j = 0; j < m; ++j) {
    auto diff = static_cast<std::int64_t>(target.raw(j) - x.raw(j));
    t[d + j] = static_cast<long double>(diff) / kTwo64 / rho_;
  }
  LVec y(D);
  for (std::size_t j = 0; j < D; ++j) y[j] = dot(t, gs_dirs_[j]);

  std::set<LatticeVector> found;
  std::vector<std::int64_t> c(D, 0);
  std::uint64_t nodes = 0;
  const long double budget = 2.0L * (1.0L + 1e-6L) + 1e-9L;

  auto emit = [&]() {
    LatticeVector n(d);
    for (std::size_t i = 0; i < d; ++i) {
      Int128 z = 0;
      for (std::size_t col = 0; col < D; ++col)
        z += static_cast<Int128>(basis_[col][i]) * c[col];
      if (z > std::numeric_limits<std::int64_t>::max() || z < std::numeric_limits<std::int64_t>::min())
        return;
      n[i] = static_cast<std::int64_t>(z);
    }
    if (accept(*action_, x, target, n, radius_, rho_, closed)) found.insert(n);
  };

  auto level = [&](auto&& self, std::size_t j, long double rem) -> void {
    if (++nodes > kNodeCap) throw std::runtime_error("orbit return enumeration exceeded node cap");
    long double shift = y[j];
    for (std::size_t i = j + 1; i < D; ++i) shift -= chol_[j][i] * c[i];
    const long double center = shift / chol_[j][j];
    const long double width = std::sqrt(rem) / std::fabs(chol_[j][j]);
    const auto lo = static_cast<std::int64_t>(std::ceil(center - width));
    const auto hi = static_cast<std::int64_t>(std::floor(center + width));
    for (std::int64_t v = lo; v <= hi; ++v) {
      c[j] = v;
      long double diff = chol_[j][j] * (static_cast<long double>(v) - center);
      long double left = rem - diff * diff;
      if (left < 0) continue;
      if (j == 0)
        emit();
      else
        self(self, j - 1, left);
    }
    c[j] = 0;
  };
  level(level, D - 1, budget);
  return {found.begin(), found.end()};
}

std::vector<LatticeVector> scan_returns(const RotationAction& action, const TorusPoint& x,
                                        const TorusPoint& target, double lattice_radius,
                                        double torus_radius, bool closed) {
  std::vector<LatticeVector> out;
  for (const auto& n : lattice_ball(action.rank(), lattice_radius)) {
    const double dist = torus_distance(act(action, x, n), target);
    if (closed ? dist <= torus_radius : dist < torus_radius) out.push_back(n);
  }
  return out;
}

double shortest_return(const RotationAction& action, double lattice_radius, double torus_radius) {
  ReturnFinder finder(action, lattice_radius, torus_radius);
  const TorusPoint origin = TorusPoint::zero(action.torus_dim());
  double best = 0;
  for (const auto& n : finder.find(origin, origin, true)) {
    if (n.is_zero()) continue;
    if (best == 0 || n.norm() < best) best = n.norm();
  }
  return best;
}

double covering_bound(const RotationAction& action, double lattice_radius, double torus_radius) {
  if (!(lattice_radius > 0) || !(torus_radius > 0)) return std::numeric_limits<double>::infinity();
  Reduced r = lll(action, lattice_radius, torus_radius);
  long double s = 0;
  for (long double v : r.norms2) s += v;
  return static_cast<double>(0.5L * std::sqrt(s));
}

}  // namespace zdtl::dynsys
