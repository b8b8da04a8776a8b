#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace zdtl {

/// Tolerance used by every geometric comparison in the library.
inline constexpr double kGeoTol = 1e-9;

/// Largest supported action rank and torus dimension.
inline constexpr std::size_t kMaxDim = 4;

/// Domain failure with a stable, user-facing message.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-capacity vector used for lattice labels and points of R^d.
template <class T>
class SmallVec {
 public:
  SmallVec() = default;
  explicit SmallVec(std::size_t n, T fill = T{}) : size_(check(n)) {
    for (std::size_t i = 0; i < n; ++i) data_[i] = fill;
  }
  SmallVec(std::initializer_list<T> init) : size_(check(init.size())) {
    std::size_t i = 0;
    for (const T& v : init) data_[i++] = v;
  }

  std::size_t size() const { return size_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  const T* begin() const { return data_.data(); }
  const T* end() const { return data_.data() + size_; }
  T* begin() { return data_.data(); }
  T* end() { return data_.data() + size_; }

  friend bool operator==(const SmallVec& a, const SmallVec& b) {
    if (a.size_ != b.size_) return false;
    for (std::size_t i = 0; i < a.size_; ++i)
      if (a.data_[i] != b.data_[i]) return false;
    return true;
  }
  /// Lexicographic order; shorter vectors first.
  friend bool operator<(const SmallVec& a, const SmallVec& b) {
    if (a.size_ != b.size_) return a.size_ < b.size_;
    for (std::size_t i = 0; i < a.size_; ++i) {
      if (a.data_[i] < b.data_[i]) return true;
      if (b.data_[i] < a.data_[i]) return false;
    }
    return false;
  }

  SmallVec& operator+=(const SmallVec& o) {
    same_size(o);
    for (std::size_t i = 0; i < size_; ++i) data_[i] += o.data_[i];
    return *this;
  }
  SmallVec& operator-=(const SmallVec& o) {
    same_size(o);
    for (std::size_t i = 0; i < size_; ++i) data_[i] -= o.data_[i];
    return *this;
  }
  friend SmallVec operator+(SmallVec a, const SmallVec& b) { return a += b; }
  friend SmallVec operator-(SmallVec a, const SmallVec& b) { return a -= b; }
  friend SmallVec operator-(SmallVec a) {
    for (std::size_t i = 0; i < a.size_; ++i) a.data_[i] = -a.data_[i];
    return a;
  }

  T dot(const SmallVec& o) const {
    same_size(o);
    T s{};
    for (std::size_t i = 0; i < size_; ++i) s += data_[i] * o.data_[i];
    return s;
  }
  T norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(static_cast<double>(norm2())); }
  bool is_zero() const {
    for (std::size_t i = 0; i < size_; ++i)
      if (data_[i] != T{}) return false;
    return true;
  }

 private:
  static std::uint8_t check(std::size_t n) {
    if (n > kMaxDim) throw std::invalid_argument("dimension exceeds " + std::to_string(kMaxDim));
    return static_cast<std::uint8_t>(n);
  }
  void same_size(const SmallVec& o) const {
    if (o.size_ != size_) throw std::invalid_argument("dimension mismatch");
  }

  std::array<T, kMaxDim> data_{};
  std::uint8_t size_ = 0;
};

/// n in Z^d.
using LatticeVector = SmallVec<std::int64_t>;
/// A point or direction of R^d.
using RealVector = SmallVec<double>;

inline RealVector to_real(const LatticeVector& n) {
  RealVector r(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) r[i] = static_cast<double>(n[i]);
  return r;
}

inline RealVector scaled(RealVector v, double k) {
  for (double& c : v) c *= k;
  return v;
}

}  // namespace zdtl
