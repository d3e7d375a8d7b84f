#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>

namespace bbandit {

/// The two actions of the game. Indexing helpers map +1 -> 0 and -1 -> 1.
enum class Arm : int { Plus = 1, Minus = -1 };

constexpr int arm_index(Arm a) { return a == Arm::Plus ? 0 : 1; }
constexpr Arm arm_from_index(int i) { return i == 0 ? Arm::Plus : Arm::Minus; }
constexpr Arm other(Arm a) { return a == Arm::Plus ? Arm::Minus : Arm::Plus; }
constexpr int arm_value(Arm a) { return static_cast<int>(a); }

inline constexpr int kMaxDim = 6;

/// A covariate in [0,1]^d with small fixed capacity so the hot loop never allocates.
class Point {
 public:
  Point() = default;
  explicit Point(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("Point: dimension out of range");
  }
  Point(std::initializer_list<double> coords) : Point(static_cast<int>(coords.size())) {
    int j = 0;
    for (double c : coords) x_[j++] = c;
  }

  int dim() const { return dim_; }
  double& operator[](int j) { return x_[j]; }
  double operator[](int j) const { return x_[j]; }
  std::span<const double> coords() const { return {x_.data(), static_cast<size_t>(dim_)}; }

 private:
  std::array<double, kMaxDim> x_{};
  int dim_ = 1;
};

/// Axis-aligned box [lo, hi] (membership conventions are left to the owner).
struct Box {
  Point lo;
  Point hi;

  int dim() const { return lo.dim(); }
  double volume() const {
    double v = 1.0;
    for (int j = 0; j < dim(); ++j) v *= hi[j] - lo[j];
    return v;
  }
};

inline double linf_distance(const Point& a, const Point& b) {
  double m = 0.0;
  for (int j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

inline double l2_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (int j = 0; j < a.dim(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

/// splitmix64 finalizer; used for seed derivation.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix_seeds(std::uint64_t a, std::uint64_t b) { return mix64(a ^ mix64(b)); }

/// Deterministic random stream. Conversions to uniforms are done by hand so
/// draws are bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  /// Rademacher sign in {+1, -1}.
  int sign() { return (engine_() >> 63) ? 1 : -1; }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

/// Floor with an integer-rounding guard: values within 1e-9 of an integer n
/// return n (so that the cube root of 1000 floors to 10, not 9).
inline std::int64_t guarded_floor(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::floor(x));
}

inline std::int64_t guarded_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace bbandit
