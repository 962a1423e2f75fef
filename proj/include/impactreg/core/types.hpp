/*=========================================================================
 *
 *  Copyright the impactreg contributors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *        http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#ifndef IMPACTREG_CORE_TYPES_HPP
#define IMPACTREG_CORE_TYPES_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace impactreg {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double& operator[](int i) { return (&x)[i]; }
  double operator[](int i) const { return (&x)[i]; }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  double max_abs() const { return std::max({std::abs(x), std::abs(y), std::abs(z)}); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

struct Index3 {
  int x = 0;
  int y = 0;
  int z = 0;

  int& operator[](int i) { return (&x)[i]; }
  int operator[](int i) const { return (&x)[i]; }
  bool operator==(const Index3& o) const { return x == o.x && y == o.y && z == o.z; }
  std::size_t volume() const {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(y) * static_cast<std::size_t>(z);
  }
};

/** Row-major 3x3 matrix, just enough linear algebra for affine transforms. */
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }
  double& operator()(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }
  double operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }

  Vec3 apply(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 multiply(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }
  double determinant() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
  Mat3 inverse() const {
    const double det = determinant();
    if (std::abs(det) < 1e-300) throw std::invalid_argument("Mat3::inverse: singular matrix");
    const double inv = 1.0 / det;
    Mat3 r;
    r.m = {(m[4] * m[8] - m[5] * m[7]) * inv, (m[2] * m[7] - m[1] * m[8]) * inv,
           (m[1] * m[5] - m[2] * m[4]) * inv, (m[5] * m[6] - m[3] * m[8]) * inv,
           (m[0] * m[8] - m[2] * m[6]) * inv, (m[2] * m[3] - m[0] * m[5]) * inv,
           (m[3] * m[7] - m[4] * m[6]) * inv, (m[1] * m[6] - m[0] * m[7]) * inv,
           (m[0] * m[4] - m[1] * m[3]) * inv};
    return r;
  }
};

/** Base class for all recoverable failures raised by the library. */
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/** File parsing / serialization failures (bad header, truncated payload, ...). */
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

/** Invalid or inconsistent configuration values. */
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/** Sample budget exhaustion and other sampling infeasibilities. */
class SamplingError : public Error {
 public:
  explicit SamplingError(const std::string& what) : Error(what) {}
};

/** Non-finite values or numerically degenerate states that survived retries. */
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

/**
 * Deterministic pseudo-random generator (splitmix64 core).
 *
 * A self-contained generator is used instead of std::mt19937 +
 * std::*_distribution so that streams are reproducible bit-for-bit across
 * standard library implementations.  fork() derives an independent stream
 * from the parent seed without disturbing the parent's state.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /** Uniform double in [0, 1). */
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /** Uniform double in [lo, hi). */
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /** Uniform integer in [0, n); n must be nonzero. Lemire's rejection method. */
  std::uint64_t below(std::uint64_t n) {
    for (;;) {
      std::uint64_t r = next_u64();
      // Low 64 bits of the 128-bit product are the rejection threshold test.
      __uint128_t prod = static_cast<__uint128_t>(r) * static_cast<__uint128_t>(n);
      std::uint64_t low = static_cast<std::uint64_t>(prod);
      if (low >= n) return static_cast<std::uint64_t>(prod >> 64);
      std::uint64_t threshold = (0ULL - n) % n;
      if (low >= threshold) return static_cast<std::uint64_t>(prod >> 64);
    }
  }

  /** Standard normal deviate via Box-Muller. */
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /** Independent child stream; deterministic in (parent seed, stream id). */
  Rng fork(std::uint64_t stream) const { return Rng(mix(seed_, stream)); }

  /** Stateless 64-bit mixing of two words (for per-sample stream keys). */
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/** Fixed-capacity vector for per-point transform Jacobian rows. */
template <class T, std::size_t Capacity>
class StaticVec {
 public:
  void clear() { size_ = 0; }
  void push_back(const T& v) { data_[size_++] = v; }
  std::size_t size() const { return size_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T* begin() { return data_.data(); }
  T* end() { return data_.data() + size_; }
  const T* begin() const { return data_.data(); }
  const T* end() const { return data_.data() + size_; }

 private:
  std::array<T, Capacity> data_{};
  std::size_t size_ = 0;
};

}  // namespace impactreg

#endif  // IMPACTREG_CORE_TYPES_HPP
