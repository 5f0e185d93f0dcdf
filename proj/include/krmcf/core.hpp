#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace krmcf {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;

using Vec2 = std::array<double, 2>;
using Vec4 = std::array<double, 4>;
using Mat2 = std::array<std::array<double, 2>, 2>;

struct Sym2 {
  double xx = 0, xy = 0, yy = 0;
  double det() const { return xx * yy - xy * xy; }
};

inline Sym2 inverse(const Sym2& g) {
  double d = g.det();
  return Sym2{g.yy / d, -g.xy / d, g.xx / d};
}

inline double min_eigenvalue(const Sym2& g) {
  double tr = g.xx + g.yy;
  double disc = std::sqrt(0.25 * (g.xx - g.yy) * (g.xx - g.yy) + g.xy * g.xy);
  return 0.5 * tr - disc;
}

// Deterministic pairwise reduction; used for every integral so results do not
// depend on any traversal re-ordering.
inline double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 8) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& a) {
  return pairwise_sum(a.data(), a.size());
}

struct BlowUpError : std::runtime_error {
  double time;
  explicit BlowUpError(double t, const std::string& what)
      : std::runtime_error(what), time(t) {}
};

struct DegenerateImmersionError : std::runtime_error {
  explicit DegenerateImmersionError(const std::string& what)
      : std::runtime_error(what) {}
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

// xorshift-based generator with splitmix seeding: stable across platforms,
// unlike distribution wrappers in <random>.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull;
    for (auto& s : s_) {
      z += 0x9e3779b97f4a7c15ull;
      std::uint64_t x = z;
      x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
      x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
      s = x ^ (x >> 31);
    }
  }
  std::uint64_t next_u64() {
    std::uint64_t x = s_[0];
    std::uint64_t y = s_[1];
    s_[0] = y;
    x ^= x << 23;
    s_[1] = x ^ y ^ (x >> 17) ^ (y >> 26);
    return s_[1] + y;
  }
  // uniform in [0, 1)
  double next_double() {
    return double(next_u64() >> 11) * (1.0 / 9007199254740992.0);
  }
  // uniform in [-1, 1)
  double next_signed() { return 2.0 * next_double() - 1.0; }

 private:
  std::array<std::uint64_t, 2> s_{};
};

}  // namespace krmcf
