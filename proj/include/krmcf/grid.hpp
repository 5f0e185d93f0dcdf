#pragma once

#include <algorithm>
#include <cassert>

#include "krmcf/core.hpp"

namespace krmcf {

enum class Topology { Torus, SphereRotsym };

// Torus: full 2D periodic grid on [0,2pi)^2, nodes x_i = i*h.
// SphereRotsym: 1D grid in the polar angle, staggered so no node sits on a
// pole: theta_i = (i+1/2)*h with h = pi/n; fields are azimuth-independent and
// extend evenly across both poles.
struct PeriodicGrid {
  Topology topology = Topology::Torus;
  int nx = 0, ny = 0;
  double hx = 0, hy = 0;

  static PeriodicGrid torus(int n) {
    check_n(n);
    return PeriodicGrid{Topology::Torus, n, n, kTwoPi / n, kTwoPi / n};
  }
  static PeriodicGrid sphere_rotsym(int n) {
    check_n(n);
    return PeriodicGrid{Topology::SphereRotsym, n, 1, kPi / n, 0.0};
  }
  static void check_n(int n) {
    if (n < 8 || n % 2 != 0)
      throw ValidationError("grid size must be even and >= 8");
  }
  std::size_t size() const { return std::size_t(nx) * std::size_t(ny); }
  double x(int i) const {
    return topology == Topology::Torus ? i * hx : (i + 0.5) * hx;
  }
  double y(int j) const { return j * hy; }
  bool operator==(const PeriodicGrid&) const = default;
};

struct Field {
  int nx = 0, ny = 1;
  std::vector<double> a;

  Field() = default;
  Field(int nx_, int ny_, double fill = 0.0)
      : nx(nx_), ny(ny_), a(std::size_t(nx_) * ny_, fill) {}
  explicit Field(const PeriodicGrid& g, double fill = 0.0)
      : Field(g.nx, g.ny, fill) {}

  double& at(int i, int j) { return a[std::size_t(i) * ny + j]; }
  double at(int i, int j) const { return a[std::size_t(i) * ny + j]; }
  double& operator[](std::size_t k) { return a[k]; }
  double operator[](std::size_t k) const { return a[k]; }
  std::size_t size() const { return a.size(); }

  bool finite() const {
    for (double v : a)
      if (!std::isfinite(v)) return false;
    return true;
  }
  double max_abs() const {
    double m = 0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
  }
  double min() const { return *std::min_element(a.begin(), a.end()); }
  double max() const { return *std::max_element(a.begin(), a.end()); }
};

// ---- torus stencils (2nd order centered) ----

inline int wrap(int i, int n) { return i < 0 ? i + n : (i >= n ? i - n : i); }

struct TorusStencil {
  int nx, ny;
  double hx, hy;
  explicit TorusStencil(const PeriodicGrid& g)
      : nx(g.nx), ny(g.ny), hx(g.hx), hy(g.hy) {}

  double dx(const Field& f, int i, int j) const {
    return (f.at(wrap(i + 1, nx), j) - f.at(wrap(i - 1, nx), j)) / (2 * hx);
  }
  double dy(const Field& f, int i, int j) const {
    return (f.at(i, wrap(j + 1, ny)) - f.at(i, wrap(j - 1, ny))) / (2 * hy);
  }
  double dxx(const Field& f, int i, int j) const {
    return (f.at(wrap(i + 1, nx), j) - 2 * f.at(i, j) +
            f.at(wrap(i - 1, nx), j)) /
           (hx * hx);
  }
  double dyy(const Field& f, int i, int j) const {
    return (f.at(i, wrap(j + 1, ny)) - 2 * f.at(i, j) +
            f.at(i, wrap(j - 1, ny))) /
           (hy * hy);
  }
  double dxy(const Field& f, int i, int j) const {
    return (f.at(wrap(i + 1, nx), wrap(j + 1, ny)) -
            f.at(wrap(i + 1, nx), wrap(j - 1, ny)) -
            f.at(wrap(i - 1, nx), wrap(j + 1, ny)) +
            f.at(wrap(i - 1, nx), wrap(j - 1, ny))) /
           (4 * hx * hy);
  }
  double lap0(const Field& f, int i, int j) const {
    return dxx(f, i, j) + dyy(f, i, j);
  }
};

// ---- sphere (rotationally symmetric) stencils ----
//
// Ghost values across a pole mirror the interior with the parity of the
// field: smooth azimuth-independent scalars are even.

enum class Parity { Even, Odd };

struct SphereStencil {
  int n;
  double h;
  explicit SphereStencil(const PeriodicGrid& g) : n(g.nx), h(g.hx) {}

  double ghost(const Field& f, int i, Parity p) const {
    if (i >= 0 && i < n) return f[std::size_t(i)];
    int m = i < 0 ? -i - 1 : 2 * n - 1 - i;
    double v = f[std::size_t(m)];
    return p == Parity::Even ? v : -v;
  }
  double d(const Field& f, int i, Parity p = Parity::Even) const {
    return (ghost(f, i + 1, p) - ghost(f, i - 1, p)) / (2 * h);
  }
  double d2(const Field& f, int i, Parity p = Parity::Even) const {
    return (ghost(f, i + 1, p) - 2 * f[std::size_t(i)] + ghost(f, i - 1, p)) /
           (h * h);
  }
  // conservative divergence (1/w) d_theta(M dc/dtheta) with midpoint fluxes;
  // the flux vanishes identically at both poles because the measure does.
  void flux_divergence(const Field& M, const Field& c, const Field& w,
                       Field& out) const {
    double prev = 0.0;  // flux at the south-pole face
    for (int i = 0; i < n; ++i) {
      double next = 0.0;
      if (i + 1 < n) {
        next = 0.5 * (M[std::size_t(i)] + M[std::size_t(i + 1)]) *
               (c[std::size_t(i + 1)] - c[std::size_t(i)]) / h;
      }
      out[std::size_t(i)] = (next - prev) / (w[std::size_t(i)] * h);
      prev = next;
    }
  }
};

// ---- interpolation of factor-2 data at image points ----
//
// Catmull-Rom (locally cubic, O(h^4) for smooth data); periodic in both
// directions on the torus, parity-reflected at the poles on the sphere.

inline void catmull_weights(double s, double w[4]) {
  double s2 = s * s, s3 = s2 * s;
  w[0] = 0.5 * (-s3 + 2 * s2 - s);
  w[1] = 0.5 * (3 * s3 - 5 * s2 + 2);
  w[2] = 0.5 * (-3 * s3 + 4 * s2 + s);
  w[3] = 0.5 * (s3 - s2);
}

inline double interp_torus(const Field& f, const PeriodicGrid& g, double x,
                           double y) {
  double fx = x / g.hx, fy = y / g.hy;
  double bx = std::floor(fx), by = std::floor(fy);
  double sx = fx - bx, sy = fy - by;
  int ix = int(bx), iy = int(by);
  double wx[4], wy[4];
  catmull_weights(sx, wx);
  catmull_weights(sy, wy);
  double acc = 0;
  for (int a = 0; a < 4; ++a) {
    int i = ix + a - 1;
    i %= g.nx;
    if (i < 0) i += g.nx;
    double row = 0;
    for (int b = 0; b < 4; ++b) {
      int j = iy + b - 1;
      j %= g.ny;
      if (j < 0) j += g.ny;
      row += wy[b] * f.at(i, j);
    }
    acc += wx[a] * row;
  }
  return acc;
}

inline double interp_sphere(const Field& f, const PeriodicGrid& g, double theta,
                            Parity p = Parity::Even) {
  // staggered nodes theta_i = (i+1/2) h
  double fx = theta / g.hx - 0.5;
  double bx = std::floor(fx);
  double s = fx - bx;
  int ix = int(bx);
  double w[4];
  catmull_weights(s, w);
  SphereStencil st(g);
  double acc = 0;
  for (int a = 0; a < 4; ++a) acc += w[a] * st.ghost(f, ix + a - 1, p);
  return acc;
}

}  // namespace krmcf
