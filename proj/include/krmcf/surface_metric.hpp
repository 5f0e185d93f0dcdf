#pragma once

#include "krmcf/grid.hpp"

namespace krmcf {

enum class BaseGeometry { Flat, RoundUnitSphere };

// Conformal metric e^{2u} g_base on one factor surface, evolving by the
// normalized Ricci flow du/dt = -(R - r)/4.
struct ConformalSurfaceMetric {
  PeriodicGrid grid;
  BaseGeometry base = BaseGeometry::Flat;
  Field u;
  double r = 0.0;

  static ConformalSurfaceMetric flat_torus(int n, double r = 0.0) {
    PeriodicGrid g = PeriodicGrid::torus(n);
    return ConformalSurfaceMetric{g, BaseGeometry::Flat, Field(g), r};
  }
  static ConformalSurfaceMetric round_sphere(int n, double r = 2.0) {
    PeriodicGrid g = PeriodicGrid::sphere_rotsym(n);
    return ConformalSurfaceMetric{g, BaseGeometry::RoundUnitSphere, Field(g),
                                  r};
  }
};

// base-metric Laplacian of a scalar field
inline Field base_laplacian(const Field& f, const ConformalSurfaceMetric& m) {
  Field out(m.grid);
  if (m.base == BaseGeometry::Flat) {
    TorusStencil st(m.grid);
    for (int i = 0; i < m.grid.nx; ++i)
      for (int j = 0; j < m.grid.ny; ++j) out.at(i, j) = st.lap0(f, i, j);
  } else {
    // (1/sin) d(sin df) with exact sine at cell faces; face flux at the poles
    // is exactly zero
    int n = m.grid.nx;
    double h = m.grid.hx;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
      double next = 0.0;
      if (i + 1 < n)
        next = std::sin((i + 1) * h) * (f[std::size_t(i + 1)] - f[std::size_t(i)]) / h;
      out[std::size_t(i)] = (next - prev) / (std::sin((i + 0.5) * h) * h);
      prev = next;
    }
  }
  return out;
}

inline Field scalar_curvature(const ConformalSurfaceMetric& m) {
  Field lap = base_laplacian(m.u, m);
  Field R(m.grid);
  double base_R = m.base == BaseGeometry::Flat ? 0.0 : 2.0;
  for (std::size_t k = 0; k < R.size(); ++k)
    R[k] = std::exp(-2.0 * m.u[k]) * (base_R - 2.0 * lap[k]);
  if (!R.finite()) throw BlowUpError(0.0, "non-finite scalar curvature");
  return R;
}

inline Field laplace_beltrami(const Field& f, const ConformalSurfaceMetric& m) {
  Field out = base_laplacian(f, m);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] *= std::exp(-2.0 * m.u[k]);
  return out;
}

// base-measure cell weights; the sphere uses exact spherical band areas so
// the weights sum to 4*pi
inline std::vector<double> base_cell_measure(const PeriodicGrid& g) {
  std::vector<double> w(g.size());
  if (g.topology == Topology::Torus) {
    std::fill(w.begin(), w.end(), g.hx * g.hy);
  } else {
    for (int i = 0; i < g.nx; ++i)
      w[std::size_t(i)] =
          kTwoPi * (std::cos(i * g.hx) - std::cos((i + 1) * g.hx));
  }
  return w;
}

inline Field area_form(const ConformalSurfaceMetric& m) {
  std::vector<double> w = base_cell_measure(m.grid);
  Field out(m.grid);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = std::exp(2.0 * m.u[k]) * w[k];
  return out;
}

inline double total_area(const ConformalSurfaceMetric& m) {
  Field da = area_form(m);
  return pairwise_sum(da.a);
}

inline double average_scalar_curvature(const ConformalSurfaceMetric& m) {
  Field R = scalar_curvature(m);
  Field da = area_form(m);
  std::vector<double> prod(R.size());
  for (std::size_t k = 0; k < R.size(); ++k) prod[k] = R[k] * da[k];
  return pairwise_sum(prod) / pairwise_sum(da.a);
}

inline double ricci_stable_dt(const ConformalSurfaceMetric& m) {
  double min_e2u = std::exp(2.0 * m.u.min());
  return 0.2 * m.grid.hx * m.grid.hx * min_e2u;
}

inline Field ricci_rhs(const ConformalSurfaceMetric& m) {
  Field R = scalar_curvature(m);
  Field out(m.grid);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = -0.25 * (R[k] - m.r);
  return out;
}

inline ConformalSurfaceMetric ricci_flow_step(const ConformalSurfaceMetric& m,
                                              double dt) {
  auto shifted = [&](const Field& k, double c) {
    ConformalSurfaceMetric s = m;
    for (std::size_t q = 0; q < s.u.size(); ++q) s.u[q] += c * k[q];
    return s;
  };
  Field k1 = ricci_rhs(m);
  Field k2 = ricci_rhs(shifted(k1, dt / 2));
  Field k3 = ricci_rhs(shifted(k2, dt / 2));
  Field k4 = ricci_rhs(shifted(k3, dt));
  ConformalSurfaceMetric out = m;
  for (std::size_t q = 0; q < out.u.size(); ++q)
    out.u[q] += dt / 6.0 * (k1[q] + 2 * k2[q] + 2 * k3[q] + k4[q]);
  if (!out.u.finite())
    throw BlowUpError(0.0, "Ricci flow produced non-finite conformal factor");
  return out;
}

}  // namespace krmcf
