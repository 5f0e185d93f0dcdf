#pragma once

#include "krmcf/surface_metric.hpp"

namespace krmcf {

// pointwise data of one factor surface at a chart point
struct FactorPointData {
  double coord[2] = {0, 0};  // (x,y) on the torus, (theta,phi) on the sphere
  double e2u = 1.0;
  double du[2] = {0, 0};
  double R = 0.0;
  double dR[2] = {0, 0};
  BaseGeometry base = BaseGeometry::Flat;
};

// Precomputed per-factor fields (conformal factor and curvature with their
// first derivatives) evaluated either exactly at grid nodes or by cubic
// interpolation at arbitrary chart points.
struct FactorEval {
  const ConformalSurfaceMetric& m;
  Field R;

  explicit FactorEval(const ConformalSurfaceMetric& metric)
      : m(metric), R(scalar_curvature(metric)) {}

  FactorPointData at_node(int i, int j) const {
    FactorPointData d;
    d.base = m.base;
    d.coord[0] = m.grid.x(i);
    d.coord[1] = m.grid.y(j);
    d.e2u = std::exp(2.0 * m.u.at(i, j));
    d.R = R.at(i, j);
    if (m.grid.topology == Topology::Torus) {
      TorusStencil st(m.grid);
      d.du[0] = st.dx(m.u, i, j);
      d.du[1] = st.dy(m.u, i, j);
      d.dR[0] = st.dx(R, i, j);
      d.dR[1] = st.dy(R, i, j);
    } else {
      SphereStencil st(m.grid);
      d.du[0] = st.d(m.u, i);
      d.dR[0] = st.d(R, i);
    }
    return d;
  }

  FactorPointData at_point(double x, double y) const {
    FactorPointData d;
    d.base = m.base;
    d.coord[0] = x;
    d.coord[1] = y;
    if (m.grid.topology == Topology::Torus) {
      ensure_derivs();
      d.e2u = std::exp(2.0 * interp_torus(m.u, m.grid, x, y));
      d.du[0] = interp_torus(du0_, m.grid, x, y);
      d.du[1] = interp_torus(du1_, m.grid, x, y);
      d.R = interp_torus(R, m.grid, x, y);
      d.dR[0] = interp_torus(dR0_, m.grid, x, y);
      d.dR[1] = interp_torus(dR1_, m.grid, x, y);
    } else {
      ensure_derivs();
      d.e2u = std::exp(2.0 * interp_sphere(m.u, m.grid, x));
      d.du[0] = interp_sphere(du0_, m.grid, x, Parity::Odd);
      d.R = interp_sphere(R, m.grid, x);
      d.dR[0] = interp_sphere(dR0_, m.grid, x, Parity::Odd);
    }
    return d;
  }

 private:
  mutable bool derivs_ready_ = false;
  mutable Field du0_, du1_, dR0_, dR1_;

  void ensure_derivs() const {
    if (derivs_ready_) return;
    du0_ = Field(m.grid);
    du1_ = Field(m.grid);
    dR0_ = Field(m.grid);
    dR1_ = Field(m.grid);
    if (m.grid.topology == Topology::Torus) {
      TorusStencil st(m.grid);
      for (int i = 0; i < m.grid.nx; ++i)
        for (int j = 0; j < m.grid.ny; ++j) {
          du0_.at(i, j) = st.dx(m.u, i, j);
          du1_.at(i, j) = st.dy(m.u, i, j);
          dR0_.at(i, j) = st.dx(R, i, j);
          dR1_.at(i, j) = st.dy(R, i, j);
        }
    } else {
      SphereStencil st(m.grid);
      for (int i = 0; i < m.grid.nx; ++i) {
        du0_[std::size_t(i)] = st.d(m.u, i);
        dR0_[std::size_t(i)] = st.d(R, i);
      }
    }
    derivs_ready_ = true;
  }
};

// Pointwise ambient data on the product M1 x M2 in the block chart
// (x1, y1, x2, y2). Both chart metrics are diagonal.
struct AmbientPointData {
  double pt[4] = {0, 0, 0, 0};
  double gd[4] = {1, 1, 1, 1};    // metric diagonal
  double J[4][4] = {};            // column A holds J(d_A)
  double Gam[4][4][4] = {};       // Gam[A][B][C] = Gamma^A_BC
  double Rf[2] = {0, 0};          // factor scalar curvatures
  double dRf[2][2] = {{0, 0}, {0, 0}};  // coordinate partials of Rf

  double metric(int A, int B) const { return A == B ? gd[A] : 0.0; }
  double inv_metric(int A, int B) const { return A == B ? 1.0 / gd[A] : 0.0; }
  double scalar() const { return Rf[0] + Rf[1]; }

  // omega(d_A, d_B) = g(J d_A, d_B)
  double omega(int A, int B) const { return gd[B] * J[B][A]; }

  double ip(const double* X, const double* Y) const {
    return gd[0] * X[0] * Y[0] + gd[1] * X[1] * Y[1] + gd[2] * X[2] * Y[2] +
           gd[3] * X[3] * Y[3];
  }
  double ip_factor(int f, const double* X, const double* Y) const {
    int o = 2 * f;
    return gd[o] * X[o] * Y[o] + gd[o + 1] * X[o + 1] * Y[o + 1];
  }
  void applyJ(const double* X, double* JX) const {
    for (int A = 0; A < 4; ++A)
      JX[A] = J[A][0] * X[0] + J[A][1] * X[1] + J[A][2] * X[2] + J[A][3] * X[3];
  }
  double omega_v(const double* X, const double* Y) const {
    double JX[4];
    applyJ(X, JX);
    return ip(JX, Y);
  }
  // omega of one factor only
  double omega_factor(int f, const double* X, const double* Y) const {
    double JX[4];
    applyJ(X, JX);
    return ip_factor(f, JX, Y);
  }

  // curvature tensor of a product of surfaces, evaluated on vectors
  double riem_v(const double* X, const double* Y, const double* Z,
                const double* W) const {
    double t = 0;
    for (int f = 0; f < 2; ++f)
      t += 0.5 * Rf[f] *
           (ip_factor(f, X, Z) * ip_factor(f, Y, W) -
            ip_factor(f, X, W) * ip_factor(f, Y, Z));
    return t;
  }
  double ricci_v(const double* X, const double* Y) const {
    return 0.5 * Rf[0] * ip_factor(0, X, Y) + 0.5 * Rf[1] * ip_factor(1, X, Y);
  }
  // Gamma^A(X, Y); the Christoffels couple coordinates within one factor
  // block only
  double gam2(int A, const double* X, const double* Y) const {
    int o = A < 2 ? 0 : 2;
    return Gam[A][o][o] * X[o] * Y[o] + Gam[A][o][o + 1] * X[o] * Y[o + 1] +
           Gam[A][o + 1][o] * X[o + 1] * Y[o] +
           Gam[A][o + 1][o + 1] * X[o + 1] * Y[o + 1];
  }
  double dR_dir(int f, const double* C) const {
    int o = 2 * f;
    return C[o] * dRf[f][0] + C[o + 1] * dRf[f][1];
  }
  // covariant derivative of the curvature tensor in direction C: the metric
  // wedge is parallel, so only the factor curvature scalars differentiate
  double driem_v(const double* C, const double* X, const double* Y,
                 const double* Z, const double* W) const {
    double t = 0;
    for (int f = 0; f < 2; ++f)
      t += 0.5 * dR_dir(f, C) *
           (ip_factor(f, X, Z) * ip_factor(f, Y, W) -
            ip_factor(f, X, W) * ip_factor(f, Y, Z));
    return t;
  }
  double dricci_v(const double* C, const double* X, const double* Y) const {
    return 0.5 * dR_dir(0, C) * ip_factor(0, X, Y) +
           0.5 * dR_dir(1, C) * ip_factor(1, X, Y);
  }
};

inline void fill_factor_block(AmbientPointData& d, int f,
                              const FactorPointData& p) {
  int o = 2 * f;
  d.pt[o] = p.coord[0];
  d.pt[o + 1] = p.coord[1];
  d.Rf[f] = p.R;
  d.dRf[f][0] = p.dR[0];
  d.dRf[f][1] = p.dR[1];
  if (p.base == BaseGeometry::Flat) {
    d.gd[o] = p.e2u;
    d.gd[o + 1] = p.e2u;
    d.J[o + 1][o] = 1.0;
    d.J[o][o + 1] = -1.0;
    double ux = p.du[0], uy = p.du[1];
    d.Gam[o][o][o] = ux;
    d.Gam[o][o + 1][o + 1] = -ux;
    d.Gam[o][o][o + 1] = d.Gam[o][o + 1][o] = uy;
    d.Gam[o + 1][o + 1][o + 1] = uy;
    d.Gam[o + 1][o][o] = -uy;
    d.Gam[o + 1][o][o + 1] = d.Gam[o + 1][o + 1][o] = ux;
  } else {
    double th = p.coord[0];
    double s = std::sin(th), c = std::cos(th);
    d.gd[o] = p.e2u;
    d.gd[o + 1] = p.e2u * s * s;
    d.J[o + 1][o] = 1.0 / s;
    d.J[o][o + 1] = -s;
    double a = p.du[0];  // du/dtheta
    d.Gam[o][o][o] = a;
    d.Gam[o][o + 1][o + 1] = -(a * s * s + s * c);
    d.Gam[o + 1][o][o + 1] = d.Gam[o + 1][o + 1][o] = a + c / s;
  }
}

struct ProductKahlerAmbient {
  ConformalSurfaceMetric m1, m2;

  ProductKahlerAmbient(ConformalSurfaceMetric a, ConformalSurfaceMetric b)
      : m1(std::move(a)), m2(std::move(b)) {
    if (m1.r != m2.r)
      throw ValidationError("product factors must share the flow constant r");
  }
  double r() const { return m1.r; }
};

inline AmbientPointData ambient_at(const ProductKahlerAmbient& a,
                                   const Vec4& p) {
  FactorEval e1(a.m1), e2(a.m2);
  AmbientPointData d;
  fill_factor_block(d, 0, e1.at_point(p[0], p[1]));
  fill_factor_block(d, 1, e2.at_point(p[2], p[3]));
  return d;
}

inline ProductKahlerAmbient kahler_ricci_step(const ProductKahlerAmbient& a,
                                              double dt) {
  return ProductKahlerAmbient(ricci_flow_step(a.m1, dt),
                              ricci_flow_step(a.m2, dt));
}

// (omega1, omega2, omega) as antisymmetric 4x4 matrices at p
struct KahlerFormPair {
  double w1[4][4] = {};
  double w2[4][4] = {};
  double w[4][4] = {};
};

inline KahlerFormPair kahler_form_pair(const AmbientPointData& d) {
  KahlerFormPair out;
  for (int A = 0; A < 4; ++A)
    for (int B = 0; B < 4; ++B) {
      double e[4] = {0, 0, 0, 0}, f[4] = {0, 0, 0, 0};
      e[A] = 1;
      f[B] = 1;
      out.w1[A][B] = d.omega_factor(0, e, f);
      out.w2[A][B] = d.omega_factor(1, e, f);
      out.w[A][B] = out.w1[A][B] + out.w2[A][B];
    }
  return out;
}

}  // namespace krmcf
