#pragma once

#include "krmcf/ambient.hpp"

namespace krmcf {

// Surface realized as the graph of a map M1 -> M2 over the grid of M1.
//
// Torus: f^b(x,y) = wind[b][0] x + wind[b][1] y + p^b(x,y) with p periodic
// and wind an integer matrix, so wrapping graphs (diagonal, anti-diagonal)
// have smooth lifts for the stencils.
// Sphere (rotationally symmetric class): f1 = image polar angle, f2 = image
// azimuth, both functions of theta alone, stored directly.
struct GraphImmersion {
  PeriodicGrid grid;
  int wind[2][2] = {{0, 0}, {0, 0}};
  Field p1, p2;

  static GraphImmersion torus(int n) {
    GraphImmersion f;
    f.grid = PeriodicGrid::torus(n);
    f.p1 = Field(f.grid);
    f.p2 = Field(f.grid);
    return f;
  }
  static GraphImmersion sphere(int n) {
    GraphImmersion f;
    f.grid = PeriodicGrid::sphere_rotsym(n);
    f.p1 = Field(f.grid);
    f.p2 = Field(f.grid);
    return f;
  }
  bool finite() const { return p1.finite() && p2.finite(); }

  // lifted map values
  double f1(int i, int j) const {
    if (grid.topology == Topology::SphereRotsym) return p1.at(i, j);
    return wind[0][0] * grid.x(i) + wind[0][1] * grid.y(j) + p1.at(i, j);
  }
  double f2(int i, int j) const {
    if (grid.topology == Topology::SphereRotsym) return p2.at(i, j);
    return wind[1][0] * grid.x(i) + wind[1][1] * grid.y(j) + p2.at(i, j);
  }
};

struct SurfaceJet {
  double F[4];
  double dF[2][4];
  double d2F[2][2][4];
};

struct FramePoint {
  double e[4][4];         // rows: e1..e4 ambient components
  double cosA = 0, sinA = 0;
  bool degenerate = false;
  double h3[2][2], h4[2][2];    // coordinate-index components
  double h3f[2][2], h4f[2][2];  // orthonormal tangent-index components
  double H3 = 0, H4 = 0;        // trace parts in the adapted normal frame
};

enum class GeometryLevel { Flow, Frames, Full };

constexpr double kFrameTol = 1e-6;
constexpr double kDetTol = 1e-12;

class SurfaceGeometry {
 public:
  PeriodicGrid grid;
  std::vector<AmbientPointData> apd;
  std::vector<SurfaceJet> jet;
  std::vector<Sym2> g, ginv;
  Field sqrtg;
  Field g11, g12, g22;            // metric as fields for stencil passes
  std::vector<Vec4> Hvec;         // mean curvature vector
  Field H2;                       // |H|^2
  std::vector<Vec2> Tvel;         // tangential gauge velocity T^i
  Field df1dt, df2dt;             // graph velocity fields
  // frame-level data
  std::vector<FramePoint> frame;   // adapted to omega1 + omega2
  std::vector<FramePoint> frame2;  // adapted to omega1 - omega2
  Field cosA, v, u1, u2, nJ2, nJ2p, A2;
  std::vector<Vec4> n3, n4;       // smooth graph normal frame
  double h3s[3], h4s[3];          // unused; placeholder to keep POD layout
  Field h3c11, h3c12, h3c22, h4c11, h4c12, h4c22;  // smooth-frame h fields
  Field n3f[4], n4f[4];
  // full level (torus only)
  Field nA2;        // |nabla A|^2
  Field quartic;    // reaction terms quartic in h
  Field T1, T2c, T3c, T4c, T5c, T6c, T7c, T9c;  // ambient curvature terms

  SurfaceGeometry(const ProductKahlerAmbient& amb, const GraphImmersion& f,
                  GeometryLevel level = GeometryLevel::Frames)
      : grid(f.grid) {
    build_points(amb, f);
    build_metric();
    build_mean_curvature(f);
    if (level != GeometryLevel::Flow) build_frames();
    if (level == GeometryLevel::Full) build_second_order();
  }

  std::size_t size() const { return grid.size(); }

  // coordinate cell weight (the azimuth circle is integrated out on the
  // sphere)
  double coord_cell() const {
    return grid.topology == Topology::Torus ? grid.hx * grid.hy
                                            : grid.hx * kTwoPi;
  }
  double cell_measure(std::size_t k) const { return sqrtg[k] * coord_cell(); }

  double integral(const Field& f) const {
    std::vector<double> c(size());
    for (std::size_t k = 0; k < size(); ++k)
      c[k] = f[k] * cell_measure(k);
    return pairwise_sum(c);
  }
  double area() const {
    std::vector<double> c(size());
    for (std::size_t k = 0; k < size(); ++k) c[k] = cell_measure(k);
    return pairwise_sum(c);
  }

  // divergence-form Laplace-Beltrami of a scalar field on the surface
  Field surf_lap(const Field& c) const {
    Field out(grid);
    if (grid.topology == Topology::Torus) {
      TorusStencil st(grid);
      Field P0(grid), P1(grid);
      for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j) {
          std::size_t k = idx(i, j);
          double cx = st.dx(c, i, j), cy = st.dy(c, i, j);
          P0.at(i, j) = sqrtg[k] * (ginv[k].xx * cx + ginv[k].xy * cy);
          P1.at(i, j) = sqrtg[k] * (ginv[k].xy * cx + ginv[k].yy * cy);
        }
      for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j) {
          std::size_t k = idx(i, j);
          out.at(i, j) = (st.dx(P0, i, j) + st.dy(P1, i, j)) / sqrtg[k];
        }
    } else {
      SphereStencil st(grid);
      Field M(grid);
      for (std::size_t k = 0; k < size(); ++k)
        M[k] = sqrtg[k] * ginv[k].xx;
      st.flux_divergence(M, c, sqrtg, out);
    }
    return out;
  }

  // advective derivative T^i d_i c of a scalar field
  Field advect(const Field& c) const {
    Field out(grid);
    if (grid.topology == Topology::Torus) {
      TorusStencil st(grid);
      for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j) {
          std::size_t k = idx(i, j);
          out.at(i, j) =
              Tvel[k][0] * st.dx(c, i, j) + Tvel[k][1] * st.dy(c, i, j);
        }
    } else {
      SphereStencil st(grid);
      for (int i = 0; i < grid.nx; ++i)
        out[std::size_t(i)] = Tvel[std::size_t(i)][0] * st.d(c, i);
    }
    return out;
  }

  // divergence of the gauge velocity (transport correction for densities)
  Field div_T() const {
    Field out(grid);
    if (grid.topology == Topology::Torus) {
      TorusStencil st(grid);
      Field Q0(grid), Q1(grid);
      for (std::size_t k = 0; k < size(); ++k) {
        Q0[k] = sqrtg[k] * Tvel[k][0];
        Q1[k] = sqrtg[k] * Tvel[k][1];
      }
      for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j) {
          std::size_t k = idx(i, j);
          out.at(i, j) = (st.dx(Q0, i, j) + st.dy(Q1, i, j)) / sqrtg[k];
        }
    } else {
      SphereStencil st(grid);
      Field Q(grid);
      for (std::size_t k = 0; k < size(); ++k)
        Q[k] = sqrtg[k] * Tvel[k][0];
      // sqrt(g) and T^theta are both odd across the poles, so their product
      // extends evenly
      for (int i = 0; i < grid.nx; ++i)
        out[std::size_t(i)] = st.d(Q, i, Parity::Even) / sqrtg[std::size_t(i)];
    }
    return out;
  }

  std::size_t idx(int i, int j) const { return std::size_t(i) * grid.ny + j; }

 private:
  void build_points(const ProductKahlerAmbient& amb, const GraphImmersion& f) {
    FactorEval e1(amb.m1), e2(amb.m2);
    std::size_t N = grid.size();
    apd.resize(N);
    jet.resize(N);
    bool sph = grid.topology == Topology::SphereRotsym;
    TorusStencil ts(grid);
    SphereStencil ss(grid);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j) {
        std::size_t k = idx(i, j);
        SurfaceJet& J = jet[k];
        double x = grid.x(i), y = grid.y(j);
        double v1 = f.f1(i, j), v2 = f.f2(i, j);
        J.F[0] = x;
        J.F[1] = y;
        J.F[2] = v1;
        J.F[3] = v2;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int A = 0; A < 4; ++A) J.d2F[a][b][A] = 0;
        if (!sph) {
          J.dF[0][0] = 1;
          J.dF[0][1] = 0;
          J.dF[0][2] = f.wind[0][0] + ts.dx(f.p1, i, j);
          J.dF[0][3] = f.wind[1][0] + ts.dx(f.p2, i, j);
          J.dF[1][0] = 0;
          J.dF[1][1] = 1;
          J.dF[1][2] = f.wind[0][1] + ts.dy(f.p1, i, j);
          J.dF[1][3] = f.wind[1][1] + ts.dy(f.p2, i, j);
          J.d2F[0][0][2] = ts.dxx(f.p1, i, j);
          J.d2F[0][0][3] = ts.dxx(f.p2, i, j);
          J.d2F[0][1][2] = J.d2F[1][0][2] = ts.dxy(f.p1, i, j);
          J.d2F[0][1][3] = J.d2F[1][0][3] = ts.dxy(f.p2, i, j);
          J.d2F[1][1][2] = ts.dyy(f.p1, i, j);
          J.d2F[1][1][3] = ts.dyy(f.p2, i, j);
        } else {
          J.dF[0][0] = 1;
          J.dF[0][1] = 0;
          J.dF[0][2] = ss.d(f.p1, i);
          J.dF[0][3] = ss.d(f.p2, i);
          J.dF[1][0] = 0;
          J.dF[1][1] = 1;
          J.dF[1][2] = 0;
          J.dF[1][3] = 0;
          J.d2F[0][0][2] = ss.d2(f.p1, i);
          J.d2F[0][0][3] = ss.d2(f.p2, i);
        }
        AmbientPointData& d = apd[k];
        d = AmbientPointData{};
        fill_factor_block(d, 0, e1.at_node(i, j));
        double w2x = v1, w2y = v2;
        if (!sph) {
          w2x = std::fmod(w2x, kTwoPi);
          if (w2x < 0) w2x += kTwoPi;
          w2y = std::fmod(w2y, kTwoPi);
          if (w2y < 0) w2y += kTwoPi;
        }
        fill_factor_block(d, 1, e2.at_point(w2x, w2y));
      }
  }

  void build_metric() {
    std::size_t N = size();
    g.resize(N);
    ginv.resize(N);
    sqrtg = Field(grid);
    g11 = Field(grid);
    g12 = Field(grid);
    g22 = Field(grid);
    for (std::size_t k = 0; k < N; ++k) {
      const SurfaceJet& J = jet[k];
      const AmbientPointData& d = apd[k];
      Sym2 m;
      m.xx = d.ip(J.dF[0], J.dF[0]);
      m.xy = d.ip(J.dF[0], J.dF[1]);
      m.yy = d.ip(J.dF[1], J.dF[1]);
      double det = m.det();
      if (!(det > kDetTol))
        throw DegenerateImmersionError("induced metric degenerated");
      g[k] = m;
      ginv[k] = inverse(m);
      sqrtg[k] = std::sqrt(det);
      g11[k] = m.xx;
      g12[k] = m.xy;
      g22[k] = m.yy;
    }
  }

  void build_mean_curvature(const GraphImmersion& f) {
    std::size_t N = size();
    Hvec.assign(N, Vec4{});
    H2 = Field(grid);
    Tvel.assign(N, Vec2{});
    df1dt = Field(grid);
    df2dt = Field(grid);
    // divergence-form Laplacian of each component of F
    if (grid.topology == Topology::Torus) {
      TorusStencil st(grid);
      Field P[2][4];
      for (int i = 0; i < 2; ++i)
        for (int A = 0; A < 4; ++A) P[i][A] = Field(grid);
      for (std::size_t k = 0; k < N; ++k) {
        const SurfaceJet& J = jet[k];
        for (int A = 0; A < 4; ++A) {
          P[0][A][k] =
              sqrtg[k] * (ginv[k].xx * J.dF[0][A] + ginv[k].xy * J.dF[1][A]);
          P[1][A][k] =
              sqrtg[k] * (ginv[k].xy * J.dF[0][A] + ginv[k].yy * J.dF[1][A]);
        }
      }
      for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j) {
          std::size_t k = idx(i, j);
          for (int A = 0; A < 4; ++A)
            Hvec[k][A] =
                (st.dx(P[0][A], i, j) + st.dy(P[1][A], i, j)) / sqrtg[k];
        }
    } else {
      // 1D flux form; the lifted components (theta, f1, f2) carry the
      // stencil, the azimuth component is exactly harmonic
      SphereStencil st(grid);
      Field M(grid);
      for (std::size_t k = 0; k < N; ++k) M[k] = sqrtg[k] * ginv[k].xx;
      const Field* comps[3] = {nullptr, &f.p1, &f.p2};
      Field theta(grid);
      for (int i = 0; i < grid.nx; ++i) theta[std::size_t(i)] = grid.x(i);
      Field lap(grid);
      // component 0 (theta itself, odd across poles)
      {
        double prev = 0;
        for (int i = 0; i < grid.nx; ++i) {
          double next = 0;
          if (i + 1 < grid.nx)
            next = 0.5 * (M[std::size_t(i)] + M[std::size_t(i + 1)]) *
                   (theta[std::size_t(i + 1)] - theta[std::size_t(i)]) /
                   grid.hx;
          Hvec[std::size_t(i)][0] =
              (next - prev) / (sqrtg[std::size_t(i)] * grid.hx);
          prev = next;
        }
      }
      for (int c = 1; c < 3; ++c) {
        st.flux_divergence(M, *comps[c], sqrtg, lap);
        for (std::size_t k = 0; k < N; ++k) Hvec[k][c + 1] = lap[k];
      }
    }
    // Christoffel part and gauge split
    for (std::size_t k = 0; k < N; ++k) {
      const SurfaceJet& J = jet[k];
      const AmbientPointData& d = apd[k];
      double gij[2][2] = {{ginv[k].xx, ginv[k].xy}, {ginv[k].xy, ginv[k].yy}};
      for (int A = 0; A < 4; ++A) {
        double acc = 0;
        for (int i = 0; i < 2; ++i)
          for (int j2 = 0; j2 < 2; ++j2)
            acc += gij[i][j2] * d.gam2(A, J.dF[i], J.dF[j2]);
        Hvec[k][A] += acc;
      }
      H2[k] = d.ip(Hvec[k].data(), Hvec[k].data());
      Tvel[k][0] = -Hvec[k][0];
      Tvel[k][1] = -Hvec[k][1];
      df1dt[k] = Hvec[k][2] + Tvel[k][0] * J.dF[0][2] + Tvel[k][1] * J.dF[1][2];
      df2dt[k] = Hvec[k][3] + Tvel[k][0] * J.dF[0][3] + Tvel[k][1] * J.dF[1][3];
    }
  }

  // Build one adapted frame for a given second-factor sign of J (+1 pairs
  // with omega1+omega2, -1 with omega1-omega2).
  void adapted_point(std::size_t k, double jsign, FramePoint& fp) const {
    const SurfaceJet& J = jet[k];
    const AmbientPointData& d = apd[k];
    auto applyJs = [&](const double* X, double* JX) {
      d.applyJ(X, JX);
      if (jsign < 0) {
        JX[2] = -JX[2];
        JX[3] = -JX[3];
      }
    };
    double e1v[4], w[4], e2v[4];
    double n1 = std::sqrt(g[k].xx);
    for (int A = 0; A < 4; ++A) e1v[A] = J.dF[0][A] / n1;
    double proj = g[k].xy / g[k].xx;
    for (int A = 0; A < 4; ++A) w[A] = J.dF[1][A] - proj * J.dF[0][A];
    double nw = std::sqrt(d.ip(w, w));
    for (int A = 0; A < 4; ++A) e2v[A] = w[A] / nw;
    double Je1[4], Je2[4];
    applyJs(e1v, Je1);
    applyJs(e2v, Je2);
    double ca = d.ip(Je1, e2v);
    ca = std::clamp(ca, -1.0, 1.0);
    double sa = std::sqrt(std::max(1.0 - ca * ca, 0.0));
    fp.cosA = ca;
    fp.sinA = sa;
    for (int A = 0; A < 4; ++A) {
      fp.e[0][A] = e1v[A];
      fp.e[1][A] = e2v[A];
    }
    if (sa >= kFrameTol) {
      fp.degenerate = false;
      for (int A = 0; A < 4; ++A) {
        fp.e[2][A] = (Je1[A] - ca * e2v[A]) / sa;
        fp.e[3][A] = -(Je2[A] + ca * e1v[A]) / sa;
      }
    } else {
      fp.degenerate = true;
      for (int A = 0; A < 4; ++A) {
        fp.e[2][A] = n3[k][A];
        fp.e[3][A] = n4[k][A];
      }
    }
    // second fundamental form in this normal frame
    double DD[2][2][4];
    for (int i = 0; i < 2; ++i)
      for (int j2 = 0; j2 < 2; ++j2)
        for (int A = 0; A < 4; ++A) {
          double t = J.d2F[i][j2][A];
          for (int B = 0; B < 4; ++B)
            for (int C = 0; C < 4; ++C)
              t += d.Gam[A][B][C] * J.dF[i][B] * J.dF[j2][C];
          DD[i][j2][A] = t;
        }
    for (int i = 0; i < 2; ++i)
      for (int j2 = 0; j2 < 2; ++j2) {
        fp.h3[i][j2] = d.ip(DD[i][j2], fp.e[2]);
        fp.h4[i][j2] = d.ip(DD[i][j2], fp.e[3]);
      }
    // orthonormal tangent components
    double b21 = g[k].xy / std::sqrt(g[k].xx);
    double b22 = std::sqrt(g[k].det() / g[k].xx);
    double iB[2][2] = {{1.0 / std::sqrt(g[k].xx), 0.0},
                       {-b21 / (std::sqrt(g[k].xx) * b22), 1.0 / b22}};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double t3 = 0, t4 = 0;
        for (int i = 0; i < 2; ++i)
          for (int j2 = 0; j2 < 2; ++j2) {
            t3 += iB[a][i] * iB[b][j2] * fp.h3[i][j2];
            t4 += iB[a][i] * iB[b][j2] * fp.h4[i][j2];
          }
        fp.h3f[a][b] = t3;
        fp.h4f[a][b] = t4;
      }
    fp.H3 = fp.h3f[0][0] + fp.h3f[1][1];
    fp.H4 = fp.h4f[0][0] + fp.h4f[1][1];
  }

  void build_frames() {
    std::size_t N = size();
    n3.assign(N, Vec4{});
    n4.assign(N, Vec4{});
    // smooth normal frame first (also the fallback near holomorphic points):
    // Gram-Schmidt of the second-factor coordinate axes against the tangent
    for (std::size_t k = 0; k < N; ++k) {
      const SurfaceJet& J = jet[k];
      const AmbientPointData& d = apd[k];
      auto tang_reject = [&](double* vv) {
        double c0 = d.ip(vv, J.dF[0]);
        double c1 = d.ip(vv, J.dF[1]);
        double a0 = ginv[k].xx * c0 + ginv[k].xy * c1;
        double a1 = ginv[k].xy * c0 + ginv[k].yy * c1;
        for (int A = 0; A < 4; ++A)
          vv[A] -= a0 * J.dF[0][A] + a1 * J.dF[1][A];
      };
      double v3[4] = {0, 0, 1, 0}, v4[4] = {0, 0, 0, 1};
      tang_reject(v3);
      double m3 = std::sqrt(d.ip(v3, v3));
      for (int A = 0; A < 4; ++A) v3[A] /= m3;
      tang_reject(v4);
      double c34 = d.ip(v4, v3);
      for (int A = 0; A < 4; ++A) v4[A] -= c34 * v3[A];
      double m4 = std::sqrt(d.ip(v4, v4));
      for (int A = 0; A < 4; ++A) v4[A] /= m4;
      for (int A = 0; A < 4; ++A) {
        n3[k][A] = v3[A];
        n4[k][A] = v4[A];
      }
    }
    frame.resize(N);
    frame2.resize(N);
    cosA = Field(grid);
    v = Field(grid);
    u1 = Field(grid);
    u2 = Field(grid);
    nJ2 = Field(grid);
    nJ2p = Field(grid);
    A2 = Field(grid);
    h3c11 = Field(grid);
    h3c12 = Field(grid);
    h3c22 = Field(grid);
    h4c11 = Field(grid);
    h4c12 = Field(grid);
    h4c22 = Field(grid);
    for (int c = 0; c < 4; ++c) {
      n3f[c] = Field(grid);
      n4f[c] = Field(grid);
    }
    for (std::size_t k = 0; k < N; ++k) {
      adapted_point(k, +1.0, frame[k]);
      adapted_point(k, -1.0, frame2[k]);
      const FramePoint& fp = frame[k];
      const AmbientPointData& d = apd[k];
      cosA[k] = fp.cosA;
      v[k] = d.omega_factor(0, fp.e[0], fp.e[1]);
      u1[k] = fp.cosA;
      u2[k] = frame2[k].cosA;
      auto njs = [](const FramePoint& q) {
        double s = 0;
        for (int kk = 0; kk < 2; ++kk) {
          double a = q.h4f[0][kk] + q.h3f[1][kk];
          double b = q.h4f[1][kk] - q.h3f[0][kk];
          s += a * a + b * b;
        }
        return s;
      };
      nJ2[k] = njs(fp);
      nJ2p[k] = njs(frame2[k]);
      // |A|^2 and the smooth-frame component fields (frame independent /
      // frame specific respectively)
      const SurfaceJet& J = jet[k];
      double DD[2][2][4];
      for (int i = 0; i < 2; ++i)
        for (int j2 = 0; j2 < 2; ++j2)
          for (int A = 0; A < 4; ++A)
            DD[i][j2][A] = J.d2F[i][j2][A] + d.gam2(A, J.dF[i], J.dF[j2]);
      double hc3[2][2], hc4[2][2];
      for (int i = 0; i < 2; ++i)
        for (int j2 = 0; j2 < 2; ++j2) {
          hc3[i][j2] = d.ip(DD[i][j2], n3[k].data());
          hc4[i][j2] = d.ip(DD[i][j2], n4[k].data());
        }
      h3c11[k] = hc3[0][0];
      h3c12[k] = hc3[0][1];
      h3c22[k] = hc3[1][1];
      h4c11[k] = hc4[0][0];
      h4c12[k] = hc4[0][1];
      h4c22[k] = hc4[1][1];
      for (int c = 0; c < 4; ++c) {
        n3f[c][k] = n3[k][c];
        n4f[c][k] = n4[k][c];
      }
      double gi[2][2] = {{ginv[k].xx, ginv[k].xy}, {ginv[k].xy, ginv[k].yy}};
      double a2 = 0;
      for (int i = 0; i < 2; ++i)
        for (int m = 0; m < 2; ++m)
          for (int j2 = 0; j2 < 2; ++j2)
            for (int n = 0; n < 2; ++n)
              a2 += gi[i][m] * gi[j2][n] *
                    (hc3[i][j2] * hc3[m][n] + hc4[i][j2] * hc4[m][n]);
      A2[k] = a2;
    }
  }

  void build_second_order();
};

// |nabla A|^2, the quartic reaction terms and the ambient curvature
// contractions of the |A|^2 evolution identity. Torus charts only; the
// rotationally symmetric runs do not exercise this residual.
inline void SurfaceGeometry::build_second_order() {
  if (grid.topology != Topology::Torus)
    throw ValidationError(
        "second-order |A|^2 diagnostics require the torus chart");
  std::size_t N = size();
  TorusStencil st(grid);
  nA2 = Field(grid);
  quartic = Field(grid);
  T1 = Field(grid);
  T2c = Field(grid);
  T3c = Field(grid);
  T4c = Field(grid);
  T5c = Field(grid);
  T6c = Field(grid);
  T7c = Field(grid);
  T9c = Field(grid);
  for (int i0 = 0; i0 < grid.nx; ++i0)
    for (int j0 = 0; j0 < grid.ny; ++j0) {
      std::size_t k = idx(i0, j0);
      const SurfaceJet& J = jet[k];
      const AmbientPointData& d = apd[k];
      // surface Christoffels from metric stencils
      double dg[2][2][2];  // dg[k][i][j] = d_k g_ij
      dg[0][0][0] = st.dx(g11, i0, j0);
      dg[0][0][1] = dg[0][1][0] = st.dx(g12, i0, j0);
      dg[0][1][1] = st.dx(g22, i0, j0);
      dg[1][0][0] = st.dy(g11, i0, j0);
      dg[1][0][1] = dg[1][1][0] = st.dy(g12, i0, j0);
      dg[1][1][1] = st.dy(g22, i0, j0);
      double gi[2][2] = {{ginv[k].xx, ginv[k].xy}, {ginv[k].xy, ginv[k].yy}};
      double Gs[2][2][2];
      for (int kk = 0; kk < 2; ++kk)
        for (int i = 0; i < 2; ++i)
          for (int j2 = 0; j2 < 2; ++j2) {
            double t = 0;
            for (int l = 0; l < 2; ++l)
              t += gi[kk][l] * (dg[i][l][j2] + dg[j2][l][i] - dg[l][i][j2]);
            Gs[kk][i][j2] = 0.5 * t;
          }
      // normal connection nu_k = <D_k n3, n4>
      double nu[2];
      for (int kk = 0; kk < 2; ++kk) {
        double Dn3[4];
        for (int A = 0; A < 4; ++A) {
          double dv = kk == 0 ? st.dx(n3f[A], i0, j0) : st.dy(n3f[A], i0, j0);
          Dn3[A] = dv + d.gam2(A, J.dF[kk], n3[k].data());
        }
        nu[kk] = d.ip(Dn3, n4[k].data());
      }
      // bundle covariant derivative of h in the smooth normal frame
      const Field* hf3[2][2] = {{&h3c11, &h3c12}, {&h3c12, &h3c22}};
      const Field* hf4[2][2] = {{&h4c11, &h4c12}, {&h4c12, &h4c22}};
      double hc3[2][2] = {{h3c11[k], h3c12[k]}, {h3c12[k], h3c22[k]}};
      double hc4[2][2] = {{h4c11[k], h4c12[k]}, {h4c12[k], h4c22[k]}};
      double nh3[2][2][2], nh4[2][2][2];
      for (int kk = 0; kk < 2; ++kk)
        for (int i = 0; i < 2; ++i)
          for (int j2 = 0; j2 < 2; ++j2) {
            double d3 = kk == 0 ? st.dx(*hf3[i][j2], i0, j0)
                                : st.dy(*hf3[i][j2], i0, j0);
            double d4 = kk == 0 ? st.dx(*hf4[i][j2], i0, j0)
                                : st.dy(*hf4[i][j2], i0, j0);
            for (int l = 0; l < 2; ++l) {
              d3 -= Gs[l][kk][i] * hc3[l][j2] + Gs[l][kk][j2] * hc3[i][l];
              d4 -= Gs[l][kk][i] * hc4[l][j2] + Gs[l][kk][j2] * hc4[i][l];
            }
            nh3[kk][i][j2] = d3 - nu[kk] * hc4[i][j2];
            nh4[kk][i][j2] = d4 + nu[kk] * hc3[i][j2];
          }
      double a = 0;
      for (int kk = 0; kk < 2; ++kk)
        for (int ll = 0; ll < 2; ++ll)
          for (int i = 0; i < 2; ++i)
            for (int m = 0; m < 2; ++m)
              for (int j2 = 0; j2 < 2; ++j2)
                for (int n = 0; n < 2; ++n)
                  a += gi[kk][ll] * gi[i][m] * gi[j2][n] *
                       (nh3[kk][i][j2] * nh3[ll][m][n] +
                        nh4[kk][i][j2] * nh4[ll][m][n]);
      nA2[k] = a;
      // orthonormal components of the smooth-frame h
      double b21 = g[k].xy / std::sqrt(g[k].xx);
      double b22 = std::sqrt(g[k].det() / g[k].xx);
      double iB[2][2] = {{1.0 / std::sqrt(g[k].xx), 0.0},
                         {-b21 / (std::sqrt(g[k].xx) * b22), 1.0 / b22}};
      double hs[2][2][2];  // [normal][i][j]
      for (int aa = 0; aa < 2; ++aa)
        for (int bb = 0; bb < 2; ++bb) {
          double t3 = 0, t4 = 0;
          for (int i = 0; i < 2; ++i)
            for (int j2 = 0; j2 < 2; ++j2) {
              t3 += iB[aa][i] * iB[bb][j2] * hc3[i][j2];
              t4 += iB[aa][i] * iB[bb][j2] * hc4[i][j2];
            }
          hs[0][aa][bb] = t3;
          hs[1][aa][bb] = t4;
        }
      // quartic reaction
      double q1 = 0, q2 = 0;
      for (int aa = 0; aa < 2; ++aa)
        for (int cc = 0; cc < 2; ++cc)
          for (int i = 0; i < 2; ++i)
            for (int m = 0; m < 2; ++m) {
              double acc = 0;
              for (int kk = 0; kk < 2; ++kk)
                acc += hs[aa][i][kk] * hs[cc][m][kk] -
                       hs[aa][m][kk] * hs[cc][i][kk];
              q1 += acc * acc;
            }
      for (int i = 0; i < 2; ++i)
        for (int j2 = 0; j2 < 2; ++j2)
          for (int m = 0; m < 2; ++m)
            for (int kk = 0; kk < 2; ++kk) {
              double acc = 0;
              for (int aa = 0; aa < 2; ++aa)
                acc += hs[aa][i][j2] * hs[aa][m][kk];
              q2 += acc * acc;
            }
      quartic[k] = 2 * q1 + 2 * q2;
      // ambient curvature contractions in the orthonormal frame
      // frame rows: 0,1 tangent; 2,3 the smooth normals
      double fr[4][4];
      for (int A = 0; A < 4; ++A) {
        fr[0][A] = iB[0][0] * J.dF[0][A] + iB[0][1] * J.dF[1][A];
        fr[1][A] = iB[1][0] * J.dF[0][A] + iB[1][1] * J.dF[1][A];
        fr[2][A] = n3[k][A];
        fr[3][A] = n4[k][A];
      }
      double t1 = 0, t2 = 0, t3 = 0, t4 = 0, t5 = 0, t6 = 0, t7 = 0, t9 = 0;
      for (int an = 0; an < 2; ++an) {
        const double* ea = fr[2 + an];
        for (int i = 0; i < 2; ++i)
          for (int j2 = 0; j2 < 2; ++j2) {
            double hij = hs[an][i][j2];
            for (int kk = 0; kk < 2; ++kk) {
              t1 += (d.driem_v(fr[kk], ea, fr[i], fr[j2], fr[kk]) +
                     d.driem_v(fr[j2], ea, fr[kk], fr[i], fr[kk])) *
                    hij;
            }
            t9 += (d.dricci_v(fr[i], fr[j2], ea) +
                   d.dricci_v(fr[j2], fr[i], ea) -
                   d.dricci_v(ea, fr[i], fr[j2])) *
                  hij;
            for (int l = 0; l < 2; ++l)
              for (int kk = 0; kk < 2; ++kk) {
                t2 += d.riem_v(fr[l], fr[i], fr[j2], fr[kk]) * hs[an][l][kk] *
                      hij;
                t4 += d.riem_v(fr[l], fr[kk], fr[i], fr[kk]) * hs[an][l][j2] *
                      hij;
              }
            for (int bn = 0; bn < 2; ++bn)
              for (int kk = 0; kk < 2; ++kk) {
                t3 += d.riem_v(ea, fr[2 + bn], fr[j2], fr[kk]) *
                      hs[bn][i][kk] * hij;
                t5 += d.riem_v(ea, fr[kk], fr[2 + bn], fr[kk]) *
                      hs[bn][i][j2] * hij;
              }
            for (int kk = 0; kk < 2; ++kk)
              t6 += d.ricci_v(fr[i], fr[kk]) * hij * hs[an][kk][j2];
          }
        for (int bn = 0; bn < 2; ++bn)
          for (int i = 0; i < 2; ++i)
            for (int j2 = 0; j2 < 2; ++j2)
              t7 += d.ricci_v(ea, fr[2 + bn]) * hs[bn][i][j2] * hs[an][i][j2];
      }
      T1[k] = t1;
      T2c[k] = t2;
      T3c[k] = t3;
      T4c[k] = t4;
      T5c[k] = t5;
      T6c[k] = t6;
      T7c[k] = t7;
      T9c[k] = t9;
    }
}

// gauge scalars and helper views -------------------------------------------

inline Field nabla_J_sq(const SurfaceGeometry& gm) { return gm.nJ2; }

struct GraphGauges {
  Field v, u1, u2;
};

inline GraphGauges graph_gauges(const SurfaceGeometry& gm) {
  return GraphGauges{gm.v, gm.u1, gm.u2};
}

// residuals of the frame identities for the gradient of cos(alpha), masked
// where the adapted frame degenerates
struct GradCosAlphaResidual {
  Field r1, r2;
  Field mask;  // 1 where evaluated
};

inline GradCosAlphaResidual grad_cos_alpha_identity(const SurfaceGeometry& gm) {
  GradCosAlphaResidual out{Field(gm.grid), Field(gm.grid), Field(gm.grid)};
  // frame-direction derivatives of cos(alpha) via the coordinate gradient
  Field gx(gm.grid), gy(gm.grid);
  if (gm.grid.topology == Topology::Torus) {
    TorusStencil st(gm.grid);
    for (int i = 0; i < gm.grid.nx; ++i)
      for (int j = 0; j < gm.grid.ny; ++j) {
        gx.at(i, j) = st.dx(gm.cosA, i, j);
        gy.at(i, j) = st.dy(gm.cosA, i, j);
      }
  } else {
    SphereStencil st(gm.grid);
    for (int i = 0; i < gm.grid.nx; ++i) gx[std::size_t(i)] = st.d(gm.cosA, i);
  }
  for (std::size_t k = 0; k < gm.size(); ++k) {
    const FramePoint& fp = gm.frame[k];
    if (fp.degenerate) continue;
    double b21 = gm.g[k].xy / std::sqrt(gm.g[k].xx);
    double b22 = std::sqrt(gm.g[k].det() / gm.g[k].xx);
    double iB[2][2] = {{1.0 / std::sqrt(gm.g[k].xx), 0.0},
                       {-b21 / (std::sqrt(gm.g[k].xx) * b22), 1.0 / b22}};
    double d1 = iB[0][0] * gx[k] + iB[0][1] * gy[k];
    double d2 = iB[1][0] * gx[k] + iB[1][1] * gy[k];
    out.r1[k] = d1 - (fp.h4f[0][0] + fp.h3f[0][1]) * fp.sinA;
    out.r2[k] = d2 - (fp.h3f[1][1] + fp.h4f[0][1]) * fp.sinA;
    out.mask[k] = 1.0;
  }
  return out;
}

}  // namespace krmcf
