#pragma once

#include <optional>

#include "krmcf/flow.hpp"

namespace krmcf {

// Verification report for one evolution identity checked against the
// discrete flow.
struct ResidualReport {
  std::string identity;
  int grid_n = 0;
  double dt = 0;
  double linf = 0;
  double l2 = 0;
  double masked_fraction = 0;
  double observed_order = std::numeric_limits<double>::quiet_NaN();
};

struct ResidualField {
  Field resid;
  Field mask;  // 1 where the identity was evaluated
};

inline ResidualReport make_report(const std::string& name,
                                  const SurfaceGeometry& gm,
                                  const ResidualField& rf, double dt) {
  ResidualReport rep;
  rep.identity = name;
  rep.grid_n = gm.grid.nx;
  rep.dt = dt;
  std::vector<double> num, den;
  std::size_t live = 0;
  for (std::size_t k = 0; k < gm.size(); ++k) {
    if (rf.mask[k] == 0.0) continue;
    ++live;
    double c = gm.cell_measure(k);
    rep.linf = std::max(rep.linf, std::abs(rf.resid[k]));
    num.push_back(rf.resid[k] * rf.resid[k] * c);
    den.push_back(c);
  }
  rep.masked_fraction = 1.0 - double(live) / double(gm.size());
  rep.l2 = live ? std::sqrt(pairwise_sum(num) / pairwise_sum(den)) : 0.0;
  return rep;
}

// Central-difference material derivative of a scalar observable along the
// flow: states (s, step(s), step(step(s))) sampled at the middle time.
struct MaterialStencil {
  FlowState sm, s0, sp;
  SurfaceGeometry gm, g0, gp;
  double dt;

  MaterialStencil(const FlowState& s, double dt_,
                  GeometryLevel level = GeometryLevel::Frames)
      : sm(s),
        s0(flow_step(s, dt_)),
        sp(flow_step(s0, dt_)),
        gm(sm.amb, sm.imm, level),
        g0(s0.amb, s0.imm, level),
        gp(sp.amb, sp.imm, level),
        dt(dt_) {}

  Field ddt(const Field& qm, const Field& qp) const {
    Field out(qm.nx, qm.ny);
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] = (qp[k] - qm[k]) / (2 * dt);
    return out;
  }
};

inline Field ambient_scalar_field(const SurfaceGeometry& gm) {
  Field out(gm.grid);
  for (std::size_t k = 0; k < gm.size(); ++k) out[k] = gm.apd[k].scalar();
  return out;
}

// (d/dt - Lap) cos = |DJ|^2 cos + (1/4)(R1+R2) sin^2 cos, transported to the
// fixed chart by the gauge velocity
inline ResidualField residual_cos_alpha(const FlowState& s, double dt) {
  MaterialStencil ms(s, dt);
  const SurfaceGeometry& g = ms.g0;
  Field dq = ms.ddt(ms.gm.cosA, ms.gp.cosA);
  Field adv = g.advect(g.cosA);
  Field lap = g.surf_lap(g.cosA);
  ResidualField rf{Field(g.grid), Field(g.grid, 1.0)};
  for (std::size_t k = 0; k < g.size(); ++k) {
    double c = g.cosA[k];
    double s2 = 1.0 - c * c;
    double reac = g.nJ2[k] * c + 0.25 * g.apd[k].scalar() * s2 * c;
    rf.resid[k] = dq[k] - adv[k] - lap[k] - reac;
  }
  return rf;
}

// same identity for the two graph gauges u1, u2 (the second uses the frame
// adapted to omega1 - omega2)
inline ResidualField residual_u_gauge(const FlowState& s, double dt,
                                      int which) {
  MaterialStencil ms(s, dt);
  const SurfaceGeometry& g = ms.g0;
  const Field& qm = which == 1 ? ms.gm.u1 : ms.gm.u2;
  const Field& q0 = which == 1 ? g.u1 : g.u2;
  const Field& qp = which == 1 ? ms.gp.u1 : ms.gp.u2;
  const Field& nj = which == 1 ? g.nJ2 : g.nJ2p;
  Field dq = ms.ddt(qm, qp);
  Field adv = g.advect(q0);
  Field lap = g.surf_lap(q0);
  ResidualField rf{Field(g.grid), Field(g.grid, 1.0)};
  for (std::size_t k = 0; k < g.size(); ++k) {
    double u = q0[k];
    double reac = nj[k] * u + 0.25 * g.apd[k].scalar() * (1.0 - u * u) * u;
    rf.resid[k] = dq[k] - adv[k] - lap[k] - reac;
  }
  return rf;
}

// combined gauge u = u1 + u2: sum of the two verified gauge identities
inline ResidualField residual_u_combined(const FlowState& s, double dt) {
  ResidualField a = residual_u_gauge(s, dt, 1);
  ResidualField b = residual_u_gauge(s, dt, 2);
  for (std::size_t k = 0; k < a.resid.size(); ++k) {
    a.resid[k] += b.resid[k];
    a.mask[k] *= b.mask[k];
  }
  return a;
}

// componentwise law for the induced metric under normal motion,
// d/dt g_ij = -2 <H, dd_ij F> - Ric(dF_i, dF_j) + (r/2) g_ij,
// with the tangential reparametrization (Lie derivative along T) removed
inline ResidualField residual_metric_evolution(const FlowState& s, double dt) {
  if (s.imm.grid.topology != Topology::Torus)
    throw ValidationError("metric-evolution residual requires the torus chart");
  MaterialStencil ms(s, dt, GeometryLevel::Flow);
  const SurfaceGeometry& g = ms.g0;
  TorusStencil st(g.grid);
  Field Tx(g.grid), Ty(g.grid);
  for (std::size_t k = 0; k < g.size(); ++k) {
    Tx[k] = g.Tvel[k][0];
    Ty[k] = g.Tvel[k][1];
  }
  ResidualField rf{Field(g.grid), Field(g.grid, 1.0)};
  double r = s.amb.r();
  for (int i0 = 0; i0 < g.grid.nx; ++i0)
    for (int j0 = 0; j0 < g.grid.ny; ++j0) {
      std::size_t k = g.idx(i0, j0);
      const SurfaceJet& J = g.jet[k];
      const AmbientPointData& d = g.apd[k];
      double gc[2][2] = {{g.g11[k], g.g12[k]}, {g.g12[k], g.g22[k]}};
      double dTc[2][2] = {{st.dx(Tx, i0, j0), st.dx(Ty, i0, j0)},
                          {st.dy(Tx, i0, j0), st.dy(Ty, i0, j0)}};
      double dg[2][2][2];
      dg[0][0][0] = st.dx(g.g11, i0, j0);
      dg[0][0][1] = dg[0][1][0] = st.dx(g.g12, i0, j0);
      dg[0][1][1] = st.dx(g.g22, i0, j0);
      dg[1][0][0] = st.dy(g.g11, i0, j0);
      dg[1][0][1] = dg[1][1][0] = st.dy(g.g12, i0, j0);
      dg[1][1][1] = st.dy(g.g22, i0, j0);
      double DD[2][2][4];
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int A = 0; A < 4; ++A)
            DD[i][j][A] = J.d2F[i][j][A] + d.gam2(A, J.dF[i], J.dF[j]);
      double worst = 0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const Field& comp = i == 0 ? (j == 0 ? ms.gm.g11 : ms.gm.g12)
                                     : (j == 0 ? ms.gm.g12 : ms.gm.g22);
          const Field& comp2 = i == 0 ? (j == 0 ? ms.gp.g11 : ms.gp.g12)
                                      : (j == 0 ? ms.gp.g12 : ms.gp.g22);
          double dgdt = (comp2[k] - comp[k]) / (2 * ms.dt);
          // (L_T g)_ij = T^k d_k g_ij + g_kj d_i T^k + g_ik d_j T^k
          double lie = g.Tvel[k][0] * dg[0][i][j] + g.Tvel[k][1] * dg[1][i][j];
          for (int kk = 0; kk < 2; ++kk)
            lie += gc[kk][j] * dTc[i][kk] + gc[i][kk] * dTc[j][kk];
          double law = -2.0 * d.ip(g.Hvec[k].data(), DD[i][j]) -
                       d.ricci_v(J.dF[i], J.dF[j]) + 0.5 * r * gc[i][j];
          worst = std::max(worst, std::abs(dgdt - lie - law));
        }
      rf.resid[k] = worst;
    }
  return rf;
}

// pullback trace (1/2) g^{ij} Ric(dF_i, dF_j)
inline Field ricci_trace_field(const SurfaceGeometry& gm) {
  Field out(gm.grid);
  for (std::size_t k = 0; k < gm.size(); ++k) {
    const SurfaceJet& J = gm.jet[k];
    const AmbientPointData& d = gm.apd[k];
    double gi[2][2] = {{gm.ginv[k].xx, gm.ginv[k].xy},
                       {gm.ginv[k].xy, gm.ginv[k].yy}};
    double t = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        t += gi[i][j] * d.ricci_v(J.dF[i], J.dF[j]);
    out[k] = 0.5 * t;
  }
  return out;
}

// d/dt sqrt(g) = (-|H|^2 - Rtilde + r/2 + div T) sqrt(g); the divergence
// term accounts for the tangential reparametrization of the chart
inline ResidualField residual_area_element(const FlowState& s, double dt) {
  MaterialStencil ms(s, dt, GeometryLevel::Flow);
  const SurfaceGeometry& g = ms.g0;
  Field dq = ms.ddt(ms.gm.sqrtg, ms.gp.sqrtg);
  Field rt = ricci_trace_field(g);
  Field dv = g.div_T();
  double r = s.amb.r();
  ResidualField rf{Field(g.grid), Field(g.grid, 1.0)};
  for (std::size_t k = 0; k < g.size(); ++k) {
    double rate = -g.H2[k] - rt[k] + 0.5 * r + dv[k];
    rf.resid[k] = dq[k] / g.sqrtg[k] - rate;
  }
  return rf;
}

// (d/dt - Lap)|A|^2 = -2|nabla A|^2 + quartic + curvature corrections
inline ResidualField residual_A2(const FlowState& s, double dt) {
  MaterialStencil ms(s, dt, GeometryLevel::Full);
  const SurfaceGeometry& g = ms.g0;
  Field dq = ms.ddt(ms.gm.A2, ms.gp.A2);
  Field adv = g.advect(g.A2);
  Field lap = g.surf_lap(g.A2);
  double r = s.amb.r();
  ResidualField rf{Field(g.grid), Field(g.grid, 1.0)};
  for (std::size_t k = 0; k < g.size(); ++k) {
    double curv = 2 * g.T1[k] - 4 * g.T2c[k] + 8 * g.T3c[k] - 4 * g.T4c[k] +
                  2 * g.T5c[k] + 2 * g.T6c[k] - g.T7c[k] - g.T9c[k] -
                  0.5 * r * g.A2[k];
    double reac = -2 * g.nA2[k] + g.quartic[k] + curv;
    rf.resid[k] = dq[k] - adv[k] - lap[k] - reac;
  }
  return rf;
}

// frame identity for the gradient of cos(alpha); masked near holomorphic
// points where the adapted frame degenerates
inline ResidualField residual_grad_cos_alpha(const FlowState& s) {
  SurfaceGeometry g(s.amb, s.imm, GeometryLevel::Frames);
  GradCosAlphaResidual gr = grad_cos_alpha_identity(g);
  ResidualField rf{Field(g.grid), gr.mask};
  for (std::size_t k = 0; k < g.size(); ++k)
    rf.resid[k] = std::sqrt(gr.r1[k] * gr.r1[k] + gr.r2[k] * gr.r2[k]);
  return rf;
}

// pointwise inequality margins; each entry is min over the surface of
// (majorant - minorant), so nonnegative values certify the inequality
struct InequalityMargins {
  double nJ2_vs_half_H2;     // min of |DJ|^2 - |H|^2/2
  double nJ2_vs_grad_alpha;  // min of |DJ|^2 - |grad alpha|^2 (frame form)
  double gauge_sum;          // max |u1 + u2 - 2 v|
  double cos_bound;          // 1 - max |cos alpha|
  double pairing_norm;       // min of 1 - (w1^2 + w2^2)
  double gauge_floor;        // min over i of u_i - (v - sqrt(2)/2)
};

inline InequalityMargins inequality_suite(const SurfaceGeometry& g) {
  double inf = std::numeric_limits<double>::infinity();
  InequalityMargins m{inf, inf, 0.0, 1.0, inf, inf};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const FramePoint& fp = g.frame[k];
    // trace parts from the same frame components as |DJ|^2, so the bound is
    // algebraic rather than discretization-limited
    double H2f = fp.H3 * fp.H3 + fp.H4 * fp.H4;
    m.nJ2_vs_half_H2 = std::min(m.nJ2_vs_half_H2, g.nJ2[k] - 0.5 * H2f);
    double ga = 0;
    for (int kk = 0; kk < 2; ++kk) {
      double a = fp.h4f[0][kk] + fp.h3f[1][kk];
      ga += a * a;
    }
    m.nJ2_vs_grad_alpha = std::min(m.nJ2_vs_grad_alpha, g.nJ2[k] - ga);
    m.gauge_sum =
        std::max(m.gauge_sum, std::abs(g.u1[k] + g.u2[k] - 2.0 * g.v[k]));
    m.cos_bound = std::min(m.cos_bound, 1.0 - std::abs(g.cosA[k]));
    double w1 = g.v[k];
    double w2 = 0.5 * (g.u1[k] - g.u2[k]);
    m.pairing_norm = std::min(m.pairing_norm, 1.0 - w1 * w1 - w2 * w2);
    double floor1 = g.u1[k] - (g.v[k] - std::sqrt(0.5));
    double floor2 = g.u2[k] - (g.v[k] - std::sqrt(0.5));
    m.gauge_floor = std::min({m.gauge_floor, floor1, floor2});
  }
  return m;
}

// global balance law for the symplectic defect integral(1 - cos) dmu
struct SymplecticBalance {
  double lhs;  // d/dt of the defect (central difference)
  double rhs;  // flux form
};

inline SymplecticBalance symplectic_balance(const FlowState& s, double dt) {
  MaterialStencil ms(s, dt);
  auto defect = [](const SurfaceGeometry& g) {
    Field one_minus(g.grid);
    for (std::size_t k = 0; k < g.size(); ++k)
      one_minus[k] = 1.0 - g.cosA[k];
    return g.integral(one_minus);
  };
  SymplecticBalance out{};
  out.lhs = (defect(ms.gp) - defect(ms.gm)) / (2 * dt);
  const SurfaceGeometry& g = ms.g0;
  Field rt = ricci_trace_field(g);
  Field integ(g.grid);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const FramePoint& fp = g.frame[k];
    const AmbientPointData& d = g.apd[k];
    double w1 = d.omega_factor(0, fp.e[0], fp.e[1]);
    double w2 = d.omega_factor(1, fp.e[0], fp.e[1]);
    double curv = rt[k] - 0.5 * d.Rf[0] * w1 - 0.5 * d.Rf[1] * w2;
    integ[k] = -g.H2[k] - curv + 0.5 * s.amb.r() * (1.0 - g.cosA[k]);
  }
  out.rhs = g.integral(integ);
  return out;
}

// ---- localized monotone quantity ----

enum class ProbeWeight { Angle, Gauge };

// Backward-heat-kernel weighted integral concentrated at (X0, t0). The
// kernel distance uses first-order normal coordinates at X0 (coordinate
// offsets scaled by the metric square roots, with periodic lifts).
struct MonotonicityProbe {
  Vec4 X0{};
  double t0 = 0;
  double cutoff = 0;  // r-tilde; the bump is 1 inside r, 0 outside 2r
  ProbeWeight weight = ProbeWeight::Angle;
  double R0 = 0;  // sup of (-min ambient scalar curvature, 0)
};

inline double injectivity_proxy(const ConformalSurfaceMetric& m) {
  double s = std::exp(m.u.min());
  return m.grid.topology == Topology::Torus ? kPi * s : 0.5 * kPi * s;
}

inline void validate_probe(const MonotonicityProbe& p,
                           const ProductKahlerAmbient& amb) {
  double inj =
      std::min(injectivity_proxy(amb.m1), injectivity_proxy(amb.m2));
  if (!(2.0 * p.cutoff < inj))
    throw ValidationError(
        "monotonicity probe cutoff exceeds the injectivity proxy");
}

inline double smooth_bump(double rho, double r) {
  // 1 on [0, r], 0 on [2r, inf), C^1 monotone in between
  if (rho <= r) return 1.0;
  if (rho >= 2 * r) return 0.0;
  double s = (rho - r) / r;
  return 0.5 * (1.0 + std::cos(kPi * s));
}

inline double phi_functional(const MonotonicityProbe& p, const FlowState& s,
                             const SurfaceGeometry& g) {
  validate_probe(p, s.amb);
  double tau = p.t0 - s.t;
  if (!(tau > 0)) throw ValidationError("probe requires t < t0");
  // metric scale factors at the center
  AmbientPointData d0 = ambient_at(s.amb, p.X0);
  double scale[4];
  for (int A = 0; A < 4; ++A) scale[A] = std::sqrt(d0.gd[A]);
  bool sph1 = s.amb.m1.grid.topology == Topology::SphereRotsym;
  bool sph2 = s.amb.m2.grid.topology == Topology::SphereRotsym;
  std::vector<double> c(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    double dist2 = 0;
    for (int A = 0; A < 4; ++A) {
      double diff = g.jet[k].F[A] - p.X0[A];
      bool polar = (A == 0 && sph1) || (A == 2 && sph2);
      if (!polar) {
        diff = std::remainder(diff, kTwoPi);
      }
      double z = diff * scale[A];
      dist2 += z * z;
    }
    double rho = std::sqrt(dist2);
    double ker = std::exp(-dist2 / (4 * tau)) / (4 * kPi * tau);
    double w = p.weight == ProbeWeight::Angle ? g.cosA[k] : g.v[k];
    double vw = std::exp(p.R0 * s.t) * w;
    c[k] = smooth_bump(rho, p.cutoff) * ker / vw * g.cell_measure(k);
  }
  return pairwise_sum(c);
}

// smallest nonnegative (c1, c2) making t -> exp(c1 sqrt(t0-t)) Phi + c2 (t0-t)
// non-increasing on the sampled sequence
struct ProbeFit {
  double c1 = 0, c2 = 0;
};

inline ProbeFit fit_probe_constants(const std::vector<double>& t,
                                    const std::vector<double>& phi,
                                    double t0) {
  ProbeFit out;
  auto monotone = [&](double c1, double c2) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i) {
      double tau = t0 - t[i];
      double v = std::exp(c1 * std::sqrt(tau)) * phi[i] + c2 * tau;
      if (v > prev * (1.0 + 1e-12) + 1e-12) return false;
      prev = v;
    }
    return true;
  };
  // coarse grid search then refinement in c1, with the smallest feasible c2
  auto min_c2 = [&](double c1) -> std::optional<double> {
    double lo = 0, hi = 1.0;
    if (monotone(c1, 0)) return 0.0;
    while (!monotone(c1, hi)) {
      hi *= 2;
      if (hi > 1e6) return std::nullopt;
    }
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      (monotone(c1, mid) ? hi : lo) = mid;
    }
    return hi;
  };
  double best = std::numeric_limits<double>::infinity();
  for (double c1 = 0; c1 <= 32.0; c1 += 0.25) {
    std::optional<double> c2 = min_c2(c1);
    if (c2 && c1 + *c2 < best) {
      best = c1 + *c2;
      out.c1 = c1;
      out.c2 = *c2;
    }
  }
  return out;
}

// ---- curvature blow-up tracking ----

struct SingularitySample {
  double t;
  double max_A2;
  int i, j;  // argmax node
};

inline SingularitySample singularity_sample(const FlowState& s,
                                            const SurfaceGeometry& g) {
  SingularitySample out{s.t, 0, 0, 0};
  for (int i = 0; i < g.grid.nx; ++i)
    for (int j = 0; j < g.grid.ny; ++j) {
      double a = g.A2[g.idx(i, j)];
      if (a > out.max_A2) {
        out.max_A2 = a;
        out.i = i;
        out.j = j;
      }
    }
  return out;
}

// Least-squares fit of 1/U(t) = c (T - t) over the final samples, giving the
// extrapolated blow-up time and rate constant.
struct BlowUpFit {
  double T = 0;  // extrapolated singular time
  double c = 0;  // 1/U = c (T - t)
};

inline BlowUpFit fit_blow_up(const std::vector<SingularitySample>& hist,
                             std::size_t tail) {
  std::size_t n = hist.size();
  std::size_t start = n > tail ? n - tail : 0;
  // linear regression of y = 1/U against t: y = a + b t, T = -a/b, c = -b
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t k = start; k < n; ++k) {
    double x = hist[k].t, y = 1.0 / hist[k].max_A2;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  double b = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  double a = (sy - b * sx) / m;
  BlowUpFit out;
  out.c = -b;
  out.T = -a / b;
  return out;
}

}  // namespace krmcf
