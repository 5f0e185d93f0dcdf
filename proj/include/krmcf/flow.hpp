#pragma once

#include "krmcf/immersion.hpp"

namespace krmcf {

// Coupled state: both factor metrics flow by normalized Ricci flow while the
// graph moves by mean curvature, reparametrized so it stays a graph.
struct FlowState {
  ProductKahlerAmbient amb;
  GraphImmersion imm;
  double t = 0;
};

struct FlowDeriv {
  Field du1, du2, dp1, dp2;
};

inline FlowDeriv flow_rhs(const FlowState& s) {
  FlowDeriv d;
  d.du1 = ricci_rhs(s.amb.m1);
  d.du2 = ricci_rhs(s.amb.m2);
  SurfaceGeometry gm(s.amb, s.imm, GeometryLevel::Flow);
  d.dp1 = gm.df1dt;
  d.dp2 = gm.df2dt;
  return d;
}

inline FlowState advanced(const FlowState& s, const FlowDeriv& d, double c) {
  FlowState out = s;
  for (std::size_t k = 0; k < out.amb.m1.u.size(); ++k)
    out.amb.m1.u[k] += c * d.du1[k];
  for (std::size_t k = 0; k < out.amb.m2.u.size(); ++k)
    out.amb.m2.u[k] += c * d.du2[k];
  for (std::size_t k = 0; k < out.imm.p1.size(); ++k) {
    out.imm.p1[k] += c * d.dp1[k];
    out.imm.p2[k] += c * d.dp2[k];
  }
  return out;
}

inline FlowState flow_step(const FlowState& s, double dt) {
  FlowDeriv k1 = flow_rhs(s);
  FlowDeriv k2 = flow_rhs(advanced(s, k1, dt / 2));
  FlowDeriv k3 = flow_rhs(advanced(s, k2, dt / 2));
  FlowDeriv k4 = flow_rhs(advanced(s, k3, dt));
  FlowState out = s;
  auto mix = [&](Field& dst, const Field& a, const Field& b, const Field& c,
                 const Field& d2) {
    for (std::size_t k = 0; k < dst.size(); ++k)
      dst[k] += dt / 6.0 * (a[k] + 2 * b[k] + 2 * c[k] + d2[k]);
  };
  mix(out.amb.m1.u, k1.du1, k2.du1, k3.du1, k4.du1);
  mix(out.amb.m2.u, k1.du2, k2.du2, k3.du2, k4.du2);
  mix(out.imm.p1, k1.dp1, k2.dp1, k3.dp1, k4.dp1);
  mix(out.imm.p2, k1.dp2, k2.dp2, k3.dp2, k4.dp2);
  out.t = s.t + dt;
  if (!out.amb.m1.u.finite() || !out.amb.m2.u.finite() || !out.imm.finite())
    throw BlowUpError(out.t, "flow step produced non-finite state");
  return out;
}

// Parabolic stability bound; gm must carry at least frame-level data so the
// |A|^2 field is available.
inline double stable_dt(const FlowState& s, const SurfaceGeometry& gm) {
  double dt = std::min(ricci_stable_dt(s.amb.m1), ricci_stable_dt(s.amb.m2));
  // On the rotationally symmetric chart only the polar direction carries
  // stencils, so the azimuthal eigenvalue (vanishing at the poles) does not
  // constrain the step.
  bool sph = gm.grid.topology == Topology::SphereRotsym;
  double min_eig = std::numeric_limits<double>::infinity();
  for (const Sym2& m : gm.g)
    min_eig = std::min(min_eig, sph ? m.xx : min_eigenvalue(m));
  double surf = 0.2 * gm.grid.hx * gm.grid.hx * min_eig / (1.0 + gm.A2.max());
  return std::min(dt, surf);
}

// Threshold above which the discrete surface cannot resolve the curvature.
inline void check_blow_up(const FlowState& s, const SurfaceGeometry& gm) {
  double limit = 1e6 / (gm.grid.hx * gm.grid.hx);
  if (gm.A2.max() > limit)
    throw BlowUpError(s.t, "second fundamental form exceeded the resolvable "
                           "threshold");
}

}  // namespace krmcf
