#pragma once

#include "krmcf/config.hpp"
#include "krmcf/flow.hpp"

namespace krmcf {

// low-mode random field on the torus, amplitude-weighted by mode count
inline Field random_torus_field(const PeriodicGrid& g, DetRng& rng,
                                double amp) {
  Field f(g);
  int mode = 0;
  for (int kx = -2; kx <= 2; ++kx)
    for (int ky = -2; ky <= 2; ++ky) {
      if (kx == 0 && ky == 0) continue;
      if (kx < 0 || (kx == 0 && ky < 0)) continue;  // one per conjugate pair
      ++mode;
      double c = amp * rng.next_signed() / double(mode + 1);
      double ph = kTwoPi * rng.next_double();
      for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
          f.at(i, j) += c * std::cos(kx * g.x(i) + ky * g.y(j) + ph);
    }
  return f;
}

// random field on the torus that is even in y (so the anti-diagonal
// reflection symmetry of the Lagrangian scenario is an ambient isometry)
inline Field random_torus_field_even_y(const PeriodicGrid& g, DetRng& rng,
                                       double amp) {
  Field f(g);
  int mode = 0;
  for (int kx = 1; kx <= 2; ++kx)
    for (int ky = 0; ky <= 2; ++ky) {
      ++mode;
      double c = amp * rng.next_signed() / double(mode);
      double ph = kTwoPi * rng.next_double();
      for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
          f.at(i, j) += c * std::cos(kx * g.x(i) + ph) * std::cos(ky * g.y(j));
    }
  return f;
}

// rotationally symmetric field on the sphere grid, even across both poles
inline Field random_sphere_field(const PeriodicGrid& g, DetRng& rng,
                                 double amp) {
  Field f(g);
  for (int k = 1; k <= 3; ++k) {
    double c = amp * rng.next_signed() / double(k);
    for (int i = 0; i < g.nx; ++i) f[std::size_t(i)] += c * std::cos(k * g.x(i));
  }
  return f;
}

struct Scenario {
  RunConfig cfg;
  FlowState state;
  bool admissible = false;  // min v(.,0) > sqrt(2)/2
  double min_v0 = 0;
  bool ambient_nonneg_curved = false;  // scalar curvature >= 0 for all t
};

inline Scenario make_scenario(const RunConfig& cfg) {
  validate_config(cfg);
  bool sphere = cfg.scenario == "round-horizontal" ||
                cfg.scenario == "round-coupled";
  if (sphere && cfg.r != 2.0)
    throw ValidationError("sphere-product scenarios require r = 2");
  if (!sphere && cfg.r != 0.0)
    throw ValidationError("torus scenarios require r = 0");
  DetRng rng(cfg.seed);
  int n = cfg.grid;
  double amp = cfg.amplitude;
  ConformalSurfaceMetric m1 = sphere
                                  ? ConformalSurfaceMetric::round_sphere(n, 2)
                                  : ConformalSurfaceMetric::flat_torus(n, 0);
  ConformalSurfaceMetric m2 = m1;
  GraphImmersion imm =
      sphere ? GraphImmersion::sphere(n) : GraphImmersion::torus(n);

  const std::string& sc = cfg.scenario;
  if (sc == "diagonal-flat") {
    imm.wind[0][0] = 1;
    imm.wind[1][1] = 1;
  } else if (sc == "lagrangian-anti-diagonal") {
    imm.wind[0][0] = 1;
    imm.wind[1][1] = -1;
  } else if (sc == "lagrangian-anti-diagonal-curved") {
    imm.wind[0][0] = 1;
    imm.wind[1][1] = -1;
    Field U = random_torus_field_even_y(m1.grid, rng, amp);
    m1.u = U;
    m2.u = U;
  } else if (sc == "perturbed-graph-flat") {
    imm.wind[0][0] = 1;
    imm.wind[1][1] = 1;
    imm.p1 = random_torus_field(m1.grid, rng, amp);
    imm.p2 = random_torus_field(m1.grid, rng, amp);
  } else if (sc == "perturbed-graph-torus") {
    // graph of a near-constant map; bumpy conformal factors on both factors
    m1.u = random_torus_field(m1.grid, rng, amp);
    m2.u = random_torus_field(m2.grid, rng, amp);
    imm.p1 = random_torus_field(m1.grid, rng, amp);
    imm.p2 = random_torus_field(m1.grid, rng, amp);
    for (std::size_t k = 0; k < imm.p1.size(); ++k) {
      imm.p1[k] += kPi;
      imm.p2[k] += kPi;
    }
  } else if (sc == "round-horizontal") {
    // perturbation of the horizontal slice S^2 x {pt}
    Field b = random_sphere_field(imm.grid, rng, amp);
    for (std::size_t k = 0; k < imm.p1.size(); ++k)
      imm.p1[k] = 0.5 * kPi + b[k];
  } else if (sc == "round-coupled") {
    m1.u = random_sphere_field(m1.grid, rng, 0.5 * amp);
    m2.u = random_sphere_field(m2.grid, rng, 0.5 * amp);
    Field b = random_sphere_field(imm.grid, rng, amp);
    for (std::size_t k = 0; k < imm.p1.size(); ++k)
      imm.p1[k] = 0.5 * kPi + b[k];
  }

  Scenario out{cfg, FlowState{ProductKahlerAmbient(m1, m2), imm, 0.0}};
  SurfaceGeometry gm(out.state.amb, out.state.imm, GeometryLevel::Frames);
  out.min_v0 = gm.v.min();
  out.admissible = out.min_v0 > std::sqrt(0.5);
  // round factors with u = 0 keep scalar curvature 4 under r = 2; flat
  // factors with u = 0 keep it 0
  bool u_zero = m1.u.max_abs() == 0.0 && m2.u.max_abs() == 0.0;
  out.ambient_nonneg_curved = u_zero;
  return out;
}

}  // namespace krmcf
