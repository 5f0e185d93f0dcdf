#pragma once

#include "krmcf/diagnostics.hpp"
#include "krmcf/io.hpp"
#include "krmcf/scenarios.hpp"

namespace krmcf {

struct Trajectory {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<Snapshot> snaps;
  std::vector<SingularitySample> sing;
  std::string termination = "completed";
  double end_time = 0;
};

inline Snapshot make_snapshot(const FlowState& s, const SurfaceGeometry& g) {
  Snapshot snap;
  snap.t = s.t;
  snap.nx = g.grid.nx;
  snap.ny = g.grid.ny;
  snap.fields = {{"cos_alpha", g.cosA}, {"v", g.v},
                 {"A2", g.A2},          {"sqrtg", g.sqrtg},
                 {"p1", s.imm.p1},      {"p2", s.imm.p2},
                 {"u1_amb", s.amb.m1.u}, {"u2_amb", s.amb.m2.u}};
  return snap;
}

inline Trajectory run_scenario(const Scenario& sc) {
  const RunConfig& cfg = sc.cfg;
  Trajectory traj;
  traj.columns = {"t",      "min_cos_alpha", "min_v",
                  "min_u1", "min_u2",        "max_A2",
                  "area",   "int_one_minus_cos", "int_H2", "L1_H_cum"};
  bool probe_on = cfg.probe_t0 > 0;
  MonotonicityProbe probe;
  if (probe_on) traj.columns.push_back("phi_" + cfg.probe_weight);

  FlowState s = sc.state;
  double T = cfg.t_end;
  std::vector<double> sample_t(cfg.samples);
  for (int k = 0; k < cfg.samples; ++k)
    sample_t[std::size_t(k)] = T * k / double(cfg.samples - 1);
  std::vector<double> snap_t;
  for (int k = 0; k < cfg.snapshots; ++k)
    snap_t.push_back(cfg.snapshots == 1 ? T
                                        : T * k / double(cfg.snapshots - 1));

  std::size_t next_sample = 0, next_snap = 0;
  double dt_cap = 0, last_acc_t = 0, int_H1 = 0, L1H = 0;
  int refresh = 0;
  try {
    while (true) {
      bool at_sample =
          next_sample < sample_t.size() &&
          std::abs(s.t - sample_t[next_sample]) < 1e-12 * std::max(1.0, T);
      bool need_frames = at_sample || refresh == 0 ||
                         (next_snap < snap_t.size() &&
                          std::abs(s.t - snap_t[next_snap]) < 1e-12);
      if (need_frames) {
        SurfaceGeometry g(s.amb, s.imm, GeometryLevel::Frames);
        check_blow_up(s, g);
        dt_cap = cfg.dt_safety * stable_dt(s, g);
        refresh = 8;
        traj.sing.push_back(singularity_sample(s, g));
        // piecewise-constant accumulation of the running L1 norm of H
        Field absH(g.grid);
        for (std::size_t k = 0; k < g.size(); ++k)
          absH[k] = std::sqrt(std::max(g.H2[k], 0.0));
        double cur = g.integral(absH);
        L1H += int_H1 * (s.t - last_acc_t);
        int_H1 = cur;
        last_acc_t = s.t;
        if (probe_on && traj.rows.empty()) {
          // center the probe at the initial maximum-curvature point
          SingularitySample m = traj.sing.front();
          probe.X0 = {g.jet[g.idx(m.i, m.j)].F[0], g.jet[g.idx(m.i, m.j)].F[1],
                      g.jet[g.idx(m.i, m.j)].F[2], g.jet[g.idx(m.i, m.j)].F[3]};
          probe.t0 = cfg.probe_t0;
          probe.cutoff = cfg.probe_cutoff;
          probe.weight = cfg.probe_weight == "angle" ? ProbeWeight::Angle
                                                     : ProbeWeight::Gauge;
          Field amb_R = ambient_scalar_field(g);
          probe.R0 = std::max(0.0, -amb_R.min());
        }
        if (at_sample) {
          Field one_minus(g.grid);
          for (std::size_t k = 0; k < g.size(); ++k)
            one_minus[k] = 1.0 - g.cosA[k];
          std::vector<double> row = {s.t,
                                     g.cosA.min(),
                                     g.v.min(),
                                     g.u1.min(),
                                     g.u2.min(),
                                     g.A2.max(),
                                     g.area(),
                                     g.integral(one_minus),
                                     g.integral(g.H2),
                                     L1H};
          if (probe_on) row.push_back(phi_functional(probe, s, g));
          traj.rows.push_back(row);
          ++next_sample;
        }
        if (next_snap < snap_t.size() &&
            std::abs(s.t - snap_t[next_snap]) < 1e-12) {
          traj.snaps.push_back(make_snapshot(s, g));
          ++next_snap;
        }
      }
      if (next_sample >= sample_t.size()) break;
      double target = sample_t[next_sample];
      if (next_snap < snap_t.size())
        target = std::min(target, snap_t[next_snap]);
      double dt = std::min(dt_cap, target - s.t);
      s = flow_step(s, dt);
      if (target - s.t < 1e-12 * std::max(1.0, T)) s.t = target;
      --refresh;
    }
  } catch (const BlowUpError& e) {
    traj.termination = "blow-up";
  } catch (const DegenerateImmersionError&) {
    traj.termination = "degenerate";
  }
  traj.end_time = s.t;
  return traj;
}

inline void write_outputs(const Trajectory& traj, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_series_csv(dir + "/series.csv", traj.columns, traj.rows);
  for (std::size_t k = 0; k < traj.snaps.size(); ++k) {
    const Snapshot& s = traj.snaps[k];
    char tbuf[32];
    std::snprintf(tbuf, sizeof tbuf, "%g", s.t);
    write_snapshot(dir + "/snap_" + tbuf + ".dat", s);
    for (const char* name : {"cos_alpha", "A2"}) {
      for (const auto& [nm, f] : s.fields)
        if (nm == name)
          write_ppm(dir + "/heat_" + nm + "_" + std::to_string(k) + ".ppm", f,
                    f.min(), f.max());
    }
  }
}

// ---- residual suite (verify / convergence support) ----

struct SuiteResult {
  std::vector<ResidualReport> reports;
  InequalityMargins margins;
  double max_abs_cos = 0;
};

inline SuiteResult residual_suite(const RunConfig& cfg, int grid) {
  RunConfig c = cfg;
  c.grid = grid;
  Scenario sc = make_scenario(c);
  FlowState s = sc.state;
  SurfaceGeometry g0(s.amb, s.imm, GeometryLevel::Frames);
  double dt = 0.5 * cfg.dt_safety * stable_dt(s, g0);
  for (int w = 0; w < 3; ++w) s = flow_step(s, dt);
  SurfaceGeometry g(s.amb, s.imm, GeometryLevel::Frames);
  SuiteResult out;
  out.margins = inequality_suite(g);
  out.max_abs_cos = std::max(std::abs(g.cosA.min()), std::abs(g.cosA.max()));
  bool torus = s.imm.grid.topology == Topology::Torus;
  out.reports.push_back(
      make_report("cos_alpha", g, residual_cos_alpha(s, dt), dt));
  out.reports.push_back(make_report("u1", g, residual_u_gauge(s, dt, 1), dt));
  out.reports.push_back(make_report("u2", g, residual_u_gauge(s, dt, 2), dt));
  out.reports.push_back(
      make_report("u_sum", g, residual_u_combined(s, dt), dt));
  out.reports.push_back(
      make_report("area_element", g, residual_area_element(s, dt), dt));
  out.reports.push_back(
      make_report("grad_cos_alpha", g, residual_grad_cos_alpha(s), dt));
  if (torus) {
    out.reports.push_back(
        make_report("metric_evolution", g, residual_metric_evolution(s, dt),
                    dt));
    out.reports.push_back(make_report("A2", g, residual_A2(s, dt), dt));
  }
  return out;
}

// observed order between two refinements; meaningful only when the coarse
// residual is above rounding noise
inline double observed_order(double coarse, double fine) {
  if (!(coarse > 0) || !(fine > 0)) return 0;
  return std::log2(coarse / fine);
}

}  // namespace krmcf
