// Acceptance runner: one line per criterion, nonzero exit if any fails.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "krmcf/runner.hpp"

using namespace krmcf;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Criterion {
  int id;
  bool pass;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

RunConfig cfg_for(const std::string& scenario, int grid, double t_end) {
  RunConfig c;
  c.scenario = scenario;
  c.grid = grid;
  bool sphere = scenario == "round-horizontal" || scenario == "round-coupled";
  c.r = sphere ? 2.0 : 0.0;
  c.t_end = t_end;
  c.amplitude = 0.1;
  c.seed = 3;
  return c;
}

// shipped scenario parameters (mirrored from scenarios/*.cfg)
RunConfig shipped(const std::string& scenario) {
  RunConfig c = cfg_for(scenario, 64, 1.0);
  if (scenario == "diagonal-flat") {
    c.seed = 1;
    c.amplitude = 0;
  } else if (scenario == "lagrangian-anti-diagonal") {
    c.seed = 1;
    c.amplitude = 0;
  } else if (scenario == "lagrangian-anti-diagonal-curved") {
    c.seed = 7;
    c.amplitude = 0.12;
  } else if (scenario == "perturbed-graph-flat") {
    c.seed = 3;
    c.amplitude = 0.1;
    c.t_end = 0.5;
  } else if (scenario == "perturbed-graph-torus") {
    c.seed = 5;
    c.amplitude = 0.12;
    c.t_end = 5;
  } else if (scenario == "round-horizontal") {
    c.grid = 128;
    c.seed = 11;
    c.amplitude = 0.15;
    c.t_end = 4;
  } else if (scenario == "round-coupled") {
    c.grid = 128;
    c.seed = 13;
    c.amplitude = 0.1;
    c.t_end = 2;
    c.probe_t0 = 3;
    c.probe_cutoff = 0.3;
  }
  return c;
}

// pointwise inequality margins accumulated over every state visited by any
// criterion run (feeds criterion 4)
struct MarginAcc {
  double half_H2 = kInf;
  double grad_alpha = kInf;
  double min_h = kInf;
  int states = 0;

  void absorb(const SurfaceGeometry& g) {
    InequalityMargins m = inequality_suite(g);
    half_H2 = std::min(half_H2, m.nJ2_vs_half_H2);
    grad_alpha = std::min(grad_alpha, m.nJ2_vs_grad_alpha);
    min_h = std::min(min_h, g.grid.hx);
    ++states;
  }
};

MarginAcc margins;

struct RunStats {
  std::vector<double> t, min_cos, max_abs_cos, max_A2, min_v;
  std::vector<double> gap_u1, gap_u2, s2half;  // max of 1-u1, 1-u2, sin^2(a/2)
  std::vector<double> phi;
  bool completed = true;
};

// fixed-gauge integration with periodic diagnostic sampling; mirrors the
// production runner but records the extrema the criteria are written against
RunStats integrate(FlowState s, double T, const MonotonicityProbe* probe) {
  RunStats st;
  double dt_cap = 0;
  int refresh = 0;
  try {
    while (true) {
      if (refresh == 0 || s.t >= T) {
        SurfaceGeometry g(s.amb, s.imm, GeometryLevel::Frames);
        check_blow_up(s, g);
        dt_cap = stable_dt(s, g);
        refresh = 8;
        margins.absorb(g);
        st.t.push_back(s.t);
        st.min_cos.push_back(g.cosA.min());
        st.max_abs_cos.push_back(
            std::max(std::abs(g.cosA.min()), std::abs(g.cosA.max())));
        st.max_A2.push_back(g.A2.max());
        st.min_v.push_back(g.v.min());
        st.gap_u1.push_back(1.0 - g.u1.min());
        st.gap_u2.push_back(1.0 - g.u2.min());
        st.s2half.push_back(0.5 * (1.0 - g.cosA.min()));
        if (probe) st.phi.push_back(phi_functional(*probe, s, g));
      }
      if (s.t >= T) break;
      s = flow_step(s, std::min(dt_cap, T - s.t));
      --refresh;
    }
  } catch (const BlowUpError&) {
    st.completed = false;
  } catch (const DegenerateImmersionError&) {
    st.completed = false;
  }
  return st;
}

// least-squares decay rate of log q(t) over the trailing two thirds;
// fully-decayed series count as fast decay
double fit_decay_rate(const std::vector<double>& t,
                      const std::vector<double>& q) {
  std::vector<double> xs, ys;
  for (std::size_t i = t.size() / 3; i < t.size(); ++i)
    if (q[i] > 1e-13) {
      xs.push_back(t[i]);
      ys.push_back(std::log(q[i]));
    }
  if (xs.size() < 3) return kInf;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double n = double(xs.size());
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// time-integrated defect of the area balance law (criterion 5): compares the
// net area change against the trapezoid-accumulated flux integral
double area_balance_gap(FlowState s, double T) {
  std::vector<double> ts, rates;
  double area0 = 0, area1 = 0;
  double dt_cap = 0;
  int refresh = 0;
  while (true) {
    SurfaceGeometry g(s.amb, s.imm, GeometryLevel::Flow);
    Field rt = ricci_trace_field(g);
    Field dv = g.div_T();
    Field rate(g.grid);
    for (std::size_t k = 0; k < g.size(); ++k)
      rate[k] = -g.H2[k] - rt[k] + 0.5 * s.amb.r() + dv[k];
    ts.push_back(s.t);
    rates.push_back(g.integral(rate));
    area1 = g.area();
    if (ts.size() == 1) area0 = area1;
    if (s.t >= T) break;
    if (refresh == 0) {
      SurfaceGeometry gf(s.amb, s.imm, GeometryLevel::Frames);
      dt_cap = stable_dt(s, gf);
      margins.absorb(gf);
      refresh = 8;
    }
    s = flow_step(s, std::min(dt_cap, T - s.t));
    --refresh;
  }
  double acc = 0;
  for (std::size_t i = 1; i < ts.size(); ++i)
    acc += 0.5 * (rates[i - 1] + rates[i]) * (ts[i] - ts[i - 1]);
  return std::abs((area1 - area0) - acc);
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(KRMCF_CLI_PATH) + " " + args +
                    " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

int main() {
  std::vector<Criterion> out;

  // 1: evolution identity for cos(alpha) converges at second order
  {
    RunConfig c = shipped("perturbed-graph-flat");
    SuiteResult r64 = residual_suite(c, 64);
    SuiteResult r128 = residual_suite(c, 128);
    double lc = r64.reports[0].linf, lf = r128.reports[0].linf;
    double order = observed_order(lc, lf);
    bool pass = order >= 1.8 && lf <= 1e-3;
    out.push_back({1, pass,
                   "cos-angle residual 64->128 linf " + num(lc) + " -> " +
                       num(lf) + ", order " + num(order)});
  }

  // 2: positive ambient curvature keeps the surface symplectic
  {
    RunConfig c = shipped("round-coupled");
    Scenario sc = make_scenario(c);
    RunStats st = integrate(sc.state, c.t_end, nullptr);
    double c0 = st.min_cos.front();
    double worst = kInf;
    for (double v : st.min_cos) worst = std::min(worst, v);
    bool pass = st.completed && c0 >= 0.5 && worst >= c0 - 1e-6;
    out.push_back({2, pass,
                   "min cos(alpha): initial " + num(c0) + ", floor over run " +
                       num(worst)});
  }

  // 3: Lagrangian initial data stays Lagrangian
  {
    RunConfig flat = shipped("lagrangian-anti-diagonal");
    Scenario sf = make_scenario(flat);
    RunStats stf = integrate(sf.state, 1.0, nullptr);
    double worst_flat = 0;
    for (double v : stf.max_abs_cos) worst_flat = std::max(worst_flat, v);
    RunConfig curved = shipped("lagrangian-anti-diagonal-curved");
    curved.grid = 128;
    Scenario scv = make_scenario(curved);
    RunStats stc = integrate(scv.state, 1.0, nullptr);
    double worst_curved = 0;
    for (double v : stc.max_abs_cos) worst_curved = std::max(worst_curved, v);
    bool pass = stf.completed && stc.completed && worst_flat <= 1e-10 &&
                worst_curved <= 1e-3;
    out.push_back({3, pass,
                   "max|cos alpha|: flat " + num(worst_flat) + ", curved 128 " +
                       num(worst_curved)});
  }

  // 5: area-element balance integrated over [0,1] (needs the torus run
  // before 4 so the margins accumulator sees its states too)
  {
    RunConfig c = shipped("perturbed-graph-torus");
    c.grid = 128;
    Scenario sc = make_scenario(c);
    double gap = area_balance_gap(sc.state, 1.0);
    bool pass = gap <= 1e-3;
    out.push_back(
        {5, pass, "area balance defect over [0,1] at 128: " + num(gap)});
  }

  // 6: graph condition keeps the long-time run regular, both grids
  {
    std::string detail;
    bool pass = true;
    for (int grid : {64, 128}) {
      RunConfig c = shipped("perturbed-graph-torus");
      c.grid = grid;
      Scenario sc = make_scenario(c);
      RunStats st = integrate(sc.state, c.t_end, nullptr);
      double a0 = st.max_A2.front(), worstA = 0, worstV = kInf;
      for (double v : st.max_A2) worstA = std::max(worstA, v);
      for (double v : st.min_v) worstV = std::min(worstV, v);
      bool ok = st.completed && sc.min_v0 >= 0.8 && worstA <= 2 * a0 &&
                worstV > 0;
      pass = pass && ok;
      detail += (grid == 64 ? "" : "; ") + std::to_string(grid) + ": v0 " +
                num(sc.min_v0) + " max|A|2 " + num(worstA) + "/" +
                num(a0) + " min v " + num(worstV);
    }
    out.push_back({6, pass, detail});
  }

  // 7: round product contracts to a totally geodesic surface
  std::vector<double> angle_rates;
  {
    RunConfig c = shipped("round-horizontal");
    bool pass = true;
    std::string detail;
    double a_end = 0, a_mid = 0, r1 = 0, r2 = 0;
    for (int grid : {64, 128}) {
      c.grid = grid;
      Scenario sc = make_scenario(c);
      RunStats st = integrate(sc.state, c.t_end, nullptr);
      pass = pass && st.completed;
      angle_rates.push_back(fit_decay_rate(st.t, st.s2half));
      if (grid == 128) {
        a_end = st.max_A2.back();
        a_mid = st.max_A2[st.max_A2.size() / 2];
        r1 = fit_decay_rate(st.t, st.gap_u1);
        r2 = fit_decay_rate(st.t, st.gap_u2);
      }
    }
    pass = pass && a_end <= 1e-2 && a_end <= a_mid && r1 > 0 && r2 > 0;
    out.push_back({7, pass,
                   "max|A|2(T) " + num(a_end) + ", gauge decay rates " +
                       num(r1) + ", " + num(r2)});
  }

  // 8: angle decay rate is positive and refinement stable
  {
    double r64 = angle_rates[0], r128 = angle_rates[1];
    bool decayed = !std::isfinite(r64) && !std::isfinite(r128);
    bool pass = decayed ||
                (r64 > 0 && r128 > 0 &&
                 std::abs(r64 - r128) <= 0.2 * std::max(r64, r128));
    out.push_back({8, pass,
                   "sin^2(alpha/2) decay rates 64/128: " + num(r64) + " / " +
                       num(r128)});
  }

  // 9: localized backward-kernel quantity
  {
    // flat stationary ambient: monotone with no correction constants.
    // the window [t0 - 0.025, t0 - 0.011] keeps the cutoff tail of the
    // backward kernel below ~1e-8 while its width stays above ~1.5 grid
    // spacings, so the discrete quadrature resolves the kernel throughout
    RunConfig c = shipped("perturbed-graph-flat");
    Scenario sc = make_scenario(c);
    FlowState fs = sc.state;
    double t_probe0 = 0.275, t_probe1 = 0.289;
    {
      double dt_cap = 0;
      int refresh = 0;
      while (fs.t < t_probe0) {
        if (refresh == 0) {
          SurfaceGeometry g(fs.amb, fs.imm, GeometryLevel::Frames);
          dt_cap = stable_dt(fs, g);
          refresh = 8;
        }
        fs = flow_step(fs, std::min(dt_cap, t_probe0 - fs.t));
        --refresh;
      }
    }
    SurfaceGeometry g0(fs.amb, fs.imm, GeometryLevel::Frames);
    SingularitySample m0 = singularity_sample(fs, g0);
    MonotonicityProbe probe;
    std::size_t k0 = g0.idx(m0.i, m0.j);
    probe.X0 = {g0.jet[k0].F[0], g0.jet[k0].F[1], g0.jet[k0].F[2],
                g0.jet[k0].F[3]};
    probe.t0 = 0.3;
    probe.cutoff = 1.5;
    probe.R0 = 0.0;
    double worst_rise = 0;
    bool flat_done = true;
    try {
      double prev = phi_functional(probe, fs, g0);
      margins.absorb(g0);
      while (fs.t < t_probe1) {
        SurfaceGeometry g(fs.amb, fs.imm, GeometryLevel::Frames);
        fs = flow_step(fs, std::min(stable_dt(fs, g), t_probe1 - fs.t));
        SurfaceGeometry g2(fs.amb, fs.imm, GeometryLevel::Frames);
        double phi = phi_functional(probe, fs, g2);
        worst_rise = std::max(worst_rise, phi - prev);
        prev = phi;
        margins.absorb(g2);
      }
    } catch (const std::runtime_error&) {
      flat_done = false;
    }
    bool flat_ok = flat_done && worst_rise <= 1e-6;
    // coupled round case: correction constants exist and are refinement
    // stable
    double fit_sum[2];
    for (int l = 0; l < 2; ++l) {
      RunConfig rc = shipped("round-coupled");
      rc.grid = l == 0 ? 64 : 128;
      Scenario rsc = make_scenario(rc);
      Trajectory traj = run_scenario(rsc);
      std::vector<double> ts, phis;
      for (const auto& row : traj.rows) {
        ts.push_back(row.front());
        phis.push_back(row.back());
      }
      ProbeFit f = fit_probe_constants(ts, phis, rc.probe_t0);
      fit_sum[l] = f.c1 + f.c2;
    }
    bool coupled_ok =
        (fit_sum[0] <= 1e-6 && fit_sum[1] <= 1e-6) ||
        std::abs(fit_sum[0] - fit_sum[1]) <=
            0.5 * std::max(fit_sum[0], fit_sum[1]);
    out.push_back({9, flat_ok && coupled_ok,
                   "flat max rise " + num(worst_rise) + "; coupled c1+c2 " +
                       num(fit_sum[0]) + " / " + num(fit_sum[1])});
  }

  // 10: |A|^2 evolution identity, flat-ambient and curved cases
  {
    auto a2_linf = [](const RunConfig& base, int grid) {
      RunConfig c = base;
      c.grid = grid;
      Scenario sc = make_scenario(c);
      FlowState s = sc.state;
      SurfaceGeometry g0(s.amb, s.imm, GeometryLevel::Frames);
      double dt = 0.5 * stable_dt(s, g0);
      for (int w = 0; w < 3; ++w) s = flow_step(s, dt);
      SurfaceGeometry g(s.amb, s.imm, GeometryLevel::Flow);
      return make_report("A2", g, residual_A2(s, dt), dt).linf;
    };
    RunConfig flat = shipped("perturbed-graph-flat");
    RunConfig curved = shipped("perturbed-graph-torus");
    double f64 = a2_linf(flat, 64), f128 = a2_linf(flat, 128);
    double c64 = a2_linf(curved, 64), c128 = a2_linf(curved, 128);
    double of = observed_order(f64, f128), oc = observed_order(c64, c128);
    bool pass = of >= 1.0 && oc >= 1.0;
    out.push_back({10, pass,
                   "|A|^2 residual orders: flat " + num(of) + " (" + num(f64) +
                       "->" + num(f128) + "), curved " + num(oc)});
  }

  // 4: inequality margins over every state visited above, plus the flat
  // stationary scenarios not exercised yet
  {
    for (const char* name : {"diagonal-flat"}) {
      RunConfig c = shipped(name);
      c.grid = 32;
      Scenario sc = make_scenario(c);
      integrate(sc.state, 0.5, nullptr);
    }
    double slack = 1e-2 * margins.min_h;
    bool pass = margins.half_H2 >= -1e-12 && margins.grad_alpha >= -slack;
    out.push_back({4, pass,
                   "margins over " + std::to_string(margins.states) +
                       " states: half-|H|^2 " + num(margins.half_H2) +
                       ", grad-angle " + num(margins.grad_alpha)});
  }

  // 11: determinism, snapshot round trip, CLI exit codes
  {
    RunConfig c = shipped("perturbed-graph-flat");
    c.grid = 32;
    c.t_end = 0.2;
    c.samples = 5;
    c.snapshots = 1;
    Scenario sc = make_scenario(c);
    fs::path dir = fs::temp_directory_path() / "krmcf_acceptance";
    fs::remove_all(dir);
    Trajectory t1 = run_scenario(sc);
    Trajectory t2 = run_scenario(make_scenario(c));
    write_outputs(t1, (dir / "a").string());
    write_outputs(t2, (dir / "b").string());
    bool identical =
        slurp(dir / "a" / "series.csv") == slurp(dir / "b" / "series.csv") &&
        !slurp(dir / "a" / "series.csv").empty();
    bool lossless = true;
    Snapshot rd = read_snapshot((dir / "a" / "snap_0.2.dat").string());
    const Snapshot& orig = t1.snaps.front();
    for (std::size_t f = 0; f < orig.fields.size() && lossless; ++f)
      for (std::size_t k = 0; k < orig.fields[f].second.size(); ++k)
        if (rd.fields[f].second[k] != orig.fields[f].second[k]) {
          lossless = false;
          break;
        }
    fs::path vcfg = dir / "verify.cfg";
    std::ofstream(vcfg) << "scenario = diagonal-flat\ngrid = 16\nr = 0\n"
                           "t_end = 1\nseed = 1\namplitude = 0\n";
    fs::path bcfg = dir / "bad.cfg";
    std::ofstream(bcfg) << "scenario = diagonal-flat\ngrid = 63\nr = 0\n"
                           "t_end = 1\nseed = 1\namplitude = 0\n";
    int ev = run_cli("verify " + vcfg.string());
    int eb = run_cli("verify " + bcfg.string());
    bool pass = identical && lossless && ev == 0 && eb == 2;
    out.push_back({11, pass,
                   std::string("series ") +
                       (identical ? "identical" : "DIFFER") + ", snapshot " +
                       (lossless ? "lossless" : "LOSSY") + ", verify exits " +
                       std::to_string(ev) + "/" + std::to_string(eb)});
  }

  std::sort(out.begin(), out.end(),
            [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
  int failures = 0;
  for (const Criterion& c : out) {
    std::printf("criterion %2d: %s - %s\n", c.id, c.pass ? "PASS" : "FAIL",
                c.detail.c_str());
    if (!c.pass) ++failures;
  }
  if (failures)
    std::printf("%d criterion(s) failed\n", failures);
  else
    std::printf("all %zu criteria passed\n", out.size());
  return failures == 0 ? 0 : 1;
}
