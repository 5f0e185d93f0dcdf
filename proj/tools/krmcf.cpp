#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "krmcf/runner.hpp"

using namespace krmcf;

namespace {

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

int cmd_run(const RunConfig& cfg) {
  Scenario sc = make_scenario(cfg);
  std::cout << "scenario " << cfg.scenario << " grid " << cfg.grid
            << " min_v0 " << fmt17(sc.min_v0)
            << (sc.admissible ? " (graph condition holds)" : "") << "\n";
  Trajectory traj = run_scenario(sc);
  write_outputs(traj, cfg.out_dir);
  std::cout << "termination " << traj.termination << " at t "
            << fmt17(traj.end_time) << "; " << traj.rows.size()
            << " samples -> " << cfg.out_dir << "/series.csv\n";
  if (traj.termination == "blow-up") {
    BlowUpFit fit = fit_blow_up(traj.sing, 16);
    std::cout << "blow-up fit: T " << fmt17(fit.T) << " rate " << fmt17(fit.c)
              << "\n";
    return 3;
  }
  return traj.termination == "completed" ? 0 : 3;
}

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

int cmd_verify(const RunConfig& cfg) {
  int fine = cfg.grid;
  int coarse = fine >= 32 ? fine / 2 : fine;
  if (coarse == fine) fine = 2 * coarse;
  SuiteResult rc = residual_suite(cfg, coarse);
  SuiteResult rf = residual_suite(cfg, fine);
  std::vector<Check> checks;
  for (std::size_t k = 0; k < rf.reports.size(); ++k) {
    const ResidualReport& c = rc.reports[k];
    ResidualReport f = rf.reports[k];
    f.observed_order = observed_order(c.linf, f.linf);
    std::string detail = "linf " + fmt17(f.linf) + " (coarse " +
                         fmt17(c.linf) + ", order " +
                         fmt17(f.observed_order) + ")";
    bool pass = f.linf < 1e-10 || f.observed_order >= 1.0;
    checks.push_back({"residual:" + f.identity, pass, detail});
  }
  double h = kTwoPi / fine;
  const InequalityMargins& m = rf.margins;
  checks.push_back({"ineq:nJ2_vs_half_H2", m.nJ2_vs_half_H2 >= -1e-12,
                    "margin " + fmt17(m.nJ2_vs_half_H2)});
  checks.push_back({"ineq:nJ2_vs_grad_alpha",
                    m.nJ2_vs_grad_alpha >= -1e-2 * h,
                    "margin " + fmt17(m.nJ2_vs_grad_alpha)});
  checks.push_back({"ineq:gauge_sum", m.gauge_sum <= 1e-10,
                    "max deviation " + fmt17(m.gauge_sum)});
  checks.push_back({"ineq:pairing_norm", m.pairing_norm >= -1e-12,
                    "margin " + fmt17(m.pairing_norm)});
  if (cfg.scenario == "lagrangian-anti-diagonal")
    checks.push_back({"lagrangian:stationary", rf.max_abs_cos <= 1e-10,
                      "max |cos alpha| " + fmt17(rf.max_abs_cos)});
  bool all = true;
  for (const Check& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail
              << "\n";
    all = all && c.pass;
  }
  return all ? 0 : 4;
}

int cmd_convergence(const RunConfig& cfg, int levels) {
  std::vector<int> grids;
  for (int g = cfg.grid, l = 0; l < levels && g <= 512; ++l, g *= 2)
    grids.push_back(g);
  if (int(grids.size()) < levels)
    std::cout << "note: capped at grid 512, " << grids.size() << " levels\n";
  std::vector<SuiteResult> res;
  for (int g : grids) res.push_back(residual_suite(cfg, g));
  std::cout << "identity";
  for (int g : grids) std::cout << ",linf_" << g;
  std::cout << ",orders\n";
  for (std::size_t k = 0; k < res[0].reports.size(); ++k) {
    std::cout << res[0].reports[k].identity;
    for (const SuiteResult& r : res) std::cout << "," << fmt17(r.reports[k].linf);
    std::cout << ",";
    for (std::size_t l = 1; l < res.size(); ++l) {
      if (l > 1) std::cout << " ";
      std::cout << fmt17(
          observed_order(res[l - 1].reports[k].linf, res[l].reports[k].linf));
    }
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled Ricci / mean-curvature flow laboratory"};
  app.require_subcommand(1);
  std::string cfg_path, out_override;
  int snapshots_override = -1, levels = 3;
  long long seed_override = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", cfg_path, "configuration file")->required();
    sub->add_option("--out", out_override, "output directory override");
    sub->add_option("--snapshots", snapshots_override,
                    "snapshot count override");
    sub->add_option("--seed", seed_override, "seed override");
  };
  CLI::App* run = app.add_subcommand("run", "integrate and write outputs");
  add_common(run);
  CLI::App* verify =
      app.add_subcommand("verify", "residual and inequality suite");
  add_common(verify);
  CLI::App* conv =
      app.add_subcommand("convergence", "refinement order study");
  add_common(conv);
  conv->add_option("--levels", levels, "number of grid refinements");

  CLI11_PARSE(app, argc, argv);
  try {
    RunConfig cfg = load_config(cfg_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (snapshots_override >= 0) cfg.snapshots = snapshots_override;
    if (seed_override >= 0) cfg.seed = std::uint64_t(seed_override);
    validate_config(cfg);
    if (run->parsed()) return cmd_run(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    return cmd_convergence(cfg, levels);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up at t " << fmt17(e.time) << ": " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
