// Command-line surface of the loopflow toolkit: config ingestion, subcommand
// dispatch, result persistence. Outputs land under
//   <outdir>/<subcommand>/<config-hash>/
// and embed the config hash plus the ledger validation status.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "loopflow/config.hpp"
#include "loopflow/io.hpp"
#include "loopflow/semigroup.hpp"

namespace {

using namespace loopflow;

std::string out_root(const RunConfig& cfg, const std::string& cli_outdir) {
  if (!cli_outdir.empty()) return cli_outdir;
  if (const char* env = std::getenv("LOOPFLOW_OUTDIR")) return env;
  return cfg.output_dir;
}

std::string make_out_dir(const Session& ses, const std::string& root,
                         const std::string& sub) {
  const std::string dir = root + "/" + sub + "/" + ses.hash;
  io::ensure_dir(dir);
  return dir;
}

LoopField read_field_arg(const Session& ses, const std::string& arg) {
  std::string text = arg;
  if (!arg.empty() && arg[0] != '{') text = io::read_text(arg);  // file path
  return parse_field_text(text, ses.chart.dec.components(),
                          ses.chart.dec.modes());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loopflow: invariant manifolds and time-T graph maps of the "
               "heat semiflow on loop spaces"};
  app.require_subcommand(1);

  std::string config_path;
  std::string outdir_flag;
  int jobs_flag = 0;
  app.add_option("--config", config_path, "run configuration JSON")->required();
  app.add_option("--outdir", outdir_flag, "output directory (overrides config)");
  app.add_option("--jobs", jobs_flag, "worker count for sweeps");

  auto* cmd_spectrum = app.add_subcommand(
      "spectrum", "critical loop and spectral decomposition");
  auto* cmd_flow = app.add_subcommand("flow", "integrate the local semiflow");
  std::string flow_z;
  double flow_T = 1.0;
  cmd_flow->add_option("--z", flow_z, "initial field (JSON literal or file)")
      ->required();
  cmd_flow->add_option("--T", flow_T, "final time")->required();

  auto* cmd_stable = app.add_subcommand("stable", "stable-manifold graph point");
  std::string stable_z;
  cmd_stable->add_option("--zplus", stable_z,
                         "plus-part data (JSON literal or file); default: half "
                         "the probe radius along the lowest plus eigenvector");

  auto* cmd_unstable =
      app.add_subcommand("unstable", "unstable-manifold trajectory");
  std::string unstable_z;
  cmd_unstable->add_option("--zminus", unstable_z,
                           "minus-part endpoint data (JSON literal or file); "
                           "default: half rho along the first minus direction");

  auto* cmd_sphere = app.add_subcommand("sphere", "descending sphere samples");
  double sphere_eps = -1.0;
  cmd_sphere->add_option("--eps", sphere_eps, "action drop (default: ledger eps)");

  auto* cmd_mixed = app.add_subcommand("mixed", "mixed Cauchy graph point");
  double mixed_T = -1.0;
  int mixed_gamma = 0;
  std::string mixed_z;
  cmd_mixed->add_option("--T", mixed_T, "endpoint time")->required();
  cmd_mixed->add_option("--gamma-id", mixed_gamma, "descending sphere index");
  cmd_mixed->add_option("--zplus", mixed_z, "plus-part data (default zero)");

  auto* cmd_lambda = app.add_subcommand(
      "lambda-sweep", "graph-map convergence sweep and rate fit");
  auto* cmd_c1 = app.add_subcommand("c1-sweep", "linearized graph-map sweep");
  auto* cmd_roundtrip = app.add_subcommand(
      "roundtrip", "forward-evolution fiber audit of graph points");
  auto* cmd_smoothing = app.add_subcommand(
      "smoothing-audit", "semigroup smoothing-constant audit");
  double smin = 1e-3, smax = 10.0;
  int scount = 60;
  cmd_smoothing->add_option("--smin", smin, "smallest time");
  cmd_smoothing->add_option("--smax", smax, "largest time");
  cmd_smoothing->add_option("--count", scount, "grid size");
  auto* cmd_ledger =
      app.add_subcommand("validate-ledger", "constants ledger report");
  auto* cmd_lipschitz =
      app.add_subcommand("lipschitz-audit", "Lipschitz-in-T finite differences");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(config_path);
    Session ses = build_session(cfg);
    const int jobs = jobs_flag > 0 ? jobs_flag : cfg.jobs;
    const std::string root = out_root(cfg, outdir_flag);
    const ContractionOptions copts = ses.contraction_options();

    if (*cmd_spectrum) {
      const std::string dir = make_out_dir(ses, root, "spectrum");
      io::write_text(dir + "/spectrum.json", io::spectrum_json(ses));
      std::cout << dir << "/spectrum.json\n";
    }

    if (*cmd_flow) {
      const std::string dir = make_out_dir(ses, root, "flow");
      const LoopField z = read_field_arg(ses, flow_z);
      Trajectory traj = evolve(ses.chart.dec, ses.chart.model, ses.chart.x, z,
                               flow_T, ses.flow_options());
      const double res = residual_representation(ses.chart.dec, ses.chart.model,
                                                 ses.chart.x, traj);
      io::write_text(dir + "/trajectory.csv", io::trajectory_csv(traj));
      io::write_text(dir + "/summary.json",
                     io::trajectory_summary_json(
                         ses, traj, res,
                         action_along(ses.chart.model, ses.chart.x, traj)));
      std::cout << dir << "/trajectory.csv\n" << dir << "/summary.json\n";
    }

    if (*cmd_stable) {
      const std::string dir = make_out_dir(ses, root, "stable");
      LoopField zp(ses.chart.dec.components(), ses.chart.dec.modes());
      if (!stable_z.empty()) {
        zp = read_field_arg(ses, stable_z);
      } else {
        zp = ses.chart.dec.eigenfield(ses.chart.dec.morse_index());
        zp *= 0.5 * ses.ledger.plus_ball_radius() / norm(zp, NormKind::w12());
      }
      GraphPoint gp = solve_stable(ses.chart, ses.ledger, zp, copts);
      io::write_text(dir + "/graph_point.json",
                     io::graph_point_json(ses, gp, -1));
      std::cout << dir << "/graph_point.json\n";
    }

    if (*cmd_unstable) {
      const std::string dir = make_out_dir(ses, root, "unstable");
      LoopField zm(ses.chart.dec.components(), ses.chart.dec.modes());
      if (!unstable_z.empty()) {
        zm = read_field_arg(ses, unstable_z);
      } else {
        zm = ses.chart.dec.eigenfield(0);
        zm *= 0.5 * ses.ledger.rho / norm(zm, NormKind::w12());
      }
      UnstablePoint up = solve_unstable(ses.chart, ses.ledger, zm, copts);
      GraphPoint gp;
      gp.T = 0.0;
      gp.gamma = up.endpoint;
      gp.z_plus = LoopField(ses.chart.dec.components(), ses.chart.dec.modes());
      gp.value = up.endpoint;
      gp.graph_part = project(ses.chart.dec, up.endpoint, Part::Minus);
      gp.trajectory = up.trajectory;
      gp.iters = up.iters;
      gp.ratios = up.ratios;
      gp.fixed_point_residual = up.fixed_point_residual;
      io::write_text(dir + "/graph_point.json",
                     io::graph_point_json(ses, gp, -1));
      io::write_text(dir + "/trajectory.csv",
                     io::trajectory_csv(up.trajectory));
      std::cout << dir << "/graph_point.json\n";
    }

    if (*cmd_sphere) {
      const std::string dir = make_out_dir(ses, root, "sphere");
      if (sphere_eps > 0.0 && sphere_eps != ses.ledger.eps) {
        Session tweaked = ses;  // re-sample at the requested level
        tweaked.ledger.eps = sphere_eps;
        tweaked.sphere = descending_sphere(ses.chart, tweaked.ledger, sphere_eps,
                                           cfg.sweep.n_sphere,
                                           cfg.tol.action_tol, copts);
        io::write_text(dir + "/sphere.json", io::sphere_json(tweaked));
      } else {
        io::write_text(dir + "/sphere.json", io::sphere_json(ses));
      }
      std::cout << dir << "/sphere.json\n";
    }

    if (*cmd_mixed) {
      const std::string dir = make_out_dir(ses, root, "mixed");
      if (mixed_gamma < 0 || mixed_gamma >= static_cast<int>(ses.sphere.size()))
        throw ConfigError("gamma-id out of range");
      LoopField zp(ses.chart.dec.components(), ses.chart.dec.modes());
      if (!mixed_z.empty()) zp = read_field_arg(ses, mixed_z);
      GraphPoint gp = solve_mixed(ses.chart, ses.ledger, mixed_T,
                                  ses.sphere[mixed_gamma].gamma, zp, copts);
      io::write_text(dir + "/graph_point.json",
                     io::graph_point_json(ses, gp, mixed_gamma));
      std::cout << dir << "/graph_point.json\n";
    }

    if (*cmd_lambda) {
      const std::string dir = make_out_dir(ses, root, "lambda-sweep");
      SweepResult res = sweep_convergence(ses.chart, ses.ledger, ses.sphere,
                                          ses.sweep_spec(), copts, jobs);
      io::write_text(dir + "/sweep.csv", io::sweep_csv(res));
      io::write_text(dir + "/summary.json",
                     io::sweep_summary_json(ses, res, "lambda"));
      io::write_text(dir + "/decay.dat", io::decay_file(res));
      std::cout << dir << "/sweep.csv\n" << dir << "/summary.json\n";
      if (!res.all_rows_ok) return 3;
    }

    if (*cmd_c1) {
      const std::string dir = make_out_dir(ses, root, "c1-sweep");
      SweepResult res = sweep_c1(ses.chart, ses.ledger, ses.sphere,
                                 ses.sweep_spec(), copts, jobs);
      io::write_text(dir + "/sweep.csv", io::sweep_csv(res));
      io::write_text(dir + "/summary.json",
                     io::sweep_summary_json(ses, res, "c1"));
      std::cout << dir << "/sweep.csv\n" << dir << "/summary.json\n";
      if (!res.all_rows_ok) return 3;
    }

    if (*cmd_roundtrip) {
      const std::string dir = make_out_dir(ses, root, "roundtrip");
      RoundtripReport rep =
          roundtrip_audit(ses.chart, ses.ledger, ses.sphere, ses.sweep_spec(),
                          copts, ses.flow_options(), jobs);
      io::write_text(dir + "/roundtrip.csv", io::roundtrip_csv(rep));
      io::write_text(dir + "/summary.json", io::roundtrip_json(ses, rep));
      std::cout << dir << "/roundtrip.csv\n" << dir << "/summary.json\n";
      if (!rep.all_rows_ok) return 3;
    }

    if (*cmd_smoothing) {
      const std::string dir = make_out_dir(ses, root, "smoothing-audit");
      SmoothingReport rep =
          audit_smoothing(ses.chart.dec, log_spaced(smin, smax, scount), 0.75,
                          ses.ledger.mu, Part::Plus);
      io::write_text(dir + "/audit.csv", io::smoothing_csv(rep));
      io::write_text(dir + "/summary.json", io::smoothing_json(ses, rep));
      std::cout << dir << "/audit.csv\n" << dir << "/summary.json\n";
    }

    if (*cmd_ledger) {
      const std::string dir = make_out_dir(ses, root, "validate-ledger");
      io::write_text(dir + "/ledger.json", io::ledger_json(ses));
      std::cout << dir << "/ledger.json\n";
      if (!ses.report.valid) return 2;
    }

    if (*cmd_lipschitz) {
      const std::string dir = make_out_dir(ses, root, "lipschitz-audit");
      LipschitzReport rep = lipschitz_in_T_audit(
          ses.chart, ses.ledger, ses.sphere, ses.ledger.T0,
          {0.1, 0.05, 0.025}, ses.sweep_spec(), copts);
      io::write_text(dir + "/audit.csv", io::lipschitz_csv(rep));
      io::write_text(dir + "/summary.json", io::lipschitz_json(ses, rep));
      std::cout << dir << "/audit.csv\n" << dir << "/summary.json\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
