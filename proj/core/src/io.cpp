#include "loopflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

namespace loopflow::io {

namespace {

using nlohmann::json;

json field_coeffs(const LoopField& f) {
  json arr = json::array();
  for (int i = 0; i < f.dim(); ++i) arr.push_back(f.real_coeffs()[i]);
  return arr;
}

json stamp(const Session& ses) {
  json j;
  j["config_hash"] = ses.hash;
  j["ledger_valid"] = ses.report.valid;
  j["ledger_mode"] =
      ses.ledger.mode == ConstantsLedger::Mode::Theoretical ? "theoretical"
                                                            : "empirical";
  return j;
}

json ratios_json(const std::vector<double>& ratios) {
  json arr = json::array();
  for (double r : ratios) arr.push_back(r);
  return arr;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void ensure_dir(const std::string& path) {
  std::filesystem::create_directories(path);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

std::string spectrum_json(const Session& ses) {
  json j = stamp(ses);
  j["critical_loop"] = {{"action", ses.chart.x.action},
                        {"residual", ses.chart.x.residual},
                        {"coeffs", field_coeffs(ses.chart.x.x)}};
  json ev = json::array();
  for (int i = 0; i < ses.chart.dec.dim(); ++i)
    ev.push_back(ses.chart.dec.eigenvalues()[i]);
  j["eigenvalues"] = ev;
  j["morse_index"] = ses.chart.dec.morse_index();
  j["gap"] = ses.chart.dec.gap();
  j["mu"] = ses.ledger.mu;
  j["truncation_J"] = ses.chart.dec.modes();
  return j.dump(2) + "\n";
}

std::string ledger_json(const Session& ses) {
  json j = stamp(ses);
  const ConstantsLedger& l = ses.ledger;
  j["ledger"] = {{"c", l.c},       {"rho0", l.rho0},
                 {"rho", l.rho},   {"r", l.r},
                 {"eps", l.eps},   {"mu", l.mu},
                 {"kappa_star", l.kappa_star}, {"kappa_rho", l.kappa_rho},
                 {"T1", l.T1},     {"T2", l.T2},
                 {"T0", l.T0}};
  json checks = json::array();
  for (const LedgerCheck& c : ses.report.checks)
    checks.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs},
                      {"pass", c.pass}});
  j["checks"] = checks;
  j["theoretical_valid"] = ses.report.theoretical_valid;
  j["geometry_valid"] = ses.report.geometry_valid;
  j["probe_ratio"] = ses.report.probe_ratio;
  j["valid"] = ses.report.valid;
  return j.dump(2) + "\n";
}

std::string sphere_json(const Session& ses) {
  json j = stamp(ses);
  j["eps"] = ses.ledger.eps;
  json pts = json::array();
  for (std::size_t i = 0; i < ses.sphere.size(); ++i) {
    const SpherePoint& sp = ses.sphere[i];
    json dir = json::array();
    for (int d = 0; d < ses.chart.dec.morse_index(); ++d)
      dir.push_back(sp.direction[d]);
    pts.push_back({{"gamma_id", static_cast<int>(i)},
                   {"direction", dir},
                   {"delta", sp.delta},
                   {"action", sp.action_value},
                   {"coeffs", field_coeffs(sp.gamma)}});
  }
  j["points"] = pts;
  return j.dump(2) + "\n";
}

std::string graph_point_json(const Session& ses, const GraphPoint& gp,
                             int gamma_id) {
  json j = stamp(ses);
  j["T"] = std::isinf(gp.T) ? json("inf") : json(gp.T);
  j["gamma_id"] = gamma_id;
  j["z_plus_coeffs"] = field_coeffs(gp.z_plus);
  j["G_coeffs"] = field_coeffs(gp.graph_part);
  j["value_coeffs"] = field_coeffs(gp.value);
  j["iters"] = gp.iters;
  j["ratios"] = ratios_json(gp.ratios);
  j["endpoint_residuals"] = {{"fiber", gp.endpoint_fiber_residual},
                             {"distance", gp.endpoint_distance},
                             {"within_r", gp.endpoint_within_r}};
  j["fixed_point_residual"] = gp.fixed_point_residual;
  j["below_T0"] = gp.below_T0;
  return j.dump(2) + "\n";
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out;
  std::vector<std::string> head{"s"};
  if (!traj.states.empty()) {
    const LoopField& f = traj.states.front();
    for (int m = 0; m < f.components(); ++m) {
      head.push_back("m" + std::to_string(m) + "_a0");
      for (int j = 1; j <= f.modes(); ++j) {
        head.push_back("m" + std::to_string(m) + "_c" + std::to_string(j));
        head.push_back("m" + std::to_string(m) + "_s" + std::to_string(j));
      }
    }
  }
  out += csv_line(head);
  for (int i = 0; i < traj.size(); ++i) {
    std::vector<std::string> cells{format_double(traj.grid[i])};
    const Eigen::VectorXd& a = traj.states[i].real_coeffs();
    for (int k = 0; k < a.size(); ++k) cells.push_back(format_double(a[k]));
    out += csv_line(cells);
  }
  return out;
}

std::string trajectory_summary_json(const Session& ses, const Trajectory& traj,
                                    double representation_residual,
                                    const std::vector<double>& actions) {
  json j = stamp(ses);
  j["T"] = traj.end_time();
  j["nodes"] = traj.size();
  j["left_chart"] = traj.meta.left_chart;
  j["method"] = traj.meta.method;
  json norms = json::array();
  for (const LoopField& st : traj.states)
    norms.push_back(norm(st, NormKind::w12()));
  j["w12_norms"] = norms;
  json acts = json::array();
  for (double a : actions) acts.push_back(a);
  j["actions"] = acts;
  j["representation_residual"] = representation_residual;
  return j.dump(2) + "\n";
}

std::string sweep_csv(const SweepResult& res) {
  std::string out = csv_line({"T", "gamma_id", "zplus_id", "v_id", "dist_w12",
                              "c1_dist_l2", "xnorm_ratio", "ynorm_dev",
                              "fiber_residual", "endpoint_distance",
                              "max_ratio", "iters", "status"});
  for (const SweepRow& r : res.rows)
    out += csv_line({format_double(r.T), std::to_string(r.gamma_id),
                     std::to_string(r.zplus_id), std::to_string(r.v_id),
                     format_double(r.dist_w12), format_double(r.c1_dist_l2),
                     format_double(r.xnorm_ratio), format_double(r.ynorm_dev),
                     format_double(r.fiber_residual),
                     format_double(r.endpoint_distance),
                     format_double(r.max_ratio), std::to_string(r.iters),
                     r.status});
  return out;
}

std::string sweep_summary_json(const Session& ses, const SweepResult& res,
                               const std::string& kind) {
  json j = stamp(ses);
  j["kind"] = kind;
  j["fitted_rate"] = res.fitted_rate;
  j["bound_rate"] = res.bound_rate;
  json gr = json::array();
  for (double g : res.group_rates) gr.push_back(g);
  j["group_rates"] = gr;
  const double rate_tol = ses.cfg.tol.rate_tol_fraction * ses.ledger.mu;
  j["rate_tol"] = rate_tol;
  j["rate_pass"] = res.fitted_rate >= res.bound_rate - rate_tol;
  j["all_rows_ok"] = res.all_rows_ok;
  j["rows"] = static_cast<int>(res.rows.size());
  return j.dump(2) + "\n";
}

std::string decay_file(const SweepResult& res) {
  // gnuplot-friendly: pooled mean log-distance per T
  std::map<double, std::pair<double, int>> acc;
  for (const SweepRow& r : res.rows)
    if (r.status == "ok" && r.dist_w12 > 0) {
      acc[r.T].first += std::log(r.dist_w12);
      acc[r.T].second += 1;
    }
  std::string out;
  for (const auto& [T, p] : acc)
    out += format_double(T) + " " + format_double(std::exp(p.first / p.second)) +
           "\n";
  return out;
}

std::string roundtrip_csv(const RoundtripReport& rep) {
  std::string out = csv_line({"T", "gamma_id", "zplus_id", "fiber_residual",
                              "endpoint_distance", "oracle_fiber_residual",
                              "oracle_disagreement", "within_r", "status"});
  for (const RoundtripRow& r : rep.rows)
    out += csv_line({format_double(r.T), std::to_string(r.gamma_id),
                     std::to_string(r.zplus_id), format_double(r.fiber_residual),
                     format_double(r.endpoint_distance),
                     format_double(r.oracle_fiber_residual),
                     format_double(r.oracle_disagreement),
                     r.within_r ? "1" : "0", r.status});
  return out;
}

std::string roundtrip_json(const Session& ses, const RoundtripReport& rep) {
  json j = stamp(ses);
  j["max_fiber_residual"] = rep.max_fiber_residual;
  j["max_oracle_disagreement"] = rep.max_oracle_disagreement;
  j["all_within_r"] = rep.all_within_r;
  j["all_rows_ok"] = rep.all_rows_ok;
  j["rows"] = static_cast<int>(rep.rows.size());
  return j.dump(2) + "\n";
}

std::string smoothing_csv(const SmoothingReport& rep) {
  std::string out = csv_line({"s", "opnorm", "weighted_value"});
  for (const SmoothingRow& r : rep.rows)
    out += csv_line({format_double(r.s), format_double(r.opnorm),
                     format_double(r.weighted)});
  return out;
}

std::string smoothing_json(const Session& ses, const SmoothingReport& rep) {
  json j = stamp(ses);
  j["c_hat"] = rep.c_hat;
  j["refined_c_hat"] = rep.refined_c_hat;
  j["refinement_stable"] = rep.refinement_stable;
  return j.dump(2) + "\n";
}

std::string lipschitz_csv(const LipschitzReport& rep) {
  std::string out = csv_line({"T", "tau", "gamma_id", "zplus_id", "quotient"});
  for (const LipschitzRow& r : rep.rows)
    out += csv_line({format_double(r.T), format_double(r.tau),
                     std::to_string(r.gamma_id), std::to_string(r.zplus_id),
                     format_double(r.quotient)});
  return out;
}

std::string lipschitz_json(const Session& ses, const LipschitzReport& rep) {
  json j = stamp(ses);
  j["max_quotient"] = rep.max_quotient;
  j["quotients_stabilize"] = rep.quotients_stabilize;
  j["rows"] = static_cast<int>(rep.rows.size());
  return j.dump(2) + "\n";
}

}  // namespace loopflow::io
