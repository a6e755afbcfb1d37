#include "loopflow/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "loopflow/semigroup.hpp"

namespace loopflow {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key '" + it.key() + "' in " + where);
}

double get_num(const json& obj, const char* key, double dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const char* key, int dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj[key].is_number_integer())
    throw ConfigError(std::string(key) + " must be an integer");
  return obj[key].get<int>();
}

TimeGridSpec parse_grid(const json& g, const TimeGridSpec& dflt,
                        const std::string& where) {
  TimeGridSpec spec = dflt;
  if (g.is_null()) return spec;
  reject_unknown(g, {"kind", "dt", "ratio", "floor"}, where);
  if (g.contains("kind")) {
    const std::string kind = g["kind"].get<std::string>();
    if (kind == "uniform")
      spec.kind = TimeGridSpec::Kind::Uniform;
    else if (kind == "graded")
      spec.kind = TimeGridSpec::Kind::Graded;
    else
      throw ConfigError("grid kind must be 'uniform' or 'graded'");
  }
  spec.dt = get_num(g, "dt", spec.dt);
  spec.ratio = get_num(g, "ratio", spec.ratio);
  spec.floor = get_num(g, "floor", spec.floor);
  return spec;
}

}  // namespace

RunConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  reject_unknown(j,
                 {"model", "truncation_J", "guess", "flow_grid", "solver_grid",
                  "tail", "ledger", "tolerances", "sweep", "output_dir", "seed",
                  "jobs"},
                 "top level");

  if (!j.contains("model")) throw ConfigError("config needs a model block");
  const json& jm = j["model"];
  reject_unknown(jm, {"dim", "terms"}, "model");
  cfg.dim = get_int(jm, "dim", 1);
  if (!jm.contains("terms") || !jm["terms"].is_array())
    throw ConfigError("model.terms must be an array");
  for (const json& jt : jm["terms"]) {
    reject_unknown(jt, {"amp", "wavevector", "time_mode", "phase", "kind"},
                   "model.terms[]");
    PotentialTerm t;
    t.amplitude = get_num(jt, "amp", 0.0);
    if (!jt.contains("wavevector") || !jt["wavevector"].is_array())
      throw ConfigError("potential term needs a wavevector array");
    t.wavevector.resize(jt["wavevector"].size());
    for (std::size_t i = 0; i < jt["wavevector"].size(); ++i)
      t.wavevector[static_cast<int>(i)] = jt["wavevector"][i].get<int>();
    t.time_mode = get_int(jt, "time_mode", 0);
    t.phase = get_num(jt, "phase", 0.0);
    const std::string kind = jt.value("kind", "cos");
    if (kind == "cos")
      t.kind = PotentialTerm::Kind::Cos;
    else if (kind == "sin")
      t.kind = PotentialTerm::Kind::Sin;
    else
      throw ConfigError("potential term kind must be 'cos' or 'sin'");
    cfg.terms.push_back(std::move(t));
  }

  cfg.truncation_J = get_int(j, "truncation_J", 32);
  if (cfg.truncation_J < 1) throw ConfigError("truncation_J must be >= 1");

  if (j.contains("guess")) {
    if (!j["guess"].is_array() || j["guess"].size() != static_cast<std::size_t>(cfg.dim))
      throw ConfigError("guess must be an array of length dim");
    cfg.guess.resize(cfg.dim);
    for (int i = 0; i < cfg.dim; ++i) cfg.guess[i] = j["guess"][i].get<double>();
  } else {
    cfg.guess = Eigen::VectorXd::Zero(cfg.dim);
  }

  cfg.flow_grid = parse_grid(j.value("flow_grid", json()), cfg.flow_grid, "flow_grid");
  cfg.solver_grid =
      parse_grid(j.value("solver_grid", json()), cfg.solver_grid, "solver_grid");
  if (j.contains("tail")) {
    const json& jt = j["tail"];
    reject_unknown(jt, {"start", "ratio", "max_step", "unstable_pad", "horizon_cap"},
                   "tail");
    cfg.tail_start = get_num(jt, "start", cfg.tail_start);
    cfg.tail_ratio = get_num(jt, "ratio", cfg.tail_ratio);
    cfg.tail_max_step = get_num(jt, "max_step", cfg.tail_max_step);
    cfg.unstable_pad = get_num(jt, "unstable_pad", cfg.unstable_pad);
    cfg.horizon_cap = get_num(jt, "horizon_cap", cfg.horizon_cap);
  }

  if (j.contains("ledger")) {
    const json& jl = j["ledger"];
    reject_unknown(jl,
                   {"mode", "c", "rho0", "rho", "r", "eps", "mu", "mu_fraction",
                    "kappa", "kappa_star", "kappa_samples"},
                   "ledger");
    cfg.ledger.mode = jl.value("mode", cfg.ledger.mode);
    if (cfg.ledger.mode != "empirical" && cfg.ledger.mode != "theoretical")
      throw ConfigError("ledger.mode must be 'empirical' or 'theoretical'");
    cfg.ledger.c = get_num(jl, "c", cfg.ledger.c);
    cfg.ledger.rho0 = get_num(jl, "rho0", cfg.ledger.rho0);
    cfg.ledger.rho = get_num(jl, "rho", cfg.ledger.rho);
    cfg.ledger.r = get_num(jl, "r", cfg.ledger.r);
    cfg.ledger.eps = get_num(jl, "eps", cfg.ledger.eps);
    cfg.ledger.mu = get_num(jl, "mu", cfg.ledger.mu);
    cfg.ledger.mu_fraction = get_num(jl, "mu_fraction", cfg.ledger.mu_fraction);
    cfg.ledger.kappa = get_num(jl, "kappa", cfg.ledger.kappa);
    cfg.ledger.kappa_star = get_num(jl, "kappa_star", cfg.ledger.kappa_star);
    cfg.ledger.kappa_samples = get_int(jl, "kappa_samples", cfg.ledger.kappa_samples);
  }

  if (j.contains("tolerances")) {
    const json& jt = j["tolerances"];
    reject_unknown(jt,
                   {"fp_tol", "fiber_tol", "action_tol", "degeneracy_tol",
                    "rate_tol_fraction", "newton_tol", "step_tol", "stall_ratio"},
                   "tolerances");
    cfg.tol.fp_tol = get_num(jt, "fp_tol", cfg.tol.fp_tol);
    cfg.tol.fiber_tol = get_num(jt, "fiber_tol", cfg.tol.fiber_tol);
    cfg.tol.action_tol = get_num(jt, "action_tol", cfg.tol.action_tol);
    cfg.tol.degeneracy_tol = get_num(jt, "degeneracy_tol", cfg.tol.degeneracy_tol);
    cfg.tol.rate_tol_fraction =
        get_num(jt, "rate_tol_fraction", cfg.tol.rate_tol_fraction);
    cfg.tol.newton_tol = get_num(jt, "newton_tol", cfg.tol.newton_tol);
    cfg.tol.step_tol = get_num(jt, "step_tol", cfg.tol.step_tol);
    cfg.tol.stall_ratio = get_num(jt, "stall_ratio", cfg.tol.stall_ratio);
  }

  if (j.contains("sweep")) {
    const json& js = j["sweep"];
    reject_unknown(js,
                   {"T_offsets", "gamma_count", "zplus_count",
                    "zplus_radius_fraction", "v_count", "n_sphere"},
                   "sweep");
    if (js.contains("T_offsets")) {
      cfg.sweep.T_offsets.clear();
      for (const json& v : js["T_offsets"])
        cfg.sweep.T_offsets.push_back(v.get<double>());
      if (cfg.sweep.T_offsets.empty())
        throw ConfigError("sweep.T_offsets must be nonempty");
    }
    cfg.sweep.gamma_count = get_int(js, "gamma_count", cfg.sweep.gamma_count);
    cfg.sweep.zplus_count = get_int(js, "zplus_count", cfg.sweep.zplus_count);
    cfg.sweep.zplus_radius_fraction =
        get_num(js, "zplus_radius_fraction", cfg.sweep.zplus_radius_fraction);
    if (cfg.sweep.zplus_radius_fraction > 1.0)
      throw ConfigError("sweep.zplus_radius_fraction must be <= 1");
    cfg.sweep.v_count = get_int(js, "v_count", cfg.sweep.v_count);
    cfg.sweep.n_sphere = get_int(js, "n_sphere", cfg.sweep.n_sphere);
  }

  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.jobs = get_int(j, "jobs", cfg.jobs);

  cfg.canonical_json = j.dump(2);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : cfg.canonical_json) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ContractionOptions Session::contraction_options() const {
  ContractionOptions o;
  o.fp_tol = cfg.tol.fp_tol;
  o.fiber_tol = cfg.tol.fiber_tol;
  o.stall_ratio = cfg.tol.stall_ratio;
  o.grid = cfg.solver_grid;
  o.tail_start = cfg.tail_start;
  o.tail_ratio = cfg.tail_ratio;
  o.tail_max_step = cfg.tail_max_step;
  o.horizon_cap = cfg.horizon_cap;
  o.unstable_pad = cfg.unstable_pad;
  return o;
}

FlowOptions Session::flow_options() const {
  FlowOptions o;
  o.grid = cfg.flow_grid;
  o.rho0 = ledger.rho0;
  o.step_tol = cfg.tol.step_tol;
  return o;
}

SweepSpec Session::sweep_spec() const {
  SweepSpec s;
  s.T_list.clear();
  for (double off : cfg.sweep.T_offsets) s.T_list.push_back(ledger.T0 + off);
  s.gamma_count = cfg.sweep.gamma_count;
  s.zplus_count = cfg.sweep.zplus_count;
  s.zplus_radius_fraction = cfg.sweep.zplus_radius_fraction;
  s.v_count = cfg.sweep.v_count;
  s.seed = cfg.seed;
  return s;
}

Session build_session(const RunConfig& cfg) {
  Session ses;
  ses.cfg = cfg;
  ses.hash = config_hash(cfg);

  TorusModel model(cfg.dim, cfg.terms);
  const LoopField guess = LoopField::constant(cfg.guess, cfg.truncation_J);
  NewtonOptions newton;
  newton.tol = cfg.tol.newton_tol;
  ses.chart = make_chart(model, guess, newton, cfg.ledger.mu_fraction,
                         cfg.tol.degeneracy_tol);

  ConstantsLedger& led = ses.ledger;
  led.mode = cfg.ledger.mode == "theoretical" ? ConstantsLedger::Mode::Theoretical
                                              : ConstantsLedger::Mode::Empirical;
  led.rho0 = cfg.ledger.rho0;
  led.rho = cfg.ledger.rho;
  led.r = cfg.ledger.r;
  led.eps = cfg.ledger.eps;
  if (cfg.ledger.mu > 0.0) {
    if (cfg.ledger.mu >= ses.chart.dec.gap())
      throw ConfigError("ledger.mu must lie inside the spectral gap");
    led.mu = cfg.ledger.mu;
  } else {
    led.mu = ses.chart.dec.mu();
  }

  if (cfg.ledger.kappa >= 0.0 && cfg.ledger.kappa_star >= 0.0) {
    led.kappa_rho = cfg.ledger.kappa;
    led.kappa_star = cfg.ledger.kappa_star;
  } else {
    const KappaEstimate est = estimate_kappa(ses.chart.model, ses.chart.x,
                                             led.rho, cfg.ledger.kappa_samples,
                                             cfg.seed);
    led.kappa_rho = cfg.ledger.kappa >= 0.0 ? cfg.ledger.kappa : est.kappa;
    led.kappa_star =
        cfg.ledger.kappa_star >= 0.0 ? cfg.ledger.kappa_star : est.kappa_star;
  }

  if (cfg.ledger.c > 0.0) {
    led.c = cfg.ledger.c;
  } else {
    // Measured semigroup constant: plus-part smoothing on a log grid and the
    // minus-part backward decay, floored at 1.
    const SmoothingReport plus = audit_smoothing(
        ses.chart.dec, log_spaced(1e-3, 10.0, 40), 0.75, led.mu, Part::Plus);
    double c_minus = 0.0;
    for (double s : {-4.0, -2.0, -1.0, -0.5, -0.25, -0.1}) {
      const double v = std::exp(-s * led.mu) *
                       operator_norm(ses.chart.dec, s, Part::Minus,
                                     NormKind::l1(), NormKind::w12());
      c_minus = std::max(c_minus, v);
    }
    led.c = std::max({1.0, plus.c_hat, c_minus});
  }

  ses.sphere = descending_sphere(ses.chart, led, led.eps, cfg.sweep.n_sphere,
                                 cfg.tol.action_tol, ses.contraction_options());
  led.T1 = ConstantsLedger::time_to_fiber(led.r, led.rho0, led.mu);
  led.T2 = find_T2(ses.chart, led, ses.sphere);
  led.T0 = std::max(led.T1, led.T2);

  ses.report = validate_ledger_with_probe(ses.chart, led, ses.sphere,
                                          ses.contraction_options());
  return ses;
}

LoopField parse_field_text(const std::string& json_text, int dim, int modes) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field literal is not valid JSON: ") + e.what());
  }
  reject_unknown(j, {"constant", "harmonics"}, "field literal");
  LoopField f(dim, modes);
  if (j.contains("constant")) {
    if (!j["constant"].is_array() || j["constant"].size() != static_cast<std::size_t>(dim))
      throw ConfigError("field constant must be an array of length dim");
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = j["constant"][i].get<double>();
    f = LoopField::constant(v, modes);
  }
  if (j.contains("harmonics")) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (const json& jh : j["harmonics"]) {
      reject_unknown(jh, {"j", "m", "cos", "sin"}, "field harmonics[]");
      const int jj = jh.at("j").get<int>();
      const int m = jh.value("m", 0);
      if (jj < 0 || jj > modes || m < 0 || m >= dim)
        throw ConfigError("harmonic index out of range");
      const double c = jh.value("cos", 0.0);
      const double s = jh.value("sin", 0.0);
      Eigen::VectorXd& a = f.real_coeffs();
      const int N = 2 * modes + 1;
      if (jj == 0) {
        a[m * N] += c;
      } else {
        a[m * N + 2 * jj - 1] += c * inv_sqrt2;
        a[m * N + 2 * jj] += s * inv_sqrt2;
      }
    }
  }
  return f;
}

}  // namespace loopflow
