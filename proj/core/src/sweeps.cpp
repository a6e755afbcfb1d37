#include "loopflow/sweeps.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace loopflow {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

LoopField random_plus_field(const Chart& chart, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = chart.dec.components();
  const int J = chart.dec.modes();
  LoopField f(n, J);
  const int N = 2 * J + 1;
  Eigen::VectorXd& a = f.real_coeffs();
  for (int m = 0; m < n; ++m) {
    a[m * N] = normal(gen);
    for (int j = 1; j <= J; ++j) {
      const double decay = 1.0 / (1.0 + kTwoPi * j * kTwoPi * j);
      a[m * N + 2 * j - 1] = decay * normal(gen);
      a[m * N + 2 * j] = decay * normal(gen);
    }
  }
  return project(chart.dec, f, Part::Plus);
}

// Deterministic row-parallel map with fixed output slots.
template <typename Fn>
void parallel_rows(int count, int jobs, const Fn& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<LoopField> sample_zplus(const Chart& chart,
                                    const ConstantsLedger& ledger, int count,
                                    double radius_fraction, std::uint64_t seed) {
  std::vector<LoopField> out;
  out.push_back(LoopField(chart.dec.components(), chart.dec.modes()));  // id 0
  std::mt19937_64 gen(seed ^ 0x5b3cc61df1d52b6dULL);
  const double radius = radius_fraction * ledger.plus_ball_radius();
  for (int i = 0; i < count; ++i) {
    LoopField f = random_plus_field(chart, gen);
    const double w = norm(f, NormKind::w12());
    if (w > 0) f *= radius / w;
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<LoopField> sample_directions(const Chart& chart, int count,
                                         std::uint64_t seed) {
  std::vector<LoopField> out;
  if (count <= 0) return out;
  // id 0: lowest plus eigenvector
  out.push_back(chart.dec.eigenfield(chart.dec.morse_index()));
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int i = 1; i < count; ++i) {
    LoopField f = random_plus_field(chart, gen);
    const double l2 = norm(f, NormKind::l2());
    if (l2 > 0) f *= 1.0 / l2;
    out.push_back(std::move(f));
  }
  return out;
}

double pooled_log_slope(
    const std::vector<std::vector<std::pair<double, double>>>& groups) {
  // Common slope with per-group intercepts:
  //   slope = sum_g sum_i (T_i - Tbar_g)(y_i - ybar_g) / sum (T_i - Tbar_g)^2
  double num = 0.0, den = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    double tbar = 0.0, ybar = 0.0;
    for (const auto& [t, y] : g) {
      tbar += t;
      ybar += y;
    }
    tbar /= g.size();
    ybar /= g.size();
    for (const auto& [t, y] : g) {
      num += (t - tbar) * (y - ybar);
      den += (t - tbar) * (t - tbar);
    }
  }
  return den > 0 ? num / den : 0.0;
}

SweepResult sweep_convergence(const Chart& chart, const ConstantsLedger& ledger,
                              const std::vector<SpherePoint>& sphere,
                              const SweepSpec& spec,
                              const ContractionOptions& opts, int jobs) {
  SweepResult res;
  res.bound_rate = ledger.mu / 4.0;
  const int n_gamma = std::min<int>(spec.gamma_count, sphere.size());
  const std::vector<LoopField> zplus =
      sample_zplus(chart, ledger, spec.zplus_count, spec.zplus_radius_fraction,
                   spec.seed);

  // Infinite-horizon graph points, shared across T and gamma.
  std::vector<GraphPoint> stable(zplus.size());
  parallel_rows(static_cast<int>(zplus.size()), jobs, [&](int i) {
    stable[i] = solve_stable(chart, ledger, zplus[i], opts);
  });

  struct Key {
    double T;
    int g, z;
  };
  std::vector<Key> keys;
  for (double T : spec.T_list)
    for (int g = 0; g < n_gamma; ++g)
      for (int z = 0; z < static_cast<int>(zplus.size()); ++z)
        keys.push_back({T, g, z});

  res.rows.resize(keys.size());
  parallel_rows(static_cast<int>(keys.size()), jobs, [&](int i) {
    const Key& k = keys[i];
    SweepRow row;
    row.T = k.T;
    row.gamma_id = k.g;
    row.zplus_id = k.z;
    try {
      GraphPoint gp =
          solve_mixed(chart, ledger, k.T, sphere[k.g].gamma, zplus[k.z], opts);
      row.dist_w12 = norm(gp.value - stable[k.z].value, NormKind::w12());
      row.fiber_residual = gp.endpoint_fiber_residual;
      row.endpoint_distance = gp.endpoint_distance;
      row.iters = gp.iters;
      for (double r : gp.ratios) row.max_ratio = std::max(row.max_ratio, r);
    } catch (const Error& e) {
      row.status = e.what();
    }
    res.rows[i] = row;
  });

  std::vector<std::vector<std::pair<double, double>>> groups;
  for (int g = 0; g < n_gamma; ++g)
    for (int z = 0; z < static_cast<int>(zplus.size()); ++z) {
      std::vector<std::pair<double, double>> pts;
      for (const SweepRow& row : res.rows)
        if (row.gamma_id == g && row.zplus_id == z && row.status == "ok" &&
            row.dist_w12 > 0)
          pts.emplace_back(row.T, std::log(row.dist_w12));
      if (pts.size() >= 2) {
        std::vector<std::vector<std::pair<double, double>>> one{pts};
        res.group_rates.push_back(-pooled_log_slope(one));
      }
      groups.push_back(std::move(pts));
    }
  res.fitted_rate = -pooled_log_slope(groups);
  for (const SweepRow& row : res.rows)
    if (row.status != "ok") res.all_rows_ok = false;
  return res;
}

SweepResult sweep_c1(const Chart& chart, const ConstantsLedger& ledger,
                     const std::vector<SpherePoint>& sphere,
                     const SweepSpec& spec, const ContractionOptions& opts,
                     int jobs) {
  SweepResult res;
  res.bound_rate = ledger.mu / 4.0;
  const int n_gamma = std::min<int>(spec.gamma_count, sphere.size());
  const std::vector<LoopField> zplus =
      sample_zplus(chart, ledger, spec.zplus_count, spec.zplus_radius_fraction,
                   spec.seed);
  const std::vector<LoopField> vs =
      sample_directions(chart, spec.v_count, spec.seed + 1);

  std::vector<GraphPoint> stable(zplus.size());
  parallel_rows(static_cast<int>(zplus.size()), jobs, [&](int i) {
    stable[i] = solve_stable(chart, ledger, zplus[i], opts);
  });
  // Y_v(0) per (z+, v), shared across T and gamma.
  std::vector<std::vector<LoopField>> yv(zplus.size());
  for (std::size_t z = 0; z < zplus.size(); ++z) yv[z].resize(vs.size());
  {
    std::vector<std::pair<int, int>> zk;
    for (std::size_t z = 0; z < zplus.size(); ++z)
      for (std::size_t v = 0; v < vs.size(); ++v)
        zk.emplace_back(static_cast<int>(z), static_cast<int>(v));
    parallel_rows(static_cast<int>(zk.size()), jobs, [&](int i) {
      const auto [z, v] = zk[i];
      yv[z][v] = linearized_graph(chart, ledger, stable[z], vs[v], opts);
    });
  }

  struct Key {
    double T;
    int g, z, v;
  };
  std::vector<Key> keys;
  for (double T : spec.T_list)
    for (int g = 0; g < n_gamma; ++g)
      for (int z = 0; z < static_cast<int>(zplus.size()); ++z)
        for (int v = 0; v < static_cast<int>(vs.size()); ++v)
          keys.push_back({T, g, z, v});

  res.rows.resize(keys.size());
  // Mixed base solves shared across v.
  struct BaseKey {
    double T;
    int g, z;
  };
  std::vector<BaseKey> base_keys;
  for (double T : spec.T_list)
    for (int g = 0; g < n_gamma; ++g)
      for (int z = 0; z < static_cast<int>(zplus.size()); ++z)
        base_keys.push_back({T, g, z});
  std::vector<GraphPoint> bases(base_keys.size());
  std::vector<std::string> base_status(base_keys.size(), "ok");
  parallel_rows(static_cast<int>(base_keys.size()), jobs, [&](int i) {
    const BaseKey& k = base_keys[i];
    try {
      bases[i] =
          solve_mixed(chart, ledger, k.T, sphere[k.g].gamma, zplus[k.z], opts);
    } catch (const Error& e) {
      base_status[i] = e.what();
    }
  });
  auto base_index = [&](double T, int g, int z) {
    for (std::size_t i = 0; i < base_keys.size(); ++i)
      if (base_keys[i].T == T && base_keys[i].g == g && base_keys[i].z == z)
        return static_cast<int>(i);
    return -1;
  };

  parallel_rows(static_cast<int>(keys.size()), jobs, [&](int i) {
    const Key& k = keys[i];
    SweepRow row;
    row.T = k.T;
    row.gamma_id = k.g;
    row.zplus_id = k.z;
    row.v_id = k.v;
    const int bi = base_index(k.T, k.g, k.z);
    if (base_status[bi] != "ok") {
      row.status = base_status[bi];
    } else {
      try {
        const LoopField xv =
            linearized_graph(chart, ledger, bases[bi], vs[k.v], opts);
        const double vl2 = norm(vs[k.v], NormKind::l2());
        row.c1_dist_l2 = norm(xv - yv[k.z][k.v], NormKind::l2());
        row.xnorm_ratio = norm(xv, NormKind::l2()) / vl2;
        row.ynorm_dev = norm(yv[k.z][k.v] - vs[k.v], NormKind::l2()) / vl2;
      } catch (const Error& e) {
        row.status = e.what();
      }
    }
    res.rows[i] = row;
  });

  std::vector<std::vector<std::pair<double, double>>> groups;
  for (int g = 0; g < n_gamma; ++g)
    for (int z = 0; z < static_cast<int>(zplus.size()); ++z)
      for (int v = 0; v < static_cast<int>(vs.size()); ++v) {
        std::vector<std::pair<double, double>> pts;
        for (const SweepRow& row : res.rows)
          if (row.gamma_id == g && row.zplus_id == z && row.v_id == v &&
              row.status == "ok" && row.c1_dist_l2 > 0)
            pts.emplace_back(row.T, std::log(row.c1_dist_l2));
        if (pts.size() >= 2) {
          std::vector<std::vector<std::pair<double, double>>> one{pts};
          res.group_rates.push_back(-pooled_log_slope(one));
        }
        groups.push_back(std::move(pts));
      }
  res.fitted_rate = -pooled_log_slope(groups);
  for (const SweepRow& row : res.rows)
    if (row.status != "ok") res.all_rows_ok = false;
  return res;
}

RoundtripReport roundtrip_audit(const Chart& chart, const ConstantsLedger& ledger,
                                const std::vector<SpherePoint>& sphere,
                                const SweepSpec& spec,
                                const ContractionOptions& opts,
                                const FlowOptions& flow, int jobs) {
  RoundtripReport rep;
  const int n_gamma = std::min<int>(spec.gamma_count, sphere.size());
  const std::vector<LoopField> zplus =
      sample_zplus(chart, ledger, spec.zplus_count, spec.zplus_radius_fraction,
                   spec.seed);
  struct Key {
    double T;
    int g, z;
  };
  std::vector<Key> keys;
  for (double T : spec.T_list)
    for (int g = 0; g < n_gamma; ++g)
      for (int z = 0; z < static_cast<int>(zplus.size()); ++z)
        keys.push_back({T, g, z});
  rep.rows.resize(keys.size());

  parallel_rows(static_cast<int>(keys.size()), jobs, [&](int i) {
    const Key& k = keys[i];
    RoundtripRow row;
    row.T = k.T;
    row.gamma_id = k.g;
    row.zplus_id = k.z;
    try {
      GraphPoint gp =
          solve_mixed(chart, ledger, k.T, sphere[k.g].gamma, zplus[k.z], opts);
      const NormKind w12 = NormKind::w12();
      Trajectory fwd =
          evolve(chart.dec, chart.model, chart.x, gp.value, k.T, flow);
      if (fwd.meta.left_chart) row.status = "left_chart";
      const LoopField end = fwd.states.back();
      row.fiber_residual = norm(
          project(chart.dec, end, Part::Minus) -
              project(chart.dec, sphere[k.g].gamma, Part::Minus),
          w12);
      row.endpoint_distance = norm(end - sphere[k.g].gamma, w12);
      row.within_r = row.endpoint_distance <= ledger.r;

      OracleOptions oopts;
      Trajectory ofwd = evolve_oracle(chart.model, chart.x, gp.value, k.T, oopts);
      const LoopField oend = ofwd.states.back();
      row.oracle_fiber_residual = norm(
          project(chart.dec, oend, Part::Minus) -
              project(chart.dec, sphere[k.g].gamma, Part::Minus),
          w12);
      row.oracle_disagreement =
          std::abs(row.oracle_fiber_residual - row.fiber_residual);
    } catch (const Error& e) {
      row.status = e.what();
    }
    rep.rows[i] = row;
  });

  for (const RoundtripRow& row : rep.rows) {
    if (row.status != "ok") {
      rep.all_rows_ok = false;
      continue;
    }
    rep.max_fiber_residual = std::max(rep.max_fiber_residual, row.fiber_residual);
    rep.max_oracle_disagreement =
        std::max(rep.max_oracle_disagreement, row.oracle_disagreement);
    if (!row.within_r) rep.all_within_r = false;
  }
  return rep;
}

LipschitzReport lipschitz_in_T_audit(const Chart& chart,
                                     const ConstantsLedger& ledger,
                                     const std::vector<SpherePoint>& sphere,
                                     double T_base,
                                     const std::vector<double>& taus,
                                     const SweepSpec& spec,
                                     const ContractionOptions& opts) {
  LipschitzReport rep;
  const int n_gamma = std::min<int>(spec.gamma_count, sphere.size());
  const std::vector<LoopField> zplus =
      sample_zplus(chart, ledger, spec.zplus_count, spec.zplus_radius_fraction,
                   spec.seed);
  for (int g = 0; g < n_gamma; ++g) {
    for (int z = 0; z < static_cast<int>(zplus.size()); ++z) {
      GraphPoint base =
          solve_mixed(chart, ledger, T_base, sphere[g].gamma, zplus[z], opts);
      std::vector<double> quotients;
      for (double tau : taus) {
        GraphPoint shifted = solve_mixed(chart, ledger, T_base + tau,
                                         sphere[g].gamma, zplus[z], opts);
        LipschitzRow row;
        row.T = T_base;
        row.tau = tau;
        row.gamma_id = g;
        row.zplus_id = z;
        row.quotient =
            norm(shifted.value - base.value, NormKind::w12()) / tau;
        quotients.push_back(row.quotient);
        rep.max_quotient = std::max(rep.max_quotient, row.quotient);
        rep.rows.push_back(row);
      }
      // Successive differences of the quotients should shrink as tau halves.
      for (std::size_t i = 2; i < quotients.size(); ++i) {
        const double d1 = std::abs(quotients[i - 1] - quotients[i - 2]);
        const double d2 = std::abs(quotients[i] - quotients[i - 1]);
        if (d2 > std::max(1.05 * d1, 1e-7)) rep.quotients_stabilize = false;
      }
    }
  }
  return rep;
}

}  // namespace loopflow
