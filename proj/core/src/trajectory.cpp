#include "loopflow/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace loopflow {

std::vector<double> make_time_grid(const TimeGridSpec& spec, double T) {
  if (!(T > 0.0)) throw GridError("time grid needs T > 0");
  if (!(spec.dt > 0.0)) throw GridError("time grid needs dt > 0");
  std::vector<double> g;
  g.push_back(0.0);
  if (spec.kind == TimeGridSpec::Kind::Graded) {
    if (!(spec.floor > 0.0) || !(spec.ratio > 1.0))
      throw GridError("graded grid needs floor > 0 and ratio > 1");
    double h = spec.floor;
    while (g.back() + h < T && h < spec.dt) {
      g.push_back(g.back() + h);
      h *= spec.ratio;
    }
  }
  // Uniform continuation with a step at most dt that lands exactly on T.
  const double rem = T - g.back();
  if (rem > 1e-15 * std::max(1.0, T)) {
    const int steps = std::max(1, static_cast<int>(std::ceil(rem / spec.dt - 1e-12)));
    const double h = rem / steps;
    for (int i = 1; i < steps; ++i) g.push_back(g.back() + h);
  }
  g.push_back(T);
  return g;
}

std::vector<double> make_time_grid_with_tail(const TimeGridSpec& spec, double T,
                                             double tail_start,
                                             double tail_ratio,
                                             double max_step) {
  if (T <= tail_start) return make_time_grid(spec, T);
  std::vector<double> g = make_time_grid(spec, tail_start);
  double h = spec.dt;
  while (g.back() < T) {
    h = std::min(h * tail_ratio, max_step);
    g.push_back(std::min(g.back() + h, T));
  }
  if (T - g[g.size() - 2] < 0.25 * h && g.size() > 2) {
    // avoid a sliver final step
    g.erase(g.end() - 2);
  }
  g.back() = T;
  return g;
}

int Trajectory::node_index(double s) const {
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[i] - s) <= 1e-12 * std::max(1.0, std::abs(s))) return static_cast<int>(i);
  throw GridError("time " + std::to_string(s) + " is not a trajectory node");
}

double traj_norm(const Trajectory& traj, const NormKind& weight) {
  if (weight.tag != NormKind::Tag::ExpT)
    throw GridError("traj_norm needs an ExpT weight");
  if (weight.time_grid.size() != traj.grid.size())
    throw GridError("trajectory grid and weight grid differ in size");
  for (std::size_t i = 0; i < traj.grid.size(); ++i)
    if (std::abs(weight.time_grid[i] - traj.grid[i]) > 1e-12)
      throw GridError("trajectory grid and weight grid differ");
  double best = 0.0;
  const NormKind w12 = NormKind::w12();
  for (std::size_t i = 0; i < traj.grid.size(); ++i) {
    const double v =
        std::exp(traj.grid[i] * weight.weight_exponent) * norm(traj.states[i], w12);
    best = std::max(best, v);
  }
  return best;
}

}  // namespace loopflow
