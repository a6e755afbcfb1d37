#pragma once

#include <string>
#include <vector>

#include "loopflow/loopfield.hpp"

namespace loopflow {

struct TimeGridSpec {
  enum class Kind { Uniform, Graded };

  Kind kind = Kind::Graded;
  double dt = 0.01;      // target uniform spacing
  double ratio = 1.2;    // geometric growth of the graded prefix
  double floor = 1e-6;   // first positive node of the graded prefix

  static TimeGridSpec uniform(double dt) {
    return {Kind::Uniform, dt, 1.0, 0.0};
  }
  static TimeGridSpec graded(double dt, double ratio = 1.2,
                             double floor = 1e-6) {
    return {Kind::Graded, dt, ratio, floor};
  }
};

// Nodes 0 = s_0 < ... < s_M = T. Graded grids cluster geometrically toward
// s = 0 (resolves the s^{-3/4} kernel of the smoothing estimate) and continue
// uniformly once the step reaches dt.
std::vector<double> make_time_grid(const TimeGridSpec& spec, double T);

// Appends a geometrically stretched tail: after tail_start the step grows by
// tail_ratio per node, capped at max_step. Used for long truncation horizons.
std::vector<double> make_time_grid_with_tail(const TimeGridSpec& spec, double T,
                                             double tail_start,
                                             double tail_ratio,
                                             double max_step);

// A time-graded sequence of chart fields representing a (semi)flow line.
struct Trajectory {
  std::vector<double> grid;
  std::vector<LoopField> states;

  struct Meta {
    bool left_chart = false;  // trajectory exited the rho_0 ball; truncated
    double exit_time = 0.0;
    int rhs_evaluations = 0;
    int rejected_steps = 0;
    std::string method;
  } meta;

  int size() const { return static_cast<int>(grid.size()); }
  double end_time() const { return grid.empty() ? 0.0 : grid.back(); }
  const LoopField& back() const { return states.back(); }

  // Index of the node equal to s (within 1e-12), or throws GridError.
  int node_index(double s) const;
};

// max over grid nodes of e^{s * weight} ||state(s)||_{W^{1,2}}; the weight
// grid must equal the trajectory grid.
double traj_norm(const Trajectory& traj, const NormKind& weight);

}  // namespace loopflow
