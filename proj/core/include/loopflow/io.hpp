#pragma once

#include <string>
#include <vector>

#include "loopflow/config.hpp"
#include "loopflow/semigroup.hpp"

namespace loopflow::io {

// Fixed "%.17g" formatting: reproducible, '.' decimal separator.
std::string format_double(double v);

void ensure_dir(const std::string& path);
void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

std::string csv_line(const std::vector<std::string>& cells);

std::string spectrum_json(const Session& ses);
std::string ledger_json(const Session& ses);
std::string sphere_json(const Session& ses);

std::string graph_point_json(const Session& ses, const GraphPoint& gp,
                             int gamma_id);
std::string trajectory_csv(const Trajectory& traj);
std::string trajectory_summary_json(const Session& ses, const Trajectory& traj,
                                    double representation_residual,
                                    const std::vector<double>& actions);

std::string sweep_csv(const SweepResult& res);
std::string sweep_summary_json(const Session& ses, const SweepResult& res,
                               const std::string& kind);
std::string decay_file(const SweepResult& res);

std::string roundtrip_csv(const RoundtripReport& rep);
std::string roundtrip_json(const Session& ses, const RoundtripReport& rep);

std::string smoothing_csv(const SmoothingReport& rep);
std::string smoothing_json(const Session& ses, const SmoothingReport& rep);

std::string lipschitz_csv(const LipschitzReport& rep);
std::string lipschitz_json(const Session& ses, const LipschitzReport& rep);

}  // namespace loopflow::io
